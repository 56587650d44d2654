//! Monotone realizations: one step map on `[0, 1)` per index, with the
//! prescribed marginals and pointwise ordered along `A`.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::classw::{classify, RootedPlaneTree, WClass, ROOT};
use crate::error::{Error, Result};
use crate::measures::{dist_fn, mu_a, mu_ab, DistFn, KDist};
use crate::poset::{Poset, DEFAULT_UPSET_CAP};
use crate::rational::{self, Rational};
use crate::rsb::{build_rsb, compose, compose_step, PiecewiseTranslation};
use crate::sync::{
    is_synchronizable, product_graph, tree_path, Direction, ProductGraph, ProductVertex,
    SpanningTree,
};
use crate::system::MonotoneSystem;
use crate::transforms::{
    build_inverse_transform_cached, common_refinement, pushforward, Interval, StepMap,
    TransformCache,
};

/// Which sufficient condition produced the realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `A` has a minimum and a maximum.
    Bounded,
    /// `A` has a minimum and the branching points of `S` are maximal.
    MinimumLower,
    /// `A` has a maximum and the branching points of `S` are minimal.
    MaximumUpper,
    /// `S` is an up-down poset.
    UpDown,
    /// `A` is synchronizable for minimal and for maximal elements.
    SyncBoth,
    /// `S` branches at maximal points; `A` synchronizable for minimal elements.
    SyncLower,
    /// `S` branches at minimal points; `A` synchronizable for maximal elements.
    SyncUpper,
}

impl Case {
    pub const ALL: [Case; 7] = [
        Case::Bounded,
        Case::MinimumLower,
        Case::MaximumUpper,
        Case::UpDown,
        Case::SyncBoth,
        Case::SyncLower,
        Case::SyncUpper,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub case: Case,
    pub maps: Vec<StepMap>,
}

/// Shared pieces for both constructions.
struct Setup {
    rpt: RootedPlaneTree,
    class: WClass,
    fs: Vec<DistFn>,
}

fn setup(sys: &MonotoneSystem) -> Result<Setup> {
    let c = classify(&sys.s);
    if !c.class.is_class_w() {
        return Err(match c.class {
            WClass::NotTree => Error::NotTree,
            _ => Error::NotClassW(
                c.bad_tail
                    .map(|t| sys.s.label(t).to_string())
                    .unwrap_or_default(),
            ),
        });
    }
    sys.check_monotone(DEFAULT_UPSET_CAP)?;
    let rpt = c.rpt.expect("class W posets carry a decomposition");
    let fs = sys
        .measures
        .iter()
        .map(|m| dist_fn(m, &rpt))
        .collect::<Result<Vec<_>>>()?;
    Ok(Setup {
        rpt,
        class: c.class,
        fs,
    })
}

fn transforms_for(
    st: &Setup,
    mu: &KDist,
    cache: &TransformCache,
) -> Result<Vec<StepMap>> {
    st.fs
        .iter()
        .map(|f| build_inverse_transform_cached(mu, f, &st.rpt, ROOT, Some(cache)))
        .collect()
}

/// Realization from a single interlaced distribution on `K`.
pub fn realize_bounded(sys: &MonotoneSystem) -> Result<Realization> {
    let st = setup(sys)?;
    let cache = TransformCache::new();
    let (lo, hi) = (sys.a.minimum(), sys.a.maximum());
    let (case, mu) = match (lo, hi) {
        (Some(l), Some(h)) => (Case::Bounded, mu_ab(&st.fs[l], &st.fs[h], &st.rpt)?),
        (Some(l), None) if st.class.in_w_lower() => (Case::MinimumLower, mu_a(&st.fs[l], &st.rpt)?),
        (None, Some(h)) if st.class.in_w_upper() => (Case::MaximumUpper, mu_a(&st.fs[h], &st.rpt)?),
        _ if st.class == WClass::UpDown => (Case::UpDown, KDist::new(&st.rpt, vec![Rational::one()])?),
        _ => return Err(Error::NoCaseApplies),
    };
    Ok(Realization {
        case,
        maps: transforms_for(&st, &mu, &cache)?,
    })
}

fn full() -> Interval {
    Interval::new(rational::zero(), rational::one())
}

/// Synchronized product-graph data for the two-sided construction.
pub struct ProductSync {
    pub t: SpanningTree,
    pub tstar: SpanningTree,
    pub graph: ProductGraph,
    pub base: ProductVertex,
    mus: HashMap<ProductVertex, KDist>,
    rpt: RootedPlaneTree,
}

impl ProductSync {
    pub fn mu(&self, v: ProductVertex) -> &KDist {
        &self.mus[&v]
    }

    pub fn rpt(&self) -> &RootedPlaneTree {
        &self.rpt
    }

    /// `Φ_Ξ` along an explicit vertex path.
    pub fn phi_along(&self, path: &[ProductVertex]) -> Result<PiecewiseTranslation> {
        let mut acc = PiecewiseTranslation::identity(full());
        for w in path.windows(2) {
            let step = build_rsb(self.mu(w[0]), self.mu(w[1]), &self.rpt, ROOT)?;
            acc = compose(&acc, &step)?;
        }
        Ok(acc)
    }

    /// `Φ_(α,β)` along the canonical shortest path from the base.
    pub fn phi(&self, v: ProductVertex) -> Result<PiecewiseTranslation> {
        let path = self
            .graph
            .min_path(self.base, v)
            .ok_or_else(|| Error::Internal("product vertex unreachable".into()))?;
        self.phi_along(&path)
    }
}

/// Builds `T`, `T*`, `T □ T*` and `μ_(α,β)` for every product vertex.
pub fn product_sync(sys: &MonotoneSystem, base: Option<ProductVertex>) -> Result<ProductSync> {
    let st = setup(sys)?;
    let lo = is_synchronizable(&sys.a, Direction::Minimal);
    let hi = is_synchronizable(&sys.a, Direction::Maximal);
    if !lo.synchronizable || !hi.synchronizable {
        return Err(Error::NotSynchronizable("minimal and maximal".into()));
    }
    let (t, tstar) = (lo.mst.unwrap(), hi.mst.unwrap());
    let graph = product_graph(&t, &tstar, &sys.a)?;
    let mut mus = HashMap::new();
    for &(x, y) in &graph.vertices {
        mus.insert((x, y), mu_ab(&st.fs[x], &st.fs[y], &st.rpt)?);
    }
    let base = base.unwrap_or(graph.vertices[0]);
    if !graph.contains(base) {
        return Err(Error::Internal("base is not a product vertex".into()));
    }
    Ok(ProductSync {
        t,
        tstar,
        graph,
        base,
        mus,
        rpt: st.rpt,
    })
}

fn first_minimal_below(a: &Poset, g: usize) -> usize {
    a.d_set(g).expect("element").iter().next().expect("nonempty")
}

fn first_maximal_above(a: &Poset, g: usize) -> usize {
    a.elements()
        .find(|&y| a.upper_covers(y).is_empty() && a.leq(g, y))
        .expect("some maximal element lies above")
}

/// Realization through recursive synchronizing bijections.
pub fn realize_sync(sys: &MonotoneSystem) -> Result<Realization> {
    realize_sync_with_base(sys, None)
}

/// As [`realize_sync`], fixing the base vertex of the two-sided construction.
pub fn realize_sync_with_base(
    sys: &MonotoneSystem,
    base: Option<ProductVertex>,
) -> Result<Realization> {
    let st = setup(sys)?;
    let cache = TransformCache::new();
    let lo = is_synchronizable(&sys.a, Direction::Minimal);
    let hi = is_synchronizable(&sys.a, Direction::Maximal);
    if lo.synchronizable && hi.synchronizable {
        let ps = product_sync(sys, base)?;
        let mut phis: HashMap<ProductVertex, PiecewiseTranslation> = HashMap::new();
        let mut maps = Vec::with_capacity(sys.a.len());
        for g in sys.a.elements() {
            let v = (first_minimal_below(&sys.a, g), first_maximal_above(&sys.a, g));
            if let Entry::Vacant(e) = phis.entry(v) {
                e.insert(ps.phi(v)?);
            }
            let x = build_inverse_transform_cached(ps.mu(v), &st.fs[g], &st.rpt, ROOT, Some(&cache))?;
            maps.push(compose_step(&x, &phis[&v])?);
        }
        return Ok(Realization {
            case: Case::SyncBoth,
            maps,
        });
    }
    let one_sided = |tree: &SpanningTree, pick: &dyn Fn(usize) -> usize, case| -> Result<Realization> {
        let mus: BTreeMap<usize, KDist> = tree
            .vertices
            .iter()
            .map(|&v| Ok((v, mu_a(&st.fs[v], &st.rpt)?)))
            .collect::<Result<_>>()?;
        let base = tree.vertices[0];
        let mut phis: HashMap<usize, PiecewiseTranslation> = HashMap::new();
        let mut maps = Vec::with_capacity(sys.a.len());
        for g in sys.a.elements() {
            let v = pick(g);
            if let Entry::Vacant(e) = phis.entry(v) {
                let path = tree_path(tree, base, v).ok_or(Error::DisconnectedGraph)?;
                let mut acc = PiecewiseTranslation::identity(full());
                for w in path.windows(2) {
                    acc = compose(&acc, &build_rsb(&mus[&w[0]], &mus[&w[1]], &st.rpt, ROOT)?)?;
                }
                e.insert(acc);
            }
            let x = build_inverse_transform_cached(&mus[&v], &st.fs[g], &st.rpt, ROOT, Some(&cache))?;
            maps.push(compose_step(&x, &phis[&v])?);
        }
        Ok(Realization { case, maps })
    };
    if st.class.in_w_lower() && lo.synchronizable {
        let t = lo.mst.as_ref().unwrap();
        return one_sided(t, &|g| first_minimal_below(&sys.a, g), Case::SyncLower);
    }
    if st.class.in_w_upper() && hi.synchronizable {
        let t = hi.mst.as_ref().unwrap();
        return one_sided(t, &|g| first_maximal_above(&sys.a, g), Case::SyncUpper);
    }
    Err(Error::NotSynchronizable(
        if st.class.in_w_lower() || st.class.in_w_upper() {
            "in the direction required by the target poset".into()
        } else {
            "minimal and maximal".into()
        },
    ))
}

/// Tries the single-distribution cases first, then the synchronized ones.
pub fn realize(sys: &MonotoneSystem) -> Result<Realization> {
    match realize_bounded(sys) {
        Err(Error::NoCaseApplies) => realize_sync(sys),
        r => r,
    }
}

/// The case [`realize`] would use for index poset `a` and target class
/// `class`, without building anything.
pub fn applicable_case(a: &Poset, class: WClass) -> Option<Case> {
    if !class.is_class_w() {
        return None;
    }
    match (a.minimum(), a.maximum()) {
        (Some(_), Some(_)) => return Some(Case::Bounded),
        (Some(_), None) if class.in_w_lower() => return Some(Case::MinimumLower),
        (None, Some(_)) if class.in_w_upper() => return Some(Case::MaximumUpper),
        _ if class == WClass::UpDown => return Some(Case::UpDown),
        _ => {}
    }
    let lo = is_synchronizable(a, Direction::Minimal).synchronizable;
    let hi = is_synchronizable(a, Direction::Maximal).synchronizable;
    if lo && hi {
        Some(Case::SyncBoth)
    } else if lo && class.in_w_lower() {
        Some(Case::SyncLower)
    } else if hi && class.in_w_upper() {
        Some(Case::SyncUpper)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub pass: bool,
    /// Index whose map has the wrong pushforward.
    pub marginal_violation: Option<usize>,
    /// `(α, β, ω)` with `α < β` and `X_α(ω) ≰ X_β(ω)`.
    pub monotone_violation: Option<(usize, usize, Rational)>,
}

impl VerifyReport {
    pub fn to_json(&self, sys: &MonotoneSystem) -> serde_json::Value {
        serde_json::json!({
            "pass": self.pass,
            "marginal_violation": self.marginal_violation.map(|g| sys.a.label(g)),
            "monotone_violation": self.monotone_violation.as_ref().map(|(a, b, w)| {
                serde_json::json!({
                    "lower": sys.a.label(*a),
                    "upper": sys.a.label(*b),
                    "omega": rational::format(w),
                })
            }),
        })
    }
}

/// Exact marginals and pointwise order on every common refinement.
pub fn verify_realization(sys: &MonotoneSystem, maps: &[StepMap]) -> VerifyReport {
    let fail = |m, o| VerifyReport {
        pass: false,
        marginal_violation: m,
        monotone_violation: o,
    };
    if maps.len() != sys.a.len() {
        return fail(Some(maps.len().min(sys.a.len().saturating_sub(1))), None);
    }
    for g in sys.a.elements() {
        if maps[g].domain() != full() || pushforward(&maps[g], sys.s.len()) != sys.measures[g] {
            return fail(Some(g), None);
        }
    }
    for (x, y) in sys.a.strict_pairs() {
        let cells = common_refinement(&maps[x], &maps[y]).expect("equal domains");
        if let Some((i, _, _)) = cells.iter().find(|(_, u, v)| !sys.s.leq(*u, *v)) {
            return fail(None, Some((x, y, i.lo.clone())));
        }
    }
    VerifyReport {
        pass: true,
        marginal_violation: None,
        monotone_violation: None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationDoc {
    pub case: Option<Case>,
    pub maps: BTreeMap<String, Vec<[String; 3]>>,
}

impl Realization {
    pub fn to_doc(&self, sys: &MonotoneSystem) -> RealizationDoc {
        RealizationDoc {
            case: Some(self.case),
            maps: sys
                .a
                .elements()
                .map(|g| (sys.a.label(g).to_string(), self.maps[g].to_doc(&sys.s)))
                .collect(),
        }
    }
}

/// Maps in index order from a realization document.
pub fn maps_from_doc(sys: &MonotoneSystem, doc: &RealizationDoc) -> Result<Vec<StepMap>> {
    sys.a
        .elements()
        .map(|g| {
            let pieces = doc
                .maps
                .get(sys.a.label(g))
                .ok_or_else(|| Error::Parse(format!("no map for `{}`", sys.a.label(g))))?;
            StepMap::from_doc(&sys.s, pieces)
        })
        .collect()
}
