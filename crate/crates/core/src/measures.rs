//! Measures on a poset, distribution functions along a rooted tree, and
//! distribution functions on the index tree `K`.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::classw::{NodeId, RootedPlaneTree, SectionKind};
use crate::error::{Error, Result};
use crate::poset::{Poset, Subset};
use crate::rational::{self, Rational};

/// A nonnegative measure indexed by element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Measure {
    mass: Vec<Rational>,
}

impl Measure {
    pub fn new(mass: Vec<Rational>) -> Result<Measure> {
        if let Some(i) = mass.iter().position(|m| m.is_negative()) {
            return Err(Error::NegativeMass(i.to_string()));
        }
        Ok(Measure { mass })
    }

    pub fn zero(n: usize) -> Measure {
        Measure {
            mass: vec![rational::zero(); n],
        }
    }

    /// Unit point mass at `x` on an `n`-element set.
    pub fn point(n: usize, x: usize) -> Measure {
        let mut m = Measure::zero(n);
        m.mass[x] = rational::one();
        m
    }

    /// Builds a measure from `(label, mass)` pairs; unnamed elements get zero.
    pub fn from_labels(s: &Poset, pairs: &[(&str, Rational)]) -> Result<Measure> {
        let mut m = Measure::zero(s.len());
        for (l, v) in pairs {
            let i = s.index_of(l)?;
            if v.is_negative() {
                return Err(Error::NegativeMass(l.to_string()));
            }
            m.mass[i] += v;
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self, x: usize) -> &Rational {
        &self.mass[x]
    }

    pub fn masses(&self) -> &[Rational] {
        &self.mass
    }

    pub fn add_mass(&mut self, x: usize, v: &Rational) {
        self.mass[x] += v;
    }

    pub fn total(&self) -> Rational {
        self.mass.iter().sum()
    }

    pub fn of(&self, set: &Subset) -> Rational {
        set.iter().map(|x| &self.mass[x]).sum()
    }

    pub fn is_probability(&self) -> bool {
        self.total() == rational::one()
    }

    pub fn support(&self) -> Subset {
        (0..self.mass.len())
            .filter(|&x| !self.mass[x].is_zero())
            .collect()
    }

    pub fn to_doc(&self, s: &Poset) -> MeasureDoc {
        MeasureDoc {
            poset: None,
            mass: s
                .elements()
                .filter(|&x| !self.mass[x].is_zero())
                .map(|x| (s.label(x).to_string(), rational::format(&self.mass[x])))
                .collect(),
        }
    }

    pub fn from_doc(s: &Poset, doc: &MeasureDoc) -> Result<Measure> {
        let mut m = Measure::zero(s.len());
        for (l, v) in &doc.mass {
            let i = s.index_of(l)?;
            let v = rational::parse(v)?;
            if v.is_negative() {
                return Err(Error::NegativeMass(l.clone()));
            }
            m.mass[i] = v;
        }
        Ok(m)
    }
}

/// `{"poset": ..., "mass": {"x": "1/3", ...}}`. Omitted elements carry no mass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poset: Option<crate::poset::PosetDoc>,
    pub mass: BTreeMap<String, String>,
}

/// `F(x) = P((←, x])` and `F(x−) = F(x) − P({x})` along `<=_τ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DistFn {
    f: Vec<Rational>,
    fminus: Vec<Rational>,
    tau: usize,
}

impl DistFn {
    pub fn f(&self, x: usize) -> &Rational {
        &self.f[x]
    }

    pub fn fminus(&self, x: usize) -> &Rational {
        &self.fminus[x]
    }

    pub fn values(&self) -> &[Rational] {
        &self.f
    }

    /// `c = F(τ)`.
    pub fn top(&self) -> &Rational {
        &self.f[self.tau]
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Recovers the measure, `P({x}) = F(x) − F(x−)`.
    pub fn measure(&self) -> Measure {
        Measure {
            mass: self
                .f
                .iter()
                .zip(&self.fminus)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

pub fn dist_fn(p: &Measure, rpt: &RootedPlaneTree) -> Result<DistFn> {
    let n = rpt.element_count();
    if p.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: p.len(),
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| std::cmp::Reverse(rpt.depth(x)));
    let mut f = p.mass.clone();
    for x in order {
        if let Some(up) = rpt.parent_element(x) {
            let v = f[x].clone();
            f[up] += v;
        }
    }
    let fminus = f.iter().zip(&p.mass).map(|(a, b)| a - b).collect();
    Ok(DistFn {
        f,
        fminus,
        tau: rpt.tau(),
    })
}

/// `F ⪯ G`: `F >= G` on down-set sections, `F <= G` on up-set sections.
pub fn df_leq(f: &DistFn, g: &DistFn, rpt: &RootedPlaneTree) -> Result<bool> {
    for x in 0..f.len() {
        let kind = rpt
            .closed_kind(x)
            .ok_or_else(|| Error::NotClassW(x.to_string()))?;
        let ok = match kind {
            SectionKind::DownSet => f.f[x] >= g.f[x],
            SectionKind::UpSet => f.f[x] <= g.f[x],
            SectionKind::Both => f.f[x] == g.f[x],
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `P ⪯ Q` by `P(U) <= Q(U)` over every up-set `U`. Falls back to the
/// max-flow coupling test when `S` is too large to enumerate.
pub fn stoch_leq(p: &Measure, q: &Measure, s: &Poset, cap: usize) -> Result<bool> {
    if p.total() != q.total() {
        return Err(Error::TotalMismatch(
            rational::format(&p.total()),
            rational::format(&q.total()),
        ));
    }
    match stoch_leq_by_up_sets(p, q, s, cap) {
        Err(Error::CapExceeded { .. }) => {
            Ok(crate::oracle::flow::strassen_pair(p, q, s)?.is_some())
        }
        r => r,
    }
}

pub fn stoch_leq_by_up_sets(p: &Measure, q: &Measure, s: &Poset, cap: usize) -> Result<bool> {
    if p.len() != s.len() || q.len() != s.len() {
        return Err(Error::SizeMismatch {
            expected: s.len(),
            got: p.len().min(q.len()),
        });
    }
    if p.total() != q.total() {
        return Err(Error::TotalMismatch(
            rational::format(&p.total()),
            rational::format(&q.total()),
        ));
    }
    Ok(s
        .enumerate_up_sets(cap)?
        .iter()
        .all(|u| p.of(u) <= q.of(u)))
}

/// A distribution function on `K`: `μ(κ) >= μ(κ−) = Σ_{σ ∈ C(κ)} μ(σ)`.
///
/// Also caches the prefix sums `μ⌊σ⌋` (mass of earlier siblings) for every
/// non-root node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KDist {
    mu: Vec<Rational>,
    minus: Vec<Rational>,
    floor: Vec<Rational>,
}

impl KDist {
    pub fn new(rpt: &RootedPlaneTree, mu: Vec<Rational>) -> Result<KDist> {
        if mu.len() != rpt.len() {
            return Err(Error::SizeMismatch {
                expected: rpt.len(),
                got: mu.len(),
            });
        }
        let mut minus = vec![rational::zero(); mu.len()];
        let mut floor = vec![rational::zero(); mu.len()];
        for (k, node) in rpt.nodes().iter().enumerate() {
            let mut acc = rational::zero();
            for &c in &node.children {
                floor[c] = acc.clone();
                acc += &mu[c];
            }
            if mu[k].is_negative() || mu[k] < acc {
                return Err(Error::NotKDist {
                    node: node.address.clone(),
                });
            }
            minus[k] = acc;
        }
        Ok(KDist { mu, minus, floor })
    }

    pub fn mu(&self, k: NodeId) -> &Rational {
        &self.mu[k]
    }

    /// `μ(κ−)`.
    pub fn minus(&self, k: NodeId) -> &Rational {
        &self.minus[k]
    }

    /// `μ⌊σ⌋`: total of the siblings before `σ`. Zero at the root.
    pub fn floor(&self, sigma: NodeId) -> &Rational {
        &self.floor[sigma]
    }

    /// `μ⌈σ⌉ = μ⌊σ⌋ + μ(σ)`.
    pub fn ceil(&self, sigma: NodeId) -> Rational {
        &self.floor[sigma] + &self.mu[sigma]
    }

    pub fn values(&self) -> &[Rational] {
        &self.mu
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn to_doc(&self, rpt: &RootedPlaneTree) -> BTreeMap<String, String> {
        rpt.nodes()
            .iter()
            .enumerate()
            .map(|(k, n)| (n.address.clone(), rational::format(&self.mu[k])))
            .collect()
    }
}

/// First node at which `μ(1) = F(τ)` and
/// `μ(κ−) <= F(u_*) <= F(u_1) <= μ(κ)` fails.
pub fn interlacing_violation(mu: &KDist, f: &DistFn, rpt: &RootedPlaneTree) -> Option<NodeId> {
    if mu.len() != rpt.len() || f.len() != rpt.element_count() {
        return Some(0);
    }
    if mu.mu(0) != f.top() {
        return Some(0);
    }
    rpt.nodes().iter().enumerate().find_map(|(k, node)| {
        let (fs, f1) = (f.f(node.tail()), f.f(node.head()));
        let ok = mu.minus(k) <= fs && fs <= f1 && f1 <= mu.mu(k);
        (!ok).then_some(k)
    })
}

pub fn interlaced(mu: &KDist, f: &DistFn, rpt: &RootedPlaneTree) -> bool {
    interlacing_violation(mu, f, rpt).is_none()
}

pub fn check_interlaced(mu: &KDist, f: &DistFn, rpt: &RootedPlaneTree) -> Result<()> {
    match interlacing_violation(mu, f, rpt) {
        None => Ok(()),
        Some(k) => Err(Error::NotInterlaced(rpt.node(k).address.clone())),
    }
}

/// `max(μ(κ−), ν(κ−)) <= min(μ(κ), ν(κ))` at every node.
pub fn mutually_interlaced(mu: &KDist, nu: &KDist) -> bool {
    mutual_violation(mu, nu).is_none()
}

pub fn mutual_violation(mu: &KDist, nu: &KDist) -> Option<NodeId> {
    if mu.len() != nu.len() {
        return Some(0);
    }
    (0..mu.len()).find(|&k| {
        rational::max(mu.minus(k), nu.minus(k)) > rational::min(mu.mu(k), nu.mu(k))
    })
}

/// `μ_(α,β)(κ) = max(F_α, F_β)(u_1^(κ))`.
pub fn mu_ab(fa: &DistFn, fb: &DistFn, rpt: &RootedPlaneTree) -> Result<KDist> {
    let mu = rpt
        .nodes()
        .iter()
        .map(|n| rational::max(fa.f(n.head()), fb.f(n.head())))
        .collect();
    KDist::new(rpt, mu)
}

/// `μ_α(κ) = F_α(u_1^(κ))`.
pub fn mu_a(fa: &DistFn, rpt: &RootedPlaneTree) -> Result<KDist> {
    let mu = rpt.nodes().iter().map(|n| fa.f(n.head()).clone()).collect();
    KDist::new(rpt, mu)
}

/// `F^(κ)` on `Ŝ^(κ)`: `F` on the subtree of `u_1^(κ)` and `μ(κ)` at the
/// parent tail. The root returns `F` on all of `S`.
pub fn extend_f(
    f: &DistFn,
    rpt: &RootedPlaneTree,
    k: NodeId,
    mu: &KDist,
) -> BTreeMap<usize, Rational> {
    let node = rpt.node(k);
    let Some(parent) = node.parent else {
        return (0..f.len()).map(|x| (x, f.f(x).clone())).collect();
    };
    let mut out: BTreeMap<usize, Rational> = rpt
        .closed_section(node.head())
        .iter()
        .map(|x| (x, f.f(x).clone()))
        .collect();
    out.insert(rpt.node(parent).tail(), mu.mu(k).clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classw::build_rpt;
    use crate::rational::{int, ratio};

    fn wstar_lower(n: usize) -> Poset {
        let mut labels = vec!["z".to_string(), "y0".to_string()];
        labels.extend((1..=n).map(|i| format!("y{i}")));
        labels.push("y*".into());
        let rel: Vec<(usize, usize)> = (1..labels.len()).map(|i| (i, 0)).collect();
        Poset::new(labels, &rel).unwrap()
    }

    #[test]
    fn point_mass_on_chain() {
        let s = Poset::from_labels(&["x", "y"], &[("x", "y")]).unwrap();
        let rpt = build_rpt(&s, 1).unwrap();
        let f = dist_fn(&Measure::point(2, 1), &rpt).unwrap();
        assert_eq!(f.f(1), &int(1));
        assert_eq!(f.f(0), &int(0));
        assert_eq!(f.fminus(1), &int(0));
    }

    #[test]
    fn distribution_of_p_a0() {
        // (1/3) δ_y0 + (2/3) δ_z on the four-legged poset rooted at y0.
        let s = wstar_lower(2);
        let rpt = build_rpt(&s, 1).unwrap();
        let p = Measure::from_labels(&s, &[("y0", ratio(1, 3)), ("z", ratio(2, 3))]).unwrap();
        let f = dist_fn(&p, &rpt).unwrap();
        assert_eq!(f.f(1), &int(1));
        assert_eq!(f.f(0), &ratio(2, 3));
        for x in [2, 3, 4] {
            assert_eq!(f.f(x), &int(0));
        }
        assert_eq!(f.measure(), p);
    }

    #[test]
    fn df_leq_basic() {
        let s = Poset::from_labels(&["x", "y"], &[("x", "y")]).unwrap();
        let rpt = build_rpt(&s, 1).unwrap();
        let top = dist_fn(&Measure::point(2, 1), &rpt).unwrap();
        let bot = dist_fn(&Measure::point(2, 0), &rpt).unwrap();
        assert!(df_leq(&top, &top, &rpt).unwrap());
        assert!(df_leq(&bot, &top, &rpt).unwrap());
        assert!(!df_leq(&top, &bot, &rpt).unwrap());
    }

    #[test]
    fn stoch_leq_point_masses() {
        let s = wstar_lower(1);
        for x in s.elements() {
            for y in s.elements() {
                let r = stoch_leq(&Measure::point(4, x), &Measure::point(4, y), &s, 20).unwrap();
                assert_eq!(r, s.leq(x, y));
            }
        }
        let half = Measure::new(vec![int(0), ratio(1, 2), int(0), int(0)]).unwrap();
        assert!(stoch_leq(&half, &Measure::point(4, 0), &s, 20).is_err());
    }

    #[test]
    fn kdist_prefix_sums() {
        let s = wstar_lower(2);
        let rpt = build_rpt(&s, 1).unwrap();
        let mu = KDist::new(&rpt, vec![int(1), ratio(1, 6), ratio(1, 3), ratio(1, 4)]).unwrap();
        let kids = &rpt.node(0).children;
        assert_eq!(mu.floor(kids[0]), &int(0));
        assert_eq!(mu.ceil(kids[2]), ratio(3, 4));
        assert_eq!(mu.minus(0), &ratio(3, 4));
        assert!(KDist::new(&rpt, vec![ratio(1, 2), int(1), int(0), int(0)]).is_err());
    }

    #[test]
    fn interlacing_predicates() {
        let s = Poset::from_labels(&["x", "y"], &[("x", "y")]).unwrap();
        let rpt = build_rpt(&s, 1).unwrap();
        let p = Measure::new(vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let f = dist_fn(&p, &rpt).unwrap();
        let one = KDist::new(&rpt, vec![int(1)]).unwrap();
        assert!(interlaced(&one, &f, &rpt));
        let zero = KDist::new(&rpt, vec![int(0)]).unwrap();
        assert!(!interlaced(&zero, &f, &rpt));
        assert!(mutually_interlaced(&one, &one));
    }

    #[test]
    fn mu_constructions() {
        let s = wstar_lower(2);
        let rpt = build_rpt(&s, 1).unwrap();
        let pa = Measure::from_labels(&s, &[("y0", ratio(1, 3)), ("y1", ratio(2, 3))]).unwrap();
        let pb = Measure::from_labels(&s, &[("y0", ratio(1, 3)), ("z", ratio(2, 3))]).unwrap();
        let fa = dist_fn(&pa, &rpt).unwrap();
        let fb = dist_fn(&pb, &rpt).unwrap();
        assert!(df_leq(&fa, &fb, &rpt).unwrap());
        assert_eq!(mu_ab(&fa, &fa, &rpt).unwrap(), mu_a(&fa, &rpt).unwrap());
        let mu = mu_ab(&fa, &fb, &rpt).unwrap();
        assert!(interlaced(&mu, &fa, &rpt));
        assert!(interlaced(&mu, &fb, &rpt));
        let ma = mu_a(&fa, &rpt).unwrap();
        assert!(interlaced(&ma, &fb, &rpt));
    }

    #[test]
    fn extension_at_root_and_leaf() {
        let s = wstar_lower(1);
        let rpt = build_rpt(&s, 1).unwrap();
        let p = Measure::from_labels(&s, &[("y1", ratio(1, 2)), ("z", ratio(1, 2))]).unwrap();
        let f = dist_fn(&p, &rpt).unwrap();
        let mu = mu_a(&f, &rpt).unwrap();
        let root = extend_f(&f, &rpt, 0, &mu);
        assert_eq!(root.len(), 4);
        let k = rpt.node(0).children[0];
        let ext = extend_f(&f, &rpt, k, &mu);
        assert_eq!(ext.len(), 2);
        assert_eq!(ext[&0], ratio(1, 2));
        assert_eq!(ext[&2], ratio(1, 2));
    }
}
