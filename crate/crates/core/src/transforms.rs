//! Recursive inverse transforms as exact piecewise-constant maps on `[0, c)`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_traits::Zero;

use crate::classw::{NodeId, RootedPlaneTree};
use crate::error::{Error, Result};
use crate::measures::{check_interlaced, DistFn, KDist, Measure};
use crate::poset::Poset;
use crate::rational::{self, Rational};

/// Half-open interval `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Interval {
        Interval { lo, hi }
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn contains(&self, w: &Rational) -> bool {
        &self.lo <= w && w < &self.hi
    }

    pub fn shift(&self, d: &Rational) -> Interval {
        Interval::new(&self.lo + d, &self.hi + d)
    }
}

/// Sorts, drops empty intervals and merges touching ones.
pub fn normalize_union(mut v: Vec<Interval>) -> Vec<Interval> {
    v.retain(|i| !i.is_empty());
    v.sort();
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for i in v {
        match out.last_mut() {
            Some(last) if last.hi >= i.lo => {
                if i.hi > last.hi {
                    last.hi = i.hi;
                }
            }
            _ => out.push(i),
        }
    }
    out
}

pub fn union_len(v: &[Interval]) -> Rational {
    v.iter().map(Interval::len).sum()
}

/// Piecewise-constant map from `[lo, hi)` to element indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StepMap {
    pieces: Vec<(Interval, usize)>,
}

impl StepMap {
    /// Canonicalizes `pieces`; they must tile a single interval once sorted.
    pub fn new(mut pieces: Vec<(Interval, usize)>) -> Result<StepMap> {
        pieces.retain(|(i, _)| !i.is_empty());
        pieces.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
        for w in pieces.windows(2) {
            if w[0].0.hi != w[1].0.lo {
                return Err(Error::DomainMismatch);
            }
        }
        Ok(StepMap {
            pieces: merge_equal(pieces),
        })
    }

    pub fn constant(domain: Interval, x: usize) -> StepMap {
        StepMap {
            pieces: if domain.is_empty() {
                Vec::new()
            } else {
                vec![(domain, x)]
            },
        }
    }

    pub fn pieces(&self) -> &[(Interval, usize)] {
        &self.pieces
    }

    pub fn domain(&self) -> Interval {
        match (self.pieces.first(), self.pieces.last()) {
            (Some(a), Some(b)) => Interval::new(a.0.lo.clone(), b.0.hi.clone()),
            _ => Interval::new(rational::zero(), rational::zero()),
        }
    }

    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.pieces.iter().map(|(i, _)| i.lo.clone()).collect();
        if let Some((i, _)) = self.pieces.last() {
            v.push(i.hi.clone());
        }
        v
    }

    pub fn to_doc(&self, s: &Poset) -> Vec<[String; 3]> {
        self.pieces
            .iter()
            .map(|(i, x)| {
                [
                    rational::format(&i.lo),
                    rational::format(&i.hi),
                    s.label(*x).to_string(),
                ]
            })
            .collect()
    }

    pub fn from_doc(s: &Poset, doc: &[[String; 3]]) -> Result<StepMap> {
        let pieces = doc
            .iter()
            .map(|[lo, hi, l]| {
                let i = Interval::new(rational::parse(lo)?, rational::parse(hi)?);
                if i.lo > i.hi {
                    return Err(Error::Parse(format!("reversed interval [{lo},{hi})")));
                }
                Ok((i, s.index_of(l)?))
            })
            .collect::<Result<Vec<_>>>()?;
        StepMap::new(pieces)
    }
}

fn merge_equal(pieces: Vec<(Interval, usize)>) -> Vec<(Interval, usize)> {
    let mut out: Vec<(Interval, usize)> = Vec::with_capacity(pieces.len());
    for (i, x) in pieces {
        match out.last_mut() {
            Some((last, y)) if *y == x && last.hi == i.lo => last.hi = i.hi,
            _ => out.push((i, x)),
        }
    }
    out
}

/// Value at `ω`; breakpoints belong to the piece on their right.
pub fn eval(x: &StepMap, w: &Rational) -> Result<usize> {
    let idx = x.pieces.partition_point(|(i, _)| &i.hi <= w);
    match x.pieces.get(idx) {
        Some((i, v)) if i.contains(w) => Ok(*v),
        _ => Err(Error::OutOfDomain(rational::format(w))),
    }
}

/// Lebesgue pushforward onto an `n`-element set.
pub fn pushforward(x: &StepMap, n: usize) -> Measure {
    let mut m = Measure::zero(n);
    for (i, v) in &x.pieces {
        m.add_mass(*v, &i.len());
    }
    m
}

pub fn preimage(x: &StepMap, v: usize) -> Vec<Interval> {
    normalize_union(
        x.pieces
            .iter()
            .filter(|(_, y)| *y == v)
            .map(|(i, _)| i.clone())
            .collect(),
    )
}

/// Both maps on the common refinement of their breakpoints, as
/// `(piece, a-value, b-value)`. Requires equal domains.
pub fn common_refinement(a: &StepMap, b: &StepMap) -> Result<Vec<(Interval, usize, usize)>> {
    if a.domain() != b.domain() {
        return Err(Error::DomainMismatch);
    }
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut lo = a.domain().lo;
    while i < a.pieces.len() && j < b.pieces.len() {
        let (pa, va) = &a.pieces[i];
        let (pb, vb) = &b.pieces[j];
        let hi = rational::min(&pa.hi, &pb.hi);
        out.push((Interval::new(lo.clone(), hi.clone()), *va, *vb));
        if pa.hi == hi {
            i += 1;
        }
        if pb.hi == hi {
            j += 1;
        }
        lo = hi;
    }
    Ok(out)
}

type MemoKey = (KDist, DistFn, NodeId);

type Pieces = Arc<Vec<(Interval, usize)>>;

/// Shared memo table for child transforms. Safe for concurrent use; equal
/// keys always produce equal values, so racing inserts are harmless.
#[derive(Default)]
pub struct TransformCache {
    table: RwLock<HashMap<MemoKey, Pieces>>,
}

impl TransformCache {
    pub fn new() -> TransformCache {
        TransformCache::default()
    }

    pub fn len(&self) -> usize {
        self.table.read().map(|t| t.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `X_{μ,F}^(κ)` on `[0, μ(κ))`.
pub fn build_inverse_transform(
    mu: &KDist,
    f: &DistFn,
    rpt: &RootedPlaneTree,
    k: NodeId,
) -> Result<StepMap> {
    build_inverse_transform_cached(mu, f, rpt, k, None)
}

pub fn build_inverse_transform_cached(
    mu: &KDist,
    f: &DistFn,
    rpt: &RootedPlaneTree,
    k: NodeId,
    cache: Option<&TransformCache>,
) -> Result<StepMap> {
    check_interlaced(mu, f, rpt)?;
    let pieces = transform_pieces(mu, f, rpt, k, cache);
    StepMap::new((*pieces).clone())
}

fn transform_pieces(
    mu: &KDist,
    f: &DistFn,
    rpt: &RootedPlaneTree,
    k: NodeId,
    cache: Option<&TransformCache>,
) -> Arc<Vec<(Interval, usize)>> {
    let key = cache.map(|_| (mu.clone(), f.clone(), k));
    if let (Some(c), Some(key)) = (cache, key.as_ref()) {
        if let Some(hit) = c.table.read().ok().and_then(|t| t.get(key).cloned()) {
            return hit;
        }
    }
    let node = rpt.node(k);
    let mut pieces = Vec::new();
    for &sigma in &node.children {
        let shift = mu.floor(sigma);
        for (i, x) in transform_pieces(mu, f, rpt, sigma, cache).iter() {
            pieces.push((i.shift(shift), *x));
        }
    }
    let mut cur = mu.minus(k).clone();
    for &x in node.path.iter().rev() {
        let hi = f.f(x);
        if hi > &cur {
            pieces.push((Interval::new(cur.clone(), hi.clone()), x));
            cur = hi.clone();
        }
    }
    let top = match node.parent {
        Some(p) => rpt.node(p).tail(),
        None => rpt.tau(),
    };
    if mu.mu(k) > &cur {
        pieces.push((Interval::new(cur, mu.mu(k).clone()), top));
    }
    let pieces = Arc::new(merge_equal(pieces));
    if let (Some(c), Some(key)) = (cache, key) {
        if let Ok(mut t) = c.table.write() {
            t.insert(key, pieces.clone());
        }
    }
    pieces
}

/// `I^(κ) = [μ(κ−), F(u_*)) ∪ ⋃_i (μ⌊σ_i⌋ + [F(u_1^(σ_i)), μ(σ_i)))`:
/// where the `κ`-level transform takes the value `u_*^(κ)`.
pub fn level_set_tail(
    mu: &KDist,
    f: &DistFn,
    rpt: &RootedPlaneTree,
    k: NodeId,
) -> Vec<Interval> {
    let node = rpt.node(k);
    let mut v = vec![Interval::new(mu.minus(k).clone(), f.f(node.tail()).clone())];
    for &sigma in &node.children {
        let head = rpt.node(sigma).head();
        v.push(Interval::new(f.f(head).clone(), mu.mu(sigma).clone()).shift(mu.floor(sigma)));
    }
    normalize_union(v)
}

/// Lebesgue measure of the preimage of a set of values.
pub fn preimage_len(x: &StepMap, pred: impl Fn(usize) -> bool) -> Rational {
    x.pieces
        .iter()
        .filter(|(_, v)| pred(*v))
        .map(|(i, _)| i.len())
        .fold(Rational::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classw::build_rpt;
    use crate::measures::{dist_fn, mu_a};
    use crate::rational::{int, ratio};

    fn iv(a: Rational, b: Rational) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn chain_inverse_cdf() {
        let s = Poset::from_labels(&["x", "y"], &[("x", "y")]).unwrap();
        let rpt = build_rpt(&s, 1).unwrap();
        let p = Measure::new(vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let f = dist_fn(&p, &rpt).unwrap();
        let mu = KDist::new(&rpt, vec![int(1)]).unwrap();
        let x = build_inverse_transform(&mu, &f, &rpt, 0).unwrap();
        assert_eq!(
            x.pieces(),
            &[(iv(int(0), ratio(1, 2)), 0), (iv(ratio(1, 2), int(1)), 1)]
        );
        assert_eq!(eval(&x, &int(0)).unwrap(), 0);
        assert_eq!(eval(&x, &ratio(1, 2)).unwrap(), 1);
        assert!(eval(&x, &int(1)).is_err());
        assert_eq!(pushforward(&x, 2), p);
    }

    #[test]
    fn point_mass_at_root() {
        let s = Poset::from_labels(&["x", "y"], &[("x", "y")]).unwrap();
        let rpt = build_rpt(&s, 1).unwrap();
        let f = dist_fn(&Measure::point(2, 1), &rpt).unwrap();
        let mu = KDist::new(&rpt, vec![int(1)]).unwrap();
        let x = build_inverse_transform(&mu, &f, &rpt, 0).unwrap();
        assert_eq!(x, StepMap::constant(iv(int(0), int(1)), 1));
    }

    #[test]
    fn four_legged_map() {
        // Legs y0 (root), y1, y2, y*; P = (1/3)(δ_y0 + δ_y1 + δ_z).
        let labels = ["z", "y0", "y1", "y2", "y*"];
        let s = Poset::from_labels(
            &labels,
            &[("y0", "z"), ("y1", "z"), ("y2", "z"), ("y*", "z")],
        )
        .unwrap();
        let rpt = build_rpt(&s, 1).unwrap();
        let p = Measure::from_labels(
            &s,
            &[("y0", ratio(1, 3)), ("y1", ratio(1, 3)), ("z", ratio(1, 3))],
        )
        .unwrap();
        let f = dist_fn(&p, &rpt).unwrap();
        let mu = mu_a(&f, &rpt).unwrap();
        let x = build_inverse_transform(&mu, &f, &rpt, 0).unwrap();
        assert_eq!(
            x.pieces(),
            &[
                (iv(int(0), ratio(1, 3)), 2),
                (iv(ratio(1, 3), ratio(2, 3)), 0),
                (iv(ratio(2, 3), int(1)), 1),
            ]
        );
        assert_eq!(eval(&x, &ratio(1, 3)).unwrap(), 0);
        assert_eq!(pushforward(&x, 5), p);
        let tail = level_set_tail(&mu, &f, &rpt, 0);
        assert_eq!(tail, preimage(&x, 0));
    }

    #[test]
    fn empty_level_set() {
        let s = Poset::from_labels(&["x", "y"], &[("x", "y")]).unwrap();
        let rpt = build_rpt(&s, 1).unwrap();
        let f = dist_fn(&Measure::point(2, 1), &rpt).unwrap();
        let mu = KDist::new(&rpt, vec![int(1)]).unwrap();
        assert!(level_set_tail(&mu, &f, &rpt, 0).is_empty());
    }

    #[test]
    fn cache_agrees() {
        let s = Poset::from_labels(
            &["z", "a", "b", "c"],
            &[("a", "z"), ("b", "z"), ("c", "z")],
        )
        .unwrap();
        let rpt = build_rpt(&s, 1).unwrap();
        let p = Measure::new(vec![ratio(1, 4), ratio(1, 4), ratio(1, 4), ratio(1, 4)]).unwrap();
        let f = dist_fn(&p, &rpt).unwrap();
        let mu = mu_a(&f, &rpt).unwrap();
        let cache = TransformCache::new();
        let a = build_inverse_transform_cached(&mu, &f, &rpt, 0, Some(&cache)).unwrap();
        let b = build_inverse_transform_cached(&mu, &f, &rpt, 0, Some(&cache)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, build_inverse_transform(&mu, &f, &rpt, 0).unwrap());
        assert!(!cache.is_empty());
    }

    #[test]
    fn union_normalization() {
        let u = normalize_union(vec![
            iv(ratio(1, 2), int(1)),
            iv(int(0), ratio(1, 4)),
            iv(ratio(1, 4), ratio(1, 3)),
            iv(int(2), int(2)),
        ]);
        assert_eq!(u, vec![iv(int(0), ratio(1, 3)), iv(ratio(1, 2), int(1))]);
        assert_eq!(union_len(&u), ratio(5, 6));
    }

    #[test]
    fn step_map_doc_round_trip() {
        let s = Poset::from_labels(&["x", "y"], &[("x", "y")]).unwrap();
        let m = StepMap::new(vec![(iv(int(0), ratio(1, 3)), 0), (iv(ratio(1, 3), int(1)), 1)]).unwrap();
        let doc = m.to_doc(&s);
        assert_eq!(doc[0], ["0".to_string(), "1/3".into(), "x".into()]);
        assert_eq!(StepMap::from_doc(&s, &doc).unwrap(), m);
        assert!(StepMap::new(vec![(iv(int(0), ratio(1, 3)), 0), (iv(ratio(1, 2), int(1)), 1)]).is_err());
    }
}
