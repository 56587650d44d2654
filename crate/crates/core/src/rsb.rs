//! Recursive synchronizing bijections as exact piecewise translations.

use num_traits::Zero;

use crate::classw::{NodeId, RootedPlaneTree};
use crate::error::{Error, Result};
use crate::measures::{check_interlaced, mutual_violation, DistFn, KDist};
use crate::rational::{self, Rational};
use crate::transforms::{level_set_tail, normalize_union, Interval, StepMap};

/// A bijection that translates each source interval by its offset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiecewiseTranslation {
    pieces: Vec<(Interval, Rational)>,
}

impl PiecewiseTranslation {
    /// Canonical form: sorted sources, empty pieces dropped, touching pieces
    /// with equal offsets merged. Fails if sources or images overlap.
    pub fn new(mut pieces: Vec<(Interval, Rational)>) -> Result<PiecewiseTranslation> {
        pieces.retain(|(i, _)| !i.is_empty());
        pieces.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
        let mut out: Vec<(Interval, Rational)> = Vec::with_capacity(pieces.len());
        for (i, d) in pieces {
            match out.last_mut() {
                Some((last, _)) if last.hi > i.lo => {
                    return Err(Error::Internal("overlapping translation sources".into()));
                }
                Some((last, e)) if last.hi == i.lo && *e == d => last.hi = i.hi,
                _ => out.push((i, d)),
            }
        }
        let mut images: Vec<Interval> = out.iter().map(|(i, d)| i.shift(d)).collect();
        images.sort();
        if images.windows(2).any(|w| w[0].hi > w[1].lo) {
            return Err(Error::Internal("overlapping translation images".into()));
        }
        Ok(PiecewiseTranslation { pieces: out })
    }

    pub fn identity(domain: Interval) -> PiecewiseTranslation {
        PiecewiseTranslation {
            pieces: if domain.is_empty() {
                Vec::new()
            } else {
                vec![(domain, rational::zero())]
            },
        }
    }

    pub fn pieces(&self) -> &[(Interval, Rational)] {
        &self.pieces
    }

    pub fn domain(&self) -> Vec<Interval> {
        normalize_union(self.pieces.iter().map(|(i, _)| i.clone()).collect())
    }

    pub fn image(&self) -> Vec<Interval> {
        normalize_union(self.pieces.iter().map(|(i, d)| i.shift(d)).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.pieces.iter().all(|(_, d)| d.is_zero())
    }

    pub fn apply(&self, w: &Rational) -> Result<Rational> {
        let idx = self.pieces.partition_point(|(i, _)| &i.hi <= w);
        match self.pieces.get(idx) {
            Some((i, d)) if i.contains(w) => Ok(w + d),
            _ => Err(Error::OutOfDomain(rational::format(w))),
        }
    }

    /// Lebesgue measure of the preimage of `b`, which must lie in the image.
    pub fn preimage_len(&self, b: &Interval) -> Rational {
        self.pieces
            .iter()
            .map(|(i, d)| {
                let img = i.shift(d);
                let lo = rational::max(&img.lo, &b.lo);
                let hi = rational::min(&img.hi, &b.hi);
                if lo < hi {
                    hi - lo
                } else {
                    Rational::zero()
                }
            })
            .sum()
    }

    pub fn to_doc(&self) -> Vec<[String; 3]> {
        self.pieces
            .iter()
            .map(|(i, d)| {
                [
                    rational::format(&i.lo),
                    rational::format(&i.hi),
                    rational::format(d),
                ]
            })
            .collect()
    }

    pub fn from_doc(doc: &[[String; 3]]) -> Result<PiecewiseTranslation> {
        let pieces = doc
            .iter()
            .map(|[lo, hi, d]| {
                Ok((
                    Interval::new(rational::parse(lo)?, rational::parse(hi)?),
                    rational::parse(d)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseTranslation::new(pieces)
    }
}

/// `b ∘ a`. The image of `a` must equal the domain of `b`.
pub fn compose(a: &PiecewiseTranslation, b: &PiecewiseTranslation) -> Result<PiecewiseTranslation> {
    if a.image() != b.domain() {
        return Err(Error::DomainMismatch);
    }
    let mut out = Vec::new();
    for (src, d) in &a.pieces {
        let img = src.shift(d);
        let start = b.pieces.partition_point(|(i, _)| i.hi <= img.lo);
        for (bi, bd) in &b.pieces[start..] {
            if bi.lo >= img.hi {
                break;
            }
            let lo = rational::max(&bi.lo, &img.lo);
            let hi = rational::min(&bi.hi, &img.hi);
            if lo < hi {
                out.push((Interval::new(&lo - d, &hi - d), d + bd));
            }
        }
    }
    PiecewiseTranslation::new(out)
}

pub fn invert(a: &PiecewiseTranslation) -> PiecewiseTranslation {
    PiecewiseTranslation::new(a.pieces.iter().map(|(i, d)| (i.shift(d), -d)).collect())
        .expect("inverse of a bijection is a bijection")
}

/// `X ∘ Φ` as a step map on the domain of `Φ`.
pub fn compose_step(x: &StepMap, phi: &PiecewiseTranslation) -> Result<StepMap> {
    let mut out = Vec::new();
    for (src, d) in &phi.pieces {
        let img = src.shift(d);
        let start = x.pieces().partition_point(|(i, _)| i.hi <= img.lo);
        let mut covered = Rational::zero();
        for (xi, v) in &x.pieces()[start..] {
            if xi.lo >= img.hi {
                break;
            }
            let lo = rational::max(&xi.lo, &img.lo);
            let hi = rational::min(&xi.hi, &img.hi);
            if lo < hi {
                covered += &hi - &lo;
                out.push((Interval::new(&lo - d, &hi - d), *v));
            }
        }
        if covered != img.len() {
            return Err(Error::DomainMismatch);
        }
    }
    StepMap::new(out)
}

/// Order-preserving translation matching `from` onto `to` (equal lengths).
fn match_unions(from: &[Interval], to: &[Interval]) -> Result<Vec<(Interval, Rational)>> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut a = from.first().map(|x| x.lo.clone());
    let mut b = to.first().map(|x| x.lo.clone());
    while i < from.len() && j < to.len() {
        let (pa, pb) = (a.clone().unwrap(), b.clone().unwrap());
        let len = rational::min(&(&from[i].hi - &pa), &(&to[j].hi - &pb));
        out.push((Interval::new(pa.clone(), &pa + &len), &pb - &pa));
        let (na, nb) = (&pa + &len, &pb + &len);
        if na == from[i].hi {
            i += 1;
            a = from.get(i).map(|x| x.lo.clone());
        } else {
            a = Some(na);
        }
        if nb == to[j].hi {
            j += 1;
            b = to.get(j).map(|x| x.lo.clone());
        } else {
            b = Some(nb);
        }
    }
    if i != from.len() || j != to.len() {
        return Err(Error::Internal("matched unions have different lengths".into()));
    }
    Ok(out)
}

fn splice_child(
    out: &mut Vec<(Interval, Rational)>,
    child: &[(Interval, Rational)],
    from: &Rational,
    to: &Rational,
) {
    let delta = to - from;
    for (i, d) in child {
        out.push((i.shift(from), d + &delta));
    }
}

/// `Φ_{μ,ν}^(κ)` from `[0, min(μ,ν)(κ))` to itself.
pub fn build_rsb(
    mu: &KDist,
    nu: &KDist,
    rpt: &RootedPlaneTree,
    k: NodeId,
) -> Result<PiecewiseTranslation> {
    if let Some(bad) = mutual_violation(mu, nu) {
        return Err(Error::NotMutuallyInterlaced(rpt.node(bad).address.clone()));
    }
    PiecewiseTranslation::new(rsb_pieces(mu, nu, rpt, k)?)
}

fn rsb_pieces(
    mu: &KDist,
    nu: &KDist,
    rpt: &RootedPlaneTree,
    k: NodeId,
) -> Result<Vec<(Interval, Rational)>> {
    let node = rpt.node(k);
    let mut out = Vec::new();
    let max_minus = rational::max(mu.minus(k), nu.minus(k));
    let min_k = rational::min(mu.mu(k), nu.mu(k));
    let mut j = vec![Interval::new(mu.minus(k).clone(), max_minus.clone())];
    let mut j2 = vec![Interval::new(nu.minus(k).clone(), max_minus.clone())];
    for &sigma in &node.children {
        let child = rsb_pieces(mu, nu, rpt, sigma)?;
        splice_child(&mut out, &child, mu.floor(sigma), nu.floor(sigma));
        let m = rational::min(mu.mu(sigma), nu.mu(sigma));
        j.push(Interval::new(m.clone(), mu.mu(sigma).clone()).shift(mu.floor(sigma)));
        j2.push(Interval::new(m, nu.mu(sigma).clone()).shift(nu.floor(sigma)));
    }
    out.push((Interval::new(max_minus, min_k), rational::zero()));
    out.extend(match_unions(&normalize_union(j), &normalize_union(j2))?);
    Ok(out)
}

/// `Φ_{μ,ν,γ}^(κ)` from `[0, F_γ(u_1^(κ)))` to itself.
pub fn build_rsb_for_f(
    mu: &KDist,
    nu: &KDist,
    f: &DistFn,
    rpt: &RootedPlaneTree,
    k: NodeId,
) -> Result<PiecewiseTranslation> {
    check_interlaced(mu, f, rpt)?;
    check_interlaced(nu, f, rpt)?;
    PiecewiseTranslation::new(rsb_f_pieces(mu, nu, f, rpt, k)?)
}

fn rsb_f_pieces(
    mu: &KDist,
    nu: &KDist,
    f: &DistFn,
    rpt: &RootedPlaneTree,
    k: NodeId,
) -> Result<Vec<(Interval, Rational)>> {
    let node = rpt.node(k);
    let mut out = Vec::new();
    for &sigma in &node.children {
        let child = rsb_f_pieces(mu, nu, f, rpt, sigma)?;
        splice_child(&mut out, &child, mu.floor(sigma), nu.floor(sigma));
    }
    out.push((
        Interval::new(f.f(node.tail()).clone(), f.f(node.head()).clone()),
        rational::zero(),
    ));
    let from = level_set_tail(mu, f, rpt, k);
    let to = level_set_tail(nu, f, rpt, k);
    out.extend(match_unions(&from, &to)?);
    Ok(out)
}

/// Restriction of `a` to the sources inside `[lo, hi)`.
pub fn restrict(a: &PiecewiseTranslation, window: &Interval) -> Result<PiecewiseTranslation> {
    let pieces = a
        .pieces
        .iter()
        .filter_map(|(i, d)| {
            let lo = rational::max(&i.lo, &window.lo);
            let hi = rational::min(&i.hi, &window.hi);
            (lo < hi).then(|| (Interval::new(lo, hi), d.clone()))
        })
        .collect();
    PiecewiseTranslation::new(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classw::build_rpt;
    use crate::poset::Poset;
    use crate::rational::{int, ratio};

    fn iv(a: Rational, b: Rational) -> Interval {
        Interval::new(a, b)
    }

    fn three_legs() -> (Poset, RootedPlaneTree) {
        let s = Poset::from_labels(&["z", "a", "b", "c"], &[("a", "z"), ("b", "z"), ("c", "z")])
            .unwrap();
        let rpt = build_rpt(&s, 1).unwrap();
        (s, rpt)
    }

    #[test]
    fn identity_when_equal() {
        let (_, rpt) = three_legs();
        let mu = KDist::new(&rpt, vec![int(1), ratio(1, 3), ratio(1, 4)]).unwrap();
        let phi = build_rsb(&mu, &mu, &rpt, 0).unwrap();
        assert!(phi.is_identity());
        assert_eq!(phi.domain(), vec![iv(int(0), int(1))]);
    }

    #[test]
    fn two_child_instance() {
        let (_, rpt) = three_legs();
        let mu = KDist::new(&rpt, vec![int(1), ratio(1, 3), ratio(1, 4)]).unwrap();
        let nu = KDist::new(&rpt, vec![int(1), ratio(1, 4), ratio(1, 3)]).unwrap();
        let phi = build_rsb(&mu, &nu, &rpt, 0).unwrap();
        // Children: [0,1/4) fixed; [1/3,7/12) -> [1/4,1/2). J = [1/4,1/3) ∪ [7/12,7/12),
        // J' = [1/2,7/12); identity on [7/12,1).
        assert_eq!(
            phi.pieces(),
            &[
                (iv(int(0), ratio(1, 4)), int(0)),
                (iv(ratio(1, 4), ratio(1, 3)), ratio(1, 4)),
                (iv(ratio(1, 3), ratio(7, 12)), ratio(-1, 12)),
                (iv(ratio(7, 12), int(1)), int(0)),
            ]
        );
        assert_eq!(invert(&phi), build_rsb(&nu, &mu, &rpt, 0).unwrap());
        let id = compose(&phi, &invert(&phi)).unwrap();
        assert!(id.is_identity());
        assert_eq!(phi.preimage_len(&iv(int(0), ratio(1, 2))), ratio(1, 2));
    }

    #[test]
    fn leaf_is_identity() {
        let (_, rpt) = three_legs();
        let mu = KDist::new(&rpt, vec![int(1), ratio(1, 3), ratio(1, 4)]).unwrap();
        let nu = KDist::new(&rpt, vec![int(1), ratio(1, 4), ratio(1, 3)]).unwrap();
        let k = rpt.node(0).children[0];
        let phi = build_rsb(&mu, &nu, &rpt, k).unwrap();
        assert_eq!(phi, PiecewiseTranslation::identity(iv(int(0), ratio(1, 4))));
    }

    #[test]
    fn rejects_non_interlaced_pairs() {
        let (_, rpt) = three_legs();
        let mu = KDist::new(&rpt, vec![int(1), int(1), int(0)]).unwrap();
        let nu = KDist::new(&rpt, vec![ratio(1, 2), int(0), int(0)]).unwrap();
        assert!(matches!(
            build_rsb(&mu, &nu, &rpt, 0),
            Err(Error::NotMutuallyInterlaced(_))
        ));
    }

    #[test]
    fn compose_with_identity_and_domain_mismatch() {
        let a = PiecewiseTranslation::new(vec![
            (iv(int(0), ratio(1, 2)), ratio(1, 2)),
            (iv(ratio(1, 2), int(1)), ratio(-1, 2)),
        ])
        .unwrap();
        let id = PiecewiseTranslation::identity(iv(int(0), int(1)));
        assert_eq!(compose(&id, &a).unwrap(), a);
        assert_eq!(compose(&a, &a).unwrap(), id);
        let short = PiecewiseTranslation::identity(iv(int(0), ratio(1, 2)));
        assert_eq!(compose(&a, &short).unwrap_err(), Error::DomainMismatch);
        assert_eq!(a.apply(&ratio(1, 4)).unwrap(), ratio(3, 4));
        assert!(PiecewiseTranslation::new(vec![
            (iv(int(0), ratio(1, 2)), int(0)),
            (iv(ratio(1, 2), int(1)), ratio(-1, 4)),
        ])
        .is_err());
    }

    #[test]
    fn step_composition() {
        let x = StepMap::new(vec![(iv(int(0), ratio(1, 2)), 0), (iv(ratio(1, 2), int(1)), 1)]).unwrap();
        let swap = PiecewiseTranslation::new(vec![
            (iv(int(0), ratio(1, 2)), ratio(1, 2)),
            (iv(ratio(1, 2), int(1)), ratio(-1, 2)),
        ])
        .unwrap();
        let y = compose_step(&x, &swap).unwrap();
        assert_eq!(
            y.pieces(),
            &[(iv(int(0), ratio(1, 2)), 1), (iv(ratio(1, 2), int(1)), 0)]
        );
    }

    #[test]
    fn doc_round_trip() {
        let a = PiecewiseTranslation::new(vec![
            (iv(int(0), ratio(1, 2)), ratio(1, 2)),
            (iv(ratio(1, 2), int(1)), ratio(-1, 2)),
        ])
        .unwrap();
        let doc = a.to_doc();
        assert_eq!(doc[1], ["1/2".to_string(), "1".into(), "-1/2".into()]);
        assert_eq!(PiecewiseTranslation::from_doc(&doc).unwrap(), a);
    }
}
