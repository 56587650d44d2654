//! Exact feasibility of `A w = b, w >= 0` for 0/1 columns given by monotone
//! maps, by a phase-one revised simplex over rationals with Bland's rule.
//!
//! Rows are indexed by `(γ, x)` pairs, `row = γ * |S| + x`; the column of a
//! map `m` has a one in row `(γ, m(γ))` for every `γ`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

pub enum LpOutcome {
    /// Basic feasible solution: `(column, weight)` with positive weights.
    Feasible(Vec<(usize, Rational)>),
    /// `y` with `yᵀA_j <= 0` for every column and `yᵀb > 0`.
    Infeasible(Vec<Rational>),
}

struct Columns<'a> {
    maps: &'a [Vec<usize>],
    width: usize,
}

impl Columns<'_> {
    fn rows(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.maps[j]
            .iter()
            .enumerate()
            .map(move |(g, &x)| g * self.width + x)
    }
}

/// Dual prices scaled to integers for fast pricing.
enum Prices {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

impl Prices {
    fn new(y: &[Rational]) -> Prices {
        let mut den = BigInt::one();
        for v in y {
            den = den.lcm(v.denom());
        }
        let scaled: Vec<BigInt> = y.iter().map(|v| v.numer() * (&den / v.denom())).collect();
        let small: Option<Vec<i128>> = scaled
            .iter()
            .map(|v| v.to_i64().map(i128::from))
            .collect();
        match small {
            Some(v) => Prices::Small(v),
            None => Prices::Big(scaled),
        }
    }

    /// Sign of `Σ_rows y`.
    fn positive(&self, rows: impl Iterator<Item = usize>) -> bool {
        match self {
            Prices::Small(v) => rows.map(|r| v[r]).sum::<i128>() > 0,
            Prices::Big(v) => rows.map(|r| &v[r]).sum::<BigInt>().is_positive(),
        }
    }
}

/// Phase-one simplex. `b` must be nonnegative.
pub fn solve(maps: &[Vec<usize>], width: usize, b: &[Rational]) -> LpOutcome {
    let r = b.len();
    let cols = Columns { maps, width };
    let n = maps.len();
    // Variables: 0..n are map weights, n..n+r are artificials.
    let mut basis: Vec<usize> = (n..n + r).collect();
    let mut inv: Vec<Vec<Rational>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    let mut xb: Vec<Rational> = b.to_vec();
    let mut is_basic = vec![false; n + r];
    for &v in &basis {
        is_basic[v] = true;
    }
    loop {
        // y = c_Bᵀ B⁻¹ with cost 1 on artificials.
        let mut y = vec![Rational::zero(); r];
        for (i, &v) in basis.iter().enumerate() {
            if v >= n {
                for (yk, bk) in y.iter_mut().zip(&inv[i]) {
                    *yk += bk;
                }
            }
        }
        let prices = Prices::new(&y);
        // Reduced cost of map column j is −Σ y; of artificial i it is 1 − y_i.
        let entering = (0..n)
            .find(|&j| !is_basic[j] && prices.positive(cols.rows(j)))
            .or_else(|| {
                (0..r).find(|&i| !is_basic[n + i] && y[i] > Rational::one()).map(|i| n + i)
            });
        let Some(e) = entering else {
            let objective: Rational = basis
                .iter()
                .zip(&xb)
                .filter(|(&v, _)| v >= n)
                .map(|(_, x)| x.clone())
                .sum();
            if objective.is_zero() {
                let w = basis
                    .iter()
                    .zip(&xb)
                    .filter(|(&v, x)| v < n && x.is_positive())
                    .map(|(&v, x)| (v, x.clone()))
                    .collect();
                return LpOutcome::Feasible(w);
            }
            return LpOutcome::Infeasible(y);
        };
        // d = B⁻¹ A_e.
        let d: Vec<Rational> = if e < n {
            let rows: Vec<usize> = cols.rows(e).collect();
            (0..r)
                .map(|i| rows.iter().map(|&k| &inv[i][k]).sum())
                .collect()
        } else {
            (0..r).map(|i| inv[i][e - n].clone()).collect()
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..r {
            if d[i].is_positive() {
                let ratio = &xb[i] / &d[i];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (l, t) = leave.expect("phase-one objective is bounded below");
        for i in 0..r {
            if i != l && !d[i].is_zero() {
                let delta = &d[i] * &t;
                xb[i] -= delta;
            }
        }
        xb[l] = t;
        let piv = d[l].clone();
        let pivot_row: Vec<Rational> = inv[l].iter().map(|v| v / &piv).collect();
        for i in 0..r {
            if i != l && !d[i].is_zero() {
                let factor = d[i].clone();
                for (a, p) in inv[i].iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *a -= &factor * p;
                    }
                }
            }
        }
        inv[l] = pivot_row;
        is_basic[basis[l]] = false;
        is_basic[e] = true;
        basis[l] = e;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn feasible_mixture() {
        // One index, two values: w0 + w1 = b.
        let maps = vec![vec![0], vec![1]];
        let b = vec![ratio(1, 3), ratio(2, 3)];
        match solve(&maps, 2, &b) {
            LpOutcome::Feasible(w) => {
                let mut w = w;
                w.sort();
                assert_eq!(w, vec![(0, ratio(1, 3)), (1, ratio(2, 3))]);
            }
            LpOutcome::Infeasible(_) => panic!("expected feasible"),
        }
    }

    #[test]
    fn infeasible_with_certificate() {
        // Two indices forced equal by the only maps (0,0) and (1,1), with
        // different marginals.
        let maps = vec![vec![0, 0], vec![1, 1]];
        let b = vec![int(1), int(0), int(0), int(1)];
        match solve(&maps, 2, &b) {
            LpOutcome::Infeasible(y) => {
                for m in &maps {
                    let s: Rational = m.iter().enumerate().map(|(g, &x)| y[g * 2 + x].clone()).sum();
                    assert!(s <= int(0));
                }
                let yb: Rational = y.iter().zip(&b).map(|(a, c)| a * c).sum();
                assert!(yb > int(0));
            }
            LpOutcome::Feasible(_) => panic!("expected infeasible"),
        }
    }
}
