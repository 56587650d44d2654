//! Couplings concentrated on `{(x, y) : x <= y}` via exact max-flow.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::poset::Poset;
use crate::rational::{self, Rational};

/// Joint masses `(x, y, m)` with `x <= y`.
pub type Coupling = Vec<(usize, usize, Rational)>;

/// Residual network with dense rational capacities.
struct Network {
    cap: Vec<Vec<Rational>>,
}

impl Network {
    fn new(n: usize) -> Network {
        Network {
            cap: vec![vec![Rational::zero(); n]; n],
        }
    }

    fn augmenting_path(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let n = self.cap.len();
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && self.cap[u][v].is_positive() {
                    prev[v] = u;
                    if v == t {
                        let mut path = vec![t];
                        let mut c = t;
                        while c != s {
                            c = prev[c];
                            path.push(c);
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Edmonds–Karp; returns the flow value.
    fn max_flow(&mut self, s: usize, t: usize) -> Rational {
        let mut total = Rational::zero();
        while let Some(path) = self.augmenting_path(s, t) {
            let bottleneck = path
                .windows(2)
                .map(|w| self.cap[w[0]][w[1]].clone())
                .min()
                .expect("path has an edge");
            for w in path.windows(2) {
                self.cap[w[0]][w[1]] -= &bottleneck;
                self.cap[w[1]][w[0]] += &bottleneck;
            }
            total += bottleneck;
        }
        total
    }
}

/// A coupling of `p` and `q` supported on the order relation, if one exists.
pub fn strassen_pair(p: &Measure, q: &Measure, s: &Poset) -> Result<Option<Coupling>> {
    if p.len() != s.len() || q.len() != s.len() {
        return Err(Error::SizeMismatch {
            expected: s.len(),
            got: p.len().min(q.len()),
        });
    }
    let total = p.total();
    if total != q.total() {
        return Err(Error::TotalMismatch(
            rational::format(&total),
            rational::format(&q.total()),
        ));
    }
    let n = s.len();
    // source, left copies 1..=n, right copies n+1..=2n, sink.
    let (src, sink) = (0, 2 * n + 1);
    let mut net = Network::new(2 * n + 2);
    for x in s.elements() {
        net.cap[src][1 + x] = p.mass(x).clone();
        net.cap[1 + n + x][sink] = q.mass(x).clone();
        for y in s.elements() {
            if s.leq(x, y) {
                net.cap[1 + x][1 + n + y] = total.clone();
            }
        }
    }
    let original = net.cap.clone();
    if net.max_flow(src, sink) != total {
        return Ok(None);
    }
    let mut coupling = Vec::new();
    for x in s.elements() {
        for y in s.elements() {
            if s.leq(x, y) {
                let used = &original[1 + x][1 + n + y] - &net.cap[1 + x][1 + n + y];
                if used.is_positive() {
                    coupling.push((x, y, used));
                }
            }
        }
    }
    Ok(Some(coupling))
}

/// Checks marginals and support of a coupling.
pub fn check_coupling(c: &Coupling, p: &Measure, q: &Measure, s: &Poset) -> bool {
    let mut left = Measure::zero(s.len());
    let mut right = Measure::zero(s.len());
    for (x, y, m) in c {
        if !s.leq(*x, *y) || m.is_negative() {
            return false;
        }
        left.add_mass(*x, m);
        right.add_mass(*y, m);
    }
    left == *p && right == *q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn chain() -> Poset {
        Poset::from_labels(&["x", "y"], &[("x", "y")]).unwrap()
    }

    #[test]
    fn diagonal_and_point_masses() {
        let s = chain();
        let p = Measure::new(vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        let c = strassen_pair(&p, &p, &s).unwrap().unwrap();
        assert!(check_coupling(&c, &p, &p, &s));
        let (dx, dy) = (Measure::point(2, 0), Measure::point(2, 1));
        let c = strassen_pair(&dx, &dy, &s).unwrap().unwrap();
        assert_eq!(c, vec![(0, 1, int(1))]);
        assert!(strassen_pair(&dy, &dx, &s).unwrap().is_none());
    }

    #[test]
    fn total_mismatch() {
        let s = chain();
        let p = Measure::new(vec![ratio(1, 3), int(0)]).unwrap();
        assert!(matches!(
            strassen_pair(&p, &Measure::point(2, 0), &s),
            Err(Error::TotalMismatch(..))
        ));
    }
}
