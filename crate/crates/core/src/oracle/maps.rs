//! Order-preserving maps between finite posets.

use crate::error::{Error, Result};
use crate::poset::Poset;

pub const DEFAULT_MAP_CAP: usize = 200_000;

/// Every order-preserving map `A -> S` as an assignment vector indexed by
/// the elements of `A`, in lexicographic order of assignments along a
/// linear extension of `A`.
pub fn enumerate_monotone_maps(a: &Poset, s: &Poset, cap: usize) -> Result<Vec<Vec<usize>>> {
    let order = a.linear_extension();
    let below: Vec<Vec<usize>> = a
        .elements()
        .map(|x| a.elements().filter(|&y| a.lt(y, x)).collect())
        .collect();
    let mut out = Vec::new();
    let mut assign = vec![usize::MAX; a.len()];
    rec(0, &order, &below, s, &mut assign, cap, &mut out)?;
    out.sort();
    Ok(out)
}

fn rec(
    i: usize,
    order: &[usize],
    below: &[Vec<usize>],
    s: &Poset,
    assign: &mut Vec<usize>,
    cap: usize,
    out: &mut Vec<Vec<usize>>,
) -> Result<()> {
    if i == order.len() {
        if out.len() >= cap {
            return Err(Error::CapExceeded {
                what: "monotone-map",
                cap,
            });
        }
        out.push(assign.clone());
        return Ok(());
    }
    let x = order[i];
    for v in s.elements() {
        if below[x].iter().all(|&y| s.leq(assign[y], v)) {
            assign[x] = v;
            rec(i + 1, order, below, s, assign, cap, out)?;
        }
    }
    assign[x] = usize::MAX;
    Ok(())
}

/// Counts order-preserving maps by splitting on the image of a maximal
/// element of `A`, independently of the enumerator.
pub fn count_monotone_maps(a: &Poset, s: &Poset) -> u64 {
    fn go(a: &Poset, s: &Poset, remaining: &[usize], fixed: &mut Vec<Option<usize>>) -> u64 {
        let Some((&x, rest)) = remaining.split_last() else {
            return 1;
        };
        // `remaining` is a down-closed prefix; its last element is maximal in it.
        let mut total = 0;
        for v in s.elements() {
            let ok = a.elements().all(|y| match fixed[y] {
                Some(w) if a.lt(x, y) => s.leq(v, w),
                _ => true,
            });
            if ok {
                fixed[x] = Some(v);
                total += go(a, s, rest, fixed);
                fixed[x] = None;
            }
        }
        total
    }
    let order = a.linear_extension();
    go(a, s, &order, &mut vec![None; a.len()])
}

pub fn is_monotone_map(a: &Poset, s: &Poset, m: &[usize]) -> bool {
    m.len() == a.len()
        && a.strict_pairs()
            .into_iter()
            .all(|(x, y)| s.leq(m[x], m[y]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain2() -> Poset {
        Poset::from_labels(&["x", "y"], &[("x", "y")]).unwrap()
    }

    #[test]
    fn small_counts() {
        let one = Poset::from_labels(&["a"], &[]).unwrap();
        let s = chain2();
        assert_eq!(enumerate_monotone_maps(&one, &s, 10).unwrap().len(), 2);
        let maps = enumerate_monotone_maps(&s, &s, 10).unwrap();
        assert_eq!(maps, vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(count_monotone_maps(&s, &s), 3);
        assert!(maps.iter().all(|m| is_monotone_map(&s, &s, m)));
    }

    #[test]
    fn cap_is_enforced() {
        let s = chain2();
        assert!(matches!(
            enumerate_monotone_maps(&s, &s, 2),
            Err(Error::CapExceeded { .. })
        ));
    }
}
