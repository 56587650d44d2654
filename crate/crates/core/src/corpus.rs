//! Seeded generators for test corpora and the named example posets.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classw::{classify, WClass};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::oracle::enumerate_monotone_maps;
use crate::poset::Poset;
use crate::rational;
use crate::realize::{applicable_case, Case};
use crate::sync::{is_synchronizable, Direction};
use crate::system::MonotoneSystem;

/// Deterministic random source for all generators.
pub struct Corpus {
    rng: ChaCha8Rng,
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

impl Corpus {
    pub fn new(seed: u64) -> Corpus {
        Corpus {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Random tree on `n` vertices with every edge oriented at random.
    pub fn tree_poset(&mut self, n: usize, prefix: &str) -> Poset {
        let rel: Vec<(usize, usize)> = (1..n)
            .map(|i| {
                let j = self.rng.random_range(0..i);
                if self.rng.random_bool(0.5) {
                    (i, j)
                } else {
                    (j, i)
                }
            })
            .collect();
        Poset::new(labels(prefix, n), &rel).expect("oriented trees are posets")
    }

    /// Random Class W poset with at most `max` elements.
    pub fn class_w_poset(&mut self, max: usize) -> Poset {
        loop {
            let n = self.rng.random_range(1..=max);
            let s = self.tree_poset(n, "s");
            if classify(&s).class.is_class_w() {
                return s;
            }
        }
    }

    /// Random poset with connected Hasse diagram and at most `max` elements.
    pub fn connected_poset(&mut self, max: usize) -> Poset {
        loop {
            let n = self.rng.random_range(1..=max);
            let p = self.rng.random_range(0.25..0.6);
            let mut rel = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if self.rng.random_bool(p) {
                        rel.push((i, j));
                    }
                }
            }
            let mut names = labels("a", n);
            names.rotate_left(self.rng.random_range(0..n));
            if let Ok(a) = Poset::new(names, &rel) {
                return a;
            }
        }
    }

    /// Random height-two poset with at most `max` elements: minimal `b*`
    /// elements and upper `t*` elements each covering a nonempty set of them.
    /// Needs `max >= 4`.
    pub fn height_two_poset(&mut self, max: usize) -> Option<Poset> {
        let d = self.rng.random_range(2..=(max - 2).min(5));
        let u = self.rng.random_range(2..=(max - d));
        let mut names = labels("b", d);
        names.extend(labels("t", u));
        let mut rel = Vec::new();
        for t in 0..u {
            let below: Vec<usize> = (0..d).filter(|_| self.rng.random_bool(0.5)).collect();
            if below.is_empty() {
                return None;
            }
            rel.extend(below.into_iter().map(|b| (b, d + t)));
        }
        Poset::new(names, &rel).ok()
    }

    /// Poset that is not synchronizable for minimal elements, drawn from the
    /// height-two and the general generator alternately.
    pub fn non_synchronizable_poset(&mut self, max: usize, attempts: usize) -> Option<Poset> {
        (0..attempts).find_map(|i| {
            let a = if i % 2 == 0 {
                self.height_two_poset(max)?
            } else {
                self.connected_poset(max)
            };
            let r = is_synchronizable(&a, Direction::Minimal);
            (!r.synchronizable && !r.graph_disconnected).then_some(a)
        })
    }

    /// Unbounded height-two poset that is synchronizable in direction `dir`
    /// only.
    pub fn one_sided_poset(&mut self, max: usize, dir: Direction, attempts: usize) -> Option<Poset> {
        let other = match dir {
            Direction::Minimal => Direction::Maximal,
            Direction::Maximal => Direction::Minimal,
        };
        (0..attempts).find_map(|_| {
            let a = self.height_two_poset(max)?;
            let yes = is_synchronizable(&a, dir);
            let no = is_synchronizable(&a, other);
            (a.minimum().is_none()
                && a.maximum().is_none()
                && yes.synchronizable
                && !no.synchronizable
                && !no.graph_disconnected)
                .then_some(a)
        })
    }

    /// Probability measure on `n` points with denominator at most `max_den`.
    pub fn measure(&mut self, n: usize, max_den: usize) -> Measure {
        let d = self.rng.random_range(1..=max_den);
        let mut counts = vec![0i64; n];
        for _ in 0..d {
            counts[self.rng.random_range(0..n)] += 1;
        }
        Measure::new(
            counts
                .into_iter()
                .map(|c| rational::ratio(c, d as i64))
                .collect(),
        )
        .expect("nonnegative")
    }

    /// Uniform mixture of `d <= max_den` random monotone maps; realizably
    /// monotone by construction.
    pub fn monotone_system(
        &mut self,
        a: &Poset,
        s: &Poset,
        max_den: usize,
        map_cap: usize,
    ) -> Result<MonotoneSystem> {
        let maps = enumerate_monotone_maps(a, s, map_cap)?;
        let d = self.rng.random_range(1..=max_den);
        let w = rational::ratio(1, d as i64);
        let mut measures = vec![Measure::zero(s.len()); a.len()];
        for _ in 0..d {
            let m = maps.choose(&mut self.rng).expect("constant maps exist");
            for (g, &x) in m.iter().enumerate() {
                measures[g].add_mass(x, &w);
            }
        }
        MonotoneSystem::new(a.clone(), s.clone(), measures)
    }

    /// A monotone system meeting one of the sufficient conditions. The case
    /// is drawn uniformly first so that rare cases are represented; after
    /// `10_000` misses any applicable case is accepted.
    pub fn realizable_instance(
        &mut self,
        max_a: usize,
        max_s: usize,
        max_den: usize,
        map_cap: usize,
    ) -> Result<(MonotoneSystem, Case)> {
        let target = *Case::ALL.choose(&mut self.rng).expect("nonempty");
        let one_sided = match target {
            Case::SyncLower => Some(Direction::Minimal),
            Case::SyncUpper => Some(Direction::Maximal),
            _ => None,
        };
        if let Some(dir) = one_sided.filter(|_| max_a >= 8) {
            if let Some(a) = self.one_sided_poset(max_a, dir, 10_000) {
                for _ in 0..10_000 {
                    let s = self.class_w_poset(max_s);
                    if applicable_case(&a, classify(&s).class) == Some(target) {
                        return Ok((self.monotone_system(&a, &s, max_den, map_cap)?, target));
                    }
                }
            }
        }
        for tries in 0.. {
            let s = self.class_w_poset(max_s);
            let a = if max_a >= 4 && self.rng.random_bool(0.5) {
                match self.height_two_poset(max_a) {
                    Some(a) => a,
                    None => continue,
                }
            } else {
                self.connected_poset(max_a)
            };
            match applicable_case(&a, classify(&s).class) {
                Some(case) if case == target || tries >= 10_000 => {
                    return Ok((self.monotone_system(&a, &s, max_den, map_cap)?, case));
                }
                _ => {}
            }
        }
        unreachable!()
    }

    /// Two independent random probability measures on `s`.
    pub fn measure_pair(&mut self, s: &Poset, max_den: usize) -> (Measure, Measure) {
        (self.measure(s.len(), max_den), self.measure(s.len(), max_den))
    }
}

/// Canonical string of a tree rooted at `v`.
fn ahu(adj: &[Vec<usize>], v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[v]
        .iter()
        .filter(|&&w| w != parent)
        .map(|&w| ahu(adj, w, v))
        .collect();
    kids.sort();
    format!("({})", kids.concat())
}

fn canonical(n: usize, edges: &[(usize, usize)]) -> String {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut left: BTreeSet<usize> = (0..n).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    while left.len() > 2 {
        let mut next = Vec::new();
        for &v in &layer {
            left.remove(&v);
            for &w in &adj[v] {
                if left.contains(&w) {
                    deg[w] -= 1;
                    if deg[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        layer = next;
    }
    left.iter()
        .map(|&c| ahu(&adj, c, usize::MAX))
        .min()
        .unwrap_or_default()
}

/// Pairwise non-isomorphic free trees on `n` vertices, as edge lists.
pub fn free_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut level: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for k in 2..=n {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for t in &level {
            for v in 0..k - 1 {
                let mut e = t.clone();
                e.push((v, k - 1));
                if seen.insert(canonical(k, &e)) {
                    next.push(e);
                }
            }
        }
        level = next;
    }
    if n == 0 {
        return Vec::new();
    }
    level
}

/// Every orientation of every free tree on `n` vertices.
pub fn oriented_trees(n: usize) -> Vec<Poset> {
    let mut out = Vec::new();
    for t in free_trees(n) {
        for mask in 0u32..(1 << t.len()) {
            let rel: Vec<(usize, usize)> = t
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| if mask >> i & 1 == 1 { (b, a) } else { (a, b) })
                .collect();
            out.push(Poset::new(labels("s", n), &rel).expect("oriented trees are posets"));
        }
    }
    out
}

/// The example posets, by name.
pub mod figures {
    use super::*;
    use crate::counterexample::build_wstar_poset;

    fn p(labels: &[&str], rel: &[(&str, &str)]) -> Poset {
        Poset::from_labels(labels, rel).expect("fixed example")
    }

    /// Y-poset: `x, y < z < w`.
    pub fn y_poset() -> Poset {
        p(&["w", "z", "x", "y"], &[("z", "w"), ("x", "z"), ("y", "z")])
    }

    /// Upper three-legged poset: `w` below `x, y, z`.
    pub fn w_upper() -> Poset {
        p(&["w", "x", "y", "z"], &[("w", "x"), ("w", "y"), ("w", "z")])
    }

    /// Lower three-legged poset: `w` above `x, y, z`.
    pub fn w_lower() -> Poset {
        p(&["w", "x", "y", "z"], &[("x", "w"), ("y", "w"), ("z", "w")])
    }

    /// Synchronizable six-element poset.
    pub fn sync_example() -> Poset {
        p(
            &["b0", "b1", "b2", "t0", "t1", "t2"],
            &[
                ("b0", "t0"),
                ("b1", "t0"),
                ("b0", "t1"),
                ("b1", "t1"),
                ("b2", "t1"),
                ("b1", "t2"),
                ("b2", "t2"),
            ],
        )
    }

    /// Six-element crown, not synchronizable.
    pub fn crown6() -> Poset {
        p(
            &["b0", "b1", "b2", "t0", "t1", "t2"],
            &[
                ("b0", "t0"),
                ("b1", "t0"),
                ("b0", "t1"),
                ("b2", "t1"),
                ("b1", "t2"),
                ("b2", "t2"),
            ],
        )
    }

    /// `(n+2)`-legged lower poset.
    pub fn legged(n: usize) -> Result<Poset> {
        build_wstar_poset(n)
    }

    /// Four-dimensional standard example, labelled for the counterexample.
    pub fn standard_example() -> Poset {
        p(
            &["b1", "b*1", "b*2", "b0", "a0", "a1(1)", "a1(2)", "a2"],
            &[
                ("b*1", "a0"),
                ("b*2", "a0"),
                ("b0", "a0"),
                ("b1", "a1(1)"),
                ("b*2", "a1(1)"),
                ("b0", "a1(1)"),
                ("b1", "a1(2)"),
                ("b*1", "a1(2)"),
                ("b0", "a1(2)"),
                ("b1", "a2"),
                ("b*1", "a2"),
                ("b*2", "a2"),
            ],
        )
    }

    /// Named lookup used by the command line.
    pub fn by_name(name: &str) -> Result<Poset> {
        Ok(match name {
            "y" => y_poset(),
            "w-upper" => w_upper(),
            "w-lower" => w_lower(),
            "sync" => sync_example(),
            "crown6" => crown6(),
            "standard" => standard_example(),
            other => match other.strip_prefix("legged-") {
                Some(n) => legged(
                    n.parse()
                        .map_err(|_| Error::Parse(format!("bad leg count `{n}`")))?,
                )?,
                None => return Err(Error::Parse(format!("unknown example `{other}`"))),
            },
        })
    }

    pub const NAMES: [&str; 7] = [
        "y",
        "w-upper",
        "w-lower",
        "sync",
        "crown6",
        "standard",
        "legged-<n>",
    ];
}

/// Class tag for every choice of root leaf.
pub fn classes_by_root(s: &Poset) -> Result<Vec<WClass>> {
    s.hasse_leaves()
        .into_iter()
        .map(|tau| {
            let rpt = crate::classw::build_rpt(s, tau)?;
            Ok(crate::classw::class_from_rpt(s, &rpt).0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_tree_counts() {
        let counts: Vec<usize> = (1..=8).map(|n| free_trees(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 6, 11, 23]);
    }

    #[test]
    fn generators_are_seeded() {
        let a = Corpus::new(7).connected_poset(6);
        let b = Corpus::new(7).connected_poset(6);
        assert_eq!(a, b);
    }

    #[test]
    fn mixture_is_monotone() {
        let mut c = Corpus::new(3);
        for _ in 0..10 {
            let (sys, _) = c.realizable_instance(5, 6, 12, 200_000).unwrap();
            assert!(sys.is_monotone());
        }
    }

    #[test]
    fn non_synchronizable_found() {
        let mut c = Corpus::new(11);
        let a = c.non_synchronizable_poset(8, 10_000).unwrap();
        assert!(!is_synchronizable(&a, Direction::Minimal).synchronizable);
    }
}
