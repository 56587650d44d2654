//! Finite posets stored as cover pairs with a cached order closure.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the ground-set size for exponential up-set enumeration.
pub const DEFAULT_UPSET_CAP: usize = 20;

/// A set of element indices, kept sorted by input order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(Vec<usize>);

impl Subset {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Subset(members)
    }

    pub fn empty() -> Self {
        Subset(Vec::new())
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn union(&self, other: &Subset) -> Subset {
        Subset::new(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        Subset(self.iter().filter(|&x| other.contains(x)).collect())
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.iter().all(|x| other.contains(x))
    }

    pub fn labels(&self, p: &Poset) -> Vec<String> {
        self.iter().map(|x| p.label(x).to_string()).collect()
    }
}

impl FromIterator<usize> for Subset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Subset::new(iter.into_iter().collect())
    }
}

/// JSON form of a poset: `{"elements": [...], "covers": [[lo, hi], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetDoc {
    pub elements: Vec<String>,
    pub covers: Vec<(String, String)>,
}

/// A finite poset. Element order is the input order and every set-valued
/// result is sorted by it. Immutable once built.
#[derive(Clone, Debug)]
pub struct Poset {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    covers: Vec<(usize, usize)>,
    upper: Vec<Vec<usize>>,
    lower: Vec<Vec<usize>>,
    leq: Vec<Vec<bool>>,
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.covers == other.covers
    }
}

impl Eq for Poset {}

impl Poset {
    /// Builds a poset whose Hasse diagram must be connected.
    pub fn new(labels: Vec<String>, relation: &[(usize, usize)]) -> Result<Poset> {
        let p = Poset::from_relation(labels, relation)?;
        if !p.is_hasse_connected() {
            return Err(Error::Disconnected);
        }
        Ok(p)
    }

    /// Builds a poset from any relation whose reflexive-transitive closure is
    /// antisymmetric. Disconnected Hasse diagrams are allowed here.
    pub fn from_relation(labels: Vec<String>, relation: &[(usize, usize)]) -> Result<Poset> {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::EmptyLabel);
            }
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateElement(l.clone()));
            }
        }
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in relation {
            if a >= n {
                return Err(Error::ForeignElement(a));
            }
            if b >= n {
                return Err(Error::ForeignElement(b));
            }
            if a == b {
                return Err(Error::Cycle(labels[a].clone(), labels[b].clone()));
            }
            leq[a][b] = true;
        }
        for k in 0..n {
            let above = leq[k].clone();
            for row in leq.iter_mut().filter(|r| r[k]) {
                for (cell, &up) in row.iter_mut().zip(&above) {
                    *cell |= up;
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i][j] && leq[j][i] {
                    return Err(Error::Cycle(labels[i].clone(), labels[j].clone()));
                }
            }
        }
        let mut covers = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] {
                    let implied = (0..n).any(|k| k != i && k != j && leq[i][k] && leq[k][j]);
                    if !implied {
                        covers.push((i, j));
                    }
                }
            }
        }
        let mut upper = vec![Vec::new(); n];
        let mut lower = vec![Vec::new(); n];
        for &(a, b) in &covers {
            upper[a].push(b);
            lower[b].push(a);
        }
        Ok(Poset {
            labels,
            index,
            covers,
            upper,
            lower,
            leq,
        })
    }

    /// Convenience constructor from labels and label pairs `(lower, upper)`.
    pub fn from_labels(labels: &[&str], relation: &[(&str, &str)]) -> Result<Poset> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let pairs = label_pairs(&labels, relation.iter().map(|(a, b)| (*a, *b)))?;
        Poset::new(labels, &pairs)
    }

    pub fn from_doc(doc: &PosetDoc) -> Result<Poset> {
        let pairs = label_pairs(
            &doc.elements,
            doc.covers.iter().map(|(a, b)| (a.as_str(), b.as_str())),
        )?;
        Poset::new(doc.elements.clone(), &pairs)
    }

    pub fn to_doc(&self) -> PosetDoc {
        PosetDoc {
            elements: self.labels.clone(),
            covers: self
                .covers
                .iter()
                .map(|&(a, b)| (self.labels[a].clone(), self.labels[b].clone()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownElement(label.to_string()))
    }

    pub fn subset_of(&self, labels: &[&str]) -> Result<Subset> {
        labels.iter().map(|l| self.index_of(l)).collect()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.labels.len()
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x][y]
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq[x][y]
    }

    pub fn comparable(&self, x: usize, y: usize) -> bool {
        self.leq[x][y] || self.leq[y][x]
    }

    /// Cover pairs `(lower, upper)`.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn upper_covers(&self, x: usize) -> &[usize] {
        &self.upper[x]
    }

    pub fn lower_covers(&self, x: usize) -> &[usize] {
        &self.lower[x]
    }

    /// Neighbours in the undirected Hasse diagram, in input order.
    pub fn hasse_neighbors(&self, x: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.upper[x].iter().chain(&self.lower[x]).copied().collect();
        v.sort_unstable();
        v
    }

    pub fn hasse_degree(&self, x: usize) -> usize {
        self.upper[x].len() + self.lower[x].len()
    }

    pub fn is_hasse_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for y in self.hasse_neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == n
    }

    pub fn is_hasse_tree(&self) -> bool {
        !self.is_empty() && self.covers.len() + 1 == self.len() && self.is_hasse_connected()
    }

    /// Vertices of Hasse degree at most one.
    pub fn hasse_leaves(&self) -> Vec<usize> {
        self.elements().filter(|&x| self.hasse_degree(x) <= 1).collect()
    }

    fn check(&self, u: &Subset) -> Result<()> {
        match u.iter().find(|&x| x >= self.len()) {
            Some(x) => Err(Error::ForeignElement(x)),
            None => Ok(()),
        }
    }

    pub fn is_up_set(&self, u: &Subset) -> Result<bool> {
        self.check(u)?;
        Ok(u
            .iter()
            .all(|x| self.upper[x].iter().all(|&y| u.contains(y))))
    }

    pub fn is_down_set(&self, u: &Subset) -> Result<bool> {
        self.check(u)?;
        Ok(u
            .iter()
            .all(|x| self.lower[x].iter().all(|&y| u.contains(y))))
    }

    pub fn complement(&self, u: &Subset) -> Subset {
        Subset(self.elements().filter(|&x| !u.contains(x)).collect())
    }

    /// All up-sets, including the empty and the full set, ordered by size
    /// and then lexicographically by member indices.
    pub fn enumerate_up_sets(&self, cap: usize) -> Result<Vec<Subset>> {
        let n = self.len();
        if n > cap || n > 63 {
            return Err(Error::CapExceeded {
                what: "up-set",
                cap: cap.min(63),
            });
        }
        let mut order = self.linear_extension();
        order.reverse();
        let above: Vec<u64> = self
            .elements()
            .map(|x| {
                self.elements()
                    .filter(|&y| self.lt(x, y))
                    .fold(0u64, |m, y| m | (1 << y))
            })
            .collect();
        let mut out = Vec::new();
        fn rec(i: usize, order: &[usize], above: &[u64], mask: u64, out: &mut Vec<u64>) {
            if i == order.len() {
                out.push(mask);
                return;
            }
            let x = order[i];
            rec(i + 1, order, above, mask, out);
            if above[x] & mask == above[x] {
                rec(i + 1, order, above, mask | (1 << x), out);
            }
        }
        rec(0, &order, &above, 0, &mut out);
        let mut sets: Vec<Subset> = out
            .into_iter()
            .map(|m| Subset((0..n).filter(|&x| m & (1 << x) != 0).collect()))
            .collect();
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(sets)
    }

    pub fn minimal_elements(&self) -> Subset {
        Subset(self.elements().filter(|&x| self.lower[x].is_empty()).collect())
    }

    pub fn maximal_elements(&self) -> Subset {
        Subset(self.elements().filter(|&x| self.upper[x].is_empty()).collect())
    }

    pub fn minimum(&self) -> Option<usize> {
        self.elements()
            .find(|&x| self.elements().all(|y| self.leq(x, y)))
    }

    pub fn maximum(&self) -> Option<usize> {
        self.elements()
            .find(|&x| self.elements().all(|y| self.leq(y, x)))
    }

    /// Same ground set with the order reversed.
    pub fn dual(&self) -> Poset {
        let n = self.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.leq[j][i];
            }
        }
        let mut covers: Vec<(usize, usize)> = self.covers.iter().map(|&(a, b)| (b, a)).collect();
        covers.sort_unstable();
        Poset {
            labels: self.labels.clone(),
            index: self.index.clone(),
            covers,
            upper: self.lower.clone(),
            lower: self.upper.clone(),
            leq,
        }
    }

    /// Induced subposet on `s`; covers are recomputed from the restricted
    /// order and the result may be disconnected.
    pub fn induced(&self, s: &Subset) -> Result<Poset> {
        self.check(s)?;
        if s.is_empty() {
            return Err(Error::EmptySubset);
        }
        let members = s.as_slice();
        let labels = members.iter().map(|&x| self.labels[x].clone()).collect();
        let mut rel = Vec::new();
        for (i, &x) in members.iter().enumerate() {
            for (j, &y) in members.iter().enumerate() {
                if self.lt(x, y) {
                    rel.push((i, j));
                }
            }
        }
        Poset::from_relation(labels, &rel)
    }

    /// `{y : b <= y}`.
    pub fn principal_up_set(&self, b: usize) -> Result<Subset> {
        self.check(&Subset(vec![b]))?;
        Ok(Subset(self.elements().filter(|&y| self.leq(b, y)).collect()))
    }

    /// `{y : y <= a}`.
    pub fn principal_down_set(&self, a: usize) -> Result<Subset> {
        self.check(&Subset(vec![a]))?;
        Ok(Subset(self.elements().filter(|&y| self.leq(y, a)).collect()))
    }

    /// Minimal elements below `a`.
    pub fn d_set(&self, a: usize) -> Result<Subset> {
        self.check(&Subset(vec![a]))?;
        Ok(Subset(
            self.elements()
                .filter(|&b| self.lower[b].is_empty() && self.leq(b, a))
                .collect(),
        ))
    }

    /// A linear extension: elements sorted by the size of their down-set.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = self.elements().collect();
        let below: Vec<usize> = self
            .elements()
            .map(|x| self.elements().filter(|&y| self.leq(y, x)).count())
            .collect();
        order.sort_by_key(|&x| (below[x], x));
        order
    }

    /// All strictly comparable pairs `(lower, upper)`.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for x in self.elements() {
            for y in self.elements() {
                if self.lt(x, y) {
                    v.push((x, y));
                }
            }
        }
        v
    }
}

fn label_pairs<'a>(
    labels: &[String],
    relation: impl Iterator<Item = (&'a str, &'a str)>,
) -> Result<Vec<(usize, usize)>> {
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let lookup = |l: &str| {
        index
            .get(l)
            .copied()
            .ok_or_else(|| Error::UnknownElement(l.to_string()))
    };
    relation
        .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
        .collect()
}

/// Parses a poset document and validates it (acyclic, connected Hasse diagram).
pub fn parse_poset(text: &str) -> Result<Poset> {
    let doc: PosetDoc = serde_json::from_str(text)?;
    Poset::from_doc(&doc)
}

pub fn poset_to_json(p: &Poset) -> String {
    serde_json::to_string(&p.to_doc()).expect("poset document serializes")
}
