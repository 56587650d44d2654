//! Explicit obstructions for non-synchronizable index posets: an
//! `(n+2)`-legged W_★ target poset and a stochastically monotone system on it
//! that has no monotone realization.
//!
//! The pipeline takes a Θ-length minimum spanning tree `T` of `G_A`, finds an
//! element `a0` whose minimal set `T` fails to connect, enumerates the induced
//! fences supported by the forest `T_0` that leave `b0` and return to
//! `D_A(a0)`, and assigns measures per cell of a five-way partition of `A`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::oracle;
use crate::poset::{Poset, Subset};
use crate::rational::{self, Rational};
use crate::sync::{self, Edge, Graph, SpanningTree};
use crate::system::MonotoneSystem;

pub const DEFAULT_FENCE_CAP: usize = 10_000;

/// Induced fence `b0 < a1 > b1 < … > b_l < a_{l+1} > b*`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fence {
    /// `b0, …, b_l`.
    pub lower: Vec<usize>,
    /// `a1, …, a_{l+1}`.
    pub upper: Vec<usize>,
    pub b_star: usize,
    /// Path in `T_0` from `b0` to `b_l` containing `lower` as a subsequence.
    pub support: Vec<usize>,
}

impl Fence {
    pub fn l(&self) -> usize {
        self.lower.len() - 1
    }

    pub fn a1(&self) -> usize {
        self.upper[0]
    }

    /// Elements in fence order.
    pub fn sequence(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(2 * self.lower.len() + 1);
        for (b, a) in self.lower.iter().zip(&self.upper) {
            v.push(*b);
            v.push(*a);
        }
        v.push(self.b_star);
        v
    }

    /// The induced subposet has exactly the `2l+2` comparabilities of the
    /// alternating sequence, with the support path condition.
    pub fn is_valid(&self, a: &Poset, t0: &Graph) -> bool {
        let seq = self.sequence();
        let distinct: BTreeSet<usize> = seq.iter().copied().collect();
        if self.l() < 1 || distinct.len() != seq.len() {
            return false;
        }
        let mut count = 0;
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                if a.comparable(seq[i], seq[j]) {
                    if j != i + 1 {
                        return false;
                    }
                    let (lo, hi) = if i % 2 == 0 { (seq[i], seq[j]) } else { (seq[j], seq[i]) };
                    if !a.lt(lo, hi) {
                        return false;
                    }
                    count += 1;
                }
            }
        }
        if count != 2 * self.l() + 2 {
            return false;
        }
        let path_ok = self.support.first() == Some(&self.lower[0])
            && self.support.last() == self.lower.last()
            && self.support.windows(2).all(|w| t0.has_edge(w[0], w[1]));
        let mut it = self.support.iter();
        let subsequence = self.lower.iter().all(|b| it.any(|x| x == b));
        path_ok && subsequence && !t0.vertices.contains(&self.b_star)
    }

    fn key(&self) -> Vec<usize> {
        self.sequence()
    }
}

/// Output of [`find_disconnecting`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disconnection {
    pub a0: usize,
    pub b0: usize,
    /// Path `x_0 = b0, …, x_m` in `T` whose inner vertices avoid `D_A(a0)`
    /// and whose end lies in another component of `T ∩ D_A(a0)`.
    pub path: Vec<usize>,
    /// `T ∩ ((D_A ∖ D_A(a0)) ∪ {b0})`.
    pub t0: Graph,
}

fn induced_forest(t: &SpanningTree, keep: &BTreeSet<usize>) -> Graph {
    Graph::new(
        keep.iter().copied().collect(),
        t.edges
            .iter()
            .copied()
            .filter(|(x, y)| keep.contains(x) && keep.contains(y)),
    )
}

/// BFS parents over the component of `root` in `g`; neighbours in index order.
fn bfs_tree(g: &Graph, root: usize) -> (Vec<usize>, HashMap<usize, usize>) {
    let mut order = vec![root];
    let mut parent = HashMap::from([(root, root)]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let mut nb = g.neighbors(v);
        nb.sort_unstable();
        for w in nb {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(w) {
                e.insert(v);
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    (order, parent)
}

fn path_to(parent: &HashMap<usize, usize>, root: usize, v: usize) -> Vec<usize> {
    let mut p = vec![v];
    let mut c = v;
    while c != root {
        c = parent[&c];
        p.push(c);
    }
    p.reverse();
    p
}

/// Locates `a0`, `b0` and the forest `T_0` for a Θ-length minimum spanning
/// tree `t` of `G_A`. `a0` is the first element in input order whose minimal
/// set `t` fails to connect; `b0` is the last element of `D_A(a0)` from which
/// `t` leaves `D_A(a0)` and re-enters it in another component.
pub fn find_disconnecting(a: &Poset, t: &SpanningTree) -> Result<Disconnection> {
    let a0 = sync::local_connectivity_violation(t, a).ok_or(Error::Synchronizable)?;
    let d_a0 = a.d_set(a0)?;
    let outside: BTreeSet<usize> = a
        .minimal_elements()
        .iter()
        .filter(|&b| !d_a0.contains(b))
        .collect();
    for b0 in d_a0.iter().collect::<Vec<_>>().into_iter().rev() {
        let mut keep = outside.clone();
        keep.insert(b0);
        let t0 = induced_forest(t, &keep);
        let (order, parent) = bfs_tree(&t0, b0);
        for &v in order.iter().skip(1) {
            let mut nb = t.neighbors(v);
            nb.sort_unstable();
            if let Some(&xm) = nb.iter().find(|&&w| w != b0 && d_a0.contains(w)) {
                let mut path = path_to(&parent, b0, v);
                path.push(xm);
                return Ok(Disconnection { a0, b0, path, t0 });
            }
        }
    }
    Err(Error::Internal(format!(
        "no return path from D_A({})",
        a.label(a0)
    )))
}

/// All induced fences supported by `t0` from `b0` to an element of
/// `D_A(a0) ∖ {b0}`, sorted by their element sequence.
pub fn enumerate_fences(
    a: &Poset,
    t0: &Graph,
    b0: usize,
    a0: usize,
    cap: usize,
) -> Result<Vec<Fence>> {
    let (_, parent) = bfs_tree(t0, b0);
    let targets: Vec<usize> = a.d_set(a0)?.iter().filter(|&b| b != b0).collect();
    // Strict descendants of each vertex in the tree rooted at b0.
    let mut below: HashMap<usize, Vec<usize>> = HashMap::new();
    for &v in parent.keys() {
        let mut c = v;
        while c != b0 {
            c = parent[&c];
            below.entry(c).or_default().push(v);
        }
    }
    for v in below.values_mut() {
        v.sort_unstable();
    }
    struct Search<'a> {
        a: &'a Poset,
        targets: &'a [usize],
        below: &'a HashMap<usize, Vec<usize>>,
        parent: &'a HashMap<usize, usize>,
        b0: usize,
        cap: usize,
        out: Vec<Fence>,
    }
    impl Search<'_> {
        fn free_of(&self, x: usize, others: &[usize]) -> bool {
            others.iter().all(|&y| !self.a.comparable(x, y))
        }

        fn rec(&mut self, lower: &mut Vec<usize>, upper: &mut Vec<usize>) -> Result<()> {
            let a = self.a;
            let bl = *lower.last().expect("starts at b0");
            let earlier = &lower[..lower.len() - 1];
            let candidates: Vec<usize> = a
                .elements()
                .filter(|&x| a.lt(bl, x) && self.free_of(x, earlier) && self.free_of(x, upper))
                .collect();
            for x in candidates {
                if lower.len() >= 2 {
                    for &bs in self.targets {
                        if a.lt(bs, x) && self.free_of(bs, upper) {
                            if self.out.len() >= self.cap {
                                return Err(Error::CapExceeded {
                                    what: "fence",
                                    cap: self.cap,
                                });
                            }
                            let mut up = upper.clone();
                            up.push(x);
                            self.out.push(Fence {
                                lower: lower.clone(),
                                upper: up,
                                b_star: bs,
                                support: path_to(self.parent, self.b0, bl),
                            });
                        }
                    }
                }
                let next: Vec<usize> = self
                    .below
                    .get(&bl)
                    .map(|v| {
                        v.iter()
                            .copied()
                            .filter(|&b| a.lt(b, x) && self.free_of(b, upper))
                            .collect()
                    })
                    .unwrap_or_default();
                for b in next {
                    lower.push(b);
                    upper.push(x);
                    self.rec(lower, upper)?;
                    upper.pop();
                    lower.pop();
                }
            }
            Ok(())
        }
    }
    let mut s = Search {
        a,
        targets: &targets,
        below: &below,
        parent: &parent,
        b0,
        cap,
        out: Vec::new(),
    };
    s.rec(&mut vec![b0], &mut Vec::new())?;
    let mut out = s.out;
    out.sort_by_key(Fence::key);
    Ok(out)
}

/// Chosen fences `F^(1..n)` and the derived sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labelling {
    pub fences: Vec<Fence>,
    pub n: usize,
    /// `|{i : b*^(1) < a1^(i)}|` over all of `Γ_0`.
    pub m: usize,
    /// `a1^(1), …, a1^(n)`; `y_j` of the target poset pairs with `c1[j-1]`.
    pub c1: Vec<usize>,
    pub c2: Subset,
    pub b1: Subset,
    pub b_star: Subset,
}

/// Picks `F^(1)` maximizing `M` (first in order on ties), takes `C_1` as the
/// minimal elements of `{a1^(1)} ∪ {a1^(i) : b*^(1) < a1^(i)}`, and for every
/// other element of `C_1` the first fence starting with it.
pub fn select_and_label(a: &Poset, gamma0: &[Fence]) -> Result<Labelling> {
    if gamma0.is_empty() {
        return Err(Error::Internal("no supported fence".into()));
    }
    let count = |f: &Fence| gamma0.iter().filter(|g| a.lt(f.b_star, g.a1())).count();
    let mut best = 0;
    let mut m = count(&gamma0[0]);
    for (i, f) in gamma0.iter().enumerate().skip(1) {
        let c = count(f);
        if c > m {
            best = i;
            m = c;
        }
    }
    let f1 = &gamma0[best];
    let mut set: BTreeSet<usize> = gamma0
        .iter()
        .filter(|g| a.lt(f1.b_star, g.a1()))
        .map(Fence::a1)
        .collect();
    set.insert(f1.a1());
    let minimal: Vec<usize> = set
        .iter()
        .copied()
        .filter(|&x| !set.iter().any(|&y| a.lt(y, x)))
        .collect();
    let mut fences = vec![f1.clone()];
    for &c in minimal.iter().filter(|&&c| c != f1.a1()) {
        let f = gamma0
            .iter()
            .find(|g| g.a1() == c)
            .expect("element of the set is some fence's a1");
        fences.push(f.clone());
    }
    let c1: Vec<usize> = fences.iter().map(Fence::a1).collect();
    let c2: Subset = fences.iter().flat_map(|f| f.upper[1..].to_vec()).collect();
    let b1: Subset = fences.iter().flat_map(|f| f.lower[1..].to_vec()).collect();
    let b_star: Subset = fences.iter().map(|f| f.b_star).collect();
    Ok(Labelling {
        n: fences.len(),
        fences,
        m,
        c1,
        c2,
        b1,
        b_star,
    })
}

/// `(n+2)`-legged W_★ poset: `z` covers `y0, y1, …, yn, y*`.
pub fn build_wstar_poset(n: usize) -> Result<Poset> {
    if n == 0 {
        return Err(Error::Parse("the leg parameter n must be at least 1".into()));
    }
    let mut labels = vec!["z".to_string(), "y0".to_string()];
    labels.extend((1..=n).map(|j| format!("y{j}")));
    labels.push("y*".to_string());
    let rel: Vec<(usize, usize)> = (1..labels.len()).map(|y| (y, 0)).collect();
    Poset::new(labels, &rel)
}

/// Index of `y_j` (`j = 0..=n`) in [`build_wstar_poset`].
pub fn y_index(j: usize) -> usize {
    1 + j
}

pub fn y_star_index(n: usize) -> usize {
    n + 2
}

pub const Z_INDEX: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Cell {
    /// `A_0`
    Base,
    /// `A_1 ∩ A_2`
    OuterLow,
    /// `A_1 ∖ A_2`
    OuterHigh,
    /// `A_* ∩ A_2`
    InnerLow,
    /// `A_* ∖ A_2`
    InnerHigh,
}

impl Cell {
    pub const ALL: [Cell; 5] = [
        Cell::Base,
        Cell::OuterLow,
        Cell::OuterHigh,
        Cell::InnerLow,
        Cell::InnerHigh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Cell::Base => "A0",
            Cell::OuterLow => "A1&A2",
            Cell::OuterHigh => "A1-A2",
            Cell::InnerLow => "A*&A2",
            Cell::InnerHigh => "A*-A2",
        }
    }
}

/// Five-way partition of `A` by `A_0`, `A_1`, `A_*` and the down-set `A_2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub a0_set: Subset,
    pub a1_set: Subset,
    pub astar_set: Subset,
    pub a2_set: Subset,
    pub cell: Vec<Cell>,
}

impl Partition {
    pub fn members(&self, c: Cell) -> Subset {
        self.cell
            .iter()
            .enumerate()
            .filter(|(_, &k)| k == c)
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn partition(a: &Poset, a0: usize, c1: &[usize], c2: &Subset) -> Result<Partition> {
    let below = |x: usize| a.principal_down_set(x);
    let mut all_c1 = Subset::new(a.elements().collect());
    for &c in c1 {
        all_c1 = all_c1.intersection(&below(c)?);
    }
    let down_a0 = below(a0)?;
    let a0_set = down_a0.intersection(&all_c1);
    let a1_set = a.complement(&down_a0);
    let astar_set: Subset = down_a0.iter().filter(|&x| !all_c1.contains(x)).collect();
    let mut a2_set = Subset::empty();
    for x in c2.iter() {
        a2_set = a2_set.union(&below(x)?);
    }
    let cell = a
        .elements()
        .map(|x| match (a0_set.contains(x), a1_set.contains(x), a2_set.contains(x)) {
            (true, _, _) => Cell::Base,
            (false, true, true) => Cell::OuterLow,
            (false, true, false) => Cell::OuterHigh,
            (false, false, true) => Cell::InnerLow,
            (false, false, false) => Cell::InnerHigh,
        })
        .collect();
    Ok(Partition {
        a0_set,
        a1_set,
        astar_set,
        a2_set,
        cell,
    })
}

/// Integer coefficients (over the common denominator `n+1`) of the measure
/// assigned to `x`.
fn coefficients(a: &Poset, x: usize, cell: Cell, c1: &[usize]) -> Result<Vec<i64>> {
    let n = c1.len();
    let mut c = vec![0i64; n + 3];
    let above: Vec<usize> = (0..n).filter(|&j| a.leq(x, c1[j])).collect();
    let k = above.len() as i64;
    let n = n as i64;
    let ystar = y_star_index(c1.len());
    let z = match cell {
        Cell::Base => {
            c[y_index(0)] = 1;
            for j in 1..=c1.len() {
                c[y_index(j)] = 1;
            }
            return Ok(c);
        }
        Cell::OuterLow => {
            c[ystar] = 1;
            n - k
        }
        Cell::OuterHigh => n + 1 - k,
        Cell::InnerLow => {
            c[ystar] = 1;
            c[y_index(0)] = 1;
            n - 1 - k
        }
        Cell::InnerHigh => {
            c[y_index(0)] = 1;
            n - k
        }
    };
    if z < 0 {
        return Err(Error::NegativeCoefficient(a.label(x).to_string()));
    }
    c[Z_INDEX] = z;
    for j in above {
        c[y_index(j + 1)] = 1;
    }
    Ok(c)
}

pub fn build_system(a: &Poset, s: &Poset, part: &Partition, c1: &[usize]) -> Result<MonotoneSystem> {
    let den = Rational::from_integer((c1.len() as i64 + 1).into());
    let mut measures = Vec::with_capacity(a.len());
    for x in a.elements() {
        let c = coefficients(a, x, part.cell[x], c1)?;
        let m = Measure::new(c.iter().map(|&v| rational::int(v) / &den).collect())?;
        if !m.is_probability() {
            return Err(Error::Internal(format!(
                "measure at `{}` has total {}",
                a.label(x),
                rational::format(&m.total())
            )));
        }
        measures.push(m);
    }
    MonotoneSystem::new(a.clone(), s.clone(), measures)
}

/// Every intermediate witness of the construction.
#[derive(Clone, Debug)]
pub struct CounterexampleBundle {
    pub a: Poset,
    pub tree: SpanningTree,
    pub weight: usize,
    pub disconnection: Disconnection,
    pub gamma0: Vec<Fence>,
    pub labels: Labelling,
    pub partition: Partition,
    pub s: Poset,
    pub system: MonotoneSystem,
}

/// Runs the construction on `a` (lower direction).
pub fn build_bundle(a: &Poset, fence_cap: usize) -> Result<CounterexampleBundle> {
    let g = sync::interlaced_graph(a);
    let len = sync::lengths(a, &g);
    let tree = sync::kruskal(&g, &len)?;
    let weight = sync::weight(&tree, &len);
    let disconnection = find_disconnecting(a, &tree)?;
    let gamma0 = enumerate_fences(
        a,
        &disconnection.t0,
        disconnection.b0,
        disconnection.a0,
        fence_cap,
    )?;
    if let Some(f) = gamma0.iter().find(|f| !f.is_valid(a, &disconnection.t0)) {
        return Err(Error::Internal(format!("invalid fence {:?}", f.sequence())));
    }
    let labels = select_and_label(a, &gamma0)?;
    let partition = partition(a, disconnection.a0, &labels.c1, &labels.c2)?;
    let s = build_wstar_poset(labels.n)?;
    let system = build_system(a, &s, &partition, &labels.c1)?;
    Ok(CounterexampleBundle {
        a: a.clone(),
        tree,
        weight,
        disconnection,
        gamma0,
        labels,
        partition,
        s,
        system,
    })
}

/// An event `{X_γ = y}` for a minimal `y` of the target poset.
pub type Atom = (usize, usize);

/// Symbolic replay of the disjoint-events argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventCertificate {
    /// `E_0, E_1, …, E_n, E_*` as atoms.
    pub events: Vec<Atom>,
    /// Equivalence class (list of atoms) of each event.
    pub classes: Vec<Vec<Atom>>,
    pub pairwise_disjoint: bool,
    pub mass: Rational,
}

/// Merges `{X_β = y}` with `{X_α = y}` whenever `α < β`, `y` is minimal and
/// both carry the same positive mass (the first contains the second under
/// any monotone realization). Two classes are disjoint when one element
/// `γ` appears with different values in them.
pub fn replay_events(sys: &MonotoneSystem, events: &[Atom]) -> EventCertificate {
    let (a, s) = (&sys.a, &sys.s);
    let mins = s.minimal_elements();
    let atoms: Vec<Atom> = a
        .elements()
        .flat_map(|g| mins.iter().map(move |y| (g, y)))
        .filter(|&(g, y)| !sys.measures[g].mass(y).is_zero())
        .collect();
    let index: HashMap<Atom, usize> = atoms.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut root: Vec<usize> = (0..atoms.len()).collect();
    fn find(r: &mut [usize], x: usize) -> usize {
        let mut c = x;
        while r[c] != c {
            c = r[c];
        }
        r[x] = c;
        c
    }
    for (lo, hi) in a.strict_pairs() {
        for y in mins.iter() {
            let (p, q) = (sys.measures[lo].mass(y), sys.measures[hi].mass(y));
            if !p.is_zero() && p == q {
                let (i, j) = (find(&mut root, index[&(lo, y)]), find(&mut root, index[&(hi, y)]));
                root[i.max(j)] = i.min(j);
            }
        }
    }
    let mut members: BTreeMap<usize, Vec<Atom>> = BTreeMap::new();
    for (i, &x) in atoms.iter().enumerate() {
        members.entry(find(&mut root, i)).or_default().push(x);
    }
    let mut classes = Vec::new();
    let mut mass = Rational::zero();
    let mut known = true;
    for e in events {
        match index.get(e) {
            Some(&i) => {
                classes.push(members[&find(&mut root, i)].clone());
                mass += sys.measures[e.0].mass(e.1);
            }
            None => {
                classes.push(Vec::new());
                known = false;
            }
        }
    }
    let disjoint = |x: &[Atom], y: &[Atom]| {
        x.iter()
            .any(|&(g, u)| y.iter().any(|&(h, v)| g == h && u != v))
    };
    let pairwise_disjoint = known
        && (0..classes.len())
            .all(|i| (i + 1..classes.len()).all(|j| disjoint(&classes[i], &classes[j])));
    EventCertificate {
        events: events.to_vec(),
        classes,
        pairwise_disjoint,
        mass,
    }
}

/// Outcome of every independent check on a bundle.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub monotone_violation: Option<(usize, usize)>,
    pub verdict: oracle::FeasibilityVerdict,
    pub farkas_checked: bool,
    pub events: EventCertificate,
    /// `A_0 ∩ A_2 = ∅`.
    pub base_disjoint: bool,
    /// For every `b* ∈ D_A(a0) ∖ {b0}`: `|A(b*) ∩ C_1| <= n−1` or `A(b*) ∩ C_2 = ∅`.
    pub b_star_bound: bool,
    /// The listed elements fall in their expected cells.
    pub cells_ok: bool,
}

impl Certificate {
    pub fn monotone(&self) -> bool {
        self.monotone_violation.is_none()
    }

    pub fn lp_infeasible(&self) -> bool {
        !self.verdict.feasible && self.farkas_checked
    }

    /// Expected event mass `(n+2)/(n+1)`.
    pub fn events_ok(&self, n: usize) -> bool {
        self.events.pairwise_disjoint
            && self.events.mass == rational::ratio(n as i64 + 2, n as i64 + 1)
    }

    pub fn valid(&self, n: usize) -> bool {
        self.monotone()
            && self.lp_infeasible()
            && self.events_ok(n)
            && self.base_disjoint
            && self.b_star_bound
            && self.cells_ok
    }
}

pub fn certify(b: &CounterexampleBundle, upset_cap: usize, map_cap: usize) -> Result<Certificate> {
    let (a, sys, lab) = (&b.a, &b.system, &b.labels);
    let n = lab.n;
    let monotone_violation = sys.monotonicity_violation(upset_cap)?;
    let verdict = oracle::realizably_monotone(sys, map_cap)?;
    let farkas_checked = !verdict.feasible && oracle::check_verdict(sys, &verdict, map_cap)?;

    let b0 = b.disconnection.b0;
    let mut events = vec![(b0, y_index(0))];
    events.extend((1..=n).map(|j| (b0, y_index(j))));
    events.push((lab.fences[0].b_star, y_star_index(n)));
    let events = replay_events(sys, &events);

    let p = &b.partition;
    let base_disjoint = p.a0_set.intersection(&p.a2_set).is_empty();
    let k = |x: usize| lab.c1.iter().filter(|&&c| a.leq(x, c)).count();
    let b_star_bound = a
        .d_set(b.disconnection.a0)?
        .iter()
        .filter(|&x| x != b0)
        .all(|x| k(x) < n || !lab.c2.iter().any(|c| a.leq(x, c)))
        && lab.b_star.iter().all(|x| k(x) < n);
    let in_cell = |xs: Vec<usize>, c: Cell| xs.into_iter().all(|x| p.cell[x] == c);
    let cells_ok = p.cell[b0] == Cell::Base
        && p.cell[b.disconnection.a0] == Cell::InnerHigh
        && in_cell(lab.b1.iter().collect(), Cell::OuterLow)
        && in_cell(lab.c2.iter().collect(), Cell::OuterLow)
        && in_cell(lab.c1.clone(), Cell::OuterHigh)
        && in_cell(lab.b_star.iter().collect(), Cell::InnerLow);
    Ok(Certificate {
        monotone_violation,
        verdict,
        farkas_checked,
        events,
        base_disjoint,
        b_star_bound,
        cells_ok,
    })
}

/// Builds and certifies; any failed check is an internal error.
pub fn counterexample(
    a: &Poset,
    fence_cap: usize,
    upset_cap: usize,
    map_cap: usize,
) -> Result<(CounterexampleBundle, Certificate)> {
    let bundle = build_bundle(a, fence_cap)?;
    let cert = certify(&bundle, upset_cap, map_cap)?;
    if !cert.valid(bundle.labels.n) {
        return Err(Error::Internal(format!(
            "counterexample certificate failed: {}",
            cert.summary(&bundle).replace('\n', "; ")
        )));
    }
    Ok((bundle, cert))
}

fn names(a: &Poset, xs: impl IntoIterator<Item = usize>) -> Vec<String> {
    xs.into_iter().map(|x| a.label(x).to_string()).collect()
}

fn edge_names(a: &Poset, es: &[Edge]) -> Vec<[String; 2]> {
    es.iter()
        .map(|&(x, y)| [a.label(x).to_string(), a.label(y).to_string()])
        .collect()
}

impl Fence {
    pub fn to_json(&self, a: &Poset) -> serde_json::Value {
        serde_json::json!({
            "sequence": names(a, self.sequence()),
            "support": names(a, self.support.iter().copied()),
        })
    }
}

impl CounterexampleBundle {
    pub fn to_json(&self, cert: Option<&Certificate>) -> serde_json::Value {
        let a = &self.a;
        let lab = &self.labels;
        let cells: serde_json::Map<String, serde_json::Value> = Cell::ALL
            .iter()
            .map(|&c| {
                (
                    c.name().to_string(),
                    serde_json::json!(names(a, self.partition.members(c).iter())),
                )
            })
            .collect();
        let mut doc = serde_json::json!({
            "a0": a.label(self.disconnection.a0),
            "b0": a.label(self.disconnection.b0),
            "tree": edge_names(a, &self.tree.edges),
            "weight": self.weight,
            "return_path": names(a, self.disconnection.path.iter().copied()),
            "t0": edge_names(a, &self.disconnection.t0.edges),
            "fence_count": self.gamma0.len(),
            "fences": lab.fences.iter().map(|f| f.to_json(a)).collect::<Vec<_>>(),
            "n": lab.n,
            "M": lab.m,
            "C1": names(a, lab.c1.iter().copied()),
            "C2": names(a, lab.c2.iter()),
            "B1": names(a, lab.b1.iter()),
            "B*": names(a, lab.b_star.iter()),
            "partition": cells,
            "system": serde_json::to_value(self.system.to_doc()).expect("serializable"),
        });
        if let Some(c) = cert {
            doc["certificate"] = c.to_json(self);
        }
        doc
    }
}

impl Certificate {
    pub fn to_json(&self, b: &CounterexampleBundle) -> serde_json::Value {
        let (a, s) = (&b.a, &b.s);
        let atom = |&(g, y): &Atom| format!("X[{}]={}", a.label(g), s.label(y));
        serde_json::json!({
            "valid": self.valid(b.labels.n),
            "stochastically_monotone": self.monotone(),
            "monotone_violation": self.monotone_violation.map(|(x, y)| [a.label(x), a.label(y)]),
            "lp_infeasible": self.lp_infeasible(),
            "map_count": self.verdict.map_count,
            "farkas": serde_json::to_value(self.verdict.to_doc(&b.system)).expect("serializable")["certificate"].clone(),
            "events": self.events.events.iter().zip(&self.events.classes).map(|(e, c)| {
                serde_json::json!({ "event": atom(e), "equal_to": c.iter().map(atom).collect::<Vec<_>>() })
            }).collect::<Vec<_>>(),
            "events_disjoint": self.events.pairwise_disjoint,
            "event_mass": rational::format(&self.events.mass),
            "base_disjoint_from_a2": self.base_disjoint,
            "b_star_bound": self.b_star_bound,
            "cells_ok": self.cells_ok,
        })
    }

    /// Human-readable certificate.
    pub fn summary(&self, b: &CounterexampleBundle) -> String {
        let yes = |v: bool| if v { "yes" } else { "NO" };
        let n = b.labels.n;
        let mut out = String::new();
        out.push_str(&format!(
            "index poset: {} elements, target: {}-legged W_* poset (n = {n})\n",
            b.a.len(),
            n + 2
        ));
        out.push_str(&format!("stochastically monotone: {}\n", yes(self.monotone())));
        out.push_str(&format!(
            "LP over {} monotone maps infeasible with checked Farkas vector: {}\n",
            self.verdict.map_count,
            yes(self.lp_infeasible())
        ));
        out.push_str(&format!(
            "{} forced events pairwise disjoint: {}, total mass {} (> 1: {})\n",
            self.events.events.len(),
            yes(self.events.pairwise_disjoint),
            rational::format(&self.events.mass),
            yes(self.events.mass > Rational::one())
        ));
        out.push_str(&format!(
            "A0 and A2 disjoint: {}; b* bound: {}; cells: {}",
            yes(self.base_disjoint),
            yes(self.b_star_bound),
            yes(self.cells_ok)
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classw::{classify, WClass};

    fn standard_example() -> Poset {
        Poset::from_labels(
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
        .unwrap()
    }

    #[test]
    fn wstar_poset_shape() {
        assert!(build_wstar_poset(0).is_err());
        for n in 1..5 {
            let s = build_wstar_poset(n).unwrap();
            assert_eq!(s.len(), n + 3);
            assert_eq!(s.maximum(), Some(Z_INDEX));
            assert_eq!(classify(&s).class, WClass::WStarLower);
        }
    }

    #[test]
    fn standard_example_fences() {
        let a = standard_example();
        let b = build_bundle(&a, DEFAULT_FENCE_CAP).unwrap();
        let l = |x| a.index_of(x).unwrap();
        assert_eq!(b.weight, 6);
        assert_eq!(b.disconnection.a0, l("a0"));
        assert_eq!(b.disconnection.b0, l("b0"));
        assert_eq!(b.disconnection.t0.edges, vec![(l("b1"), l("b0"))]);
        assert_eq!(b.gamma0.len(), 2);
        assert_eq!(b.labels.n, 2);
        assert_eq!(b.labels.m, 1);
    }

    #[test]
    fn synchronizable_input_is_refused() {
        let a = Poset::from_labels(&["b0", "b1", "a"], &[("b0", "a"), ("b1", "a")]).unwrap();
        assert_eq!(build_bundle(&a, 100).unwrap_err(), Error::Synchronizable);
    }

    #[test]
    fn standard_example_certificate() {
        let a = standard_example();
        let (b, cert) = counterexample(&a, DEFAULT_FENCE_CAP, 20, oracle::DEFAULT_MAP_CAP).unwrap();
        assert!(cert.valid(2));
        assert_eq!(cert.events.mass, rational::ratio(4, 3));
        let p = &b.system.measures[a.index_of("a0").unwrap()];
        assert_eq!(p.mass(Z_INDEX), &rational::ratio(2, 3));
        assert_eq!(p.mass(y_index(0)), &rational::ratio(1, 3));
    }
}
