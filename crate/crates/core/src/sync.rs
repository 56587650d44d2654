//! Interlaced-relation graphs on the minimal (or maximal) elements of an
//! index poset, Θ-length spanning trees and synchronizability.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poset::{Poset, Subset};

/// Which extremal elements span the graph. `Maximal` works on the dual
/// poset; element indices are shared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    Minimal,
    Maximal,
}

impl Direction {
    pub fn orient(self, a: &Poset) -> Poset {
        match self {
            Direction::Minimal => a.clone(),
            Direction::Maximal => a.dual(),
        }
    }
}

pub type Edge = (usize, usize);

fn edge(a: usize, b: usize) -> Edge {
    (a.min(b), a.max(b))
}

/// Simple undirected graph on a set of element indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Graph {
    pub vertices: Vec<usize>,
    pub edges: Vec<Edge>,
}

impl Graph {
    pub fn new(vertices: Vec<usize>, edges: impl IntoIterator<Item = Edge>) -> Graph {
        let mut vertices = vertices;
        vertices.sort_unstable();
        vertices.dedup();
        let edges: BTreeSet<Edge> = edges.into_iter().map(|(a, b)| edge(a, b)).collect();
        Graph {
            vertices,
            edges: edges.into_iter().collect(),
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&edge(a, b)).is_ok()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Connectivity of the subgraph induced on `within`.
    pub fn connected_on(&self, within: &[usize]) -> bool {
        connected(within, self.edges.iter().copied())
    }

    pub fn is_connected(&self) -> bool {
        self.connected_on(&self.vertices)
    }

    pub fn labelled(&self, p: &Poset) -> serde_json::Value {
        let edges: Vec<[&str; 2]> = self
            .edges
            .iter()
            .map(|&(a, b)| [p.label(a), p.label(b)])
            .collect();
        let vertices: Vec<&str> = self.vertices.iter().map(|&v| p.label(v)).collect();
        serde_json::json!({ "vertices": vertices, "edges": edges })
    }
}

fn connected(within: &[usize], edges: impl Iterator<Item = Edge>) -> bool {
    let Some(&start) = within.first() else {
        return true;
    };
    let inside: BTreeSet<usize> = within.iter().copied().collect();
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for (a, b) in edges {
        if inside.contains(&a) && inside.contains(&b) {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
    }
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == inside.len()
}

/// A spanning tree is a graph with `|V| − 1` edges that is connected.
pub type SpanningTree = Graph;

/// `G_A`: minimal elements, joined when they share a strict upper bound.
pub fn interlaced_graph(a: &Poset) -> Graph {
    let d = a.minimal_elements();
    let mut edges = Vec::new();
    for (i, b) in d.iter().enumerate() {
        for c in d.iter().skip(i + 1) {
            if a.elements().any(|x| a.lt(b, x) && a.lt(c, x)) {
                edges.push((b, c));
            }
        }
    }
    Graph::new(d.as_slice().to_vec(), edges)
}

/// `Θ(β,β′) = {γ ∈ D_A : A(β) ∩ A(β′) ⊆ A(γ)}`.
pub fn theta_set(a: &Poset, e: Edge) -> Subset {
    let common: Vec<usize> = a
        .elements()
        .filter(|&x| a.leq(e.0, x) && a.leq(e.1, x))
        .collect();
    a.minimal_elements()
        .iter()
        .filter(|&g| common.iter().all(|&x| a.leq(g, x)))
        .collect()
}

/// `Θ(β,β′)` as the intersection of `D_A(α)` over common upper bounds `α`.
pub fn theta_cap(a: &Poset, e: Edge) -> Subset {
    let mut acc = a.minimal_elements();
    for x in a.elements() {
        if a.leq(e.0, x) && a.leq(e.1, x) {
            acc = acc.intersection(&a.d_set(x).expect("element of a"));
        }
    }
    acc
}

pub fn theta(a: &Poset, e: Edge) -> usize {
    theta_set(a, e).len()
}

pub fn lengths(a: &Poset, g: &Graph) -> HashMap<Edge, usize> {
    g.edges.iter().map(|&e| (e, theta(a, e))).collect()
}

pub fn weight(t: &Graph, len: &HashMap<Edge, usize>) -> usize {
    t.edges.iter().map(|e| len[e]).sum()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Minimum-weight spanning tree. Ties are broken by endpoint input order.
pub fn kruskal(g: &Graph, len: &HashMap<Edge, usize>) -> Result<SpanningTree> {
    let mut order = g.edges.clone();
    order.sort_by_key(|e| (len[e], e.0, e.1));
    let n = g.vertices.iter().max().map_or(0, |m| m + 1);
    let mut uf = UnionFind::new(n);
    let mut chosen = Vec::new();
    for e in order {
        if uf.union(e.0, e.1) {
            chosen.push(e);
        }
    }
    if chosen.len() + 1 != g.vertices.len() && !g.vertices.is_empty() {
        return Err(Error::DisconnectedGraph);
    }
    Ok(Graph::new(g.vertices.clone(), chosen))
}

/// First `α` (input order) for which `T ∩ D_A(α)` is disconnected.
pub fn local_connectivity_violation(t: &SpanningTree, a: &Poset) -> Option<usize> {
    a.elements().find(|&x| {
        let d = a.d_set(x).expect("element of a");
        !t.connected_on(d.as_slice())
    })
}

pub fn is_locally_connected(t: &SpanningTree, a: &Poset) -> bool {
    local_connectivity_violation(t, a).is_none()
}

#[derive(Clone, Debug, Serialize)]
pub struct SyncReport {
    pub direction: Direction,
    pub synchronizable: bool,
    pub graph: Graph,
    /// Θ-length minimum spanning tree, absent when the graph is disconnected.
    pub mst: Option<SpanningTree>,
    pub weight: Option<usize>,
    /// Element whose extremal set the tree fails to connect.
    pub violating: Option<usize>,
    pub graph_disconnected: bool,
}

impl SyncReport {
    pub fn to_json(&self, a: &Poset) -> serde_json::Value {
        serde_json::json!({
            "direction": self.direction,
            "synchronizable": self.synchronizable,
            "graph": self.graph.labelled(a),
            "tree": self.mst.as_ref().map(|t| t.labelled(a)),
            "weight": self.weight,
            "violating": self.violating.map(|v| a.label(v)),
            "graph_disconnected": self.graph_disconnected,
        })
    }
}

/// Decides synchronizability from the Θ-length MST, which is locally
/// connected exactly when some spanning tree is.
pub fn is_synchronizable(a: &Poset, dir: Direction) -> SyncReport {
    let p = dir.orient(a);
    let g = interlaced_graph(&p);
    let len = lengths(&p, &g);
    match kruskal(&g, &len) {
        Err(_) => SyncReport {
            direction: dir,
            synchronizable: false,
            graph: g,
            mst: None,
            weight: None,
            violating: None,
            graph_disconnected: true,
        },
        Ok(t) => {
            let violating = local_connectivity_violation(&t, &p);
            SyncReport {
                direction: dir,
                synchronizable: violating.is_none(),
                weight: Some(weight(&t, &len)),
                graph: g,
                mst: Some(t),
                violating,
                graph_disconnected: false,
            }
        }
    }
}

/// Every spanning tree of `g`, by include/exclude recursion over the edges.
pub fn all_spanning_trees(g: &Graph, cap: usize) -> Result<Vec<SpanningTree>> {
    let need = g.vertices.len().saturating_sub(1);
    let n = g.vertices.iter().max().map_or(0, |m| m + 1);
    let mut out = Vec::new();
    fn rec(
        g: &Graph,
        i: usize,
        chosen: &mut Vec<Edge>,
        need: usize,
        n: usize,
        cap: usize,
        out: &mut Vec<SpanningTree>,
    ) -> Result<()> {
        if chosen.len() == need {
            if out.len() >= cap {
                return Err(Error::CapExceeded {
                    what: "spanning-tree",
                    cap,
                });
            }
            out.push(Graph::new(g.vertices.clone(), chosen.iter().copied()));
            return Ok(());
        }
        if g.edges.len() - i < need - chosen.len() {
            return Ok(());
        }
        let e = g.edges[i];
        let mut uf = UnionFind::new(n);
        for &(a, b) in chosen.iter() {
            uf.union(a, b);
        }
        if uf.find(e.0) != uf.find(e.1) {
            chosen.push(e);
            rec(g, i + 1, chosen, need, n, cap, out)?;
            chosen.pop();
        }
        rec(g, i + 1, chosen, need, n, cap, out)
    }
    if g.vertices.is_empty() {
        return Ok(out);
    }
    rec(g, 0, &mut Vec::new(), need, n, cap, &mut out)?;
    Ok(out)
}

/// Unique path between two vertices of a tree.
pub fn tree_path(t: &SpanningTree, from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    prev.insert(from, from);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut c = to;
            while c != from {
                c = prev[&c];
                path.push(c);
            }
            path.reverse();
            return Some(path);
        }
        let mut nb = t.neighbors(v);
        nb.sort_unstable();
        for w in nb {
            if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(w) {
                e.insert(v);
                queue.push_back(w);
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Swap {
    pub added: Edge,
    pub removed: Edge,
    pub weight: usize,
}

/// Edge swaps turning `t0` into the minimum-weight tree `tk` with
/// non-increasing weight at every step.
pub fn descend(
    g: &Graph,
    len: &HashMap<Edge, usize>,
    t0: &SpanningTree,
    tk: &SpanningTree,
) -> Result<Vec<Swap>> {
    let min = weight(&kruskal(g, len)?, len);
    let wk = weight(tk, len);
    if wk != min {
        return Err(Error::NotMinimumWeight { got: wk, min });
    }
    let rank = |e: &Edge| {
        if tk.has_edge(e.0, e.1) {
            0
        } else if t0.has_edge(e.0, e.1) {
            2
        } else {
            1
        }
    };
    let key = |e: &Edge| (len[e], rank(e), e.0, e.1);
    let mut order = g.edges.clone();
    order.sort_by_key(key);
    let pos: HashMap<Edge, usize> = order.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut cur = t0.clone();
    let mut swaps = Vec::new();
    for &e in &order {
        if cur.has_edge(e.0, e.1) {
            continue;
        }
        let path = tree_path(&cur, e.0, e.1).ok_or(Error::DisconnectedGraph)?;
        let worst = path
            .windows(2)
            .map(|w| edge(w[0], w[1]))
            .max_by_key(|f| pos[f])
            .expect("distinct endpoints");
        if pos[&worst] > pos[&e] {
            let edges = cur
                .edges
                .iter()
                .copied()
                .filter(|&f| f != worst)
                .chain(std::iter::once(e));
            cur = Graph::new(cur.vertices.clone(), edges);
            swaps.push(Swap {
                added: e,
                removed: worst,
                weight: weight(&cur, len),
            });
        }
    }
    if cur != *tk {
        return Err(Error::Internal("descent did not reach the target tree".into()));
    }
    Ok(swaps)
}

pub type ProductVertex = (usize, usize);

/// `T □ T*` restricted to comparable pairs `α <= β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductGraph {
    pub vertices: Vec<ProductVertex>,
    adj: HashMap<ProductVertex, Vec<ProductVertex>>,
}

impl ProductGraph {
    pub fn neighbors(&self, v: ProductVertex) -> &[ProductVertex] {
        self.adj.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, v: ProductVertex) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.vertices.first() else {
            return true;
        };
        self.distances(start).len() == self.vertices.len()
    }

    fn distances(&self, from: ProductVertex) -> HashMap<ProductVertex, usize> {
        let mut dist = HashMap::from([(from, 0)]);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            for &w in self.neighbors(v) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// A shortest path, choosing the smallest neighbour at every step.
    pub fn min_path(&self, from: ProductVertex, to: ProductVertex) -> Option<Vec<ProductVertex>> {
        let dist = self.distances(to);
        let mut d = *dist.get(&from)?;
        let mut path = vec![from];
        let mut cur = from;
        while d > 0 {
            cur = *self
                .neighbors(cur)
                .iter()
                .filter(|w| dist.get(w) == Some(&(d - 1)))
                .min()?;
            path.push(cur);
            d -= 1;
        }
        Some(path)
    }

    /// All shortest paths, up to `cap` of them.
    pub fn all_min_paths(
        &self,
        from: ProductVertex,
        to: ProductVertex,
        cap: usize,
    ) -> Vec<Vec<ProductVertex>> {
        let dist = self.distances(to);
        let Some(&d0) = dist.get(&from) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut stack = vec![vec![from]];
        while let Some(path) = stack.pop() {
            if out.len() >= cap {
                break;
            }
            let last = *path.last().unwrap();
            let d = d0 + 1 - path.len();
            if d == 0 {
                out.push(path);
                continue;
            }
            for &w in self.neighbors(last) {
                if dist.get(&w) == Some(&(d - 1)) {
                    let mut p = path.clone();
                    p.push(w);
                    stack.push(p);
                }
            }
        }
        out
    }
}

/// `t` spans the minimal elements, `tstar` the maximal elements of `a`.
pub fn product_graph(t: &SpanningTree, tstar: &SpanningTree, a: &Poset) -> Result<ProductGraph> {
    let mut vertices = Vec::new();
    for &x in &t.vertices {
        for &y in &tstar.vertices {
            if a.leq(x, y) {
                vertices.push((x, y));
            }
        }
    }
    let inside: BTreeSet<ProductVertex> = vertices.iter().copied().collect();
    let mut adj: HashMap<ProductVertex, Vec<ProductVertex>> =
        vertices.iter().map(|&v| (v, Vec::new())).collect();
    for &(x, y) in &vertices {
        for x2 in t.neighbors(x) {
            if inside.contains(&(x2, y)) {
                adj.get_mut(&(x, y)).unwrap().push((x2, y));
            }
        }
        for y2 in tstar.neighbors(y) {
            if inside.contains(&(x, y2)) {
                adj.get_mut(&(x, y)).unwrap().push((x, y2));
            }
        }
    }
    for v in adj.values_mut() {
        v.sort_unstable();
    }
    let pg = ProductGraph { vertices, adj };
    if !pg.is_connected() {
        return Err(Error::DisconnectedProduct);
    }
    Ok(pg)
}

/// `Φ_Ξ = Φ_{e_N} ∘ … ∘ Φ_{e_1}` along a vertex path, with `identity` for
/// the empty path.
pub fn compose_along<T, V: Copy>(
    path: &[V],
    identity: T,
    mut step: impl FnMut(V, V) -> Result<T>,
    mut then: impl FnMut(&T, &T) -> Result<T>,
) -> Result<T> {
    let mut acc = identity;
    for w in path.windows(2) {
        let phi = step(w[0], w[1])?;
        acc = then(&acc, &phi)?;
    }
    Ok(acc)
}
