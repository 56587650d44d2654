//! Rooted-plane-tree decomposition of a tree-shaped Hasse diagram and the
//! Class W family of tags derived from it.
//!
//! The tree `(S, τ)` is rooted at a leaf `τ`; `x <=_τ y` holds when `y` lies
//! on the path from `τ` to `x`. The decomposition walks down from `τ`, cutting
//! the tree into maximal paths that stop at a vertex with zero or several
//! successors. Each path becomes a node of the index tree `K`.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poset::{Poset, Subset};

/// Index of a node of `K`. The root is always `0`.
pub type NodeId = usize;

pub const ROOT: NodeId = 0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RptNode {
    /// `u_1, ..., u_*` from top to bottom in `<=_τ`.
    pub path: Vec<usize>,
    /// Children in plane order.
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    /// Dotted address: `"1"` for the root, `"1.0"`, `"1.1"` for its children.
    pub address: String,
}

impl RptNode {
    pub fn head(&self) -> usize {
        self.path[0]
    }

    pub fn tail(&self) -> usize {
        *self.path.last().expect("paths are nonempty")
    }

    pub fn is_terminated(&self) -> bool {
        self.children.is_empty()
    }
}

/// Whether a section of `(S, τ)` is a down-set or an up-set of `S`.
/// `Both` is reserved for the empty and the full set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SectionKind {
    DownSet,
    UpSet,
    Both,
}

#[derive(Clone, Debug)]
pub struct RootedPlaneTree {
    tau: usize,
    nodes: Vec<RptNode>,
    labels: Vec<String>,
    parent_elem: Vec<Option<usize>>,
    depth: Vec<usize>,
    node_of: Vec<NodeId>,
    closed: Vec<Option<SectionKind>>,
    open: Vec<Option<SectionKind>>,
    tails_ok: bool,
}

/// Decomposes the Hasse tree of `s` rooted at the leaf `tau`.
pub fn build_rpt(s: &Poset, tau: usize) -> Result<RootedPlaneTree> {
    if !s.is_hasse_tree() {
        return Err(Error::NotTree);
    }
    if tau >= s.len() {
        return Err(Error::ForeignElement(tau));
    }
    if s.hasse_degree(tau) > 1 {
        return Err(Error::NotLeaf(s.label(tau).to_string()));
    }
    let n = s.len();
    let mut parent_elem = vec![None; n];
    let mut depth = vec![0; n];
    let mut succ = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    seen[tau] = true;
    let mut queue = VecDeque::from([tau]);
    while let Some(x) = queue.pop_front() {
        for y in s.hasse_neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                parent_elem[y] = Some(x);
                depth[y] = depth[x] + 1;
                succ[x].push(y);
                queue.push_back(y);
            }
        }
    }
    for v in succ.iter_mut() {
        v.sort_unstable();
    }

    let mut nodes: Vec<RptNode> = Vec::new();
    let mut node_of = vec![ROOT; n];
    // (head element, parent node, address)
    let mut stack = vec![(tau, None::<NodeId>, "1".to_string())];
    while let Some((head, parent, address)) = stack.pop() {
        let id = nodes.len();
        let mut path = vec![head];
        let mut cur = head;
        while succ[cur].len() == 1 {
            cur = succ[cur][0];
            path.push(cur);
        }
        for &x in &path {
            node_of[x] = id;
        }
        if let Some(p) = parent {
            nodes[p].children.push(id);
        }
        nodes.push(RptNode {
            path,
            children: Vec::new(),
            parent,
            address: address.clone(),
        });
        // Push in reverse so that children are created in plane order.
        for (i, &c) in succ[cur].iter().enumerate().rev() {
            stack.push((c, Some(id), format!("{address}.{i}")));
        }
    }

    let mut rpt = RootedPlaneTree {
        tau,
        nodes,
        labels: s.labels().to_vec(),
        parent_elem,
        depth,
        node_of,
        closed: Vec::new(),
        open: Vec::new(),
        tails_ok: true,
    };
    let mut closed = Vec::with_capacity(n);
    let mut open = Vec::with_capacity(n);
    for x in s.elements() {
        let sec = rpt.closed_section(x);
        closed.push(kind_of(s, &sec));
        let open_sec: Subset = sec.iter().filter(|&z| z != x).collect();
        open.push(kind_of(s, &open_sec));
    }
    rpt.closed = closed;
    rpt.open = open;
    rpt.tails_ok = rpt
        .nodes
        .iter()
        .filter(|k| !k.children.is_empty())
        .all(|k| is_extremal(s, k.tail()));
    Ok(rpt)
}

fn kind_of(s: &Poset, sec: &Subset) -> Option<SectionKind> {
    let down = s.is_down_set(sec).unwrap_or(false);
    let up = s.is_up_set(sec).unwrap_or(false);
    match (down, up) {
        (true, true) => Some(SectionKind::Both),
        (true, false) => Some(SectionKind::DownSet),
        (false, true) => Some(SectionKind::UpSet),
        (false, false) => None,
    }
}

fn is_extremal(s: &Poset, x: usize) -> bool {
    s.upper_covers(x).is_empty() || s.lower_covers(x).is_empty()
}

impl RootedPlaneTree {
    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn nodes(&self) -> &[RptNode] {
        &self.nodes
    }

    pub fn node(&self, k: NodeId) -> &RptNode {
        &self.nodes[k]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn element_count(&self) -> usize {
        self.labels.len()
    }

    /// The node whose path contains `x`.
    pub fn node_of(&self, x: usize) -> NodeId {
        self.node_of[x]
    }

    /// Parent of `x` in the rooted tree `(S, τ)`, i.e. its upper neighbour in `<=_τ`.
    pub fn parent_element(&self, x: usize) -> Option<usize> {
        self.parent_elem[x]
    }

    /// Distance from `τ` in the Hasse tree.
    pub fn depth(&self, x: usize) -> usize {
        self.depth[x]
    }

    /// `x <=_τ y`: the path from `τ` to `x` passes through `y`.
    pub fn rooted_leq(&self, x: usize, y: usize) -> Result<bool> {
        let n = self.labels.len();
        if x >= n {
            return Err(Error::ForeignElement(x));
        }
        if y >= n {
            return Err(Error::ForeignElement(y));
        }
        let mut cur = x;
        while self.depth[cur] > self.depth[y] {
            cur = self.parent_elem[cur].expect("non-root has a parent");
        }
        Ok(cur == y)
    }

    /// `(←, x]`: all `z` with `z <=_τ x`.
    pub fn closed_section(&self, x: usize) -> Subset {
        (0..self.labels.len())
            .filter(|&z| self.rooted_leq(z, x).unwrap_or(false))
            .collect()
    }

    /// Kinds of `(←, x]` and `(←, x)` in `S`. Fails when either section is
    /// neither a down-set nor an up-set, which cannot happen in Class W.
    pub fn section_kind(&self, x: usize) -> Result<(SectionKind, SectionKind)> {
        if x >= self.labels.len() {
            return Err(Error::ForeignElement(x));
        }
        match (self.closed[x], self.open[x]) {
            (Some(c), Some(o)) => Ok((c, o)),
            _ => Err(Error::NotClassW(self.labels[x].clone())),
        }
    }

    /// Kind of the closed section `(←, x]`. Always defined on a Hasse tree.
    pub fn closed_kind(&self, x: usize) -> Option<SectionKind> {
        self.closed[x]
    }

    /// True when every tail with children is minimal or maximal.
    pub fn tails_extremal(&self) -> bool {
        self.tails_ok
    }

    /// Post-order of `K`: children in plane order, then the parent.
    pub fn lex_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(ROOT, false)];
        while let Some((k, expanded)) = stack.pop() {
            if expanded {
                out.push(k);
            } else {
                stack.push((k, true));
                for &c in self.nodes[k].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// `û^(κ)`: the path prefixed with the parent's tail for non-root nodes.
    pub fn extended_path(&self, k: NodeId) -> Vec<usize> {
        let node = &self.nodes[k];
        match node.parent {
            None => node.path.clone(),
            Some(p) => std::iter::once(self.nodes[p].tail())
                .chain(node.path.iter().copied())
                .collect(),
        }
    }

    pub fn node_by_address(&self, address: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.address == address)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut nodes = BTreeMap::new();
        for n in &self.nodes {
            let path: Vec<&str> = n.path.iter().map(|&x| self.labels[x].as_str()).collect();
            let children: Vec<&str> = n
                .children
                .iter()
                .map(|&c| self.nodes[c].address.as_str())
                .collect();
            nodes.insert(
                n.address.clone(),
                serde_json::json!({ "path": path, "children": children }),
            );
        }
        serde_json::json!({ "root": self.labels[self.tau], "nodes": nodes })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum WClass {
    NotTree,
    NotClassW,
    UpDown,
    /// Branching tails are all minimal.
    WStarUpper,
    /// Branching tails are all maximal.
    WStarLower,
    GeneralW,
}

impl WClass {
    pub fn is_class_w(self) -> bool {
        !matches!(self, WClass::NotTree | WClass::NotClassW)
    }

    /// Membership in the class whose branching points are maximal
    /// (up-down posets included).
    pub fn in_w_lower(self) -> bool {
        matches!(self, WClass::WStarLower | WClass::UpDown)
    }

    pub fn in_w_upper(self) -> bool {
        matches!(self, WClass::WStarUpper | WClass::UpDown)
    }
}

/// Four elements inducing a Y-shaped subposet: `legs < center < stem`, or the
/// reverse when `inverted`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct YWitness {
    pub legs: (usize, usize),
    pub center: usize,
    pub stem: usize,
    pub inverted: bool,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub class: WClass,
    pub rpt: Option<RootedPlaneTree>,
    /// A branching tail that is neither minimal nor maximal.
    pub bad_tail: Option<usize>,
    /// Result of the independent induced-pattern search.
    pub induced_y: Option<YWitness>,
}

impl Classification {
    /// The tail test and the induced-Y search agree.
    pub fn consistent(&self) -> bool {
        match self.class {
            WClass::NotTree => true,
            WClass::NotClassW => self.induced_y.is_some(),
            _ => self.induced_y.is_none(),
        }
    }
}

/// Tag from the tails of an existing decomposition.
pub fn class_from_rpt(s: &Poset, rpt: &RootedPlaneTree) -> (WClass, Option<usize>) {
    let branching: Vec<usize> = rpt
        .nodes()
        .iter()
        .filter(|k| !k.children.is_empty())
        .map(|k| k.tail())
        .collect();
    if let Some(&bad) = branching.iter().find(|&&t| !is_extremal(s, t)) {
        return (WClass::NotClassW, Some(bad));
    }
    if rpt.node(ROOT).children.is_empty() {
        return (WClass::UpDown, None);
    }
    let all_max = branching.iter().all(|&t| s.upper_covers(t).is_empty());
    let all_min = branching.iter().all(|&t| s.lower_covers(t).is_empty());
    let class = match (all_max, all_min) {
        (true, _) => WClass::WStarLower,
        (false, true) => WClass::WStarUpper,
        (false, false) => WClass::GeneralW,
    };
    (class, None)
}

/// Classifies `s`, rooting the decomposition at its first leaf.
pub fn classify(s: &Poset) -> Classification {
    let induced_y = find_induced_y(s);
    if !s.is_hasse_tree() {
        return Classification {
            class: WClass::NotTree,
            rpt: None,
            bad_tail: None,
            induced_y,
        };
    }
    let tau = s.hasse_leaves()[0];
    let rpt = build_rpt(s, tau).expect("leaf of a tree");
    let (class, bad_tail) = class_from_rpt(s, &rpt);
    Classification {
        class,
        rpt: Some(rpt),
        bad_tail,
        induced_y,
    }
}

/// Searches for an induced Y-poset by looking at every candidate center.
pub fn find_induced_y(s: &Poset) -> Option<YWitness> {
    for c in s.elements() {
        let below: Vec<usize> = s.elements().filter(|&x| s.lt(x, c)).collect();
        let above: Vec<usize> = s.elements().filter(|&x| s.lt(c, x)).collect();
        if let (Some(legs), Some(&stem)) = (incomparable_pair(s, &below), above.first()) {
            return Some(YWitness {
                legs,
                center: c,
                stem,
                inverted: false,
            });
        }
        if let (Some(legs), Some(&stem)) = (incomparable_pair(s, &above), below.first()) {
            return Some(YWitness {
                legs,
                center: c,
                stem,
                inverted: true,
            });
        }
    }
    None
}

fn incomparable_pair(s: &Poset, xs: &[usize]) -> Option<(usize, usize)> {
    for (i, &a) in xs.iter().enumerate() {
        for &b in &xs[i + 1..] {
            if !s.comparable(a, b) {
                return Some((a, b));
            }
        }
    }
    None
}
