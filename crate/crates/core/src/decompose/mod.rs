//! Two-terminal series-parallel recognition and binary parse trees.
//!
//! A [`DecompTree`] is an arena of [`DecompNode`]s. Every node knows its
//! terminal pair `(a, b)` in a fixed orientation: a series node's left child
//! spans `(a, c)` and its right child `(c, b)`; both children of a parallel
//! node span `(a, b)`. Each node also records which of the problem's source
//! and sink lie strictly inside it, which decides the shape of its DP tuples.

mod reduce;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::graph::{EdgeIdx, EdgeRecord, MultiGraph, VertexId};

pub use reduce::decompose;

pub type NodeId = usize;

/// Which of the source and sink lie strictly inside a subgraph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Specials {
    pub s: bool,
    pub t: bool,
}

impl Specials {
    pub const NONE: Specials = Specials { s: false, t: false };

    pub fn union(self, other: Specials) -> Specials {
        Specials { s: self.s || other.s, t: self.t || other.t }
    }

    pub fn count(self) -> usize {
        self.s as usize + self.t as usize
    }

    pub fn is_empty(self) -> bool {
        !self.s && !self.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Leaf { edge: EdgeIdx },
    Series { join: VertexId, left: NodeId, right: NodeId },
    Parallel { left: NodeId, right: NodeId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompNode {
    pub kind: NodeKind,
    pub terminals: (VertexId, VertexId),
    pub specials: Specials,
    pub parent: Option<NodeId>,
}

impl DecompNode {
    pub fn children(&self) -> Option<(NodeId, NodeId)> {
        match self.kind {
            NodeKind::Leaf { .. } => None,
            NodeKind::Series { left, right, .. } | NodeKind::Parallel { left, right } => Some((left, right)),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("graph has no edges")]
    Empty,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("not series-parallel ({pairs_tried} terminal pair(s) tried; {witness})")]
    NotSeriesParallel { pairs_tried: usize, witness: Witness },
    #[error("decomposition tree violates invariant at node {node}: {reason}")]
    Corrupt { node: NodeId, reason: String },
}

/// The irreducible remainder left by series/parallel reductions for the
/// first terminal pair tried.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub terminals: (VertexId, VertexId),
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "terminals ({}, {}) leave an irreducible kernel of {} vertices and {} edges",
            self.terminals.0,
            self.terminals.1,
            self.vertices.len(),
            self.edges.len()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompTree {
    nodes: Vec<DecompNode>,
    root: NodeId,
    edges: Vec<EdgeRecord>,
    vertex_count: usize,
    source: VertexId,
    sink: VertexId,
}

impl DecompTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &DecompNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[DecompNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    pub fn terminals(&self) -> (VertexId, VertexId) {
        self.nodes[self.root].terminals
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Leaf { .. })).count()
    }

    /// Node ids with children before parents, left subtree before right.
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            match self.nodes[id].children() {
                Some((l, r)) if !expanded => {
                    stack.push((id, true));
                    stack.push((r, false));
                    stack.push((l, false));
                }
                _ => order.push(id),
            }
        }
        order
    }

    /// Edge indices of the leaves under `id`.
    pub fn leaf_edges(&self, id: NodeId) -> Vec<EdgeIdx> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            match self.nodes[x].kind {
                NodeKind::Leaf { edge } => out.push(edge),
                NodeKind::Series { left, right, .. } | NodeKind::Parallel { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    /// Specials a node must carry given its children and terminals.
    fn derived_specials(&self, id: NodeId) -> Specials {
        let node = &self.nodes[id];
        match node.kind {
            NodeKind::Leaf { .. } => Specials::NONE,
            NodeKind::Parallel { left, right } => self.nodes[left].specials.union(self.nodes[right].specials),
            NodeKind::Series { join, left, right } => {
                let (a, b) = node.terminals;
                let inner = self.nodes[left].specials.union(self.nodes[right].specials);
                let at_join = Specials { s: join == self.source, t: join == self.sink };
                let merged = inner.union(at_join);
                Specials {
                    s: merged.s && self.source != a && self.source != b,
                    t: merged.t && self.sink != a && self.sink != b,
                }
            }
        }
    }

    /// Checks the structural invariants: binary shape, terminal agreement
    /// between parents and children, parent links, leaf/edge bijection, and
    /// the special-vertex propagation rule.
    pub fn validate(&self) -> Result<(), DecomposeError> {
        let corrupt = |node: NodeId, reason: String| Err(DecomposeError::Corrupt { node, reason });
        let mut seen_edges = vec![false; self.edges.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            let (a, b) = node.terminals;
            match node.kind {
                NodeKind::Leaf { edge } => {
                    let Some(e) = self.edges.get(edge) else {
                        return corrupt(id, format!("leaf refers to missing edge {edge}"));
                    };
                    if !((e.u, e.v) == (a, b) || (e.v, e.u) == (a, b)) {
                        return corrupt(id, "leaf terminals differ from edge endpoints".into());
                    }
                    if std::mem::replace(&mut seen_edges[edge], true) {
                        return corrupt(id, format!("edge {} appears twice", e.id));
                    }
                }
                NodeKind::Series { join, left, right } => {
                    if self.nodes[left].terminals != (a, join) || self.nodes[right].terminals != (join, b) {
                        return corrupt(id, "series children do not meet at the join vertex".into());
                    }
                }
                NodeKind::Parallel { left, right } => {
                    if self.nodes[left].terminals != (a, b) || self.nodes[right].terminals != (a, b) {
                        return corrupt(id, "parallel children have different terminals".into());
                    }
                }
            }
            if let Some((l, r)) = node.children() {
                if self.nodes[l].parent != Some(id) || self.nodes[r].parent != Some(id) {
                    return corrupt(id, "child parent link mismatch".into());
                }
            }
            if node.specials != self.derived_specials(id) {
                return corrupt(id, "special-vertex flags disagree with children".into());
            }
        }
        if let Some(missing) = seen_edges.iter().position(|s| !s) {
            return corrupt(self.root, format!("edge {} has no leaf", self.edges[missing].id));
        }
        if self.nodes[self.root].parent.is_some() {
            return corrupt(self.root, "root has a parent".into());
        }
        if self.nodes.len() != 2 * self.edges.len() - 1 {
            return corrupt(self.root, "tree is not binary".into());
        }
        Ok(())
    }

    fn write_node(&self, id: NodeId, out: &mut String) {
        match self.nodes[id].kind {
            NodeKind::Leaf { edge } => {
                out.push_str("L(");
                out.push_str(&self.edges[edge].id);
                out.push(')');
            }
            NodeKind::Series { join, left, right } => {
                out.push_str("S(");
                self.write_node(left, out);
                out.push(',');
                self.write_node(right, out);
                out.push_str(&format!(")@{join}"));
            }
            NodeKind::Parallel { left, right } => {
                out.push_str("P(");
                self.write_node(left, out);
                out.push(',');
                self.write_node(right, out);
                out.push(')');
            }
        }
    }

    /// Rebuilds the multigraph by composing leaves bottom-up on fresh vertex
    /// ids. The root terminals become vertices 0 and 1 and are declared as
    /// terminals; source and sink follow the vertices they label in the tree.
    pub fn recompose(&self) -> MultiGraph {
        // Each composed piece maps its local terminals to fresh ids; `label`
        // remembers which tree vertex each fresh id stands for.
        let mut label: Vec<VertexId> = Vec::new();
        let mut edges: Vec<Option<EdgeRecord>> = vec![None; self.edges.len()];
        let (ra, rb) = self.terminals();
        label.push(ra);
        label.push(rb);
        let mut stack = vec![(self.root, 0usize, 1usize)];
        while let Some((id, fa, fb)) = stack.pop() {
            match self.nodes[id].kind {
                NodeKind::Leaf { edge } => {
                    let e = &self.edges[edge];
                    edges[edge] = Some(EdgeRecord { u: fa, v: fb, ..e.clone() });
                }
                NodeKind::Series { join, left, right } => {
                    let fc = label.len();
                    label.push(join);
                    stack.push((right, fc, fb));
                    stack.push((left, fa, fc));
                }
                NodeKind::Parallel { left, right } => {
                    stack.push((right, fa, fb));
                    stack.push((left, fa, fb));
                }
            }
        }
        let fresh: HashMap<VertexId, VertexId> = label.iter().enumerate().map(|(f, &v)| (v, f)).collect();
        let source = fresh[&self.source];
        let sink = fresh[&self.sink];
        let edges = edges.into_iter().map(|e| e.expect("every edge has a leaf")).collect();
        MultiGraph::new(label.len(), edges, source, sink, Some((0, 1))).expect("recomposed graph is valid")
    }
}

impl fmt::Display for DecompTree {
    /// Parenthesized form, e.g. `P(S(L(e1),L(e2))@1,L(e3))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write_node(self.root, &mut out);
        f.write_str(&out)
    }
}

/// Checks that `h` is `g` up to a vertex relabeling that keeps edge ids,
/// maps each `(x, y)` in `pins` as given, and maps source to source and sink
/// to sink.
pub fn isomorphic_by_edge_ids(g: &MultiGraph, h: &MultiGraph, pins: &[(VertexId, VertexId)]) -> bool {
    if g.vertex_count() != h.vertex_count() || g.edge_count() != h.edge_count() {
        return false;
    }
    let by_id: HashMap<&str, &EdgeRecord> = h.edges().iter().map(|e| (e.id.as_str(), e)).collect();
    if by_id.len() != h.edge_count() {
        return false;
    }
    let mut map: Vec<Option<VertexId>> = vec![None; g.vertex_count()];
    let mut pinned = pins.to_vec();
    pinned.push((g.source(), h.source()));
    pinned.push((g.sink(), h.sink()));
    for (x, y) in pinned {
        match map[x] {
            Some(prev) if prev != y => return false,
            _ => map[x] = Some(y),
        }
    }
    // propagate along edges until every vertex is mapped
    let mut changed = true;
    while changed {
        changed = false;
        for e in g.edges() {
            let Some(o) = by_id.get(e.id.as_str()) else {
                return false;
            };
            if (e.cost, e.capacity) != (o.cost, o.capacity) {
                return false;
            }
            for (x, y) in [(e.u, e.v), (e.v, e.u)] {
                if let (Some(mx), None) = (map[x], map[y]) {
                    if mx != o.u && mx != o.v {
                        return false;
                    }
                    map[y] = Some(if mx == o.u { o.v } else { o.u });
                    changed = true;
                }
            }
        }
    }
    let Some(map): Option<Vec<VertexId>> = map.into_iter().collect() else {
        return false;
    };
    let mut hit = vec![false; h.vertex_count()];
    for &y in &map {
        if std::mem::replace(&mut hit[y], true) {
            return false;
        }
    }
    g.edges().iter().all(|e| {
        let o = by_id[e.id.as_str()];
        let (u, v) = (map[e.u], map[e.v]);
        (u, v) == (o.u, o.v) || (v, u) == (o.u, o.v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeRecord;

    pub(crate) fn diamond() -> MultiGraph {
        let edges = vec![
            EdgeRecord::new("e1", 0, 1, 1, 2),
            EdgeRecord::new("e2", 1, 2, 1, 2),
            EdgeRecord::new("e3", 0, 2, 3, 1),
        ];
        MultiGraph::new(3, edges, 0, 2, Some((0, 2))).unwrap()
    }

    #[test]
    fn single_edge() {
        let g = MultiGraph::new(2, vec![EdgeRecord::new("e1", 0, 1, 5, 7)], 0, 1, None).unwrap();
        let tree = decompose(&g).unwrap();
        assert_eq!(tree.to_string(), "L(e1)");
        assert_eq!(tree.terminals(), (0, 1));
        assert_eq!(tree.postorder(), vec![tree.root()]);
        assert!(isomorphic_by_edge_ids(&g, &tree.recompose(), &[(0, 0), (1, 1)]));
    }

    #[test]
    fn diamond_tree_shape_and_postorder() {
        let g = diamond();
        let tree = decompose(&g).unwrap();
        assert_eq!(tree.to_string(), "P(S(L(e1),L(e2))@1,L(e3))");
        let kinds: Vec<String> = tree
            .postorder()
            .into_iter()
            .map(|id| match tree.node(id).kind {
                NodeKind::Leaf { edge } => tree.edges()[edge].id.clone(),
                NodeKind::Series { .. } => "S".into(),
                NodeKind::Parallel { .. } => "P".into(),
            })
            .collect();
        assert_eq!(kinds, ["e1", "e2", "S", "e3", "P"]);
        assert_eq!(tree.len(), 2 * 3 - 1);
        let h = tree.recompose();
        assert_eq!((h.vertex_count(), h.edge_count()), (3, 3));
        assert!(isomorphic_by_edge_ids(&g, &h, &[(0, 0), (2, 1)]));
    }

    #[test]
    fn series_composition_is_a_path() {
        let edges = vec![EdgeRecord::new("e1", 0, 1, 1, 1), EdgeRecord::new("e2", 1, 2, 1, 1)];
        let g = MultiGraph::new(3, edges, 0, 2, None).unwrap();
        let tree = decompose(&g).unwrap();
        assert_eq!(tree.to_string(), "S(L(e1),L(e2))@1");
        let h = tree.recompose();
        // path a - c - b with the join as the middle vertex
        let mid = h.edges()[0].other(0);
        assert_eq!(h.edges()[1].other(mid), 1);
    }

    #[test]
    fn isomorphism_detects_relabeling_errors() {
        let g = diamond();
        let mut edges = g.edges().to_vec();
        edges[2] = EdgeRecord::new("e3", 1, 2, 3, 1);
        let h = MultiGraph::new(3, edges, 0, 2, None).unwrap();
        assert!(!isomorphic_by_edge_ids(&g, &h, &[]));
    }

    #[test]
    fn validate_catches_bad_specials() {
        let g = diamond().with_endpoints(1, 2).unwrap();
        let mut tree = decompose(&g).unwrap();
        tree.validate().unwrap();
        let root = tree.root();
        tree.nodes[root].specials = Specials::NONE;
        assert!(matches!(tree.validate(), Err(DecomposeError::Corrupt { .. })));
    }
}
