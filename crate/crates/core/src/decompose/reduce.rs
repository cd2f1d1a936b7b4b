//! Recognition by repeated parallel and series reductions.
//!
//! Each working edge stands for an already-built subtree. A parallel
//! reduction merges two working edges with the same endpoints; a series
//! reduction splices out a non-terminal vertex of degree two. Parallel
//! reductions are applied first, and ties go to the working edge holding the
//! smallest original edge index, so trees are deterministic.

use std::collections::{BTreeMap, HashSet};

use super::{DecompNode, DecompTree, DecomposeError, NodeId, NodeKind, Specials, Witness};
use crate::graph::{MultiGraph, VertexId};

#[derive(Debug, Clone, Copy)]
struct Work {
    u: VertexId,
    v: VertexId,
    node: NodeId,
    /// Smallest edge index in the subtree.
    key: usize,
}

struct Reducer<'g> {
    graph: &'g MultiGraph,
    nodes: Vec<DecompNode>,
    works: Vec<Option<Work>>,
}

impl<'g> Reducer<'g> {
    fn new(graph: &'g MultiGraph) -> Self {
        let mut nodes = Vec::with_capacity(2 * graph.edge_count());
        let mut works = Vec::with_capacity(2 * graph.edge_count());
        for (idx, e) in graph.edges().iter().enumerate() {
            nodes.push(DecompNode {
                kind: NodeKind::Leaf { edge: idx },
                terminals: (e.u, e.v),
                specials: Specials::NONE,
                parent: None,
            });
            works.push(Some(Work { u: e.u, v: e.v, node: idx, key: idx }));
        }
        Reducer { graph, nodes, works }
    }

    fn alive(&self) -> impl Iterator<Item = (usize, Work)> + '_ {
        self.works.iter().enumerate().filter_map(|(i, w)| w.map(|w| (i, w)))
    }

    /// Reverses the orientation of a subtree in place.
    fn flip(&mut self, id: NodeId) {
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            let node = &mut self.nodes[x];
            node.terminals = (node.terminals.1, node.terminals.0);
            match node.kind {
                NodeKind::Leaf { .. } => {}
                NodeKind::Series { join, left, right } => {
                    node.kind = NodeKind::Series { join, left: right, right: left };
                    stack.extend([left, right]);
                }
                NodeKind::Parallel { left, right } => stack.extend([left, right]),
            }
        }
    }

    fn orient(&mut self, id: NodeId, from: VertexId) {
        if self.nodes[id].terminals.0 != from {
            self.flip(id);
        }
        debug_assert_eq!(self.nodes[id].terminals.0, from);
    }

    fn push_node(&mut self, kind: NodeKind, terminals: (VertexId, VertexId)) -> NodeId {
        let (left, right, join) = match kind {
            NodeKind::Series { join, left, right } => (left, right, Some(join)),
            NodeKind::Parallel { left, right } => (left, right, None),
            NodeKind::Leaf { .. } => unreachable!("leaves are created up front"),
        };
        let (s, t) = (self.graph.source(), self.graph.sink());
        let mut specials = self.nodes[left].specials.union(self.nodes[right].specials);
        if let Some(c) = join {
            specials.s |= c == s;
            specials.t |= c == t;
        }
        specials.s &= s != terminals.0 && s != terminals.1;
        specials.t &= t != terminals.0 && t != terminals.1;
        let id = self.nodes.len();
        self.nodes.push(DecompNode { kind, terminals, specials, parent: None });
        self.nodes[left].parent = Some(id);
        self.nodes[right].parent = Some(id);
        id
    }

    fn parallel_step(&mut self) -> bool {
        let mut groups: BTreeMap<(VertexId, VertexId), Vec<(usize, usize)>> = BTreeMap::new();
        for (i, w) in self.alive() {
            groups.entry((w.u.min(w.v), w.u.max(w.v))).or_default().push((w.key, i));
        }
        let best = groups
            .into_values()
            .filter(|g| g.len() >= 2)
            .map(|mut g| {
                g.sort_unstable();
                (g[0], g[1])
            })
            .min();
        let Some(((key, first), (_, second))) = best else {
            return false;
        };
        let p = self.works[first].take().unwrap();
        let q = self.works[second].take().unwrap();
        let (u, v) = self.nodes[p.node].terminals;
        self.orient(q.node, u);
        let node = self.push_node(NodeKind::Parallel { left: p.node, right: q.node }, (u, v));
        self.works.push(Some(Work { u, v, node, key }));
        true
    }

    fn series_step(&mut self, protected: (VertexId, VertexId)) -> bool {
        let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.graph.vertex_count()];
        for (i, w) in self.alive() {
            incident[w.u].push((w.key, i));
            incident[w.v].push((w.key, i));
        }
        let best = incident
            .iter_mut()
            .enumerate()
            .filter(|&(x, ref inc)| inc.len() == 2 && x != protected.0 && x != protected.1)
            .map(|(x, inc)| {
                inc.sort_unstable();
                (inc[0], inc[1], x)
            })
            .min();
        let Some(((key, first), (_, second), join)) = best else {
            return false;
        };
        let l = self.works[first].take().unwrap();
        let r = self.works[second].take().unwrap();
        let x = if l.u == join { l.v } else { l.u };
        let y = if r.u == join { r.v } else { r.u };
        self.orient(l.node, x);
        self.orient(r.node, join);
        let node = self.push_node(NodeKind::Series { join, left: l.node, right: r.node }, (x, y));
        self.works.push(Some(Work { u: x, v: y, node, key }));
        true
    }

    /// Runs reductions with `a` and `b` protected. On success returns the root.
    fn run(mut self, a: VertexId, b: VertexId) -> Result<(Vec<DecompNode>, NodeId), Witness> {
        while self.parallel_step() || self.series_step((a, b)) {}
        let left: Vec<Work> = self.alive().map(|(_, w)| w).collect();
        if let [w] = left[..] {
            if (w.u, w.v) == (a, b) || (w.v, w.u) == (a, b) {
                self.orient(w.node, a);
                return Ok((self.nodes, w.node));
            }
        }
        let mut vertices: Vec<VertexId> = left.iter().flat_map(|w| [w.u, w.v]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        Err(Witness { terminals: (a, b), vertices, edges: left.iter().map(|w| (w.u, w.v)).collect() })
    }
}

/// Candidate terminal pairs: declared terminals alone if present, otherwise
/// pairs involving degree-1 vertices first, then every vertex pair.
fn candidate_pairs(graph: &MultiGraph) -> Vec<(VertexId, VertexId)> {
    if let Some(pair) = graph.declared_terminals() {
        return vec![pair];
    }
    let n = graph.vertex_count();
    let mut degree = vec![0usize; n];
    for e in graph.edges() {
        degree[e.u] += 1;
        degree[e.v] += 1;
    }
    let leaves: Vec<VertexId> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut pairs = Vec::new();
    match leaves[..] {
        [x, y] => pairs.push((x, y)),
        [x] => pairs.extend((0..n).filter(|&y| y != x).map(|y| (x.min(y), x.max(y)))),
        _ => {}
    }
    for x in 0..n {
        for y in x + 1..n {
            pairs.push((x, y));
        }
    }
    let mut seen = HashSet::new();
    pairs.retain(|p| seen.insert(*p));
    pairs
}

/// Recognizes `graph` as a two-terminal series-parallel multigraph and builds
/// its binary decomposition tree.
///
/// Declared terminals are authoritative. Without them, candidate pairs are
/// tried in a fixed order and the first pair admitting a complete reduction
/// wins.
pub fn decompose(graph: &MultiGraph) -> Result<DecompTree, DecomposeError> {
    if graph.edge_count() == 0 {
        return Err(DecomposeError::Empty);
    }
    if !graph.is_connected() {
        return Err(DecomposeError::Disconnected);
    }
    let pairs = candidate_pairs(graph);
    let mut witness = None;
    for &(a, b) in &pairs {
        match Reducer::new(graph).run(a, b) {
            Ok((nodes, root)) => {
                let tree = DecompTree {
                    nodes,
                    root,
                    edges: graph.edges().to_vec(),
                    vertex_count: graph.vertex_count(),
                    source: graph.source(),
                    sink: graph.sink(),
                };
                tree.validate()?;
                return Ok(tree);
            }
            Err(w) => {
                witness.get_or_insert(w);
            }
        }
    }
    Err(DecomposeError::NotSeriesParallel {
        pairs_tried: pairs.len(),
        witness: witness.expect("at least one pair is tried when n >= 2"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeRecord;

    fn graph(n: usize, pairs: &[(usize, usize)], s: usize, t: usize) -> MultiGraph {
        let edges =
            pairs.iter().enumerate().map(|(i, &(u, v))| EdgeRecord::new(format!("e{}", i + 1), u, v, 1, 1)).collect();
        MultiGraph::new(n, edges, s, t, None).unwrap()
    }

    #[test]
    fn k4_is_rejected() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], 0, 1);
        match decompose(&g) {
            Err(DecomposeError::NotSeriesParallel { pairs_tried, witness }) => {
                assert_eq!(pairs_tried, 6);
                assert_eq!(witness.vertices.len(), 4);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn wheel_is_rejected() {
        let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (2, 3), (3, 4), (4, 1)], 0, 1);
        assert!(matches!(decompose(&g), Err(DecomposeError::NotSeriesParallel { .. })));
    }

    #[test]
    fn disconnected_and_empty() {
        let g = graph(4, &[(0, 1), (2, 3)], 0, 1);
        assert_eq!(decompose(&g), Err(DecomposeError::Disconnected));
        let g = graph(2, &[], 0, 1);
        assert_eq!(decompose(&g), Err(DecomposeError::Empty));
    }

    #[test]
    fn star_is_not_two_terminal() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3)], 1, 2);
        assert!(matches!(decompose(&g), Err(DecomposeError::NotSeriesParallel { .. })));
    }

    #[test]
    fn infers_degree_one_terminals() {
        // pendant path 3-0 attached to a triangle 0-1-2; only (3, x) pairs work
        let g = graph(4, &[(0, 1), (1, 2), (2, 0), (3, 0)], 1, 2);
        let tree = decompose(&g).unwrap();
        let (a, b) = tree.terminals();
        assert!(a == 3 || b == 3);
        tree.validate().unwrap();
    }

    #[test]
    fn four_cycle_interior_source_and_sink() {
        let mut g = graph(4, &[(0, 1), (1, 2), (2, 3), (0, 3)], 1, 2);
        g = MultiGraph::new(4, g.edges().to_vec(), 1, 2, Some((0, 3))).unwrap();
        let tree = decompose(&g).unwrap();
        assert_eq!(tree.terminals(), (0, 3));
        assert_eq!(tree.node(tree.root()).specials, Specials { s: true, t: true });
        assert_eq!(tree.to_string(), "P(S(S(L(e1),L(e2))@1,L(e3))@2,L(e4))");
    }

    #[test]
    fn parallel_bundle_orients_children() {
        let g = graph(2, &[(1, 0), (0, 1), (1, 0)], 0, 1);
        let tree = decompose(&g).unwrap();
        assert_eq!(tree.to_string(), "P(P(L(e1),L(e2)),L(e3))");
        for n in tree.nodes() {
            assert_eq!(n.terminals, tree.terminals());
        }
    }
}
