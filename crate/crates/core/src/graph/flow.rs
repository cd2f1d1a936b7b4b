//! Exact integer max flow (Dinic) over undirected edges, plus the
//! super-source/super-sink reduction for circulation feasibility.

use std::collections::VecDeque;

use super::{EdgeIdx, EdgeSet, MultiGraph, ResidueAssignment, VertexId};

/// Residual network. Arc `i` and arc `i ^ 1` are mutual reverses.
struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    head: Vec<usize>,
    residual: Vec<u128>,
    level: Vec<u32>,
    cursor: Vec<usize>,
}

impl FlowNetwork {
    fn new(n: usize) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); n],
            head: Vec::new(),
            residual: Vec::new(),
            level: vec![0; n],
            cursor: vec![0; n],
        }
    }

    fn push_pair(&mut self, u: usize, v: usize, forward: u128, backward: u128) -> usize {
        let id = self.head.len();
        self.adj[u].push(id);
        self.head.push(v);
        self.residual.push(forward);
        self.adj[v].push(id + 1);
        self.head.push(u);
        self.residual.push(backward);
        id
    }

    fn add_arc(&mut self, u: usize, v: usize, cap: u128) -> usize {
        self.push_pair(u, v, cap, 0)
    }

    /// An undirected edge: one shared capacity usable in either direction.
    fn add_undirected(&mut self, u: usize, v: usize, cap: u128) -> usize {
        self.push_pair(u, v, cap, cap)
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = u32::MAX);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &arc in &self.adj[x] {
                let y = self.head[arc];
                if self.residual[arc] > 0 && self.level[y] == u32::MAX {
                    self.level[y] = self.level[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        self.level[t] != u32::MAX
    }

    fn dfs(&mut self, x: usize, t: usize, limit: u128) -> u128 {
        if x == t {
            return limit;
        }
        while self.cursor[x] < self.adj[x].len() {
            let arc = self.adj[x][self.cursor[x]];
            let y = self.head[arc];
            if self.residual[arc] > 0 && self.level[y] == self.level[x] + 1 {
                let pushed = self.dfs(y, t, limit.min(self.residual[arc]));
                if pushed > 0 {
                    self.residual[arc] -= pushed;
                    self.residual[arc ^ 1] += pushed;
                    return pushed;
                }
            }
            self.cursor[x] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> u128 {
        let mut total = 0;
        while self.bfs(s, t) {
            self.cursor.iter_mut().for_each(|c| *c = 0);
            loop {
                let pushed = self.dfs(s, t, u128::MAX);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }
}

/// Flow carried by one undirected edge, oriented `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeFlow {
    pub edge: EdgeIdx,
    pub from: VertexId,
    pub to: VertexId,
    pub amount: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowAssignment {
    pub value: u64,
    /// Edges with positive flow, in edge order.
    pub edge_flows: Vec<EdgeFlow>,
}

/// Exact maximum s-t flow using only the purchased edges.
pub fn max_flow(graph: &MultiGraph, purchased: &EdgeSet) -> FlowAssignment {
    max_flow_with_capacities(graph, purchased, &graph.capacities())
}

/// Like [`max_flow`], with `capacities[i]` replacing the capacity of edge `i`.
pub fn max_flow_with_capacities(graph: &MultiGraph, purchased: &EdgeSet, capacities: &[u64]) -> FlowAssignment {
    let mut net = FlowNetwork::new(graph.vertex_count());
    let mut arcs = Vec::new();
    for idx in purchased.iter() {
        let e = graph.edge(idx);
        let cap = capacities[idx] as u128;
        arcs.push((idx, net.add_undirected(e.u, e.v, cap), cap));
    }
    let value = net.max_flow(graph.source(), graph.sink());
    let edge_flows = arcs
        .into_iter()
        .filter_map(|(idx, arc, cap)| {
            let e = graph.edge(idx);
            // residual of u->v is cap - f(u->v), with f negative for v->u flow
            let forward = net.residual[arc];
            let (from, to, amount) = if forward <= cap { (e.u, e.v, cap - forward) } else { (e.v, e.u, forward - cap) };
            (amount > 0).then_some(EdgeFlow { edge: idx, from, to, amount: amount as u64 })
        })
        .collect();
    FlowAssignment { value: value as u64, edge_flows }
}

/// True iff the purchased subgraph admits an integral circulation with the
/// given residues (net inflow per vertex). Residues that do not sum to zero
/// are never feasible.
pub fn circulation_feasible(graph: &MultiGraph, purchased: &EdgeSet, residues: &ResidueAssignment) -> bool {
    if residues.sum() != 0 {
        return false;
    }
    let n = graph.vertex_count();
    let (src, dst) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    for idx in purchased.iter() {
        let e = graph.edge(idx);
        net.add_undirected(e.u, e.v, e.capacity as u128);
    }
    let mut required: u128 = 0;
    for (v, r) in residues.iter() {
        if v >= n {
            return r == 0;
        }
        if r < 0 {
            net.add_arc(src, v, r.unsigned_abs() as u128);
        } else if r > 0 {
            net.add_arc(v, dst, r as u128);
            required += r as u128;
        }
    }
    net.max_flow(src, dst) == required
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeRecord;

    fn i1() -> MultiGraph {
        MultiGraph::new(2, vec![EdgeRecord::new("e1", 0, 1, 5, 7)], 0, 1, None).unwrap()
    }

    fn i2() -> MultiGraph {
        let edges = vec![
            EdgeRecord::new("e1", 0, 1, 1, 2),
            EdgeRecord::new("e2", 1, 2, 1, 2),
            EdgeRecord::new("e3", 0, 2, 3, 1),
        ];
        MultiGraph::new(3, edges, 0, 2, None).unwrap()
    }

    /// Brute force: try every orientation and every integral amount on each edge.
    fn brute_circulation(g: &MultiGraph, set: &EdgeSet, r: &ResidueAssignment) -> bool {
        let idx: Vec<_> = set.iter().collect();
        fn rec(g: &MultiGraph, idx: &[usize], k: usize, bal: &mut Vec<i64>, r: &ResidueAssignment) -> bool {
            if k == idx.len() {
                return (0..g.vertex_count()).all(|v| bal[v] == r.get(v));
            }
            let e = g.edge(idx[k]);
            let cap = e.capacity as i64;
            for f in -cap..=cap {
                bal[e.v] += f;
                bal[e.u] -= f;
                let ok = rec(g, idx, k + 1, bal, r);
                bal[e.v] -= f;
                bal[e.u] += f;
                if ok {
                    return true;
                }
            }
            false
        }
        rec(g, &idx, 0, &mut vec![0; g.vertex_count()], r)
    }

    #[test]
    fn max_flow_examples() {
        assert_eq!(max_flow(&i1(), &EdgeSet::full(1)).value, 7);
        assert_eq!(max_flow(&i2(), &EdgeSet::full(3)).value, 3);
        assert_eq!(max_flow(&i2(), &EdgeSet::from_indices(3, [2])).value, 1);
        assert_eq!(max_flow(&i2(), &EdgeSet::empty(3)).value, 0);
    }

    #[test]
    fn flow_assignment_is_conserved_and_within_capacity() {
        let g = i2();
        let fa = max_flow(&g, &EdgeSet::full(3));
        let mut bal = vec![0i64; 3];
        for ef in &fa.edge_flows {
            assert!(ef.amount <= g.edge(ef.edge).capacity);
            bal[ef.to] += ef.amount as i64;
            bal[ef.from] -= ef.amount as i64;
        }
        assert_eq!(bal, vec![-3, 0, 3]);
    }

    #[test]
    fn circulation_examples() {
        let g = i1();
        let all = EdgeSet::full(1);
        assert!(circulation_feasible(&g, &all, &ResidueAssignment::from_pairs([(0, -7), (1, 7)])));
        assert!(!circulation_feasible(&g, &all, &ResidueAssignment::from_pairs([(0, -8), (1, 8)])));
        assert!(!circulation_feasible(&g, &all, &ResidueAssignment::from_pairs([(0, -1)])));

        let g = i2();
        let path = EdgeSet::from_indices(3, [0, 1]);
        let r = ResidueAssignment::from_pairs([(0, -2), (2, 2)]);
        assert!(brute_circulation(&g, &path, &r));
        assert!(circulation_feasible(&g, &path, &r));
    }

    #[test]
    fn circulation_matches_brute_force_on_diamond() {
        let g = i2();
        for bits in 0..8u64 {
            let set = EdgeSet::from_bits(3, bits);
            for r0 in -3i64..=3 {
                for r1 in -3i64..=3 {
                    let r = ResidueAssignment::from_pairs([(0, r0), (1, r1), (2, -r0 - r1)]);
                    assert_eq!(circulation_feasible(&g, &set, &r), brute_circulation(&g, &set, &r), "{bits} {r:?}");
                }
            }
        }
    }
}
