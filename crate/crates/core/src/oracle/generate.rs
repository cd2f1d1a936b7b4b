use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dp::upper_bound_flow;
use crate::graph::{EdgeRecord, MultiGraph, Objective, ProblemInstance, ProblemKind, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub seed: u64,
    /// Edge count is drawn uniformly from `ceil(max_edges / 2)..=max_edges`.
    pub max_edges: usize,
    /// Capacities are drawn from `1..=cap_max`.
    pub cap_max: u64,
    /// Costs are drawn from `0..=cost_max`.
    pub cost_max: u64,
    pub problem: ProblemKind,
}

impl GenParams {
    pub fn new(seed: u64, max_edges: usize, cap_max: u64, cost_max: u64, problem: ProblemKind) -> Self {
        GenParams { seed, max_edges, cap_max, cost_max, problem }
    }
}

struct Builder<'r> {
    rng: &'r mut ChaCha8Rng,
    n: usize,
    pairs: Vec<(VertexId, VertexId)>,
}

impl Builder<'_> {
    /// Composes `m` edges between `a` and `b`.
    fn build(&mut self, m: usize, a: VertexId, b: VertexId) {
        if m == 1 {
            self.pairs.push((a, b));
            return;
        }
        // balanced splits are likelier, so both sides tend to have interior vertices
        let k = 1 + (0..m - 2).filter(|_| self.rng.gen_bool(0.5)).count();
        if self.rng.gen_bool(0.5) {
            let c = self.n;
            self.n += 1;
            self.build(k, a, c);
            self.build(m - k, c, b);
        } else {
            self.build(k, a, b);
            self.build(m - k, a, b);
        }
    }
}

/// A random series-parallel instance, identical for identical parameters.
///
/// The graph is grown as a random binary composition tree, so it is
/// series-parallel by construction; its composition terminals are declared.
/// Vertex labels and edge ids are shuffled, and the source and sink are any
/// two distinct vertices, so they are often interior.
pub fn generate_sp(params: &GenParams) -> ProblemInstance {
    assert!(params.max_edges >= 1, "need at least one edge");
    assert!(params.cap_max >= 1, "capacities start at 1");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let m = rng.gen_range(params.max_edges.div_ceil(2)..=params.max_edges);
    let mut b = Builder { rng: &mut rng, n: 2, pairs: Vec::with_capacity(m) };
    b.build(m, 0, 1);
    let (n, pairs) = (b.n, b.pairs);

    let mut label: Vec<VertexId> = (0..n).collect();
    label.shuffle(&mut rng);
    let mut ids: Vec<usize> = (1..=m).collect();
    ids.shuffle(&mut rng);
    let mut edges: Vec<(usize, EdgeRecord)> = pairs
        .iter()
        .zip(&ids)
        .map(|(&(u, v), &id)| {
            let cost = rng.gen_range(0..=params.cost_max);
            let cap = rng.gen_range(1..=params.cap_max);
            (id, EdgeRecord::new(format!("e{id}"), label[u], label[v], cost, cap))
        })
        .collect();
    edges.sort_by_key(|(id, _)| *id);
    let edges: Vec<EdgeRecord> = edges.into_iter().map(|(_, e)| e).collect();

    let s = rng.gen_range(0..n);
    let t = (s + rng.gen_range(1..n)) % n;
    let graph = MultiGraph::new(n, edges, s, t, Some((label[0], label[1]))).expect("generated graph is valid");
    let objective = match params.problem {
        ProblemKind::Bcmfp => Objective::Budget(rng.gen_range(0..=graph.total_cost())),
        ProblemKind::Capndp => Objective::Demand(rng.gen_range(0..=upper_bound_flow(&graph))),
    };
    ProblemInstance::new(graph, objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::dp::{DpSolver, TableMode};

    #[test]
    fn single_edge_base_case() {
        let inst = generate_sp(&GenParams::new(1, 1, 5, 5, ProblemKind::Bcmfp));
        assert_eq!(inst.graph.edge_count(), 1);
        assert_eq!(inst.graph.vertex_count(), 2);
    }

    #[test]
    fn deterministic_and_decomposable() {
        for seed in 0..50 {
            let p = GenParams::new(seed, 12, 9, 9, ProblemKind::Capndp);
            let a = generate_sp(&p);
            assert_eq!(a.to_string(), generate_sp(&p).to_string());
            let tree = decompose(&a.graph).unwrap();
            assert_eq!(tree.leaf_count(), a.graph.edge_count());
        }
    }

    #[test]
    fn sweep_has_interior_source_and_sink() {
        let both_interior = (1..=100)
            .map(|seed| generate_sp(&GenParams::new(seed, 8, 5, 5, ProblemKind::Bcmfp)))
            .filter(|inst| {
                let tree = decompose(&inst.graph).unwrap();
                let sp = tree.node(tree.root()).specials;
                sp.s && sp.t
            })
            .count();
        assert!(both_interior > 0);
    }

    #[test]
    fn sweep_fires_every_recurrence() {
        let mut cases = crate::dp::CaseCounts::default();
        for seed in 1..=200 {
            let inst = generate_sp(&GenParams::new(seed, 10, 3, 5, ProblemKind::Bcmfp));
            let solver = DpSolver::new(&inst.graph, TableMode::Full).unwrap();
            cases.merge(&solver.stats().cases);
        }
        assert_eq!(cases.missing(), vec![]);
    }
}
