use std::cell::RefCell;
use std::collections::HashMap;

use log::debug;
use thiserror::Error;

use super::{CaseCounts, Cost, DpError, DpTable, ResidueDomain, TableScope};
use crate::decompose::{decompose, DecompTree, DecomposeError, NodeKind};
use crate::graph::{max_flow, EdgeSet, MultiGraph, Objective, ProblemInstance, ProblemKind, Solution};

/// How [`DpSolver`] organizes its tables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TableMode {
    /// Full table when its estimated work is at most
    /// [`AUTO_FULL_WORK_LIMIT`], pinned tables otherwise.
    #[default]
    Auto,
    /// One table over every tuple, answering every flow value.
    Full,
    /// A fresh table per queried flow value holding only reachable tuples.
    Pinned,
}

/// Estimated split evaluations above which `Auto` switches to pinned tables.
pub const AUTO_FULL_WORK_LIMIT: u64 = 60_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error("demand {demand} exceeds the maximum achievable flow {max_flow}")]
    InfeasibleDemand { demand: u64, max_flow: u64 },
    #[error("instance has a {found} objective, expected {expected}")]
    WrongObjective { expected: ProblemKind, found: ProblemKind },
    #[error("instance has {0} upgradable edges; expand them first")]
    UnexpandedUpgrades(usize),
    #[error(transparent)]
    Dp(#[from] DpError),
}

#[derive(Debug, Clone, Default)]
pub struct SolverStats {
    pub tables_built: u64,
    /// Admissible tuples evaluated across all tables built.
    pub entries: u64,
    pub split_evaluations: u64,
    /// Largest per-node admissible tuple count seen in any table.
    pub max_node_entries: u64,
    pub cases: CaseCounts,
}

/// Exact solver bound to one graph and its decomposition.
#[derive(Debug)]
pub struct DpSolver {
    graph: MultiGraph,
    tree: DecompTree,
    capacities: Vec<u64>,
    domain: ResidueDomain,
    full: Option<DpTable>,
    last_pinned: RefCell<Option<DpTable>>,
    /// Minimum costs already computed with pinned tables.
    known: RefCell<HashMap<u64, Cost>>,
    stats: RefCell<SolverStats>,
}

/// Max flow with every edge bought; no solution can exceed it.
pub fn upper_bound_flow(graph: &MultiGraph) -> u64 {
    max_flow(graph, &EdgeSet::full(graph.edge_count())).value
}

fn estimated_full_work(tree: &DecompTree, dlen: u64) -> u64 {
    tree.nodes()
        .iter()
        .map(|n| {
            let free = 1 + u32::from(n.specials.s) + u32::from(n.specials.t);
            let slots = dlen.saturating_pow(free);
            match n.kind {
                NodeKind::Parallel { .. } => slots.saturating_mul(dlen),
                _ => slots,
            }
        })
        .fold(0u64, u64::saturating_add)
}

impl DpSolver {
    /// Decomposes `graph` and prepares to answer queries for flows up to its
    /// maximum flow.
    pub fn new(graph: &MultiGraph, mode: TableMode) -> Result<Self, SolveError> {
        let tree = decompose(graph)?;
        let bound = upper_bound_flow(graph);
        Ok(Self::with_domain(graph, tree, graph.capacities(), ResidueDomain::interval(bound), mode))
    }

    /// Solver over an explicit decomposition, capacities and residue domain.
    /// Costs and reported flows always refer to `graph` itself; `capacities`
    /// only drive the table.
    pub fn with_domain(
        graph: &MultiGraph,
        tree: DecompTree,
        capacities: Vec<u64>,
        domain: ResidueDomain,
        mode: TableMode,
    ) -> Self {
        let use_full = match mode {
            TableMode::Full => true,
            TableMode::Pinned => false,
            TableMode::Auto => estimated_full_work(&tree, domain.len() as u64) <= AUTO_FULL_WORK_LIMIT,
        };
        let mut solver = DpSolver {
            graph: graph.clone(),
            tree,
            capacities,
            domain,
            full: None,
            last_pinned: RefCell::new(None),
            known: RefCell::new(HashMap::new()),
            stats: RefCell::new(SolverStats::default()),
        };
        if use_full {
            let table = DpTable::build(&solver.tree, &solver.capacities, solver.domain.clone(), TableScope::Full);
            solver.record(&table);
            solver.full = Some(table);
        }
        debug!(
            "dp solver: {} nodes, domain size {}, {} tables",
            solver.tree.len(),
            solver.domain.len(),
            if use_full { "full" } else { "pinned" }
        );
        solver
    }

    fn record(&self, table: &DpTable) {
        let mut st = self.stats.borrow_mut();
        let ts = table.stats();
        st.tables_built += 1;
        st.entries += ts.entries;
        st.split_evaluations += ts.split_evaluations;
        st.max_node_entries = st.max_node_entries.max(ts.node_entries.iter().copied().max().unwrap_or(0));
        st.cases.merge(&ts.cases);
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }

    pub fn tree(&self) -> &DecompTree {
        &self.tree
    }

    pub fn domain(&self) -> &ResidueDomain {
        &self.domain
    }

    /// Largest flow value the solver's tables can represent.
    pub fn flow_bound(&self) -> u64 {
        self.domain.bound()
    }

    pub fn full_table(&self) -> Option<&DpTable> {
        self.full.as_ref()
    }

    pub fn stats(&self) -> SolverStats {
        self.stats.borrow().clone()
    }

    fn with_table<R>(&self, flow: u64, f: impl FnOnce(&DpTable) -> R) -> R {
        if let Some(table) = &self.full {
            return f(table);
        }
        let mut cache = self.last_pinned.borrow_mut();
        let fresh = !matches!(cache.as_ref().map(|t| t.scope()), Some(TableScope::Pinned { flow: v }) if v == flow);
        if fresh {
            let table = DpTable::build(&self.tree, &self.capacities, self.domain.clone(), TableScope::Pinned { flow });
            self.record(&table);
            *cache = Some(table);
        }
        f(cache.as_ref().unwrap())
    }

    /// Minimum cost of routing `flow` units, or infinite.
    pub fn min_cost(&self, flow: u64) -> Result<Cost, SolveError> {
        self.check_flow(flow)?;
        if let Some(&c) = self.known.borrow().get(&flow) {
            return Ok(c);
        }
        let cost = self.with_table(flow, |t| t.min_cost(&self.tree, flow))?;
        if self.full.is_none() {
            self.known.borrow_mut().insert(flow, cost);
        }
        Ok(cost)
    }

    /// A cheapest edge set able to route `flow` units, with its cost.
    pub fn cheapest_set(&self, flow: u64) -> Result<Option<(u64, EdgeSet)>, SolveError> {
        self.check_flow(flow)?;
        Ok(self.with_table(flow, |t| t.query(&self.tree, flow))?)
    }

    fn check_flow(&self, flow: u64) -> Result<(), SolveError> {
        let bound = self.flow_bound();
        if flow > bound {
            return Err(DpError::FlowOutOfRange { flow, bound }.into());
        }
        Ok(())
    }

    /// Flow values the domain can express at the source, ascending.
    fn candidate_flows(&self, from: u64) -> Vec<u64> {
        self.domain.values_between(from as i64, self.flow_bound() as i64).into_iter().map(|v| v as u64).collect()
    }

    /// Cheapest purchase whose max flow reaches `demand`.
    pub fn capndp(&self, demand: u64) -> Result<Solution, SolveError> {
        let bound = self.flow_bound();
        let infeasible = SolveError::InfeasibleDemand { demand, max_flow: bound };
        if demand > bound {
            return Err(infeasible);
        }
        let set = match self.domain {
            ResidueDomain::Interval { .. } => self.cheapest_set(demand)?.map(|(_, set)| set),
            ResidueDomain::Lattice { .. } => {
                let mut best: Option<(u64, u64)> = None;
                for v in self.candidate_flows(demand) {
                    if let Cost::Finite(c) = self.min_cost(v)? {
                        if best.is_none_or(|(bc, _)| c < bc) {
                            best = Some((c, v));
                        }
                    }
                }
                match best {
                    Some((_, v)) => self.cheapest_set(v)?.map(|(_, set)| set),
                    None => None,
                }
            }
        };
        let set = set.ok_or(infeasible)?;
        Ok(Solution::evaluate(&self.graph, set))
    }

    /// Largest-flow purchase costing at most `budget`.
    pub fn bcmfp(&self, budget: u64) -> Result<Solution, SolveError> {
        let affordable =
            |v: u64| -> Result<bool, SolveError> { Ok(matches!(self.min_cost(v)?, Cost::Finite(c) if c <= budget)) };
        let best = match self.domain {
            ResidueDomain::Interval { bound } => {
                // cost of routing v is nondecreasing in v, and v = 0 is free
                let (mut lo, mut hi) = (0u64, bound);
                while lo < hi {
                    let mid = lo + (hi - lo).div_ceil(2);
                    if affordable(mid)? {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                lo
            }
            ResidueDomain::Lattice { .. } => {
                let mut found = 0;
                for v in self.candidate_flows(0).into_iter().rev() {
                    if affordable(v)? {
                        found = v;
                        break;
                    }
                }
                found
            }
        };
        let (_, set) = self.cheapest_set(best)?.expect("chosen flow is affordable");
        Ok(Solution::evaluate(&self.graph, set))
    }
}

fn check_instance(instance: &ProblemInstance, expected: ProblemKind) -> Result<(), SolveError> {
    if !instance.upgrades.is_empty() {
        return Err(SolveError::UnexpandedUpgrades(instance.upgrades.len()));
    }
    let found = instance.objective.kind();
    if found != expected {
        return Err(SolveError::WrongObjective { expected, found });
    }
    Ok(())
}

/// Exact minimum-cost purchase meeting the instance's demand.
pub fn solve_capndp(instance: &ProblemInstance) -> Result<Solution, SolveError> {
    check_instance(instance, ProblemKind::Capndp)?;
    let Objective::Demand(demand) = instance.objective else { unreachable!() };
    let bound = upper_bound_flow(&instance.graph);
    if demand > bound {
        return Err(SolveError::InfeasibleDemand { demand, max_flow: bound });
    }
    DpSolver::new(&instance.graph, TableMode::Auto)?.capndp(demand)
}

/// Exact maximum-flow purchase within the instance's budget.
pub fn solve_bcmfp(instance: &ProblemInstance) -> Result<Solution, SolveError> {
    check_instance(instance, ProblemKind::Bcmfp)?;
    let Objective::Budget(budget) = instance.objective else { unreachable!() };
    DpSolver::new(&instance.graph, TableMode::Auto)?.bcmfp(budget)
}

/// Decides whether some edge set costing at most `budget` can route `flow`
/// units when edge `i` has capacity `capacities[i]`; returns such a set.
pub fn feasible(
    graph: &MultiGraph,
    tree: &DecompTree,
    capacities: &[u64],
    budget: u64,
    flow: u64,
) -> Result<Option<EdgeSet>, SolveError> {
    let solver = DpSolver::with_domain(
        graph,
        tree.clone(),
        capacities.to_vec(),
        ResidueDomain::interval(flow),
        TableMode::Pinned,
    );
    Ok(solver.cheapest_set(flow)?.and_then(|(c, set)| (c <= budget).then_some(set)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_instance, EdgeRecord};

    fn i2() -> MultiGraph {
        let edges = vec![
            EdgeRecord::new("e1", 0, 1, 1, 2),
            EdgeRecord::new("e2", 1, 2, 1, 2),
            EdgeRecord::new("e3", 0, 2, 3, 1),
        ];
        MultiGraph::new(3, edges, 0, 2, None).unwrap()
    }

    fn ids(g: &MultiGraph, s: &Solution) -> Vec<String> {
        s.edge_ids(g).into_iter().map(String::from).collect()
    }

    #[test]
    fn capndp_diamond() {
        let g = i2();
        for mode in [TableMode::Full, TableMode::Pinned, TableMode::Auto] {
            let solver = DpSolver::new(&g, mode).unwrap();
            let s = solver.capndp(1).unwrap();
            assert_eq!((s.total_cost, ids(&g, &s)), (2, vec!["e1".to_string(), "e2".to_string()]));
            let s = solver.capndp(3).unwrap();
            assert_eq!((s.total_cost, s.achieved_flow), (5, 3));
            assert_eq!(solver.capndp(4), Err(SolveError::InfeasibleDemand { demand: 4, max_flow: 3 }));
            assert_eq!(solver.capndp(0).unwrap().total_cost, 0);
        }
    }

    #[test]
    fn bcmfp_diamond() {
        let g = i2();
        for mode in [TableMode::Full, TableMode::Pinned] {
            let solver = DpSolver::new(&g, mode).unwrap();
            assert_eq!(solver.bcmfp(2).unwrap().achieved_flow, 2);
            assert_eq!(solver.bcmfp(5).unwrap().achieved_flow, 3);
            let s = solver.bcmfp(0).unwrap();
            assert_eq!((s.achieved_flow, s.purchased.len()), (0, 0));
            assert_eq!(solver.bcmfp(3).unwrap().achieved_flow, 2);
        }
    }

    #[test]
    fn instance_entry_points() {
        let text = "graph 3\nsource 0\nsink 2\nedge e1 0 1 1 2\nedge e2 1 2 1 2\nedge e3 0 2 3 1\n";
        let inst = parse_instance(&format!("{text}demand 1\n")).unwrap();
        assert_eq!(solve_capndp(&inst).unwrap().total_cost, 2);
        assert!(matches!(solve_bcmfp(&inst), Err(SolveError::WrongObjective { .. })));
        let inst = parse_instance(&format!("{text}budget 2\n")).unwrap();
        assert_eq!(solve_bcmfp(&inst).unwrap().achieved_flow, 2);
        let inst = parse_instance(&format!("{text}demand 9\n")).unwrap();
        assert!(matches!(solve_capndp(&inst), Err(SolveError::InfeasibleDemand { .. })));
    }

    #[test]
    fn feasibility_oracle() {
        let g = i2();
        let tree = decompose(&g).unwrap();
        let caps = g.capacities();
        let yes = feasible(&g, &tree, &caps, 2, 2).unwrap().unwrap();
        assert_eq!(yes.to_vec(), vec![0, 1]);
        assert_eq!(feasible(&g, &tree, &caps, 1, 1).unwrap(), None);
        assert_eq!(feasible(&g, &tree, &[0, 0, 0], 100, 1).unwrap(), None);
        assert!(feasible(&g, &tree, &[0, 0, 0], 0, 0).unwrap().is_some());
    }

    #[test]
    fn auto_mode_counts_cases() {
        let g = i2();
        let solver = DpSolver::new(&g, TableMode::Auto).unwrap();
        assert!(solver.full_table().is_some());
        let st = solver.stats();
        assert_eq!(st.tables_built, 1);
        assert!(st.entries > 0);
        assert_eq!(st.cases.iter().map(|(_, n)| n).sum::<u64>(), 2);
    }

    #[test]
    fn lattice_domain_scans_expressible_flows() {
        let g = i2();
        let tree = decompose(&g).unwrap();
        let solver = DpSolver::with_domain(&g, tree, g.capacities(), ResidueDomain::lattice([-2, 2]), TableMode::Full);
        // demand 1 is only expressible as flow 2 here
        let s = solver.capndp(1).unwrap();
        assert_eq!((s.total_cost, s.achieved_flow), (2, 2));
        assert_eq!(solver.bcmfp(10).unwrap().total_cost, 2);
    }
}
