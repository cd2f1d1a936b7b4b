//! Brute-force ground truth by exhaustive subset enumeration, and a seeded
//! generator of random series-parallel instances.
//!
//! Nothing here depends on the decomposition or the table; the oracle only
//! uses costs and exact max flow.

mod generate;

use std::cmp::Ordering;

use thiserror::Error;

pub use generate::{generate_sp, GenParams};

use crate::graph::{max_flow, EdgeSet, MultiGraph, Objective, ProblemInstance, Solution};

/// Largest edge count the oracle accepts.
pub const ORACLE_MAX_EDGES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle enumerates 2^m subsets; m = {0} exceeds the limit of {ORACLE_MAX_EDGES}")]
    TooLarge(usize),
    #[error("demand {demand} exceeds the maximum achievable flow {max_flow}")]
    InfeasibleDemand { demand: u64, max_flow: u64 },
    #[error("instance has {0} upgradable edges; expand them first")]
    UnexpandedUpgrades(usize),
}

/// Cost and max flow of every edge subset, indexed by bitmask.
#[derive(Debug, Clone)]
pub struct SubsetProfile {
    m: usize,
    costs: Vec<u64>,
    flows: Vec<u64>,
}

impl SubsetProfile {
    /// Visits subsets in Gray-code order, updating the cost one edge at a
    /// time and recomputing max flow from scratch.
    pub fn enumerate(graph: &MultiGraph) -> Result<Self, OracleError> {
        let m = graph.edge_count();
        if m > ORACLE_MAX_EDGES {
            return Err(OracleError::TooLarge(m));
        }
        let total = 1usize << m;
        let mut costs = vec![0u64; total];
        let mut flows = vec![0u64; total];
        let mut mask = 0usize;
        let mut cost = 0u64;
        for i in 0..total {
            if i > 0 {
                let bit = i.trailing_zeros() as usize;
                mask ^= 1 << bit;
                let c = graph.edge(bit).cost;
                cost = if mask >> bit & 1 == 1 { cost + c } else { cost - c };
            }
            costs[mask] = cost;
            flows[mask] = max_flow(graph, &EdgeSet::from_bits(m, mask as u64)).value;
        }
        Ok(SubsetProfile { m, costs, flows })
    }

    pub fn cost(&self, mask: u64) -> u64 {
        self.costs[mask as usize]
    }

    pub fn flow(&self, mask: u64) -> u64 {
        self.flows[mask as usize]
    }

    pub fn max_flow(&self) -> u64 {
        self.flows[self.flows.len() - 1]
    }

    fn best_by(
        &self,
        graph: &MultiGraph,
        admissible: impl Fn(u64, u64) -> bool,
        better: impl Fn((u64, u64), (u64, u64)) -> Ordering,
    ) -> Option<Solution> {
        let mut best: Option<usize> = None;
        for mask in 0..self.costs.len() {
            let here = (self.costs[mask], self.flows[mask]);
            if !admissible(here.0, here.1) {
                continue;
            }
            best = Some(match best {
                None => mask,
                Some(b) => {
                    let order = better(here, (self.costs[b], self.flows[b]))
                        .then_with(|| mask.count_ones().cmp(&b.count_ones()))
                        .then_with(|| sorted_ids(graph, self.m, mask).cmp(&sorted_ids(graph, self.m, b)));
                    if order == Ordering::Less {
                        mask
                    } else {
                        b
                    }
                }
            });
        }
        best.map(|mask| Solution {
            purchased: EdgeSet::from_bits(self.m, mask as u64),
            total_cost: self.costs[mask],
            achieved_flow: self.flows[mask],
        })
    }

    /// Cheapest subset reaching `demand`; ties by fewer edges, then by
    /// lexicographically smaller sorted id list.
    pub fn best_for_demand(&self, graph: &MultiGraph, demand: u64) -> Result<Solution, OracleError> {
        self.best_by(graph, |_, f| f >= demand, |(c1, _), (c2, _)| c1.cmp(&c2))
            .ok_or(OracleError::InfeasibleDemand { demand, max_flow: self.max_flow() })
    }

    /// Largest-flow subset within `budget`; same tie-breaking.
    pub fn best_for_budget(&self, graph: &MultiGraph, budget: u64) -> Solution {
        self.best_by(graph, |c, _| c <= budget, |(_, f1), (_, f2)| f2.cmp(&f1))
            .expect("the empty set is always within budget")
    }
}

fn sorted_ids(graph: &MultiGraph, m: usize, mask: usize) -> Vec<&str> {
    let mut ids: Vec<&str> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| graph.edge(i).id.as_str()).collect();
    ids.sort_unstable();
    ids
}

fn check(instance: &ProblemInstance) -> Result<(), OracleError> {
    if !instance.upgrades.is_empty() {
        return Err(OracleError::UnexpandedUpgrades(instance.upgrades.len()));
    }
    if instance.graph.edge_count() > ORACLE_MAX_EDGES {
        return Err(OracleError::TooLarge(instance.graph.edge_count()));
    }
    Ok(())
}

/// Exhaustive CapNDP. Uses the instance's demand, or zero for a budget
/// instance.
pub fn oracle_capndp(instance: &ProblemInstance) -> Result<Solution, OracleError> {
    check(instance)?;
    let demand = match instance.objective {
        Objective::Demand(d) => d,
        Objective::Budget(_) => 0,
    };
    SubsetProfile::enumerate(&instance.graph)?.best_for_demand(&instance.graph, demand)
}

/// Exhaustive BCMFP. Uses the instance's budget, or zero for a demand
/// instance.
pub fn oracle_bcmfp(instance: &ProblemInstance) -> Result<Solution, OracleError> {
    check(instance)?;
    let budget = match instance.objective {
        Objective::Budget(b) => b,
        Objective::Demand(_) => 0,
    };
    Ok(SubsetProfile::enumerate(&instance.graph)?.best_for_budget(&instance.graph, budget))
}
