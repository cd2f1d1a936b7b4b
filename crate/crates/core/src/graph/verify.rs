use std::fmt;

use super::{max_flow, GraphError, Objective, ProblemInstance, Solution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub cost: u64,
    pub flow: u64,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        write!(f, "cost={} flow={}", self.cost, self.flow)
    }
}

/// Recomputes cost and max flow of `solution` and checks them against the
/// claimed values and the instance objective.
pub fn verify_solution(instance: &ProblemInstance, solution: &Solution) -> Result<VerificationReport, GraphError> {
    let g = &instance.graph;
    if solution.purchased.universe() != g.edge_count() {
        return Err(GraphError::UnknownEdge(format!(
            "edge set over {} edges does not match a {}-edge instance",
            solution.purchased.universe(),
            g.edge_count()
        )));
    }
    let cost = g.cost_of(&solution.purchased);
    let flow = max_flow(g, &solution.purchased).value;
    let mut checks = vec![
        Check {
            name: "cost",
            passed: cost == solution.total_cost,
            detail: format!("recomputed {cost}, claimed {}", solution.total_cost),
        },
        Check {
            name: "flow",
            passed: flow == solution.achieved_flow,
            detail: format!("recomputed {flow}, claimed {}", solution.achieved_flow),
        },
    ];
    checks.push(match instance.objective {
        Objective::Budget(b) => Check {
            name: "budget",
            passed: cost <= b,
            detail: if cost <= b { format!("cost {cost} <= budget {b}") } else { format!("cost {cost} > budget {b}") },
        },
        Objective::Demand(d) => Check {
            name: "demand",
            passed: flow >= d,
            detail: if flow >= d { format!("flow {flow} >= demand {d}") } else { format!("flow {flow} < demand {d}") },
        },
    });
    Ok(VerificationReport { cost, flow, checks })
}
