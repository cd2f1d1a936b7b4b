//! Residue domains for capacities drawn from a bounded integer lattice.
//!
//! When every capacity is a combination `sum a_i d_i` with `|a_i| <= K`, a
//! basic optimal flow routes lattice amounts on every edge, so every residue
//! the table needs is a combination with coefficients bounded by `m^2 K`.
//! Restricting the table to those values loses nothing and makes its size
//! polynomial for a fixed basis size.

use std::collections::BTreeSet;

use log::warn;

use super::ExtensionError;
use crate::decompose::decompose;
use crate::dp::{upper_bound_flow, DpSolver, ResidueDomain, SolveError, SolverStats, TableMode};
use crate::graph::{MultiGraph, Objective, ProblemInstance, Solution};

/// Warn when the unclipped residue set could exceed this many values.
pub const LATTICE_STATE_WARNING: f64 = 1e7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    pub basis: Vec<u64>,
    /// Coefficient bound `K` for capacities.
    pub bound: u64,
}

/// All `sum a_i d_i` with `|a_i| <= coeff` that lie in `[-clip, clip]`.
///
/// Partial sums are kept only while the remaining basis values could still
/// bring them back into range, so no final value is lost.
fn combinations(basis: &[u64], coeff: u64, clip: i128) -> BTreeSet<i128> {
    let reach: Vec<i128> = basis.iter().map(|&d| d as i128 * coeff as i128).collect();
    let mut remaining: i128 = reach.iter().sum();
    let mut set = BTreeSet::from([0i128]);
    for (&d, &r) in basis.iter().zip(&reach) {
        remaining -= r;
        if d == 0 {
            continue;
        }
        let slack = clip + remaining;
        let mut next = BTreeSet::new();
        for &x in &set {
            // x + a d within [-slack, slack] and |a| <= coeff
            let d = d as i128;
            let lo = (-(coeff as i128)).max((-slack - x + d - 1).div_euclid(d));
            let hi = (coeff as i128).min((slack - x).div_euclid(d));
            for a in lo..=hi {
                next.insert(x + a * d);
            }
        }
        set = next;
    }
    set
}

impl LatticeSpec {
    pub fn new(basis: Vec<u64>, bound: u64) -> Result<Self, ExtensionError> {
        if bound == 0 {
            return Err(ExtensionError::ZeroLatticeBound);
        }
        if basis.is_empty() {
            return Err(ExtensionError::EmptyBasis);
        }
        Ok(LatticeSpec { basis, bound })
    }

    /// Checks that every capacity is a combination with coefficients within
    /// the bound.
    pub fn validate(&self, graph: &MultiGraph) -> Result<(), ExtensionError> {
        let max_cap = graph.edges().iter().map(|e| e.capacity).max().unwrap_or(0);
        let reachable = combinations(&self.basis, self.bound, max_cap as i128);
        for e in graph.edges() {
            if !reachable.contains(&(e.capacity as i128)) {
                return Err(ExtensionError::NotInLattice { edge: e.id.clone(), capacity: e.capacity });
            }
        }
        Ok(())
    }
}

/// `{ sum a_i d_i : |a_i| <= m^2 K } ∩ [-F, F]`, sorted.
pub fn lattice_residues(spec: &LatticeSpec, m: usize, f_bound: u64) -> Vec<i64> {
    let coeff = (m as u64).saturating_mul(m as u64).saturating_mul(spec.bound);
    let nonzero = spec.basis.iter().filter(|&&d| d != 0).count() as i32;
    let estimate = (2.0 * coeff as f64 + 1.0).powi(nonzero);
    if estimate > LATTICE_STATE_WARNING {
        warn!("lattice residue set may reach {estimate:.3e} values before clipping");
    }
    combinations(&spec.basis, coeff, f_bound as i128).into_iter().map(|v| v as i64).collect()
}

/// One restricted solve, with the table statistics for comparison.
#[derive(Debug, Clone)]
pub struct LatticeRun {
    pub solution: Solution,
    pub residues: Vec<i64>,
    pub stats: SolverStats,
}

/// Solves either problem with tables ranging only over lattice residues.
pub fn solve_lattice_with(
    instance: &ProblemInstance,
    spec: &LatticeSpec,
    mode: TableMode,
) -> Result<LatticeRun, ExtensionError> {
    if !instance.upgrades.is_empty() {
        return Err(SolveError::UnexpandedUpgrades(instance.upgrades.len()).into());
    }
    let graph = &instance.graph;
    spec.validate(graph)?;
    let tree = decompose(graph).map_err(SolveError::from)?;
    let f = upper_bound_flow(graph);
    if let Objective::Demand(d) = instance.objective {
        if d > f {
            return Err(SolveError::InfeasibleDemand { demand: d, max_flow: f }.into());
        }
    }
    let residues = lattice_residues(spec, graph.edge_count(), f);
    let solver = DpSolver::with_domain(graph, tree, graph.capacities(), ResidueDomain::lattice(residues.clone()), mode);
    let solution = match instance.objective {
        Objective::Budget(b) => solver.bcmfp(b)?,
        Objective::Demand(d) => solver.capndp(d)?,
    };
    Ok(LatticeRun { solution, residues, stats: solver.stats() })
}

/// [`solve_lattice_with`] using automatic table selection.
pub fn solve_lattice(instance: &ProblemInstance, spec: &LatticeSpec) -> Result<Solution, ExtensionError> {
    Ok(solve_lattice_with(instance, spec, TableMode::Auto)?.solution)
}
