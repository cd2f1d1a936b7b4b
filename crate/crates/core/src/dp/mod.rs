//! Exact pseudo-polynomial dynamic program over the decomposition tree.
//!
//! For every tree node the table stores, per residue tuple, the cheapest set
//! of the node's edges that admits an integral circulation whose net inflow
//! at each listed vertex equals the tuple entry and is zero elsewhere. A tuple
//! lists the node's two terminals and whichever of the source and sink lie
//! strictly inside the node. Residues are inflow minus outflow, so pushing `v`
//! units from source to sink is the residue `-v` at the source and `+v` at the
//! sink.

mod cases;
mod solver;
mod table;

use std::fmt;

use thiserror::Error;

pub use cases::{classify, CaseCounts, CaseKey, Mirror, Recurrence};
pub use solver::{
    feasible, solve_bcmfp, solve_capndp, upper_bound_flow, DpSolver, SolveError, SolverStats, TableMode,
    AUTO_FULL_WORK_LIMIT,
};
pub use table::{build_table, leaf_cost, Choice, DpEntry, DpTable, TableScope, TableStats};

use crate::decompose::NodeId;

/// Residues at a node's first terminal `a`, the interior source `s` and sink
/// `t` when present, and the second terminal `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResidueTuple {
    pub a: i64,
    pub s: Option<i64>,
    pub t: Option<i64>,
    pub b: i64,
}

impl ResidueTuple {
    pub fn new(a: i64, s: Option<i64>, t: Option<i64>, b: i64) -> Self {
        ResidueTuple { a, s, t, b }
    }

    /// A tuple for a node without interior specials.
    pub fn pair(a: i64, b: i64) -> Self {
        ResidueTuple { a, s: None, t: None, b }
    }

    pub fn sum(&self) -> i128 {
        self.a as i128 + self.s.unwrap_or(0) as i128 + self.t.unwrap_or(0) as i128 + self.b as i128
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0 && self.s.unwrap_or(0) == 0 && self.t.unwrap_or(0) == 0
    }

    pub fn negated(&self) -> Self {
        ResidueTuple { a: -self.a, s: self.s.map(|x| -x), t: self.t.map(|x| -x), b: -self.b }
    }

    fn values(&self) -> impl Iterator<Item = i64> {
        [Some(self.a), self.s, self.t, Some(self.b)].into_iter().flatten()
    }
}

impl fmt::Display for ResidueTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.a)?;
        if let Some(s) = self.s {
            write!(f, ", s={s}")?;
        }
        if let Some(t) = self.t {
            write!(f, ", t={t}")?;
        }
        write!(f, ", {})", self.b)
    }
}

/// A DP value; infeasible tuples cost [`Cost::Infinite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cost {
    Finite(u64),
    Infinite,
}

impl Cost {
    pub fn finite(self) -> Option<u64> {
        match self {
            Cost::Finite(c) => Some(c),
            Cost::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(c) => write!(f, "{c}"),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

/// The residue values a table ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResidueDomain {
    /// Every integer in `[-bound, bound]`.
    Interval { bound: u64 },
    /// An explicit sorted, duplicate-free set of values containing zero.
    Lattice { values: Vec<i64> },
}

impl ResidueDomain {
    pub fn interval(bound: u64) -> Self {
        ResidueDomain::Interval { bound }
    }

    pub fn lattice(values: impl IntoIterator<Item = i64>) -> Self {
        let mut values: Vec<i64> = values.into_iter().chain([0]).collect();
        values.sort_unstable();
        values.dedup();
        ResidueDomain::Lattice { values }
    }

    /// Largest absolute value in the domain.
    pub fn bound(&self) -> u64 {
        match self {
            ResidueDomain::Interval { bound } => *bound,
            ResidueDomain::Lattice { values } => values.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ResidueDomain::Interval { bound } => 2 * *bound as usize + 1,
            ResidueDomain::Lattice { values } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> i64 {
        match self {
            ResidueDomain::Interval { bound } => i as i64 - *bound as i64,
            ResidueDomain::Lattice { values } => values[i],
        }
    }

    #[inline]
    pub fn index(&self, v: i64) -> Option<usize> {
        match self {
            ResidueDomain::Interval { bound } => {
                let b = *bound as i64;
                (-b..=b).contains(&v).then(|| (v + b) as usize)
            }
            ResidueDomain::Lattice { values } => values.binary_search(&v).ok(),
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        self.index(v).is_some()
    }

    /// Domain values in `[lo, hi]`, ascending.
    pub fn values_between(&self, lo: i64, hi: i64) -> Vec<i64> {
        match self {
            ResidueDomain::Interval { bound } => {
                let b = *bound as i64;
                (lo.max(-b)..=hi.min(b)).collect()
            }
            ResidueDomain::Lattice { values } => values.iter().copied().filter(|v| (lo..=hi).contains(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpError {
    #[error("tuple {tuple} does not match the special vertices of node {node}")]
    SpecialsMismatch { node: NodeId, tuple: ResidueTuple },
    #[error("tuple {0} does not sum to zero")]
    NonZeroSum(ResidueTuple),
    #[error("node {node} is not a {expected} node")]
    WrongNodeKind { node: NodeId, expected: &'static str },
    #[error("flow {flow} exceeds the table bound {bound}")]
    FlowOutOfRange { flow: u64, bound: u64 },
    #[error("table is pinned to flow {pinned}, queried at {flow}")]
    ScopeMismatch { flow: u64, pinned: u64 },
    #[error("tuple {tuple} at node {node} is infeasible")]
    Infeasible { node: NodeId, tuple: ResidueTuple },
}
