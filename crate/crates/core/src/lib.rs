//! Exact and approximate solvers for budget-constrained max flow and
//! single-pair capacitated network design on undirected series-parallel
//! multigraphs with all-or-nothing edge costs.

pub mod decompose;
pub mod dp;
pub mod extensions;
pub mod fptas;
pub mod graph;
pub mod oracle;
