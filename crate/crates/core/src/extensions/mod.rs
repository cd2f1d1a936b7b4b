//! Lattice-restricted residue domains and upgradable edges.

mod lattice;
mod upgrade;

use thiserror::Error;

pub use lattice::{
    lattice_residues, solve_lattice, solve_lattice_with, LatticeRun, LatticeSpec, LATTICE_STATE_WARNING,
};
pub use upgrade::{
    expand_upgrades, gadget_edge_counts, map_back, Gadget, GadgetMap, Interpretation, UpgradeChoice, UpgradeMenu,
};

use crate::dp::SolveError;
use crate::graph::GraphError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error("lattice basis is empty")]
    EmptyBasis,
    #[error("lattice coefficient bound must be positive")]
    ZeroLatticeBound,
    #[error("capacity {capacity} of edge {edge} is not a bounded combination of the lattice basis")]
    NotInLattice { edge: String, capacity: u64 },
    #[error("upgrade edge {0} has an empty menu")]
    EmptyMenu(String),
    #[error(
        "interpreted upgrades give cost {interpreted_cost} / flow {interpreted_flow}, \
         expanded purchase had cost {expanded_cost} / flow {expanded_flow}"
    )]
    MapBackMismatch { expanded_cost: u64, expanded_flow: u64, interpreted_cost: u64, interpreted_flow: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}
