//! Socially optimal efforts, the price of anarchy, and the closed-form bound machinery for
//! balanced hierarchies.

mod bound;
mod optimal;
mod poa;

use thiserror::Error;

use crate::equilibrium::EquilibriumError;

pub use bound::{phi, poa_bound_balanced, xi, BalancedBoundReport};
pub use optimal::{
    optimal_effort, optimal_threshold, OptimalEffort, OptimalEffortOptions, OptimalMethod,
};
pub use poa::{poa, PoaOptions, PoaReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WelfareError {
    #[error("brute-force search is capped at {cap} nodes for non-balanced networks, got {nodes}")]
    TooLarge { nodes: usize, cap: usize },
    #[error("{0}")]
    Domain(String),
    #[error("equilibrium social output is zero; the price of anarchy is infinite (optimum {so_optimal})")]
    DegenerateOutput { so_optimal: f64 },
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}
