//! Domain types of the effort game and the evaluation of productivity, payoffs and output.

mod eval;
mod params;
mod scheme;
mod topology;

use thiserror::Error;

pub use eval::{
    efor, fractional_productivity, node_outputs, payoff, payoff_gradient, productivities,
    productivity, productivity_partial, social_output,
};
pub(crate) use eval::{output_rate_kernel, segment};
pub use params::{
    Attenuation, DirectPayoff, EffortProfile, EpParams, ParamError, ProductivityModel,
};
pub use scheme::{RewardScheme, SchemeError};
pub use topology::{NetworkKind, NetworkTopology, TopologyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("node {} is not an influencee of node {}", .j + 1, .i + 1)]
    NotDescendant { i: usize, j: usize },
}
