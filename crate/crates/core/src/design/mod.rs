//! Which effort profiles a reward scheme can support as the unique equilibrium, and the
//! construction of schemes that support the social optimum or bound the loss.

mod scheme;
mod stability;

use thiserror::Error;

use crate::equilibrium::EquilibriumError;
use crate::lp::LpError;
use crate::welfare::WelfareError;

pub use scheme::{design_reward_scheme, DesignOptions, DesignResult, Guarantee};
pub use stability::{
    check_stability, stability_coefficients, stability_lp, NodeBinding, StabilityMethod,
    StabilityResult, STABILITY_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("reward design is only defined on hierarchies")]
    NotHierarchy,
    #[error("stability LP failed: {0}")]
    LpNumericalFailure(#[from] LpError),
    #[error(transparent)]
    Welfare(#[from] WelfareError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}
