//! Nash equilibria of the effort game and certificates of their uniqueness.
//!
//! Two solvers are provided. [`solve_equilibrium_tree`] runs backward induction on an EP
//! hierarchy and is exact up to root-finding tolerance. [`solve_equilibrium_fixed_point`]
//! iterates the effort update map from several starts and works for any network and
//! productivity model.

mod scalar;
mod solve;
mod spectral;
mod uniqueness;
mod update;

use thiserror::Error;

pub use scalar::{scalar_best_response, BestResponse, ROOT_TOL};
pub use solve::{
    solve_equilibrium_fixed_point, solve_equilibrium_tree, EquilibriumResult, FixedPointOptions,
    SolveMethod,
};
pub use spectral::{spectral_norm, SpectralNorm};
pub use uniqueness::{
    h_max, jacobian_g, uniqueness_certificate_general, uniqueness_certificate_tree,
    CertificateKind, JacobianMode, SampledCertificateOptions, UniquenessCertificate, Verdict,
};
pub use update::{effort_update, ep_tree_update, fixed_point_residual, unclamped_update};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error(
        "no start converged within {iterations} iterations (smallest final step {last_change:e})"
    )]
    NoConvergence { iterations: usize, last_change: f64 },
    #[error("backward induction needs a hierarchy")]
    NotHierarchy,
    #[error("bisection bracket [{lo}, {hi}] does not straddle a root")]
    Bracketing { lo: f64, hi: f64 },
}
