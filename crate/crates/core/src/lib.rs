//! Effort games on influencer–influencee networks.
//!
//! Every agent splits a unit of time between production (which pays directly) and
//! communication (which raises the productivity of the agents below it). Influencees
//! pay a share of their output value back to their influencers. This crate computes
//! the resulting Nash equilibria, certifies when they are unique, measures how far they
//! fall short of the socially optimal output, and designs reward-sharing schemes that
//! close (or provably bound) that gap.
//!
//! * [`model`]: networks, parameters, productivity, payoffs, social output.
//! * [`equilibrium`]: backward induction on trees, fixed-point iteration on general
//!   networks, uniqueness certificates.
//! * [`welfare`]: optimal efforts, price of anarchy, closed-form bounds for balanced trees.
//! * [`design`]: stability of effort profiles and reward-scheme construction.
//! * [`lp`]: the small phase-1 simplex used by the generic stability route.
//!
//! Node indices are 0-based in the API. Error messages and the command-line file
//! formats use 1-based ids with the root as node 1.

pub mod design;
pub mod equilibrium;
pub mod lp;
pub mod model;
pub mod welfare;

pub use model::{
    Attenuation, DirectPayoff, EffortProfile, EpParams, NetworkKind, NetworkTopology,
    ProductivityModel, RewardScheme,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/model.md")]
    struct Model;
    #[doc = include_str!("../../../book/src/equilibrium.md")]
    struct Equilibrium;
    #[doc = include_str!("../../../book/src/welfare.md")]
    struct Welfare;
    #[doc = include_str!("../../../book/src/design.md")]
    struct Design;
    #[doc = include_str!("../../../book/src/lp.md")]
    struct Lp;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
