use crate::equilibrium::{
    solve_equilibrium_fixed_point, solve_equilibrium_tree, EquilibriumResult, FixedPointOptions,
};
use crate::model::{
    DirectPayoff, EffortProfile, NetworkKind, NetworkTopology, ProductivityModel, RewardScheme,
};

use super::optimal::{optimal_effort, OptimalEffortOptions, OptimalMethod};
use super::WelfareError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PoaOptions {
    pub optimal: OptimalEffortOptions,
    pub fixed_point: FixedPointOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoaReport {
    pub so_equilibrium: f64,
    pub so_optimal: f64,
    pub poa: f64,
    pub x_star: EffortProfile,
    pub x_opt: EffortProfile,
    pub optimal_method: OptimalMethod,
    /// Set when the equilibrium solver saw more than one candidate; the ratio then
    /// depends on which equilibrium was selected.
    pub multiplicity_note: bool,
}

/// Ratio of optimal to equilibrium social output.
///
/// The equilibrium comes from backward induction on EP hierarchies when the direct payoff
/// matches the model's `b`, and from fixed-point iteration otherwise.
pub fn poa(
    net: &NetworkTopology,
    model: &ProductivityModel,
    payoff_fn: &DirectPayoff,
    h: &RewardScheme,
    opts: &PoaOptions,
) -> Result<PoaReport, WelfareError> {
    let eq = equilibrium(net, model, payoff_fn, h, &opts.fixed_point)?;
    let opt = optimal_effort(net, model, &opts.optimal)?;
    let so_equilibrium = eq.social_output();
    if so_equilibrium <= 0.0 {
        return Err(WelfareError::DegenerateOutput {
            so_optimal: opt.social_output,
        });
    }
    Ok(PoaReport {
        so_equilibrium,
        so_optimal: opt.social_output,
        poa: opt.social_output / so_equilibrium,
        multiplicity_note: eq.multiplicity(),
        x_star: eq.x,
        x_opt: opt.x,
        optimal_method: opt.method,
    })
}

pub(crate) fn equilibrium(
    net: &NetworkTopology,
    model: &ProductivityModel,
    payoff_fn: &DirectPayoff,
    h: &RewardScheme,
    fp: &FixedPointOptions,
) -> Result<EquilibriumResult, crate::equilibrium::EquilibriumError> {
    match model {
        ProductivityModel::Ep(p)
            if net.kind() == NetworkKind::Hierarchy && DirectPayoff::from(p) == *payoff_fn =>
        {
            solve_equilibrium_tree(net, p, h)
        }
        _ => solve_equilibrium_fixed_point(net, model, payoff_fn, h, fp),
    }
}
