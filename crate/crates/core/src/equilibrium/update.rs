use crate::model::{
    efor, DirectPayoff, EpParams, NetworkKind, NetworkTopology, ProductivityModel, RewardScheme,
};

use super::EquilibriumError;

/// `G = l ∘ g` before truncation: each node's unconstrained first-order effort.
pub fn unclamped_update(
    net: &NetworkTopology,
    model: &ProductivityModel,
    payoff_fn: &DirectPayoff,
    h: &RewardScheme,
    x: &[f64],
) -> Vec<f64> {
    (0..net.node_count())
        .map(|i| payoff_fn.inverse_derivative(efor(net, model, h, x, i)))
        .collect()
}

/// The effort update map `F = T ∘ l ∘ g`; Nash equilibria are exactly its fixed points.
///
/// `g_i` is node `i`'s effective fractional output rate, `l` inverts the derivative of
/// the direct payoff, and `T` clamps into `[0, 1]`.
pub fn effort_update(
    net: &NetworkTopology,
    model: &ProductivityModel,
    payoff_fn: &DirectPayoff,
    h: &RewardScheme,
    x: &[f64],
) -> Vec<f64> {
    unclamped_update(net, model, payoff_fn, h, x)
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect()
}

/// The same map written out for the EP model on a hierarchy:
/// `F_i = [1 - beta/(1+b) * sum_j h_ij p_ij x_j]^+`, with `p_ij` accumulated by walking
/// parent links from `j` up to `i`.
pub fn ep_tree_update(
    net: &NetworkTopology,
    params: &EpParams,
    h: &RewardScheme,
    x: &[f64],
) -> Result<Vec<f64>, EquilibriumError> {
    if net.kind() != NetworkKind::Hierarchy {
        return Err(EquilibriumError::NotHierarchy);
    }
    let coef = params.beta() / (1.0 + params.b());
    Ok((0..net.node_count())
        .map(|i| {
            let shared: f64 = h
                .row(i)
                .iter()
                .map(|&(j, hij)| hij * path_productivity(net, params, x, i, j) * x[j])
                .sum();
            (1.0 - coef * shared).max(0.0)
        })
        .collect())
}

/// Product of influence factors on the tree path from `i` (inclusive) to `j` (exclusive).
fn path_productivity(
    net: &NetworkTopology,
    params: &EpParams,
    x: &[f64],
    i: usize,
    j: usize,
) -> f64 {
    let mut prod = 1.0;
    let mut k = net.parent(j).expect("influencee has a parent");
    loop {
        prod *= params.factor(net, k, x[k]);
        if k == i {
            return prod;
        }
        k = net.parent(k).expect("i is an ancestor of j");
    }
}

/// `max_i |x_i - F_i(x)|`.
pub fn fixed_point_residual(
    net: &NetworkTopology,
    model: &ProductivityModel,
    payoff_fn: &DirectPayoff,
    h: &RewardScheme,
    x: &[f64],
) -> f64 {
    effort_update(net, model, payoff_fn, h, x)
        .iter()
        .zip(x)
        .map(|(f, v)| (f - v).abs())
        .fold(0.0, f64::max)
}
