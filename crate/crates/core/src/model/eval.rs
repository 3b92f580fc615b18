//! Productivity, payoff and output evaluation.
//!
//! All functions take efforts as a plain slice so they can be evaluated slightly
//! outside `[0, 1]` by finite-difference probes; callers holding an
//! [`EffortProfile`](super::EffortProfile) pass it by deref.

use super::params::{DirectPayoff, ProductivityModel};
use super::scheme::RewardScheme;
use super::topology::{NetworkKind, NetworkTopology};
use super::ModelError;

fn check_len(net: &NetworkTopology, x: &[f64]) {
    assert_eq!(
        x.len(),
        net.node_count(),
        "effort vector length does not match the network"
    );
}

/// Productivity `p_i`: the product of the influence factors of all influencers of `i`.
///
/// The root of a hierarchy has no influencers and productivity exactly 1.
pub fn productivity(net: &NetworkTopology, model: &ProductivityModel, x: &[f64], i: usize) -> f64 {
    check_len(net, x);
    net.influencers(i)
        .iter()
        .map(|&k| model.factor(net, k, x[k]))
        .product()
}

/// Productivities of every node.
pub fn productivities(net: &NetworkTopology, model: &ProductivityModel, x: &[f64]) -> Vec<f64> {
    check_len(net, x);
    match net.kind() {
        NetworkKind::Hierarchy => {
            let mut p = vec![1.0; net.node_count()];
            for j in 1..net.node_count() {
                let k = net.parent(j).expect("non-root node has a parent");
                p[j] = p[k] * model.factor(net, k, x[k]);
            }
            p
        }
        NetworkKind::Dag => (0..net.node_count())
            .map(|i| productivity(net, model, x, i))
            .collect(),
    }
}

/// Influencers of `j` that are not influencers of `i` (for `j` an influencee of `i`, this
/// always includes `i` itself; on a hierarchy it is the path from `i` down to `j`'s parent).
pub(crate) fn segment<'a>(
    net: &'a NetworkTopology,
    i: usize,
    j: usize,
) -> impl Iterator<Item = usize> + 'a {
    let upstream = net.influencers(i);
    net.influencers(j)
        .iter()
        .copied()
        .filter(move |k| upstream.binary_search(k).is_err())
}

/// Fractional productivity `p_ij = p_j / p_i`, evaluated as a product over the
/// segment between `i` and `j` so it stays defined even when `p_i` vanishes.
pub fn fractional_productivity(
    net: &NetworkTopology,
    model: &ProductivityModel,
    x: &[f64],
    i: usize,
    j: usize,
) -> Result<f64, ModelError> {
    check_len(net, x);
    if !net.is_influencee(i, j) {
        return Err(ModelError::NotDescendant { i, j });
    }
    Ok(segment(net, i, j)
        .map(|k| model.factor(net, k, x[k]))
        .product())
}

/// `dp_j / dx_i`; zero unless `i` influences `j`.
pub fn productivity_partial(
    net: &NetworkTopology,
    model: &ProductivityModel,
    x: &[f64],
    i: usize,
    j: usize,
) -> f64 {
    check_len(net, x);
    if !net.is_influencee(i, j) {
        return 0.0;
    }
    match model {
        ProductivityModel::Ep(p) => -p.beta() * productivity(net, model, x, j),
        ProductivityModel::Linear => -net
            .influencers(j)
            .iter()
            .filter(|&&k| k != i)
            .map(|&k| 1.0 - x[k])
            .product::<f64>(),
    }
}

/// `-(1/p_i) dp_j/dx_i` for an influencee `j` of `i`, without dividing by `p_i`.
pub(crate) fn output_rate_kernel(
    net: &NetworkTopology,
    model: &ProductivityModel,
    x: &[f64],
    i: usize,
    j: usize,
) -> f64 {
    match model {
        ProductivityModel::Ep(p) => {
            p.beta()
                * segment(net, i, j)
                    .map(|k| p.factor(net, k, x[k]))
                    .product::<f64>()
        }
        ProductivityModel::Linear => segment(net, i, j)
            .filter(|&k| k != i)
            .map(|k| 1.0 - x[k])
            .product(),
    }
}

/// Utility of node `i`: direct payoff scaled by productivity plus the shares it
/// collects from its influencees' outputs.
pub fn payoff(
    net: &NetworkTopology,
    model: &ProductivityModel,
    payoff_fn: &DirectPayoff,
    h: &RewardScheme,
    x: &[f64],
    i: usize,
) -> f64 {
    let direct = productivity(net, model, x, i) * payoff_fn.value(x[i]);
    let indirect: f64 = h
        .row(i)
        .iter()
        .map(|&(j, hij)| hij * productivity(net, model, x, j) * x[j])
        .sum();
    direct + indirect
}

/// Analytic `du_i / dx_i`.
pub fn payoff_gradient(
    net: &NetworkTopology,
    model: &ProductivityModel,
    payoff_fn: &DirectPayoff,
    h: &RewardScheme,
    x: &[f64],
    i: usize,
) -> f64 {
    let direct = productivity(net, model, x, i) * payoff_fn.derivative(x[i]);
    let indirect: f64 = h
        .row(i)
        .iter()
        .map(|&(j, hij)| hij * productivity_partial(net, model, x, i, j) * x[j])
        .sum();
    direct + indirect
}

/// Per-node outputs `y_i = p_i x_i`.
pub fn node_outputs(net: &NetworkTopology, model: &ProductivityModel, x: &[f64]) -> Vec<f64> {
    productivities(net, model, x)
        .into_iter()
        .zip(x)
        .map(|(p, &xi)| p * xi)
        .collect()
}

/// Social output: the sum of all node outputs.
pub fn social_output(net: &NetworkTopology, model: &ProductivityModel, x: &[f64]) -> f64 {
    node_outputs(net, model, x).iter().sum()
}

/// Effective fractional output rate of node `i`: the marginal rate at which its shared
/// income falls per unit of its own production effort, normalized by `p_i`.
///
/// Under the EP model this is `beta * sum_j h_ij p_ij x_j`.
pub fn efor(
    net: &NetworkTopology,
    model: &ProductivityModel,
    h: &RewardScheme,
    x: &[f64],
    i: usize,
) -> f64 {
    check_len(net, x);
    h.row(i)
        .iter()
        .map(|&(j, hij)| hij * output_rate_kernel(net, model, x, i, j) * x[j])
        .sum()
}
