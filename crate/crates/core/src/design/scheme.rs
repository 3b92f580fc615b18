use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::equilibrium::solve_equilibrium_tree;
use crate::model::{
    Attenuation, EffortProfile, EpParams, NetworkKind, NetworkTopology, RewardScheme,
};
use crate::welfare::{optimal_effort, poa_bound_balanced, OptimalEffortOptions};

use super::stability::check_stability;
use super::DesignError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignOptions {
    pub optimal: OptimalEffortOptions,
    /// Random schemes tried by the fallback search, including the zero scheme.
    pub candidates: usize,
    pub seed: u64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            optimal: OptimalEffortOptions::default(),
            candidates: 500,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Guarantee {
    /// The optimum is the unique equilibrium; the price of anarchy is 1.
    OptimalSupported,
    /// Balanced-tree construction with the analytic bound `d^D / t_D`.
    ///
    /// On flat trees (depth 1) the equilibrium meets the bound. On deeper trees the
    /// measured ratio can exceed it; compare [`DesignResult::poa`] before relying on it.
    BalancedBounded { bound: f64 },
    /// Best of a random search, no guarantee.
    HeuristicBestFound { candidates: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub h: RewardScheme,
    /// Social output at the equilibrium `h` induces.
    pub achieved_so: f64,
    pub x_star: EffortProfile,
    pub so_optimal: f64,
    pub x_opt: EffortProfile,
    pub guarantee: Guarantee,
}

impl DesignResult {
    pub fn poa(&self) -> f64 {
        self.so_optimal / self.achieved_so
    }
}

/// Picks a reward scheme for an EP hierarchy.
///
/// 1. If the optimal profile is stable, use the scheme that supports it.
/// 2. Otherwise, on a balanced tree without attenuation and with `beta > 1`, every node
///    splits its full budget `(1+b)/beta^2` evenly among its children.
/// 3. Otherwise try `opts.candidates` random budget-respecting schemes (the first is
///    the zero scheme) and keep the one whose equilibrium has the highest output.
pub fn design_reward_scheme(
    net: &NetworkTopology,
    params: &EpParams,
    opts: &DesignOptions,
) -> Result<DesignResult, DesignError> {
    if net.kind() != NetworkKind::Hierarchy {
        return Err(DesignError::NotHierarchy);
    }
    let model = crate::model::ProductivityModel::Ep(*params);
    let opt = optimal_effort(net, &model, &opts.optimal)?;

    let stability = check_stability(net, params, &opt.x)?;
    let (h, guarantee) = if let Some(h) = stability.h {
        (h, Guarantee::OptimalSupported)
    } else if let (Some((d, depth)), Attenuation::One, true) =
        (net.balanced_shape(), params.mu(), params.beta() > 1.0)
    {
        let share = params.share_budget() / d as f64;
        let triples: Vec<_> = (0..net.node_count())
            .flat_map(|i| net.children(i).iter().map(move |&c| (i, c, share)))
            .collect();
        let bound = poa_bound_balanced(d, depth, params.beta())?.bound;
        (
            RewardScheme::new(net, triples).expect("valid shares"),
            Guarantee::BalancedBounded { bound },
        )
    } else {
        (
            heuristic_search(net, params, opts)?,
            Guarantee::HeuristicBestFound {
                candidates: opts.candidates.max(1),
                seed: opts.seed,
            },
        )
    };

    let eq = solve_equilibrium_tree(net, params, &h)?;
    Ok(DesignResult {
        achieved_so: eq.social_output(),
        x_star: eq.x,
        so_optimal: opt.social_output,
        x_opt: opt.x,
        h,
        guarantee,
    })
}

fn heuristic_search(
    net: &NetworkTopology,
    params: &EpParams,
    opts: &DesignOptions,
) -> Result<RewardScheme, DesignError> {
    let n = net.node_count();
    // with beta = 0 the budget is unbounded but sharing has no effect on output
    let budget = params.share_budget().min(1.0e6);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut schemes = vec![RewardScheme::zero(n)];
    for _ in 1..opts.candidates.max(1) {
        let mut triples = Vec::new();
        for i in 0..n {
            let targets = net.influencees(i);
            if targets.is_empty() {
                continue;
            }
            let total = budget * rng.random::<f64>();
            let weights: Vec<f64> = targets
                .iter()
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let sum: f64 = weights.iter().sum();
            if sum > 0.0 {
                for (&j, w) in targets.iter().zip(weights) {
                    triples.push((i, j, total * w / sum));
                }
            }
        }
        schemes.push(RewardScheme::new(net, triples).expect("valid shares"));
    }

    let scored: Vec<f64> = schemes
        .par_iter()
        .map(|h| solve_equilibrium_tree(net, params, h).map(|eq| eq.social_output()))
        .collect::<Result<_, _>>()?;
    let mut best = 0;
    for (k, &so) in scored.iter().enumerate() {
        if so > scored[best] {
            best = k;
        }
    }
    Ok(schemes.swap_remove(best))
}
