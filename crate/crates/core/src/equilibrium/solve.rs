use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{
    node_outputs, social_output, DirectPayoff, EffortProfile, EpParams, NetworkKind,
    NetworkTopology, ProductivityModel, RewardScheme,
};

use super::scalar::scalar_best_response;
use super::update::{effort_update, fixed_point_residual};
use super::EquilibriumError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    TreeBackwardInduction,
    FixedPointIteration,
}

/// A Nash equilibrium effort profile together with how it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub x: EffortProfile,
    /// Per-node outputs `p_i x_i` at the equilibrium.
    pub outputs: Vec<f64>,
    /// `max_i |x_i - F_i(x)|`.
    pub residual: f64,
    /// Iterations of the converged start (0 for backward induction).
    pub iterations: usize,
    /// For each node, the competing candidate efforts when more than one was found
    /// (KKT roots on the tree route, distinct fixed-point coordinates on the iterative
    /// route); empty when the node's effort was pinned down uniquely.
    pub alternatives: Vec<Vec<f64>>,
    pub method: SolveMethod,
    /// Seed of the random starts (iterative route only).
    pub seed: Option<u64>,
    /// Number of distinct fixed points reached (iterative route; 1 on the tree route).
    pub distinct_fixed_points: usize,
    /// Starts that hit the iteration cap without converging.
    pub failed_starts: usize,
}

impl EquilibriumResult {
    /// Whether another equilibrium (or another KKT candidate) was detected.
    pub fn multiplicity(&self) -> bool {
        self.distinct_fixed_points > 1 || self.alternatives.iter().any(|a| !a.is_empty())
    }

    pub fn social_output(&self) -> f64 {
        self.outputs.iter().sum()
    }
}

/// Backward induction for the EP model on a hierarchy.
///
/// Leaves play 1. Moving from the highest index towards the root, each node sees its
/// subtree's efforts already fixed; its first-order condition collapses to
/// `x = [1 - A exp(-beta x)]^+` with `A` determined by the subtree, which
/// [`scalar_best_response`] solves, selecting the utility-maximizing candidate.
/// Worst-case cost is quadratic in the node count (a line).
pub fn solve_equilibrium_tree(
    net: &NetworkTopology,
    params: &EpParams,
    h: &RewardScheme,
) -> Result<EquilibriumResult, EquilibriumError> {
    if net.kind() != NetworkKind::Hierarchy {
        return Err(EquilibriumError::NotHierarchy);
    }
    let n = net.node_count();
    let beta = params.beta();
    let b = params.b();
    let payoff_fn = DirectPayoff::from(params);
    let mut x = vec![1.0; n];
    let mut alternatives = vec![Vec::new(); n];

    for i in (0..n).rev() {
        let own_mu = params.mu().eval(net.child_count(i));
        // Σ_j h_ij p_ij x_j with node i's own exp(-beta x_i) factored out.
        let shared: f64 = h
            .row(i)
            .iter()
            .map(|&(j, hij)| {
                let mut q = own_mu;
                let mut k = net.parent(j).expect("influencee has a parent");
                while k != i {
                    q *= params.factor(net, k, x[k]);
                    k = net.parent(k).expect("i is an ancestor of j");
                }
                hij * q * x[j]
            })
            .sum();
        let a = beta / (1.0 + b) * shared;
        let utility = |t: f64| payoff_fn.value(t) + shared * (-beta * t).exp();
        let br = scalar_best_response(a, beta, utility)?;
        x[i] = br.chosen;
        if br.candidates.len() > 1 {
            alternatives[i] = br.candidates;
        }
    }

    let model = ProductivityModel::Ep(*params);
    let residual = fixed_point_residual(net, &model, &payoff_fn, h, &x);
    Ok(EquilibriumResult {
        outputs: node_outputs(net, &model, &x),
        x: EffortProfile::new(x).expect("best responses lie in [0, 1]"),
        residual,
        iterations: 0,
        alternatives,
        method: SolveMethod::TreeBackwardInduction,
        seed: None,
        distinct_fixed_points: 1,
        failed_starts: 0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Number of generated starting profiles; the first is all-ones, the rest uniform random.
    pub starts: usize,
    pub seed: u64,
    /// Caller-supplied starts, run after the generated ones.
    pub extra_starts: Vec<Vec<f64>>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
            starts: 16,
            seed: 42,
            extra_starts: Vec::new(),
        }
    }
}

struct StartOutcome {
    x: Vec<f64>,
    iterations: usize,
    change: f64,
    converged: bool,
}

fn iterate_from(
    net: &NetworkTopology,
    model: &ProductivityModel,
    payoff_fn: &DirectPayoff,
    h: &RewardScheme,
    mut x: Vec<f64>,
    opts: &FixedPointOptions,
) -> StartOutcome {
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let next = effort_update(net, model, payoff_fn, h, &x);
        change = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        if change < opts.tol {
            return StartOutcome {
                x,
                iterations: it,
                change,
                converged: true,
            };
        }
    }
    StartOutcome {
        x,
        iterations: opts.max_iter,
        change,
        converged: false,
    }
}

/// Multi-start iteration of `x <- F(x)` on any validated network and productivity model.
///
/// Starts run concurrently; their results are merged in start order, so the outcome is
/// identical to a sequential run with the same seed. Converged points further apart than
/// `100 * tol` count as distinct equilibria; the one with the highest social output is
/// returned (lowest start index on ties).
pub fn solve_equilibrium_fixed_point(
    net: &NetworkTopology,
    model: &ProductivityModel,
    payoff_fn: &DirectPayoff,
    h: &RewardScheme,
    opts: &FixedPointOptions,
) -> Result<EquilibriumResult, EquilibriumError> {
    let n = net.node_count();
    let mut starts = start_profiles(n, opts.starts.max(1), opts.seed);
    for s in &opts.extra_starts {
        assert_eq!(s.len(), n, "start length must match node count");
        starts.push(s.clone());
    }
    let outcomes: Vec<StartOutcome> = starts
        .into_par_iter()
        .map(|x0| iterate_from(net, model, payoff_fn, h, x0, opts))
        .collect();

    let failed_starts = outcomes.iter().filter(|o| !o.converged).count();
    let mut clusters: Vec<&StartOutcome> = Vec::new();
    for o in outcomes.iter().filter(|o| o.converged) {
        let known = clusters
            .iter()
            .any(|c| max_dist(&c.x, &o.x) <= 100.0 * opts.tol);
        if !known {
            clusters.push(o);
        }
    }
    if clusters.is_empty() {
        let last_change = outcomes
            .iter()
            .map(|o| o.change)
            .fold(f64::INFINITY, f64::min);
        return Err(EquilibriumError::NoConvergence {
            iterations: opts.max_iter,
            last_change,
        });
    }

    let mut best = clusters[0];
    let mut best_so = social_output(net, model, &best.x);
    for &c in &clusters[1..] {
        let so = social_output(net, model, &c.x);
        if so > best_so {
            best = c;
            best_so = so;
        }
    }

    let mut alternatives = vec![Vec::new(); n];
    if clusters.len() > 1 {
        for (i, alt) in alternatives.iter_mut().enumerate() {
            let mut vals: Vec<f64> = clusters.iter().map(|c| c.x[i]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup_by(|a, b| (*a - *b).abs() <= 100.0 * opts.tol);
            if vals.len() > 1 {
                *alt = vals;
            }
        }
    }

    let x: Vec<f64> = best.x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(EquilibriumResult {
        residual: fixed_point_residual(net, model, payoff_fn, h, &x),
        outputs: node_outputs(net, model, &x),
        x: EffortProfile::new(x).expect("clamped into [0, 1]"),
        iterations: best.iterations,
        alternatives,
        method: SolveMethod::FixedPointIteration,
        seed: Some(opts.seed),
        distinct_fixed_points: clusters.len(),
        failed_starts,
    })
}

fn start_profiles(n: usize, starts: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![vec![1.0; n]];
    for _ in 1..starts {
        out.push((0..n).map(|_| rng.random::<f64>()).collect());
    }
    out
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Attenuation;

    fn tightness() -> (NetworkTopology, EpParams, RewardScheme) {
        let net = NetworkTopology::flat(3);
        let params = EpParams::new(2.0, 0.0, Attenuation::One).unwrap();
        let h = RewardScheme::new(&net, [(0, 1, 0.25), (0, 2, 0.25)]).unwrap();
        (net, params, h)
    }

    #[test]
    fn no_sharing_tree() {
        let net = NetworkTopology::balanced(3, 2);
        let params = EpParams::new(1.7, 0.2, Attenuation::Power(0.3)).unwrap();
        let r = solve_equilibrium_tree(&net, &params, &RewardScheme::zero(13)).unwrap();
        assert!(r.x.iter().all(|&v| v == 1.0));
        assert!(!r.multiplicity());
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn tightness_tree() {
        let (net, params, h) = tightness();
        let r = solve_equilibrium_tree(&net, &params, &h).unwrap();
        assert!((r.x[0] - 0.797).abs() < 5e-4);
        assert_eq!(&r.x[1..], &[1.0, 1.0]);
        assert_eq!(r.alternatives[0].len(), 2);
        assert_eq!(r.alternatives[0][0], 0.0);
        assert!(r.multiplicity());
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn flat_no_sharing_social_output() {
        let net = NetworkTopology::flat(5);
        let params = EpParams::new(4f64.ln(), 0.0, Attenuation::One).unwrap();
        let r = solve_equilibrium_tree(&net, &params, &RewardScheme::zero(5)).unwrap();
        assert!(r.x.iter().all(|&v| v == 1.0));
        assert!((r.social_output() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_no_sharing_one_iteration() {
        let net = NetworkTopology::balanced(2, 2);
        let params = EpParams::new(1.0, 0.0, Attenuation::One).unwrap();
        let r = solve_equilibrium_fixed_point(
            &net,
            &ProductivityModel::Ep(params),
            &DirectPayoff::from(&params),
            &RewardScheme::zero(7),
            &FixedPointOptions::default(),
        )
        .unwrap();
        assert!(r.x.iter().all(|&v| v == 1.0));
        assert_eq!(r.iterations, 1);
        assert_eq!(r.seed, Some(42));
    }

    #[test]
    fn tightness_random_starts_find_the_attracting_point() {
        // x_1 = 0 repels the iteration (slope 2 there), so only 0.797 is reached
        let (net, params, h) = tightness();
        let r = solve_equilibrium_fixed_point(
            &net,
            &ProductivityModel::Ep(params),
            &DirectPayoff::from(&params),
            &h,
            &FixedPointOptions::default(),
        )
        .unwrap();
        assert_eq!(r.distinct_fixed_points, 1);
        assert!((r.x[0] - 0.797).abs() < 5e-4);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn fixed_point_finds_both_tightness_equilibria() {
        let (net, params, h) = tightness();
        let opts = FixedPointOptions {
            extra_starts: vec![vec![0.0, 1.0, 1.0]],
            ..Default::default()
        };
        let r = solve_equilibrium_fixed_point(
            &net,
            &ProductivityModel::Ep(params),
            &DirectPayoff::from(&params),
            &h,
            &opts,
        )
        .unwrap();
        assert!(r.distinct_fixed_points >= 2, "{r:?}");
        assert!(r.multiplicity());
        let roots = &r.alternatives[0];
        assert!(roots.iter().any(|&v| v.abs() < 1e-6));
        assert!(roots.iter().any(|&v| (v - 0.797).abs() < 5e-4));
        // x1 = 0 gives SO = 2 > 0.797 + 2 e^{-1.594}
        assert!(r.x[0].abs() < 1e-6);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn deterministic_across_runs() {
        let (net, params, h) = tightness();
        let run = || {
            solve_equilibrium_fixed_point(
                &net,
                &ProductivityModel::Ep(params),
                &DirectPayoff::from(&params),
                &h.scaled(0.5),
                &FixedPointOptions::default(),
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn linear_model_on_dag() {
        let net =
            NetworkTopology::new(4, NetworkKind::Dag, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let h = RewardScheme::new(&net, [(0, 3, 0.4), (1, 3, 0.3), (0, 1, 0.2)]).unwrap();
        let f = DirectPayoff::EpQuadratic { b: 0.5 };
        let r = solve_equilibrium_fixed_point(
            &net,
            &ProductivityModel::Linear,
            &f,
            &h,
            &FixedPointOptions::default(),
        )
        .unwrap();
        assert!(r.residual <= 1e-10);
        assert_eq!(r.x[3], 1.0);
    }

    #[test]
    fn no_convergence_reported() {
        let (net, params, h) = tightness();
        let opts = FixedPointOptions {
            max_iter: 1,
            starts: 2,
            ..Default::default()
        };
        let err = solve_equilibrium_fixed_point(
            &net,
            &ProductivityModel::Ep(params),
            &DirectPayoff::from(&params),
            &h,
            &opts,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            EquilibriumError::NoConvergence { iterations: 1, .. }
        ));
    }
}
