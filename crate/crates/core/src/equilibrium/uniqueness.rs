use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{
    efor, output_rate_kernel, segment, DirectPayoff, EpParams, NetworkKind, NetworkTopology,
    ProductivityModel, RewardScheme,
};

use super::spectral::spectral_norm;
use super::update::unclamped_update;
use super::EquilibriumError;

/// Largest total share any single node collects, `max_i sum_j h_ij`.
pub fn h_max(h: &RewardScheme) -> f64 {
    h.max_row_sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// Closed-form condition for EP hierarchies; a proof when it says `Unique`.
    TreeAnalytic,
    /// Largest Jacobian norm over random samples. This under-approximates the supremum,
    /// so a `Unique` verdict is only heuristic.
    SampledSpectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Unique,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessCertificate {
    pub kind: CertificateKind,
    pub h_max: f64,
    /// Left-hand side of the test: `beta^2 h_max` for the tree certificate, the largest
    /// sampled spectral norm for the sampled one.
    pub observed: f64,
    /// The verdict is `Unique` iff `observed < threshold`.
    pub threshold: f64,
    pub verdict: Verdict,
    pub samples: usize,
    /// Sample attaining `observed` (sampled certificate only).
    pub worst_sample: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// Samples whose power iteration hit its cap.
    pub unconverged_norms: usize,
}

impl UniquenessCertificate {
    pub fn is_heuristic(&self) -> bool {
        self.kind == CertificateKind::SampledSpectral
    }
}

const TREE_MARGIN: f64 = 1e-12;

/// `Unique` iff `beta^2 h_max < 1 + b`.
///
/// Schemes that spend a node's whole budget `(1+b)/beta^2` sit exactly on the boundary;
/// the test leaves a relative margin of `1e-12` so rounding cannot certify them.
pub fn uniqueness_certificate_tree(
    net: &NetworkTopology,
    params: &EpParams,
    h: &RewardScheme,
) -> Result<UniquenessCertificate, EquilibriumError> {
    if net.kind() != NetworkKind::Hierarchy {
        return Err(EquilibriumError::NotHierarchy);
    }
    let hm = h_max(h);
    let observed = params.beta() * params.beta() * hm;
    let threshold = 1.0 + params.b();
    Ok(UniquenessCertificate {
        kind: CertificateKind::TreeAnalytic,
        h_max: hm,
        observed,
        threshold,
        verdict: if observed < threshold * (1.0 - TREE_MARGIN) {
            Verdict::Unique
        } else {
            Verdict::Inconclusive
        },
        samples: 0,
        worst_sample: None,
        seed: None,
        unconverged_norms: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacobianMode {
    Analytic,
    /// Central differences with the given step.
    FiniteDifference {
        step: f64,
    },
}

/// Jacobian of the untruncated update `G = l ∘ g` at `x`.
///
/// On a hierarchy numbered parent-before-child the matrix is upper triangular, since
/// `g_k` only reads efforts inside `k`'s subtree.
pub fn jacobian_g(
    net: &NetworkTopology,
    model: &ProductivityModel,
    payoff_fn: &DirectPayoff,
    h: &RewardScheme,
    x: &[f64],
    mode: JacobianMode,
) -> DMatrix<f64> {
    let n = net.node_count();
    assert_eq!(x.len(), n, "effort vector length must match node count");
    match mode {
        JacobianMode::Analytic => {
            let mut jac = DMatrix::zeros(n, n);
            for k in 0..n {
                for &(j, hkj) in h.row(k) {
                    let kernel = output_rate_kernel(net, model, x, k, j);
                    jac[(k, j)] += hkj * kernel;
                    for m in segment(net, k, j) {
                        let dk = match model {
                            ProductivityModel::Ep(p) => -p.beta() * kernel,
                            ProductivityModel::Linear if m == k => 0.0,
                            ProductivityModel::Linear => -segment(net, k, j)
                                .filter(|&s| s != k && s != m)
                                .map(|s| 1.0 - x[s])
                                .product::<f64>(),
                        };
                        jac[(k, m)] += hkj * dk * x[j];
                    }
                }
                let slope = payoff_fn.inverse_derivative_slope(efor(net, model, h, x, k));
                jac.row_mut(k).scale_mut(slope);
            }
            jac
        }
        JacobianMode::FiniteDifference { step } => {
            let mut jac = DMatrix::zeros(n, n);
            let mut probe = x.to_vec();
            for m in 0..n {
                probe[m] = x[m] + step;
                let up = unclamped_update(net, model, payoff_fn, h, &probe);
                probe[m] = x[m] - step;
                let down = unclamped_update(net, model, payoff_fn, h, &probe);
                probe[m] = x[m];
                for k in 0..n {
                    jac[(k, m)] = (up[k] - down[k]) / (2.0 * step);
                }
            }
            jac
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampledCertificateOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SampledCertificateOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 42,
        }
    }
}

/// Largest spectral norm of the Jacobian of `G` over uniform samples of `[0,1]^n`.
///
/// `Unique` when that maximum is below `1 - 1e-6`. Sampling can miss the supremum, so
/// the verdict is a heuristic, never a proof.
pub fn uniqueness_certificate_general(
    net: &NetworkTopology,
    model: &ProductivityModel,
    payoff_fn: &DirectPayoff,
    h: &RewardScheme,
    opts: &SampledCertificateOptions,
) -> UniquenessCertificate {
    let n = net.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let points: Vec<Vec<f64>> = (0..opts.samples)
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .collect();
    let norms: Vec<_> = points
        .par_iter()
        .map(|x| {
            spectral_norm(&jacobian_g(
                net,
                model,
                payoff_fn,
                h,
                x,
                JacobianMode::Analytic,
            ))
        })
        .collect();

    let mut observed = 0.0;
    let mut worst = None;
    for (idx, s) in norms.iter().enumerate() {
        if worst.is_none() || s.value > observed {
            observed = s.value;
            worst = Some(idx);
        }
    }
    let threshold = 1.0 - 1e-6;
    UniquenessCertificate {
        kind: CertificateKind::SampledSpectral,
        h_max: h_max(h),
        observed,
        threshold,
        verdict: if observed < threshold {
            Verdict::Unique
        } else {
            Verdict::Inconclusive
        },
        samples: opts.samples,
        worst_sample: worst.map(|i| points[i].clone()),
        seed: Some(opts.seed),
        unconverged_norms: norms.iter().filter(|s| !s.converged).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{productivity, Attenuation};

    fn tightness() -> (NetworkTopology, EpParams, RewardScheme) {
        let net = NetworkTopology::flat(3);
        let params = EpParams::new(2.0, 0.0, Attenuation::One).unwrap();
        let h = RewardScheme::new(&net, [(0, 1, 0.25), (0, 2, 0.25)]).unwrap();
        (net, params, h)
    }

    #[test]
    fn h_max_cases() {
        let (_, _, h) = tightness();
        assert_eq!(h_max(&h), 0.5);
        assert_eq!(h_max(&RewardScheme::zero(4)), 0.0);
        let chain = NetworkTopology::chain(3);
        let h = RewardScheme::new(&chain, [(0, 1, 0.1), (0, 2, 0.2), (1, 2, 0.4)]).unwrap();
        assert!((h_max(&h) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn tree_certificate_cases() {
        let (net, params, h) = tightness();
        let c = uniqueness_certificate_tree(&net, &params, &h).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert_eq!((c.observed, c.threshold), (2.0, 1.0));

        let zero = uniqueness_certificate_tree(&net, &params, &RewardScheme::zero(3)).unwrap();
        assert_eq!(zero.verdict, Verdict::Unique);

        let chain = NetworkTopology::chain(2);
        let h = RewardScheme::new(&chain, [(0, 1, 1.0)]).unwrap();
        let p = EpParams::new(0.5, 0.0, Attenuation::One).unwrap();
        let c = uniqueness_certificate_tree(&chain, &p, &h).unwrap();
        assert_eq!(c.verdict, Verdict::Unique);
        assert_eq!(c.observed, 0.25);
    }

    #[test]
    fn jacobian_zero_without_sharing() {
        let net = NetworkTopology::balanced(2, 2);
        let params = EpParams::new(1.3, 0.1, Attenuation::One).unwrap();
        let j = jacobian_g(
            &net,
            &ProductivityModel::Ep(params),
            &DirectPayoff::from(&params),
            &RewardScheme::zero(7),
            &[0.5; 7],
            JacobianMode::Analytic,
        );
        assert!(j.iter().all(|&v| v == 0.0));
    }

    fn random_instance(seed: u64) -> (NetworkTopology, EpParams, RewardScheme, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..12);
        let parents: Vec<Option<usize>> = (0..n)
            .map(|i| (i > 0).then(|| rng.random_range(0..i)))
            .collect();
        let net = NetworkTopology::from_parents(&parents).unwrap();
        let mut triples = Vec::new();
        for i in 0..n {
            for &j in net.influencees(i) {
                if rng.random_bool(0.6) {
                    triples.push((i, j, rng.random_range(0.0..0.5)));
                }
            }
        }
        let h = RewardScheme::new(&net, triples).unwrap();
        let params = EpParams::new(
            rng.random_range(0.1..2.5),
            rng.random_range(0.0..1.0),
            Attenuation::Power(rng.random_range(0.0..1.0)),
        )
        .unwrap();
        let x = (0..n).map(|_| rng.random::<f64>()).collect();
        (net, params, h, x)
    }

    #[test]
    fn analytic_matches_finite_differences_on_trees() {
        for seed in 0..30 {
            let (net, params, h, x) = random_instance(seed);
            let model = ProductivityModel::Ep(params);
            let f = DirectPayoff::from(&params);
            let a = jacobian_g(&net, &model, &f, &h, &x, JacobianMode::Analytic);
            let fd = jacobian_g(
                &net,
                &model,
                &f,
                &h,
                &x,
                JacobianMode::FiniteDifference { step: 1e-6 },
            );
            assert!((&a - &fd).amax() < 1e-5, "seed {seed}");
            for r in 0..a.nrows() {
                for c in 0..r {
                    assert_eq!(a[(r, c)], 0.0);
                }
                // diagonal: beta^2/(1+b) sum_j h_rj p_rj x_j
                let beta = params.beta();
                let diag: f64 = h
                    .row(r)
                    .iter()
                    .map(|&(j, v)| {
                        v * productivity(&net, &model, &x, j) / productivity(&net, &model, &x, r)
                            * x[j]
                    })
                    .sum::<f64>()
                    * beta
                    * beta
                    / (1.0 + params.b());
                assert!((a[(r, r)] - diag).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn analytic_matches_finite_differences_linear_dag() {
        let net = NetworkTopology::new(
            5,
            NetworkKind::Dag,
            &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (1, 4)],
        )
        .unwrap();
        let h =
            RewardScheme::new(&net, [(0, 3, 0.4), (0, 4, 0.2), (1, 4, 0.3), (2, 3, 0.5)]).unwrap();
        let x = [0.3, 0.6, 0.2, 0.8, 0.5];
        let f = DirectPayoff::EpQuadratic { b: 0.4 };
        for model in [
            ProductivityModel::Linear,
            ProductivityModel::Ep(EpParams::new(1.2, 0.4, Attenuation::One).unwrap()),
        ] {
            let a = jacobian_g(&net, &model, &f, &h, &x, JacobianMode::Analytic);
            let fd = jacobian_g(
                &net,
                &model,
                &f,
                &h,
                &x,
                JacobianMode::FiniteDifference { step: 1e-6 },
            );
            assert!((&a - &fd).amax() < 1e-6);
        }
    }

    #[test]
    fn sampled_certificate_zero_sharing() {
        let net = NetworkTopology::balanced(2, 2);
        let params = EpParams::new(3.0, 0.0, Attenuation::One).unwrap();
        let c = uniqueness_certificate_general(
            &net,
            &ProductivityModel::Ep(params),
            &DirectPayoff::from(&params),
            &RewardScheme::zero(7),
            &SampledCertificateOptions::default(),
        );
        assert_eq!(c.observed, 0.0);
        assert_eq!(c.verdict, Verdict::Unique);
        assert!(c.is_heuristic());
    }

    #[test]
    fn sampled_certificate_tightness_inconclusive() {
        let (net, params, h) = tightness();
        let c = uniqueness_certificate_general(
            &net,
            &ProductivityModel::Ep(params),
            &DirectPayoff::from(&params),
            &h,
            &SampledCertificateOptions::default(),
        );
        assert!(c.observed >= 1.0);
        assert_eq!(c.verdict, Verdict::Inconclusive);
        // the worst sample sits where the root barely produces
        assert!(c.worst_sample.unwrap()[0] < 0.3);
    }

    #[test]
    fn sampled_norm_dominates_diagonal_but_not_by_much() {
        // ratio beta^2 h_max / (1+b) = 0.5
        let net = NetworkTopology::balanced(2, 2);
        let params = EpParams::new(1.0, 0.0, Attenuation::One).unwrap();
        let h = RewardScheme::new(&net, [(0, 1, 0.25), (0, 2, 0.25), (1, 3, 0.5), (2, 6, 0.5)])
            .unwrap();
        let model = ProductivityModel::Ep(params);
        let f = DirectPayoff::from(&params);
        let c = uniqueness_certificate_general(
            &net,
            &model,
            &f,
            &h,
            &SampledCertificateOptions::default(),
        );
        let x = c.worst_sample.clone().unwrap();
        let j = jacobian_g(&net, &model, &f, &h, &x, JacobianMode::Analytic);
        let diag_max = (0..7).map(|k| j[(k, k)].abs()).fold(0.0, f64::max);
        let off = {
            let mut o = j.clone();
            o.fill_diagonal(0.0);
            o.norm()
        };
        assert!(c.observed + 1e-12 >= diag_max);
        assert!(c.observed <= 0.5 + off + 1e-12);
        assert_eq!(c.verdict, Verdict::Unique);
    }
}
