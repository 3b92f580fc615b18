use std::collections::BTreeMap;

use crate::lp::{solve_feasibility, Constraint, LpFeasibilityProblem, LpStatus};
use crate::model::{
    fractional_productivity, EpParams, NetworkKind, NetworkTopology, ProductivityModel,
    RewardScheme,
};

use super::DesignError;

/// Tolerance for "this node already plays 1" and for leaves.
pub const STABILITY_TOL: f64 = 1e-9;

/// `a_ij = beta/(1+b) * p_ij(x) * x_j` for every influencee `j` of `i`.
///
/// Node `i`'s first-order condition under a scheme `H` reads
/// `sum_j a_ij h_ij = 1 - x_i` (or `>=` when `x_i = 0`).
pub fn stability_coefficients(
    net: &NetworkTopology,
    params: &EpParams,
    x: &[f64],
) -> Result<BTreeMap<(usize, usize), f64>, DesignError> {
    if net.kind() != NetworkKind::Hierarchy {
        return Err(DesignError::NotHierarchy);
    }
    let model = ProductivityModel::Ep(*params);
    let coef = params.beta() / (1.0 + params.b());
    let mut out = BTreeMap::new();
    for i in 0..net.node_count() {
        for &j in net.influencees(i) {
            let p = fractional_productivity(net, &model, x, i, j).expect("j is an influencee");
            out.insert((i, j), coef * p * x[j]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityMethod {
    AnalyticPerNode,
    GenericLp,
}

/// Slack of one node's two constraints under the returned (or attempted) scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeBinding {
    pub node: usize,
    pub satisfiable: bool,
    /// `sum_j a_ij h_ij - (1 - x_i)`; zero when the constraint binds.
    pub output_slack: f64,
    /// `(1+b)/beta^2 - sum_j h_ij`; infinite when `beta = 0`.
    pub budget_slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityResult {
    pub stable: bool,
    /// The supporting scheme; `None` when some node cannot be satisfied.
    pub h: Option<RewardScheme>,
    pub binding: Vec<NodeBinding>,
    pub method: StabilityMethod,
}

fn check_inputs(net: &NetworkTopology, x: &[f64]) -> Result<(), DesignError> {
    if net.kind() != NetworkKind::Hierarchy {
        return Err(DesignError::NotHierarchy);
    }
    assert_eq!(
        x.len(),
        net.node_count(),
        "effort vector length must match node count"
    );
    Ok(())
}

/// Closed-form stability test, one node at a time.
///
/// A node that already plays 1 needs nothing; a leaf must play 1. Any other node is
/// satisfiable iff `budget * max_j a_ij >= 1 - x_i`. The constructed scheme puts all of
/// the node's share on that best influencee (lowest index on ties), scaled so the
/// constraint holds with equality. When a node fails, its binding entry reports the
/// attempt that spends the whole budget on the best influencee.
pub fn check_stability(
    net: &NetworkTopology,
    params: &EpParams,
    x: &[f64],
) -> Result<StabilityResult, DesignError> {
    check_inputs(net, x)?;
    let a = stability_coefficients(net, params, x)?;
    let budget = params.share_budget();
    let mut triples = Vec::new();
    let mut binding = Vec::with_capacity(net.node_count());
    for i in 0..net.node_count() {
        let need = 1.0 - x[i];
        if need <= STABILITY_TOL {
            binding.push(NodeBinding {
                node: i,
                satisfiable: true,
                output_slack: -need,
                budget_slack: budget,
            });
            continue;
        }
        let best = net.influencees(i).iter().map(|&j| (j, a[&(i, j)])).fold(
            None,
            |acc: Option<(usize, f64)>, (j, v)| match acc {
                Some((_, bv)) if bv >= v => acc,
                _ => Some((j, v)),
            },
        );
        let entry = match best {
            Some((j, amax)) if amax > 0.0 && budget * amax - need >= -1e-12 => {
                let h = (need / amax).min(budget);
                triples.push((i, j, h));
                NodeBinding {
                    node: i,
                    satisfiable: true,
                    output_slack: amax * h - need,
                    budget_slack: budget - h,
                }
            }
            Some((_, amax)) if budget.is_finite() => NodeBinding {
                node: i,
                satisfiable: false,
                output_slack: budget * amax - need,
                budget_slack: 0.0,
            },
            _ => NodeBinding {
                node: i,
                satisfiable: false,
                output_slack: -need,
                budget_slack: budget,
            },
        };
        binding.push(entry);
    }
    finish(net, triples, binding, StabilityMethod::AnalyticPerNode)
}

/// The same question answered by one feasibility LP per node over the shares `h_ij`.
///
/// Feasible points are rescaled so the output constraint binds for nodes with
/// `x_i > 0`; nodes at `x_i = 0` keep the LP's point.
pub fn stability_lp(
    net: &NetworkTopology,
    params: &EpParams,
    x: &[f64],
) -> Result<StabilityResult, DesignError> {
    check_inputs(net, x)?;
    let a = stability_coefficients(net, params, x)?;
    let budget = params.share_budget();
    let mut triples = Vec::new();
    let mut binding = Vec::with_capacity(net.node_count());
    for i in 0..net.node_count() {
        let need = 1.0 - x[i];
        let targets = net.influencees(i);
        if need <= STABILITY_TOL || targets.is_empty() {
            binding.push(NodeBinding {
                node: i,
                satisfiable: need <= STABILITY_TOL,
                output_slack: -need,
                budget_slack: budget,
            });
            continue;
        }
        let coeffs: Vec<f64> = targets.iter().map(|&j| a[&(i, j)]).collect();
        let mut constraints = vec![Constraint::ge(coeffs.clone(), need)];
        if budget.is_finite() {
            constraints.push(Constraint::le(vec![1.0; targets.len()], budget));
        }
        let out = solve_feasibility(&LpFeasibilityProblem {
            variable_count: targets.len(),
            constraints,
        })?;
        match out.status {
            LpStatus::Feasible(mut h) => {
                let supplied: f64 = coeffs.iter().zip(&h).map(|(c, v)| c * v).sum();
                if x[i] > 0.0 && supplied > 0.0 {
                    let scale = need / supplied;
                    h.iter_mut().for_each(|v| *v *= scale);
                }
                let supplied: f64 = coeffs.iter().zip(&h).map(|(c, v)| c * v).sum();
                let total: f64 = h.iter().sum();
                for (&j, &v) in targets.iter().zip(&h) {
                    if v > 0.0 {
                        triples.push((i, j, v));
                    }
                }
                binding.push(NodeBinding {
                    node: i,
                    satisfiable: true,
                    output_slack: supplied - need,
                    budget_slack: budget - total,
                });
            }
            LpStatus::Infeasible => binding.push(NodeBinding {
                node: i,
                satisfiable: false,
                output_slack: -out.phase1_objective,
                budget_slack: budget,
            }),
        }
    }
    finish(net, triples, binding, StabilityMethod::GenericLp)
}

fn finish(
    net: &NetworkTopology,
    triples: Vec<(usize, usize, f64)>,
    binding: Vec<NodeBinding>,
    method: StabilityMethod,
) -> Result<StabilityResult, DesignError> {
    let stable = binding.iter().all(|b| b.satisfiable);
    let h = stable
        .then(|| RewardScheme::new(net, triples).expect("shares are finite and non-negative"));
    Ok(StabilityResult {
        stable,
        h,
        binding,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_equilibrium_tree, uniqueness_certificate_tree, Verdict};
    use crate::model::Attenuation;

    fn ep(beta: f64, b: f64) -> EpParams {
        EpParams::new(beta, b, Attenuation::One).unwrap()
    }

    #[test]
    fn coefficients_tightness() {
        let net = NetworkTopology::flat(3);
        let a = stability_coefficients(&net, &ep(2.0, 0.0), &[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(a[&(0, 1)], 2.0);
        assert_eq!(a[&(0, 2)], 2.0);
        let a = stability_coefficients(&net, &ep(2.0, 0.0), &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(a[&(0, 1)], 0.0);
        let a = stability_coefficients(&net, &ep(0.0, 0.0), &[0.3, 0.4, 1.0]).unwrap();
        assert!(a.values().all(|&v| v == 0.0));
    }

    #[test]
    fn all_ones_is_stable_with_no_sharing() {
        let net = NetworkTopology::balanced(3, 2);
        for beta in [0.0, 0.7, 3.0] {
            let r = check_stability(&net, &ep(beta, 0.2), &[1.0; 13]).unwrap();
            assert!(r.stable);
            assert!(r.h.unwrap().is_zero());
            assert!(
                stability_lp(&net, &ep(beta, 0.2), &[1.0; 13])
                    .unwrap()
                    .stable
            );
        }
    }

    #[test]
    fn flat_large_poa_optimum_unsupportable() {
        let net = NetworkTopology::flat(5);
        let x = [0.0, 1.0, 1.0, 1.0, 1.0];
        let p = ep(4f64.ln(), 0.0);
        let r = check_stability(&net, &p, &x).unwrap();
        assert!(!r.stable);
        assert!(r.h.is_none());
        // budget * max a = 1/ln 4 = 0.7213
        assert!((r.binding[0].output_slack - (1.0 / 4f64.ln() - 1.0)).abs() < 1e-12);
        assert!(!stability_lp(&net, &p, &x).unwrap().stable);
    }

    #[test]
    fn tightness_point_infeasible() {
        let net = NetworkTopology::flat(3);
        let r = stability_lp(&net, &ep(2.0, 0.0), &[0.0, 1.0, 1.0]).unwrap();
        assert!(!r.stable);
    }

    #[test]
    fn leaves_must_play_one() {
        let net = NetworkTopology::flat(3);
        let r = check_stability(&net, &ep(0.5, 0.0), &[1.0, 0.9, 1.0]).unwrap();
        assert!(!r.stable);
        assert!(!r.binding[1].satisfiable);
    }

    #[test]
    fn zero_beta_needs_all_ones() {
        let net = NetworkTopology::flat(3);
        assert!(
            !check_stability(&net, &ep(0.0, 0.0), &[0.5, 1.0, 1.0])
                .unwrap()
                .stable
        );
        assert!(
            !stability_lp(&net, &ep(0.0, 0.0), &[0.5, 1.0, 1.0])
                .unwrap()
                .stable
        );
    }

    #[test]
    fn single_node() {
        let net = NetworkTopology::flat(1);
        let r = stability_lp(&net, &ep(1.0, 0.0), &[1.0]).unwrap();
        assert!(r.stable);
        assert!(r.h.unwrap().is_zero());
    }

    #[test]
    fn interior_profile_round_trips() {
        let net = NetworkTopology::balanced(2, 2);
        let p = ep(0.9, 0.3);
        let x = [0.8, 0.85, 0.9, 1.0, 1.0, 1.0, 1.0];
        for r in [
            check_stability(&net, &p, &x).unwrap(),
            stability_lp(&net, &p, &x).unwrap(),
        ] {
            assert!(r.stable, "{:?}", r.method);
            for b in &r.binding {
                assert!(b.output_slack.abs() <= 1e-9);
                assert!(b.budget_slack >= -1e-12);
            }
            let h = r.h.unwrap();
            let eq = solve_equilibrium_tree(&net, &p, &h).unwrap();
            for (a, b) in eq.x.iter().zip(&x) {
                assert!((a - b).abs() < 1e-8);
            }
            assert!(!eq.multiplicity());
            assert_eq!(
                uniqueness_certificate_tree(&net, &p, &h).unwrap().verdict,
                Verdict::Unique
            );
        }
    }
}
