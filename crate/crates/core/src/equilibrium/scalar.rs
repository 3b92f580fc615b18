use super::EquilibriumError;

/// Residual target for the scalar KKT equation.
pub const ROOT_TOL: f64 = 1e-12;

/// All KKT candidates of one node's best-response problem and the one it picks.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub chosen: f64,
    /// Ascending; more than one entry means the node's best response is not pinned down
    /// by the first-order conditions alone.
    pub candidates: Vec<f64>,
}

/// Solves `x = [1 - a * exp(-beta * x)]^+` on `[0, 1]`.
///
/// The residual `g(x) = x - 1 + a exp(-beta x)` is convex, so it has at most two roots,
/// one on each side of its minimizer; both are bracketed and bisected. The corner `x = 0`
/// is also a candidate whenever `g(0) >= 0` (the clamp is active or `0` is itself a root).
/// Among the candidates the one with the largest `utility` wins; ties go to the larger `x`.
pub fn scalar_best_response(
    a: f64,
    beta: f64,
    utility: impl Fn(f64) -> f64,
) -> Result<BestResponse, EquilibriumError> {
    assert!(a >= 0.0 && beta >= 0.0, "coefficients must be non-negative");
    let g = |x: f64| x - 1.0 + a * (-beta * x).exp();

    let g0 = g(0.0);
    let g1 = g(1.0);
    let slope_scale = a * beta;
    let x_min = if slope_scale <= 1.0 {
        0.0
    } else {
        (slope_scale.ln() / beta).min(1.0)
    };
    let g_min = g(x_min);

    let mut candidates = Vec::with_capacity(3);
    if g0 >= -ROOT_TOL {
        candidates.push(0.0);
    }
    if x_min > 0.0 {
        if g0 > ROOT_TOL && g_min < -ROOT_TOL {
            candidates.push(bisect(g, 0.0, x_min)?);
        } else if g_min.abs() <= ROOT_TOL {
            candidates.push(x_min);
        }
    }
    if g_min < -ROOT_TOL {
        if g1 > ROOT_TOL {
            candidates.push(bisect(g, x_min, 1.0)?);
        } else {
            candidates.push(1.0);
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|later, earlier| (*later - *earlier).abs() <= 1e-9);

    let mut chosen = candidates[0];
    let mut best = utility(chosen);
    for &c in &candidates[1..] {
        let u = utility(c);
        if u >= best - 1e-12 * best.abs().max(1.0) {
            chosen = c;
            best = best.max(u);
        }
    }
    Ok(BestResponse { chosen, candidates })
}

/// Bisection on a bracket where `g(lo) > 0 > g(hi)` or `g(lo) < 0 < g(hi)`.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64, EquilibriumError> {
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo.signum() == g_hi.signum() {
        return Err(EquilibriumError::Bracketing { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        // run to full precision: near a tangency a small residual can hide a large error
        if g_mid == 0.0 || hi - lo <= 2.0 * f64::EPSILON {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_sharing_means_full_effort() {
        let br = scalar_best_response(0.0, 2.0, |x| x).unwrap();
        assert_eq!(br.candidates, vec![1.0]);
        assert_eq!(br.chosen, 1.0);
    }

    #[test]
    fn unique_interior_root() {
        // oracle: plain bisection of x - 1 + 0.5 e^-x on [0, 1]
        let oracle = {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid - 1.0 + 0.5 * (-mid).exp() < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let br = scalar_best_response(0.5, 1.0, |x| x).unwrap();
        assert_eq!(br.candidates.len(), 1);
        assert!((br.chosen - oracle).abs() < 1e-11);
        assert!((br.chosen - 0.7680).abs() < 1e-4);
    }

    #[test]
    fn two_candidates_pick_higher_utility() {
        // u(x) = f(x) + 0.5 e^{-2x} with b = 0
        let u = |x: f64| x - 0.5 * x * x + 0.5 * (-2.0 * x).exp();
        let br = scalar_best_response(1.0, 2.0, u).unwrap();
        assert_eq!(br.candidates.len(), 2);
        assert_eq!(br.candidates[0], 0.0);
        assert!((br.candidates[1] - 0.797).abs() < 5e-4);
        assert_eq!(br.chosen, br.candidates[1]);
        assert!(u(br.chosen) > 0.58 && u(0.0) == 0.5);
    }

    #[test]
    fn clamped_corner_and_two_interior_roots() {
        // a slightly above 1 with beta = 1.45: corner 0 plus two interior roots
        let br = scalar_best_response(1.03, 1.45, |x| x).unwrap();
        assert_eq!(br.candidates.len(), 3);
        assert_eq!(br.candidates[0], 0.0);
        for &c in &br.candidates[1..] {
            assert!((c - 1.0 + 1.03 * (-1.45 * c).exp()).abs() <= ROOT_TOL);
        }
    }

    #[test]
    fn heavy_sharing_pins_effort_at_zero() {
        let br = scalar_best_response(5.0, 0.5, |x| -x).unwrap();
        assert_eq!(br.candidates, vec![0.0]);
    }

    #[test]
    fn ties_go_to_larger_effort() {
        let br = scalar_best_response(1.0, 2.0, |_| 1.0).unwrap();
        assert_eq!(br.chosen, *br.candidates.last().unwrap());
    }

    #[test]
    fn zero_beta_is_linear() {
        let br = scalar_best_response(0.3, 0.0, |x| x).unwrap();
        assert_eq!(br.candidates.len(), 1);
        assert!((br.chosen - 0.7).abs() < 1e-12);
    }
}
