use super::WelfareError;

/// Gap from 1 below which `xi` flags its answer as near-degenerate.
const NEAR_ONE: f64 = 1e-6;

/// The unique solution of `x = [1 - exp(-beta x) / beta]^+` for `beta > 1`.
///
/// The residual `x - 1 + exp(-beta x)/beta` is increasing on `[0, 1]`, so plain bisection
/// applies. As `beta` approaches 1 the root approaches 0 like `sqrt(2 (beta - 1))`.
pub fn xi(beta: f64) -> Result<f64, WelfareError> {
    if !beta.is_finite() || beta <= 1.0 {
        return Err(WelfareError::Domain(format!(
            "xi needs beta > 1, got {beta}"
        )));
    }
    let g = |x: f64| x - 1.0 + (-beta * x).exp() / beta;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = g(mid);
        if v.abs() <= 1e-14 || hi - lo <= f64::EPSILON {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `phi(m, beta) = max{(1 + ln(m beta)) / beta, m beta + (1 - m beta) xi(beta)}`.
pub fn phi(m: f64, beta: f64) -> Result<f64, WelfareError> {
    if m.is_nan() || m <= 0.0 {
        return Err(WelfareError::Domain(format!("phi needs m > 0, got {m}")));
    }
    let xi = xi(beta)?;
    let mb = m * beta;
    Ok(((1.0 + mb.ln()) / beta).max(mb + (1.0 - mb) * xi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancedBoundReport {
    pub d: usize,
    pub depth: usize,
    pub beta: f64,
    /// `None` when `beta <= 1`.
    pub xi: Option<f64>,
    /// True when `beta` is within `1e-6` of 1 and `xi` is close to its singular limit.
    pub xi_near_degenerate: bool,
    /// `t_1, ..., t_D`; empty when `beta <= 1`.
    pub t: Vec<f64>,
    /// `d^D / t_D` before clamping (1 when `beta <= 1`).
    pub raw_bound: f64,
    /// `max(raw_bound, 1)`.
    pub bound: f64,
    pub clamped: bool,
}

/// Upper bound on the price of anarchy achievable on a balanced `d`-ary tree of depth `D`.
///
/// For `beta <= 1` the bound is exactly 1. Otherwise `t_1 = phi(d, beta)`,
/// `t_k = phi(d t_{k-1}, beta)` and the bound is `d^D / t_D`. That ratio can dip below
/// 1 for small `d beta`; the reported bound is clamped at 1 and `clamped` is set.
pub fn poa_bound_balanced(
    d: usize,
    depth: usize,
    beta: f64,
) -> Result<BalancedBoundReport, WelfareError> {
    if d < 1 || depth < 1 {
        return Err(WelfareError::Domain(format!(
            "balanced bound needs d >= 1 and D >= 1, got d = {d}, D = {depth}"
        )));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(WelfareError::Domain(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    if beta <= 1.0 {
        return Ok(BalancedBoundReport {
            d,
            depth,
            beta,
            xi: None,
            xi_near_degenerate: false,
            t: Vec::new(),
            raw_bound: 1.0,
            bound: 1.0,
            clamped: false,
        });
    }
    let df = d as f64;
    let mut t = Vec::with_capacity(depth);
    let mut m = df;
    for _ in 0..depth {
        let tk = phi(m, beta)?;
        t.push(tk);
        m = df * tk;
    }
    let raw_bound = df.powi(depth as i32) / t[depth - 1];
    Ok(BalancedBoundReport {
        d,
        depth,
        beta,
        xi: Some(xi(beta)?),
        xi_near_degenerate: beta - 1.0 < NEAR_ONE,
        t,
        raw_bound,
        bound: raw_bound.max(1.0),
        clamped: raw_bound < 1.0,
    })
}
