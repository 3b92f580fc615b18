use std::ops::Deref;

use thiserror::Error;

use super::topology::NetworkTopology;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("beta must be finite and >= 0, got {0}")]
    Beta(f64),
    #[error("communication cost b must be finite and >= 0, got {0}")]
    Cost(f64),
    #[error("attenuation exponent must be finite and >= 0, got {0}")]
    Alpha(f64),
    #[error("effort of node {} is {value}, outside [0, 1]", .node + 1)]
    EffortOutOfRange { node: usize, value: f64 },
}

/// Attenuation of a node's communication influence as a function of its child count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attenuation {
    /// No attenuation.
    One,
    /// `c^(-alpha)` for `c` children.
    Power(f64),
}

impl Attenuation {
    pub fn eval(self, children: usize) -> f64 {
        match self {
            Attenuation::One => 1.0,
            // a childless node influences nobody; any value in [0, 1] is inert
            Attenuation::Power(_) if children == 0 => 1.0,
            Attenuation::Power(alpha) => (children as f64).powf(-alpha),
        }
    }
}

/// Parameters of the exponential-productivity model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpParams {
    beta: f64,
    b: f64,
    mu: Attenuation,
}

impl EpParams {
    pub fn new(beta: f64, b: f64, mu: Attenuation) -> Result<Self, ParamError> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(ParamError::Beta(beta));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(ParamError::Cost(b));
        }
        if let Attenuation::Power(alpha) = mu {
            if !(alpha.is_finite() && alpha >= 0.0) {
                return Err(ParamError::Alpha(alpha));
            }
        }
        Ok(Self { beta, b, mu })
    }

    /// Communication quality; larger is worse.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Cost coefficient of communication effort.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn mu(&self) -> Attenuation {
        self.mu
    }

    /// Per-node cap `(1 + b) / beta^2` on accumulated reward shares that keeps the
    /// effort update a contraction. Infinite when `beta == 0`.
    pub fn share_budget(&self) -> f64 {
        if self.beta == 0.0 {
            f64::INFINITY
        } else {
            (1.0 + self.b) / (self.beta * self.beta)
        }
    }

    /// `mu(C_k) * exp(-beta * x_k)`: the influence factor node `k` passes to its subtree.
    pub fn factor(&self, net: &NetworkTopology, k: usize, x_k: f64) -> f64 {
        self.mu.eval(net.child_count(k)) * (-self.beta * x_k).exp()
    }
}

/// Production efforts, one per node, each in `[0, 1]`.
///
/// Communication effort of node `i` is `1 - x[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffortProfile(Vec<f64>);

impl EffortProfile {
    pub fn new(x: Vec<f64>) -> Result<Self, ParamError> {
        if let Some((node, &value)) = x
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(ParamError::EffortOutOfRange { node, value });
        }
        Ok(Self(x))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for EffortProfile {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// How influencers' production efforts translate into a node's productivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProductivityModel {
    /// `p_i = prod_{k in R_i} mu(C_k) exp(-beta x_k)`.
    Ep(EpParams),
    /// `p_i = prod_{k in R_i} (1 - x_k)`.
    Linear,
}

impl ProductivityModel {
    pub fn ep_params(&self) -> Option<&EpParams> {
        match self {
            ProductivityModel::Ep(p) => Some(p),
            ProductivityModel::Linear => None,
        }
    }

    pub(crate) fn factor(&self, net: &NetworkTopology, k: usize, x_k: f64) -> f64 {
        match self {
            ProductivityModel::Ep(p) => p.factor(net, k, x_k),
            ProductivityModel::Linear => 1.0 - x_k,
        }
    }
}

/// The direct-payoff function `f` of own production effort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectPayoff {
    /// `f(x) = x - x^2/2 - b (1 - x)^2 / 2`.
    EpQuadratic { b: f64 },
}

impl DirectPayoff {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            DirectPayoff::EpQuadratic { b } => x - 0.5 * x * x - 0.5 * b * (1.0 - x) * (1.0 - x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            DirectPayoff::EpQuadratic { b } => (1.0 + b) * (1.0 - x),
        }
    }

    /// Inverse of the derivative, `l = (f')^{-1}`; monotone decreasing.
    pub fn inverse_derivative(&self, y: f64) -> f64 {
        match *self {
            DirectPayoff::EpQuadratic { b } => 1.0 - y / (1.0 + b),
        }
    }

    /// Slope of the inverse derivative; constant for the quadratic payoff.
    pub fn inverse_derivative_slope(&self, _y: f64) -> f64 {
        match *self {
            DirectPayoff::EpQuadratic { b } => -1.0 / (1.0 + b),
        }
    }
}

impl From<&EpParams> for DirectPayoff {
    fn from(p: &EpParams) -> Self {
        DirectPayoff::EpQuadratic { b: p.b }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_validation() {
        assert!(EpParams::new(-0.1, 0.0, Attenuation::One).is_err());
        assert!(EpParams::new(1.0, f64::NAN, Attenuation::One).is_err());
        assert!(EpParams::new(1.0, 0.0, Attenuation::Power(-1.0)).is_err());
        let p = EpParams::new(0.0, 1.0, Attenuation::One).unwrap();
        assert!(p.share_budget().is_infinite());
        let p = EpParams::new(2.0, 1.0, Attenuation::One).unwrap();
        assert_eq!(p.share_budget(), 0.5);
    }

    #[test]
    fn attenuation_is_in_unit_interval_and_non_increasing() {
        for mu in [
            Attenuation::One,
            Attenuation::Power(0.0),
            Attenuation::Power(0.7),
        ] {
            let mut prev = 1.0;
            for c in 1..20 {
                let v = mu.eval(c);
                assert!((0.0..=1.0).contains(&v));
                assert!(v <= prev);
                prev = v;
            }
        }
        assert_eq!(Attenuation::Power(1.0).eval(4), 0.25);
    }

    #[test]
    fn effort_range_checked() {
        assert!(EffortProfile::new(vec![0.0, 1.0, 0.5]).is_ok());
        let err = EffortProfile::new(vec![0.5, 1.2]).unwrap_err();
        assert_eq!(
            err,
            ParamError::EffortOutOfRange {
                node: 1,
                value: 1.2
            }
        );
        assert!(EffortProfile::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn quadratic_payoff_and_inverse() {
        let f = DirectPayoff::EpQuadratic { b: 0.0 };
        assert_eq!(f.value(1.0), 0.5);
        assert_eq!(f.derivative(1.0), 0.0);
        let f = DirectPayoff::EpQuadratic { b: 0.7 };
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            assert!((f.inverse_derivative(f.derivative(x)) - x).abs() < 1e-15);
        }
        // strict concavity
        assert!(f.value(0.5) > 0.5 * (f.value(0.2) + f.value(0.8)));
    }
}
