use std::collections::BTreeMap;

use thiserror::Error;

use super::topology::NetworkTopology;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("share h[{}][{}] is not allowed: node {} is not an influencee of node {}", .i + 1, .j + 1, .j + 1, .i + 1)]
    NotInfluencee { i: usize, j: usize },
    #[error("share h[{}][{}] = {value} must be finite and non-negative", .i + 1, .j + 1)]
    InvalidShare { i: usize, j: usize, value: f64 },
    #[error("share h[{}][{}] is given twice", .i + 1, .j + 1)]
    Duplicate { i: usize, j: usize },
    #[error("retained share gamma must lie in (0, 1], got {0}")]
    NonPositiveGamma(f64),
    #[error("influencers of node {} claim {total} of its output, above the 1 - gamma = {cap} left after retention", .column + 1)]
    BudgetViolated { column: usize, total: f64, cap: f64 },
}

/// Reward shares `h_ij`: the fraction of influencee `j`'s output value paid to influencer `i`.
///
/// Only pairs with `j` an influencee of `i` may be stored. No cap on the row or column
/// sums is imposed here; the stability and uniqueness checks judge budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardScheme {
    rows: Vec<Vec<(usize, f64)>>,
}

impl RewardScheme {
    /// The scheme with no sharing at all.
    pub fn zero(node_count: usize) -> Self {
        Self {
            rows: vec![Vec::new(); node_count],
        }
    }

    /// Builds a scheme from `(i, j, h_ij)` triples (0-based).
    pub fn new(
        net: &NetworkTopology,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, SchemeError> {
        let n = net.node_count();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, value) in entries {
            if i >= n || j >= n || !net.is_influencee(i, j) {
                return Err(SchemeError::NotInfluencee { i, j });
            }
            if !(value.is_finite() && value >= 0.0) {
                return Err(SchemeError::InvalidShare { i, j, value });
            }
            rows[i].push((j, value));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(SchemeError::Duplicate { i, j: w[0].0 });
            }
        }
        Ok(Self { rows })
    }

    /// Converts raw output shares into the normalized scheme `h_ij = s_ij / gamma`.
    ///
    /// Every node keeps the fraction `gamma` of its own output; the shares `s_ij` its
    /// influencers claim must fit into the remaining `1 - gamma`.
    pub fn from_retained_shares(
        net: &NetworkTopology,
        shares: &BTreeMap<(usize, usize), f64>,
        gamma: f64,
    ) -> Result<Self, SchemeError> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(SchemeError::NonPositiveGamma(gamma));
        }
        let cap = 1.0 - gamma;
        let mut column = vec![0.0; net.node_count()];
        for (&(i, j), &s) in shares {
            if j < column.len() {
                column[j] += s;
            }
            if !(s.is_finite() && s >= 0.0) {
                return Err(SchemeError::InvalidShare { i, j, value: s });
            }
        }
        if let Some((j, &total)) = column.iter().enumerate().find(|(_, &t)| t > cap + 1e-12) {
            return Err(SchemeError::BudgetViolated {
                column: j,
                total,
                cap,
            });
        }
        Self::new(net, shares.iter().map(|(&(i, j), &s)| (i, j, s / gamma)))
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|idx| self.rows[i][idx].1)
            .unwrap_or(0.0)
    }

    /// Stored shares of influencer `i`, sorted by influencee.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Total share `sum_j h_ij` that node `i` accumulates from its influencees.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, h)| h).sum()
    }

    /// All stored `(i, j, h_ij)` triples in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, h)| (i, j, h)))
    }

    pub fn is_zero(&self) -> bool {
        self.entries().all(|(_, _, h)| h == 0.0)
    }

    /// Every share multiplied by `factor` (which must be finite and non-negative).
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(
            factor.is_finite() && factor >= 0.0,
            "invalid scale {factor}"
        );
        Self {
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|&(j, h)| (j, h * factor)).collect())
                .collect(),
        }
    }

    /// Largest accumulated share over all nodes.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.rows.len())
            .map(|i| self.row_sum(i))
            .fold(0.0, f64::max)
    }
}
