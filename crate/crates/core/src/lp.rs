//! Dense phase-1 simplex for small linear feasibility problems.
//!
//! All variables are non-negative. Pivoting follows Bland's rule, so the pivot sequence,
//! and therefore the returned point, is a deterministic function of the input.

use thiserror::Error;

/// Phase-1 objective values at or below this count as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    GreaterEq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn le(coefficients: Vec<f64>, rhs: f64) -> Self {
        Self {
            coefficients,
            relation: Relation::LessEq,
            rhs,
        }
    }

    pub fn ge(coefficients: Vec<f64>, rhs: f64) -> Self {
        Self {
            coefficients,
            relation: Relation::GreaterEq,
            rhs,
        }
    }

    /// Amount by which `x` violates the constraint, relative to the row's largest
    /// magnitude (or absolute when that is below 1).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
        let raw = match self.relation {
            Relation::LessEq => lhs - self.rhs,
            Relation::GreaterEq => self.rhs - lhs,
        };
        raw.max(0.0) / self.scale().max(1.0)
    }

    fn scale(&self) -> f64 {
        self.coefficients
            .iter()
            .chain(std::iter::once(&self.rhs))
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Find `x >= 0` satisfying every constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct LpFeasibilityProblem {
    pub variable_count: usize,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpStatus {
    Feasible(Vec<f64>),
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Sum of artificial variables at the end of phase 1, on equilibrated rows.
    pub phase1_objective: f64,
    pub pivots: usize,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, LpStatus::Feasible(_))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    Shape {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("constraint {row} has a non-finite entry")]
    NonFinite { row: usize },
    #[error("simplex exceeded {0} pivots")]
    IterationLimit(usize),
    #[error("phase 1 reported feasible but the point violates a constraint by {0:e}")]
    Numerical(f64),
}

pub fn solve_feasibility(p: &LpFeasibilityProblem) -> Result<LpOutcome, LpError> {
    let n = p.variable_count;
    for (row, c) in p.constraints.iter().enumerate() {
        if c.coefficients.len() != n {
            return Err(LpError::Shape {
                row,
                found: c.coefficients.len(),
                expected: n,
            });
        }
        if !c.rhs.is_finite() || c.coefficients.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite { row });
        }
    }
    let m = p.constraints.len();
    if m == 0 {
        return Ok(LpOutcome {
            status: LpStatus::Feasible(vec![0.0; n]),
            phase1_objective: 0.0,
            pivots: 0,
        });
    }

    // Normalize each row to max-magnitude 1 and flip it so the rhs is non-negative.
    // A ">= 0" row is flipped to "<= 0" so its slack can start in the basis.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
    for c in &p.constraints {
        let s = c.scale();
        let s = if s > 0.0 { s } else { 1.0 };
        let mut a: Vec<f64> = c.coefficients.iter().map(|v| v / s).collect();
        let mut rhs = c.rhs / s;
        let mut rel = c.relation;
        if rhs < 0.0 || (rhs == 0.0 && rel == Relation::GreaterEq) {
            a.iter_mut().for_each(|v| *v = -*v);
            rhs = -rhs;
            rel = match rel {
                Relation::LessEq => Relation::GreaterEq,
                Relation::GreaterEq => Relation::LessEq,
            };
        }
        rows.push((a, rel, rhs));
    }

    // Columns: originals, one slack/surplus per row, then artificials for ">=" rows.
    let artificial_rows: Vec<usize> = (0..m)
        .filter(|&i| rows[i].1 == Relation::GreaterEq)
        .collect();
    let first_art = n + m;
    let cols = first_art + artificial_rows.len();
    let width = cols + 1;
    let mut t = vec![0.0; (m + 1) * width];
    let mut basis = vec![0usize; m];
    for (i, (a, rel, rhs)) in rows.iter().enumerate() {
        let r = &mut t[i * width..(i + 1) * width];
        r[..n].copy_from_slice(a);
        r[cols] = *rhs;
        match rel {
            Relation::LessEq => {
                r[n + i] = 1.0;
                basis[i] = n + i;
            }
            Relation::GreaterEq => {
                r[n + i] = -1.0;
            }
        }
    }
    for (k, &i) in artificial_rows.iter().enumerate() {
        t[i * width + first_art + k] = 1.0;
        basis[i] = first_art + k;
    }
    // Objective row holds reduced costs of "minimize sum of artificials".
    let obj = m * width;
    for col in first_art..cols {
        t[obj + col] = 1.0;
    }
    for &i in &artificial_rows {
        for col in 0..width {
            t[obj + col] -= t[i * width + col];
        }
    }

    let mut pivots = 0;
    while let Some(enter) = (0..cols).find(|&c| t[obj + c] < -PIVOT_TOL) {
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i * width + enter];
            if a > PIVOT_TOL {
                let ratio = t[i * width + cols] / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - PIVOT_TOL || (ratio <= lr + PIVOT_TOL && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // Phase-1 objective is bounded below by zero, so an entering column always has
        // a positive entry; guard anyway.
        let Some((row, _)) = leave else {
            break;
        };
        pivot(&mut t, width, m, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots >= MAX_PIVOTS {
            return Err(LpError::IterationLimit(MAX_PIVOTS));
        }
    }

    let phase1_objective = (-t[obj + cols]).max(0.0);
    if phase1_objective > FEASIBILITY_TOL {
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            phase1_objective,
            pivots,
        });
    }
    let mut x = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[i * width + cols].max(0.0);
        }
    }
    let worst = p
        .constraints
        .iter()
        .map(|c| c.violation(&x))
        .fold(0.0, f64::max);
    if worst > FEASIBILITY_TOL {
        return Err(LpError::Numerical(worst));
    }
    Ok(LpOutcome {
        status: LpStatus::Feasible(x),
        phase1_objective,
        pivots,
    })
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for i in 0..=m {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f != 0.0 {
            for (v, pr) in t[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            t[i * width + col] = 0.0;
        }
    }
}
