use nalgebra::{DMatrix, DVector};

const REL_TOL: f64 = 1e-10;
const MAX_ITER: usize = 10_000;

/// Largest singular value with convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralNorm {
    pub value: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit; `value` is then the last estimate.
    pub converged: bool,
}

/// Largest singular value of `m` by power iteration on `m^T m`.
///
/// Stops once the eigen-residual `|A v - lambda v|` drops below `1e-10 * lambda`.
pub fn spectral_norm(m: &DMatrix<f64>) -> SpectralNorm {
    assert!(
        m.iter().all(|v| v.is_finite()),
        "matrix entries must be finite"
    );
    let a = m.transpose() * m;
    let n = a.ncols();
    if n == 0 || a.iter().all(|&v| v == 0.0) {
        return SpectralNorm {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    // deterministic start with no special alignment to coordinate axes
    let mut v = DVector::from_fn(n, |k, _| {
        1.0 + ((k + 1) as f64 * 0.618_033_988_749_895).fract()
    });
    v /= v.norm();
    let mut lambda = 0.0;
    for it in 1..=MAX_ITER {
        let w = &a * &v;
        lambda = v.dot(&w);
        let residual = (&w - lambda * &v).norm();
        if residual <= REL_TOL * lambda.abs() {
            return SpectralNorm {
                value: lambda.max(0.0).sqrt(),
                iterations: it,
                converged: true,
            };
        }
        let norm = w.norm();
        if norm == 0.0 {
            // start vector was in the null space
            return SpectralNorm {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        v = w / norm;
    }
    SpectralNorm {
        value: lambda.max(0.0).sqrt(),
        iterations: MAX_ITER,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_diagonal() {
        assert!((spectral_norm(&DMatrix::identity(4, 4)).value - 1.0).abs() < 1e-12);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -4.0]));
        assert!((spectral_norm(&d).value - 4.0).abs() < 1e-10);
    }

    #[test]
    fn zero_matrix() {
        let r = spectral_norm(&DMatrix::zeros(3, 3));
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
            let oracle = m.singular_values().max();
            let r = spectral_norm(&m);
            assert!(r.converged);
            assert!((r.value - oracle).abs() < 1e-8, "{} vs {oracle}", r.value);
        }
    }

    #[test]
    fn triangular_norm_exceeds_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.5]);
        let r = spectral_norm(&m);
        assert!(r.value > 0.5);
        assert!((r.value - m.singular_values().max()).abs() < 1e-10);
    }
}
