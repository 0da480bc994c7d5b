use std::time::Instant;

use crate::error::{invalid, Error, Result};
use crate::linalg::{ensure_finite_mat, min_sym_eigenvalue, spectral_norm, Matrix};
use crate::operators::operator::SPECTRAL_NORM_SLACK;

const BISECTION_TOL: f64 = 1e-12;
/// Eigenvalue slack of the PSD test, relative to `‖Id − M‖²`.
const PSD_RELATIVE_SLACK: f64 = 1e-12;

/// Modulus of a linear nonexpansive map: the least `k ∈ [0, 1]` with
/// `2k·sym(N) − NᵀN ⪰ 0` for `N = Id − M`, found by bisection.
pub fn matrix_modulus(m: &Matrix) -> Result<f64> {
    ensure_finite_mat(m, "matrix")?;
    if !m.is_square() || m.nrows() == 0 {
        return Err(invalid("matrix must be square and nonempty"));
    }
    let norm = spectral_norm(m);
    if norm > 1.0 + SPECTRAL_NORM_SLACK {
        return Err(Error::NotNonexpansive { norm });
    }
    let n = m.nrows();
    // Working with N directly keeps relaxations close to Id free of cancellation.
    let c = Matrix::identity(n, n) - m;
    let base = -(c.transpose() * &c);
    // slope = 2·sym(N) ⪰ 0 for nonexpansive M, so feasibility is monotone in k.
    let slope = &c + c.transpose();
    let slack = -PSD_RELATIVE_SLACK * c.norm_squared();
    let feasible = |k: f64| min_sym_eigenvalue(&(&base + &slope * k)) >= slack;
    if feasible(0.0) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `matrix_modulus` together with its wall time in seconds.
pub fn timed_matrix_modulus(m: &Matrix) -> Result<(f64, f64)> {
    let start = Instant::now();
    let k = matrix_modulus(m)?;
    Ok((k, start.elapsed().as_secs_f64()))
}

/// True when `MᵀM = I` to `tol` and `M ≠ I`.
pub fn is_nontrivial_orthogonal(m: &Matrix, tol: f64) -> bool {
    let n = m.nrows();
    let id = Matrix::identity(n, n);
    (m.transpose() * m - &id).amax() <= tol && (m - &id).amax() > tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn diag_one_minus_half() {
        let m = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -0.5]));
        assert_relative_eq!(matrix_modulus(&m).unwrap(), 0.75, epsilon = 1e-9);
    }

    #[test]
    fn identity_and_rotation() {
        assert_eq!(matrix_modulus(&Matrix::identity(3, 3)).unwrap(), 0.0);
        let (s, c) = (std::f64::consts::FRAC_PI_4.sin(), std::f64::consts::FRAC_PI_4.cos());
        let r = Matrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert_relative_eq!(matrix_modulus(&r).unwrap(), 1.0, epsilon = 1e-9);
        assert!(is_nontrivial_orthogonal(&r, 1e-12));
    }

    #[test]
    fn symmetric_matches_dense_sphere_sampling() {
        let m = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.2]));
        // Independent oracle: sup over the unit circle of ‖(I−M)x‖²/(2⟨x,(I−M)x⟩).
        let mut best: f64 = 0.0;
        for i in 0..100_000 {
            let t = i as f64 * std::f64::consts::TAU / 100_000.0;
            let (a, b) = (0.5 * t.cos(), 0.8 * t.sin());
            let num = a * a + b * b;
            let den = 2.0 * (t.cos() * a + t.sin() * b);
            best = best.max(num / den);
        }
        assert_relative_eq!(best, 0.4, epsilon = 1e-9);
        assert_relative_eq!(matrix_modulus(&m).unwrap(), 0.4, epsilon = 1e-9);
    }

    #[test]
    fn rejects_expansive() {
        let m = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.01, 0.0]));
        assert!(matches!(matrix_modulus(&m), Err(Error::NotNonexpansive { .. })));
    }
}
