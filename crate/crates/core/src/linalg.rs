//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

const POWER_STEPS: usize = 200;

/// Spectral norm by power iteration on `MᵀM`, stopping early once the Rayleigh quotient settles.
pub fn spectral_norm(m: &Matrix) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let gram = m.transpose() * m;
    // Deterministic start with no special alignment to coordinate axes.
    let mut v = Vector::from_fn(n, |i, _| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_75).fract());
    v /= v.norm();
    let mut rayleigh = 0.0;
    for _ in 0..POWER_STEPS {
        let w = &gram * &v;
        let next = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / wn;
        if (next - rayleigh).abs() <= 1e-15 * next.abs().max(1e-300) {
            rayleigh = next;
            break;
        }
        rayleigh = next;
    }
    rayleigh.max(0.0).sqrt()
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_sym_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Largest eigenvalue of the symmetric part of `m`.
pub fn max_sym_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.max()
}

/// Orthonormal basis (as columns) for the column span of `cols`, dropping
/// singular values at or below `cutoff * max(1, σ_max)`.
pub fn orthonormal_span(cols: &Matrix, cutoff: f64) -> Matrix {
    let n = cols.nrows();
    if cols.ncols() == 0 || n == 0 {
        return Matrix::zeros(n, 0);
    }
    let svd = SVD::new(cols.clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max().max(1.0);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff * smax)
        .collect();
    Matrix::from_fn(n, keep.len(), |r, c| u[(r, keep[c])])
}

/// Basis (as columns) of the null space of `w`, with singular-value cutoff `cutoff`.
pub fn null_space(w: &Matrix, cutoff: f64) -> Matrix {
    let (rows, cols) = w.shape();
    if cols == 0 {
        return Matrix::zeros(0, 0);
    }
    // Zero-pad to at least square so the SVD returns a full right basis.
    let padded = if rows < cols {
        let mut p = Matrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(w);
        p
    } else {
        w.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .collect();
    Matrix::from_fn(cols, keep.len(), |r, c| v_t[(keep[c], r)])
}

/// Numerical rank with singular-value cutoff relative to `max(1, σ_max)`.
pub fn rank(m: &Matrix, cutoff: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = SVD::new(m.clone(), false, false);
    let smax = svd.singular_values.max().max(1.0);
    svd.singular_values.iter().filter(|&&s| s > cutoff * smax).count()
}

/// Solves `a z = b` by LU; fails if `a` is singular.
pub fn solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::InvalidParameter("singular linear system".into()))
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("singular matrix".into()))
}

pub(crate) fn ensure_finite_vec(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_finite_mat(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Builds a matrix from row-major nested rows; all rows must have equal length.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidParameter("ragged matrix rows".into()));
    }
    Ok(Matrix::from_fn(nrows, ncols, |r, c| rows[r][c]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spectral_norm_matches_svd() {
        let m = Matrix::from_row_slice(3, 3, &[0.3, -0.2, 0.1, 0.0, 0.5, 0.4, -0.6, 0.2, 0.05]);
        let svd = SVD::new(m.clone(), false, false);
        assert_relative_eq!(spectral_norm(&m), svd.singular_values.max(), epsilon = 1e-10);
    }

    #[test]
    fn spectral_norm_of_rotation_is_one() {
        let (s, c) = (0.3f64.sin(), 0.3f64.cos());
        let m = Matrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert_relative_eq!(spectral_norm(&m), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let w = Matrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&w, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!((&w * &ns).norm() < 1e-14);
    }

    #[test]
    fn orthonormal_span_drops_dependent_columns() {
        let cols = Matrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let q = orthonormal_span(&cols, 1e-10);
        assert_eq!(q.ncols(), 2);
        assert!((q.transpose() * &q - Matrix::identity(2, 2)).norm() < 1e-12);
    }
}
