//! Maximally monotone operators with closed-form resolvents.

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{ensure_finite_mat, min_sym_eigenvalue, solve, Matrix, Vector};
use crate::operators::functions::ConvexFunction;
use crate::operators::sets::ConvexSet;

#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneKind {
    /// `∂f`.
    Subdifferential(ConvexFunction),
    /// `x ↦ Mx` with `M + Mᵀ ⪰ 0`; skew matrices included.
    LinearMonotone(Matrix),
    /// `N_C`.
    NormalCone(ConvexSet),
    /// `β·A`.
    Scaled { beta: f64, inner: Box<MonotoneOperator> },
    /// Yosida regularization `Y_μ(A) = μ⁻¹(Id − J_{μA})`.
    Yosida { mu: f64, inner: Box<MonotoneOperator> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneOperator {
    dim: usize,
    kind: MonotoneKind,
}

impl MonotoneOperator {
    pub fn subdifferential(f: ConvexFunction) -> Self {
        Self {
            dim: f.dim(),
            kind: MonotoneKind::Subdifferential(f),
        }
    }

    pub fn linear(m: Matrix) -> Result<Self> {
        ensure_finite_mat(&m, "monotone matrix")?;
        if !m.is_square() || m.nrows() == 0 {
            return Err(invalid("monotone matrix must be square and nonempty"));
        }
        if min_sym_eigenvalue(&m) < -1e-12 {
            return Err(invalid("symmetric part of monotone matrix must be PSD"));
        }
        Ok(Self {
            dim: m.nrows(),
            kind: MonotoneKind::LinearMonotone(m),
        })
    }

    pub fn normal_cone(set: ConvexSet) -> Self {
        Self {
            dim: set.dim(),
            kind: MonotoneKind::NormalCone(set),
        }
    }

    pub fn scaled(beta: f64, inner: MonotoneOperator) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(invalid(format!("scale must be finite and > 0 (got {beta})")));
        }
        Ok(Self {
            dim: inner.dim,
            kind: MonotoneKind::Scaled {
                beta,
                inner: Box::new(inner),
            },
        })
    }

    pub fn yosida(mu: f64, inner: MonotoneOperator) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(invalid(format!("mu must be finite and > 0 (got {mu})")));
        }
        Ok(Self {
            dim: inner.dim,
            kind: MonotoneKind::Yosida {
                mu,
                inner: Box::new(inner),
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MonotoneKind {
        &self.kind
    }

    /// `J_{αA}x`, the unique `z` with `x − z ∈ αA(z)`.
    pub fn resolvent(&self, alpha: f64, x: &Vector) -> Result<Vector> {
        check_dim(self.dim, x.len())?;
        match &self.kind {
            MonotoneKind::Subdifferential(f) => f.prox_scaled(alpha, x),
            MonotoneKind::LinearMonotone(m) => {
                let a = Matrix::identity(self.dim, self.dim) + m * alpha;
                solve(&a, x)
            }
            MonotoneKind::NormalCone(set) => set.project(x),
            MonotoneKind::Scaled { beta, inner } => inner.resolvent(alpha * beta, x),
            MonotoneKind::Yosida { mu, inner } => {
                let denom = mu + alpha;
                let outer = inner.resolvent(denom, x)?;
                Ok(x * (mu / denom) + outer * (alpha / denom))
            }
        }
    }

    /// `J_{αA}` as `x ↦ Mx + b` when it is affine.
    pub fn affine_resolvent(&self, alpha: f64) -> Option<(Matrix, Vector)> {
        let n = self.dim;
        match &self.kind {
            MonotoneKind::Subdifferential(f) => f.affine_prox(alpha),
            MonotoneKind::LinearMonotone(m) => {
                let inv = (Matrix::identity(n, n) + m * alpha).try_inverse()?;
                Some((inv, Vector::zeros(n)))
            }
            MonotoneKind::NormalCone(set) => set.affine_projection(),
            MonotoneKind::Scaled { beta, inner } => inner.affine_resolvent(alpha * beta),
            MonotoneKind::Yosida { mu, inner } => {
                let denom = mu + alpha;
                let (m, b) = inner.affine_resolvent(denom)?;
                Some((
                    Matrix::identity(n, n) * (mu / denom) + m * (alpha / denom),
                    b * (alpha / denom),
                ))
            }
        }
    }

    pub fn is_single_valued(&self) -> bool {
        match &self.kind {
            MonotoneKind::Subdifferential(f) => f.is_lipschitz_smooth(),
            MonotoneKind::LinearMonotone(_) | MonotoneKind::Yosida { .. } => true,
            MonotoneKind::NormalCone(set) => set.is_whole_space(),
            MonotoneKind::Scaled { inner, .. } => inner.is_single_valued(),
        }
    }

    /// `Ax` for single-valued operators.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim, x.len())?;
        match &self.kind {
            MonotoneKind::Subdifferential(f) => f.gradient(x),
            MonotoneKind::LinearMonotone(m) => Ok(m * x),
            MonotoneKind::NormalCone(set) => {
                if set.is_whole_space() {
                    Ok(Vector::zeros(self.dim))
                } else {
                    Err(Error::SetValued("normal cone of a proper set".into()))
                }
            }
            MonotoneKind::Scaled { beta, inner } => Ok(inner.apply(x)? * *beta),
            MonotoneKind::Yosida { mu, inner } => Ok((x - inner.resolvent(*mu, x)?) / *mu),
        }
    }

    /// Distance of `u` from `A(z)`-membership measured through the resolvent:
    /// `‖J_A(z + u) − z‖`, which vanishes iff `u ∈ A(z)`.
    pub fn inclusion_residual(&self, z: &Vector, u: &Vector) -> Result<f64> {
        check_dim(self.dim, z.len())?;
        check_dim(self.dim, u.len())?;
        if let MonotoneKind::LinearMonotone(m) = &self.kind {
            return Ok((m * z - u).norm());
        }
        Ok((self.resolvent(1.0, &(z + u))? - z).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn linear_resolvent_inverts_identity_plus_matrix() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let a = MonotoneOperator::linear(m.clone()).unwrap();
        let x = v(&[1.0, 2.0]);
        let z = a.resolvent(1.0, &x).unwrap();
        assert_relative_eq!(&z + &m * &z, x, epsilon = 1e-14);
    }

    #[test]
    fn rejects_non_monotone_matrix() {
        let m = Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        assert!(MonotoneOperator::linear(m).is_err());
    }

    #[test]
    fn yosida_matches_definition() {
        let a = MonotoneOperator::linear(Matrix::from_row_slice(1, 1, &[2.0])).unwrap();
        let y = MonotoneOperator::yosida(0.5, a).unwrap();
        // Y_μ(A) for A = 2 is the scalar 2/(1 + 2μ).
        assert_relative_eq!(y.apply(&v(&[3.0])).unwrap()[0], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn normal_cone_apply_is_set_valued() {
        let n = MonotoneOperator::normal_cone(ConvexSet::ball(v(&[0.0]), 1.0).unwrap());
        assert!(n.apply(&v(&[0.0])).is_err());
        assert!(!n.is_single_valued());
    }

    #[test]
    fn inclusion_residual_detects_normal_vectors() {
        let n = MonotoneOperator::normal_cone(ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap());
        let z = v(&[1.0, 0.0]);
        assert!(n.inclusion_residual(&z, &v(&[2.0, 0.0])).unwrap() < 1e-15);
        assert!(n.inclusion_residual(&z, &v(&[0.0, 1.0])).unwrap() > 0.1);
    }
}
