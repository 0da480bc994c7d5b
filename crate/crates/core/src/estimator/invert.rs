use crate::calculus::rules::exact_modulus;
use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::Vector;
use crate::operators::operator::Operator;

/// Consecutive residual increases after which the iteration is declared divergent.
const DIVERGENCE_STREAK: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub x: Vector,
    pub residual: f64,
    pub iterations: usize,
    /// Certified upper bound on `k(T)` used for the rate, if one was available.
    pub modulus_upper: Option<f64>,
    /// Contraction factor `2k` of `x ↦ x − Tx + v`.
    pub rate: Option<f64>,
    /// Iterations guaranteed to suffice at that rate.
    pub predicted_iterations: Option<usize>,
}

/// Solves `Tx = v` by the Banach iteration `x ← x − Tx + v` from `x₀ = v`,
/// which contracts with factor `2k(T)` when `k(T) < 1/2`.
pub fn invert_by_contraction(op: &Operator, v: &Vector, tol: f64, max_iter: usize) -> Result<Inversion> {
    check_dim(op.dim(), v.len())?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid("tolerance must be finite and > 0"));
    }
    let bound = exact_modulus(op);
    if bound.upper >= 0.5 && bound.lower >= 0.5 {
        return Err(Error::NotNormallyNonexpansive { k: bound.lower });
    }
    let certified = (bound.upper < 0.5).then_some(bound.upper);
    let rate = certified.map(|k| 2.0 * k);

    let mut x = v.clone();
    let mut tx = op.evaluate(&x)?;
    let mut residual = (&tx - v).norm();
    let initial = residual;
    let predicted_iterations = rate.map(|r| predicted(r, initial, tol));
    let mut streak = 0;
    let mut iterations = 0;
    while residual > tol {
        if iterations >= max_iter {
            return Err(Error::MaxIterExceeded { iterations, residual });
        }
        x = &x - &tx + v;
        tx = op.evaluate(&x)?;
        let next = (&tx - v).norm();
        iterations += 1;
        if certified.is_none() {
            streak = if next > residual { streak + 1 } else { 0 };
            if streak >= DIVERGENCE_STREAK || !next.is_finite() {
                return Err(Error::NotNormallyNonexpansive { k: bound.upper });
            }
        }
        residual = next;
    }
    Ok(Inversion {
        x,
        residual,
        iterations,
        modulus_upper: certified,
        rate,
        predicted_iterations,
    })
}

/// Iterations after which `ρⁿ·r₀/(1−ρ) ≤ tol`.
fn predicted(rate: f64, initial: f64, tol: f64) -> usize {
    if initial <= tol {
        return 0;
    }
    if rate <= 0.0 {
        return 1;
    }
    let n = (tol * (1.0 - rate) / initial).ln() / rate.ln();
    n.ceil().max(0.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::operators::functions::ConvexFunction;
    use crate::operators::sets::ConvexSet;
    use approx::assert_relative_eq;

    #[test]
    fn half_identity() {
        let t = Operator::relaxation(0.5, Operator::constant(Vector::zeros(1)).unwrap()).unwrap();
        let inv = invert_by_contraction(&t, &Vector::from_element(1, 3.0), 1e-12, 1000).unwrap();
        assert_relative_eq!(inv.x[0], 6.0, epsilon = 1e-11);
    }

    #[test]
    fn quadratic_prox_inverse() {
        let f = ConvexFunction::quadratic(Matrix::from_element(1, 1, 3.0)).unwrap();
        let inv = invert_by_contraction(&Operator::prox(f), &Vector::from_element(1, 1.0), 1e-10, 120).unwrap();
        assert_relative_eq!(inv.x[0], 4.0, epsilon = 1e-9);
        assert_eq!(inv.rate, Some(0.75));
        assert!(inv.iterations <= inv.predicted_iterations.unwrap());
    }

    #[test]
    fn fixed_point_of_averaged_distance_prox() {
        let c = ConvexSet::ball(Vector::zeros(2), 2.0).unwrap();
        let t = Operator::prox(ConvexFunction::half_distance_squared(c, 1.0).unwrap());
        let v = Vector::from_column_slice(&[0.5, -1.0]);
        let inv = invert_by_contraction(&t, &v, 1e-12, 100).unwrap();
        assert_eq!(inv.iterations, 0);
        assert_eq!(inv.x, v);
    }

    #[test]
    fn projection_is_rejected() {
        let c = ConvexSet::ball(Vector::zeros(2), 1.0).unwrap();
        let r = invert_by_contraction(&Operator::projection(c), &Vector::zeros(2), 1e-10, 10);
        assert!(matches!(r, Err(Error::NotNormallyNonexpansive { .. })));
    }
}
