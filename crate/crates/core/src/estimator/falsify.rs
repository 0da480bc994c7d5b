use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::estimator::estimate::modulus_pairs;
use crate::linalg::Vector;
use crate::operators::operator::Operator;

/// Violations smaller than this are attributed to rounding.
pub const FALSIFY_TOL: f64 = 1e-10;

/// A pair proving `k(T) > k_claimed`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub x: Vector,
    pub y: Vector,
    /// Amount by which the averagedness inequality fails.
    pub excess: f64,
    pub index: usize,
}

/// Amount by which `‖Tx−Ty‖² ≤ ⟨d,Td⟩ + (1−2k)(⟨d,Td⟩ − ‖d‖²)` fails at `d = x − y`.
pub fn averaged_excess(op: &Operator, k: f64, x: &Vector, y: &Vector) -> Result<f64> {
    let d = x - y;
    let td = op.evaluate(x)? - op.evaluate(y)?;
    let inner = d.dot(&td);
    Ok(td.norm_squared() - inner - (1.0 - 2.0 * k) * (inner - d.norm_squared()))
}

/// First sampled pair (in sample order) violating `k_claimed`-averagedness by more than [`FALSIFY_TOL`].
pub fn falsify_averaged(op: &Operator, k_claimed: f64, n: usize, seed: u64) -> Result<Option<Violation>> {
    if !(0.0..=1.0).contains(&k_claimed) {
        return Err(invalid(format!("claimed modulus must lie in [0, 1] (got {k_claimed})")));
    }
    let pairs = modulus_pairs(op, n, seed);
    let excess: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|(x, y)| averaged_excess(op, k_claimed, x, y))
        .collect();
    for (index, e) in excess.into_iter().enumerate() {
        let e = e?;
        if e > FALSIFY_TOL {
            let (x, y) = pairs[index].clone();
            return Ok(Some(Violation { x, y, excess: e, index }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::operators::sets::ConvexSet;

    #[test]
    fn diagonal_example_is_not_firm() {
        let t = Operator::linear(Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5])).unwrap();
        assert!(falsify_averaged(&t, 0.5, 1000, 0).unwrap().is_some());
        assert!(falsify_averaged(&t, 0.75, 1000, 0).unwrap().is_none());
    }

    #[test]
    fn projection_and_identity_are_silent() {
        let c = ConvexSet::ball(Vector::zeros(3), 1.0).unwrap();
        assert!(falsify_averaged(&Operator::projection(c), 0.5, 2000, 1).unwrap().is_none());
        assert!(falsify_averaged(&Operator::identity(3).unwrap(), 0.0, 2000, 1).unwrap().is_none());
    }
}
