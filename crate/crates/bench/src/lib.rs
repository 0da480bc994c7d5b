//! Benchmark fixtures shared by the criterion targets.

use avgop_core::operators::ConvexSet;
use avgop_core::{Matrix, Operator, Vector};

/// Deterministic nonexpansive matrix of size `n`: a diagonal in [0.05, 0.45]
/// with small off-diagonal entries.
pub fn test_matrix(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| {
        let t = (i * 7 + j * 3) as f64;
        if i == j {
            0.25 + 0.2 * t.sin()
        } else {
            0.1 * t.cos() / n as f64
        }
    })
}

/// Composition of projections onto a ball and a box in ℝⁿ.
pub fn ball_box_composition(n: usize) -> Operator {
    let ball = ConvexSet::ball(Vector::zeros(n), 1.0).unwrap();
    let boxed = ConvexSet::boxed(Vector::from_element(n, 0.2), Vector::from_element(n, 2.0)).unwrap();
    Operator::compose(vec![Operator::projection(ball), Operator::projection(boxed)]).unwrap()
}

/// Polyhedron with `m` halfspaces in ℝⁿ, projected onto by Dykstra iterations.
pub fn polyhedron(n: usize, m: usize) -> ConvexSet {
    let halfspaces = (0..m)
        .map(|i| {
            let normal = Vector::from_fn(n, |j, _| ((i + 1) as f64 * (j + 2) as f64).sin());
            avgop_core::Halfspace::new(normal, -1.0).unwrap()
        })
        .collect();
    ConvexSet::halfspace_intersection(halfspaces).unwrap()
}
