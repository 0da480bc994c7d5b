//! Worked instances with known moduli, used by tests, benchmarks and the command line.

use std::f64::consts::{E, FRAC_PI_3, FRAC_PI_4};

use crate::linalg::{Matrix, Vector};
use crate::operators::functions::ConvexFunction;
use crate::operators::monotone::MonotoneOperator;
use crate::operators::operator::{AffinePiece, Operator};
use crate::operators::sets::{ConvexSet, Halfspace};

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

/// The line `ℝ(1, 1)`.
pub fn diagonal_line() -> ConvexSet {
    ConvexSet::span(&Matrix::from_column_slice(2, 1, &[1.0, 1.0])).expect("nonzero direction")
}

/// The slab `{(x, y) : −y ≤ x ≤ 2}`.
pub fn slab() -> ConvexSet {
    ConvexSet::halfspace_intersection(vec![
        Halfspace::new(v(&[1.0, 1.0]), 0.0).expect("nonzero normal"),
        Halfspace::new(v(&[-1.0, 0.0]), -2.0).expect("nonzero normal"),
    ])
    .expect("nonempty slab")
}

/// Closed-form projection onto [`slab`], used as an oracle for the iterative one.
pub fn slab_projection(p: &Vector) -> Vector {
    let feasible = |q: &Vector| q[0] + q[1] >= -1e-12 && q[0] <= 2.0;
    if feasible(p) {
        return p.clone();
    }
    // A violated face whose own projection is feasible, else the corner.
    let s = (p[0] + p[1]).min(0.0) / 2.0;
    let onto_diagonal = v(&[p[0] - s, p[1] - s]);
    if feasible(&onto_diagonal) {
        return onto_diagonal;
    }
    let onto_wall = v(&[p[0].min(2.0), p[1]]);
    if feasible(&onto_wall) {
        return onto_wall;
    }
    v(&[2.0, -2.0])
}

/// The segment `{s(1, 1) : s ∈ [0, 2]}`, the fixed points of [`dr_line_slab`].
pub fn dr_fixed_segment() -> ConvexSet {
    ConvexSet::halfspace_intersection(vec![
        Halfspace::new(v(&[1.0, -1.0]), 0.0).expect("nonzero normal"),
        Halfspace::new(v(&[-1.0, 1.0]), 0.0).expect("nonzero normal"),
        Halfspace::new(v(&[1.0, 1.0]), 0.0).expect("nonzero normal"),
        Halfspace::new(v(&[-1.0, -1.0]), -4.0).expect("nonzero normal"),
    ])
    .expect("nonempty segment")
}

/// Douglas–Rachford operator of the diagonal line and the slab; from `(4, 10)`
/// it reaches `(0, 0)` although the nearest fixed point is `(2, 2)`.
pub fn dr_line_slab() -> Operator {
    Operator::douglas_rachford(diagonal_line(), slab()).expect("same dimension")
}

fn piecewise(breakpoints: Vec<f64>, pieces: &[(f64, f64)]) -> Operator {
    let pieces = pieces.iter().map(|&(s, c)| AffinePiece::new(s, c)).collect();
    Operator::scalar_piecewise(breakpoints, pieces).expect("valid piecewise map")
}

/// `0` left of 0, `x` on `[0, 1]`, `−x/2 + 3/2` right of 1; modulus 3/4.
pub fn scalar_kink() -> Operator {
    piecewise(vec![0.0, 1.0], &[(0.0, 0.0), (1.0, 0.0), (-0.5, 1.5)])
}

/// Limiting map of [`scalar_kink`]: as above on `(−∞, 3]` and `0` beyond 3; modulus 3/4.
pub fn scalar_kink_limit() -> Operator {
    piecewise(vec![0.0, 1.0, 3.0], &[(0.0, 0.0), (1.0, 0.0), (-0.5, 1.5), (0.0, 0.0)])
}

/// `(Id + P_[0,1])/2`, a firmly nonexpansive map with `Fix = [0, 1]`.
pub fn averaged_clamp() -> Operator {
    piecewise(vec![0.0, 1.0], &[(0.5, 0.0), (1.0, 0.0), (0.5, 0.5)])
}

pub fn unit_interval() -> ConvexSet {
    ConvexSet::boxed(v(&[0.0]), v(&[1.0])).expect("ordered bounds")
}

/// Piecewise-affine surrogate of the odd map equal to `x/e` on `[−e, e]` and
/// `ln x` beyond `e`: chords of `ln` on geometric knots up to `radius`, then
/// slope `1/radius`. Its modulus is `(1 − 1/radius)/2`.
pub fn log_surrogate(radius: f64) -> Operator {
    assert!(radius > E, "radius must exceed e");
    let mut knots = vec![E];
    while knots.last().copied().unwrap_or(E) * 1.5 < radius {
        let next = knots.last().copied().unwrap_or(E) * 1.5;
        knots.push(next);
    }
    knots.push(radius);
    // Right half: pieces on [k_j, k_{j+1}] then the tail.
    let mut right = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let s = (b.ln() - a.ln()) / (b - a);
        right.push((s, a.ln() - s * a));
    }
    let tail = 1.0 / radius;
    right.push((tail, radius.ln() - tail * radius));

    let mut breakpoints: Vec<f64> = knots.iter().rev().map(|k| -k).collect();
    breakpoints.extend(knots.iter().copied());
    let mut pieces: Vec<(f64, f64)> = right.iter().rev().map(|&(s, c)| (s, -c)).collect();
    pieces.push((1.0 / E, 0.0));
    pieces.extend(right.iter().copied());
    piecewise(breakpoints, &pieces)
}

pub fn line_at(theta: f64) -> ConvexSet {
    ConvexSet::linear_subspace(Matrix::from_column_slice(2, 1, &[theta.cos(), theta.sin()]))
        .expect("unit direction")
}

/// `P_V P_U` for lines at angles 0 and `theta`.
pub fn two_line_projections(theta: f64) -> Operator {
    Operator::compose(vec![
        Operator::projection(line_at(theta)),
        Operator::projection(line_at(0.0)),
    ])
    .expect("same dimension")
}

/// Explicit matrix of [`two_line_projections`].
pub fn two_line_product_matrix(theta: f64) -> Matrix {
    let (c, s) = (theta.cos(), theta.sin());
    let pv = Matrix::from_row_slice(2, 2, &[c * c, c * s, c * s, s * s]);
    let pu = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    pv * pu
}

pub fn rotation(theta: f64) -> Matrix {
    let (c, s) = (theta.cos(), theta.sin());
    Matrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// An operator with its known exact modulus.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub operator: Operator,
    pub modulus: f64,
    /// Linear/affine or scalar piecewise, where sampling can get arbitrarily close.
    pub sharp: bool,
}

fn entry(name: &'static str, operator: Operator, modulus: f64, sharp: bool) -> CatalogEntry {
    CatalogEntry {
        name,
        operator,
        modulus,
        sharp,
    }
}

/// Reference operators covering every constructor family with a closed-form modulus.
pub fn reference_catalog() -> Vec<CatalogEntry> {
    let m = |rows: usize, data: &[f64]| Matrix::from_row_slice(rows, rows, data);
    let ball = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).expect("ball");
    let half = ConvexSet::halfspace(v(&[1.0, 1.0]), 0.0).expect("halfspace");
    let square = ConvexSet::boxed(v(&[-1.0, 0.0]), v(&[2.0, 1.0])).expect("box");
    let skew = MonotoneOperator::linear(m(2, &[0.0, -1.0, 1.0, 0.0])).expect("skew");
    vec![
        entry("identity", Operator::identity(2).unwrap(), 0.0, true),
        entry("shift", Operator::shift(v(&[1.0, -3.0])).unwrap(), 0.0, true),
        entry("constant", Operator::constant(v(&[2.0, 1.0])).unwrap(), 0.5, true),
        entry("diag_one_minus_half", Operator::linear(m(2, &[1.0, 0.0, 0.0, -0.5])).unwrap(), 0.75, true),
        entry("rotation_quarter_turn", Operator::linear(rotation(FRAC_PI_4)).unwrap(), 1.0, true),
        entry("diag_half_fifth", Operator::linear(m(2, &[0.5, 0.0, 0.0, 0.2])).unwrap(), 0.4, true),
        entry(
            "affine_contraction",
            Operator::affine(m(2, &[0.3, 0.2, -0.1, 0.5]), v(&[1.0, 2.0])).unwrap(),
            crate::calculus::matrix::matrix_modulus(&m(2, &[0.3, 0.2, -0.1, 0.5])).unwrap(),
            true,
        ),
        entry("projection_halfspace", Operator::projection(half.clone()), 0.5, false),
        entry("projection_ball", Operator::projection(ball.clone()), 0.5, false),
        entry("projection_box", Operator::projection(square.clone()), 0.5, false),
        entry("reflector_halfspace", Operator::reflector(half), 1.0, false),
        entry(
            "relaxed_reflector_ball",
            Operator::relaxation(0.3, Operator::reflector(ball.clone())).unwrap(),
            0.3,
            false,
        ),
        entry(
            "prox_huber",
            Operator::prox(ConvexFunction::huber(2, 1.0, 2.0).unwrap()),
            1.0 / 3.0,
            false,
        ),
        entry(
            "prox_half_distance_squared_box",
            Operator::prox(ConvexFunction::half_distance_squared(square.clone(), 0.5).unwrap()),
            0.5 / 3.0,
            false,
        ),
        entry(
            "prox_support_box",
            Operator::prox(ConvexFunction::support(square, 1.0).unwrap()),
            0.5,
            false,
        ),
        entry(
            "prox_quadratic",
            Operator::prox(ConvexFunction::quadratic(m(2, &[3.0, 0.0, 0.0, 1.0])).unwrap()),
            3.0 / 8.0,
            true,
        ),
        entry(
            "prox_envelope_of_ball_indicator",
            Operator::prox(
                ConvexFunction::moreau_envelope(ConvexFunction::indicator(ball.clone()), 1.0, 1.0).unwrap(),
            ),
            0.25,
            false,
        ),
        entry(
            "resolvent_yosida_normal_cone",
            Operator::resolvent(
                MonotoneOperator::yosida(1.0, MonotoneOperator::normal_cone(ball)).unwrap(),
                1.0,
            )
            .unwrap(),
            0.25,
            false,
        ),
        entry("resolvent_skew", Operator::resolvent(skew, 1.0).unwrap(), 0.5, true),
        entry(
            "douglas_rachford_two_lines",
            Operator::douglas_rachford(line_at(0.0), line_at(1.0)).unwrap(),
            0.5,
            true,
        ),
        entry(
            "two_line_projections",
            two_line_projections(FRAC_PI_3),
            1.5 / 2.5,
            true,
        ),
        entry("scalar_kink", scalar_kink(), 0.75, true),
        entry("scalar_kink_limit", scalar_kink_limit(), 0.75, true),
        entry("averaged_clamp", averaged_clamp(), 0.25, true),
        entry("log_surrogate", log_surrogate(1e3), (1.0 - 1e-3) / 2.0, true),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::rules::exact_modulus;
    use crate::estimator::sampling::random_points;

    #[test]
    fn catalog_moduli_match_the_rule_engine() {
        for e in reference_catalog() {
            let b = exact_modulus(&e.operator);
            assert!(b.exact, "{} not exact: {b:?}", e.name);
            assert!((b.upper - e.modulus).abs() < 1e-9, "{}: {} vs {}", e.name, b.upper, e.modulus);
        }
    }

    #[test]
    fn iterative_slab_projection_matches_closed_form() {
        let s = slab();
        for p in random_points(2, 100, 11) {
            let a = s.project(&p).unwrap();
            let b = slab_projection(&p);
            assert!((a - &b).norm() < 1e-8, "{p:?} -> {b:?}");
        }
    }

    #[test]
    fn log_surrogate_tracks_the_logarithm() {
        let g = log_surrogate(1e3);
        for x in [3.0, 10.0, 100.0, 999.0] {
            let y = g.evaluate(&v(&[x])).unwrap()[0];
            assert!((y - f64::ln(x)).abs() < 0.1, "{x}: {y}");
            let ny = g.evaluate(&v(&[-x])).unwrap()[0];
            assert_eq!(ny, -y);
        }
        assert!((g.evaluate(&v(&[1.0])).unwrap()[0] - 1.0 / E).abs() < 1e-15);
    }
}
