//! Sampled one-sided bounds for the modulus and the monotone/cocoercive/Lipschitz values.

use std::fmt;

use rayon::prelude::*;

use crate::error::{check_dim, invalid, Error, Result};
use crate::estimator::sampling::{adversarial_pairs, random_pairs, Pair};
use crate::linalg::Vector;
use crate::operators::monotone::MonotoneOperator;
use crate::operators::operator::Operator;

/// Pairs with `‖Bx − By‖ ≤ this · ‖x − y‖` carry no usable signal.
pub const IMAGE_THRESHOLD: f64 = 1e-6;
/// Denominators `⟨x−y, Bx−By⟩ ≤ this · ‖Bx−By‖·‖x−y‖` are treated as nonpositive.
pub const DENOMINATOR_THRESHOLD: f64 = 1e-12;
/// Assumed absolute evaluation error per unit of magnitude of the points involved.
pub const ROUNDING_UNIT: f64 = 2e-15;
/// Pairs whose ratio is uncertain beyond this (relative to max(1, |ratio|)) are skipped.
pub const RATIO_PRECISION: f64 = 1e-10;
/// Shrink factor of the refinement step.
pub const REFINE_SHRINK: f64 = 0.7;

/// Single-valued map that can be sampled.
pub trait VectorMap: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &Vector) -> Result<Vector>;
}

impl VectorMap for Operator {
    fn dim(&self) -> usize {
        Operator::dim(self)
    }
    fn apply(&self, x: &Vector) -> Result<Vector> {
        self.evaluate(x)
    }
}

impl VectorMap for MonotoneOperator {
    fn dim(&self) -> usize {
        MonotoneOperator::dim(self)
    }
    fn apply(&self, x: &Vector) -> Result<Vector> {
        MonotoneOperator::apply(self, x)
    }
}

/// `Id − T`.
pub struct Complement<'a, M: VectorMap + ?Sized>(pub &'a M);

impl<M: VectorMap + ?Sized> VectorMap for Complement<'_, M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &Vector) -> Result<Vector> {
        Ok(x - self.0.apply(x)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Modulus,
    CocoerciveValue,
    MonotoneValue,
    LipschitzValue,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Modulus => "modulus",
            Quantity::CocoerciveValue => "cocoercive_value",
            Quantity::MonotoneValue => "monotone_value",
            Quantity::LipschitzValue => "lipschitz_value",
        }
    }

    /// Sampling a supremum yields a lower bound, an infimum an upper bound.
    pub fn direction(self) -> Direction {
        match self {
            Quantity::Modulus | Quantity::LipschitzValue => Direction::LowerBound,
            Quantity::CocoerciveValue | Quantity::MonotoneValue => Direction::UpperBound,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "modulus" => Ok(Quantity::Modulus),
            "cocoercive_value" | "cocoercive" => Ok(Quantity::CocoerciveValue),
            "monotone_value" | "monotone" => Ok(Quantity::MonotoneValue),
            "lipschitz_value" | "lipschitz" => Ok(Quantity::LipschitzValue),
            other => Err(invalid(format!("unknown quantity {other:?}"))),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LowerBound,
    UpperBound,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::LowerBound => "lower_bound",
            Direction::UpperBound => "upper_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueEstimate {
    pub quantity: Quantity,
    pub direction: Direction,
    /// `+∞` when no informative pair bounded an infimum.
    pub value: f64,
    pub witness: Option<(Vector, Vector)>,
    pub samples_used: usize,
    pub skipped: usize,
    pub seed: u64,
}

/// Ratio of one pair for `quantity`, given `d = x − y`, `e = Fx − Fy` and the
/// largest norm among `x, y, Fx, Fy`; `None` when the pair is below the
/// degeneracy thresholds or its ratio is dominated by rounding.
pub fn pair_ratio(quantity: Quantity, d: &Vector, e: &Vector, scale: f64) -> Option<f64> {
    let nd = d.norm();
    if nd == 0.0 {
        return None;
    }
    let ne = e.norm();
    let den = d.dot(e);
    let err = ROUNDING_UNIT * scale.max(f64::MIN_POSITIVE);
    let (value, uncertainty) = match quantity {
        Quantity::Modulus | Quantity::CocoerciveValue => {
            if ne <= IMAGE_THRESHOLD * nd || ne <= err {
                return None;
            }
            let den_err = err * (nd + ne);
            let positive = den > DENOMINATOR_THRESHOLD * ne * nd;
            if den.abs() <= den_err {
                return None;
            }
            let relative = 2.0 * err / ne + den_err / den.abs();
            match (quantity, positive) {
                (Quantity::Modulus, true) => {
                    let q = ne * ne / (2.0 * den);
                    (q, q * relative)
                }
                (Quantity::Modulus, false) => (1.0, 0.0),
                (_, true) => {
                    let c = den / (ne * ne);
                    (c, c * relative)
                }
                (_, false) => (0.0, 0.0),
            }
        }
        Quantity::MonotoneValue => {
            let m = den / (nd * nd);
            (m, err * (nd + ne) / (nd * nd) + 2.0 * m.abs() * err / nd)
        }
        Quantity::LipschitzValue => {
            let l = ne / nd;
            (l, err / nd + l * err / nd)
        }
    };
    (uncertainty <= RATIO_PRECISION * value.abs().max(1.0)).then_some(value)
}

fn magnitude(vs: [&Vector; 4]) -> f64 {
    vs.iter().map(|v| v.amax()).fold(0.0, f64::max) * (vs[0].len() as f64).sqrt()
}

fn better(quantity: Quantity, a: f64, b: f64) -> bool {
    match quantity.direction() {
        Direction::LowerBound => a > b,
        Direction::UpperBound => a < b,
    }
}

fn ratio_at<M: VectorMap + ?Sized>(quantity: Quantity, map: &M, x: &Vector, y: &Vector) -> Result<Option<f64>> {
    let (fx, fy) = (map.apply(x)?, map.apply(y)?);
    let scale = magnitude([x, y, &fx, &fy]);
    Ok(pair_ratio(quantity, &(x - y), &(fx - fy), scale))
}

/// Extremal ratio over explicit pairs. Evaluation is parallel; the reduction
/// keeps the lowest index among ties, so results do not depend on scheduling.
pub fn estimate_on_pairs<M: VectorMap + ?Sized>(
    quantity: Quantity,
    map: &M,
    pairs: &[Pair],
    seed: u64,
) -> Result<ValueEstimate> {
    for (x, y) in pairs {
        check_dim(map.dim(), x.len())?;
        check_dim(map.dim(), y.len())?;
    }
    let ratios: Vec<Result<Option<f64>>> = pairs
        .par_iter()
        .map(|(x, y)| ratio_at(quantity, map, x, y))
        .collect();
    let mut best: Option<(usize, f64)> = None;
    let mut skipped = 0;
    for (i, r) in ratios.into_iter().enumerate() {
        match r? {
            None => skipped += 1,
            Some(q) => {
                if best.is_none_or(|(_, b)| better(quantity, q, b)) {
                    best = Some((i, q));
                }
            }
        }
    }
    let (value, witness) = match best {
        Some((i, q)) => (q, Some(pairs[i].clone())),
        None => (
            match quantity.direction() {
                Direction::LowerBound => 0.0,
                Direction::UpperBound => f64::INFINITY,
            },
            None,
        ),
    };
    Ok(ValueEstimate {
        quantity,
        direction: quantity.direction(),
        value,
        witness,
        samples_used: pairs.len(),
        skipped,
        seed,
    })
}

/// Coordinate-wise local search around the witness; every accepted point is a
/// genuinely evaluated pair, so the one-sided guarantee is preserved.
pub fn refine<M: VectorMap + ?Sized>(
    mut est: ValueEstimate,
    map: &M,
    steps: usize,
) -> Result<ValueEstimate> {
    let Some((mut x, mut y)) = est.witness.clone() else {
        return Ok(est);
    };
    let mut step = 0.1 * (&x - &y).norm().max(1e-3);
    let n = x.len();
    for _ in 0..steps {
        for coord in 0..2 * n {
            for sign in [1.0, -1.0] {
                let (mut cx, mut cy) = (x.clone(), y.clone());
                if coord < n {
                    cx[coord] += sign * step;
                } else {
                    cy[coord - n] += sign * step;
                }
                est.samples_used += 1;
                match ratio_at(est.quantity, map, &cx, &cy)? {
                    Some(q) if better(est.quantity, q, est.value) => {
                        est.value = q;
                        x = cx;
                        y = cy;
                    }
                    Some(_) => {}
                    None => est.skipped += 1,
                }
            }
        }
        step *= REFINE_SHRINK;
    }
    est.witness = Some((x, y));
    Ok(est)
}

/// Sample set used for an operator: structure-aware pairs followed by `n` seeded random pairs.
pub fn modulus_pairs(op: &Operator, n: usize, seed: u64) -> Vec<Pair> {
    let mut pairs = adversarial_pairs(op, seed);
    pairs.extend(random_pairs(op.dim(), n, seed));
    pairs
}

/// Lower bound on `k(T)` as the largest `‖Bx−By‖²/(2⟨x−y, Bx−By⟩)` with `B = Id − T`.
/// When every pair is degenerate the bound is 0 with no witness.
pub fn estimate_modulus(op: &Operator, n: usize, seed: u64, refine_steps: usize) -> Result<ValueEstimate> {
    if n == 0 {
        return Err(invalid("sample count must be >= 1"));
    }
    let pairs = modulus_pairs(op, n, seed);
    let complement = Complement(op);
    let est = estimate_on_pairs(Quantity::Modulus, &complement, &pairs, seed)?;
    refine(est, &complement, refine_steps)
}

/// Sampled `c(A)`, `m(A)` or `ℓ(A)` of a single-valued map on seeded random pairs.
pub fn estimate_value<M: VectorMap + ?Sized>(
    quantity: Quantity,
    map: &M,
    n: usize,
    seed: u64,
) -> Result<ValueEstimate> {
    if quantity == Quantity::Modulus {
        return Err(invalid("use estimate_modulus for the modulus"));
    }
    if n == 0 {
        return Err(invalid("sample count must be >= 1"));
    }
    let pairs = random_pairs(map.dim(), n, seed);
    let est = estimate_on_pairs(quantity, map, &pairs, seed)?;
    if est.witness.is_none() {
        return Err(Error::AllPairsDegenerate);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::operators::sets::ConvexSet;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn diagonal_example_is_bounded_by_three_quarters() {
        let t = Operator::linear(Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5])).unwrap();
        let est = estimate_modulus(&t, 10_000, 0, 0).unwrap();
        assert!(est.value <= 0.75 + 1e-9 && est.value >= 0.74, "{}", est.value);
        let refined = estimate_modulus(&t, 10_000, 0, 100).unwrap();
        assert_relative_eq!(refined.value, 0.75, epsilon = 1e-6);
    }

    #[test]
    fn shift_is_degenerate() {
        let t = Operator::shift(v(&[1.0, 2.0])).unwrap();
        let est = estimate_modulus(&t, 100, 0, 0).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.witness.is_none());
        assert_eq!(est.skipped, est.samples_used);
    }

    #[test]
    fn halfspace_normal_pair_gives_one_half() {
        let c = ConvexSet::halfspace(v(&[1.0, 1.0]), 0.0).unwrap();
        let t = Operator::projection(c);
        let d = pair_ratio(
            Quantity::Modulus,
            &(v(&[0.0, 0.0]) - v(&[-1.0, -1.0])),
            &((v(&[0.0, 0.0]) - t.evaluate(&v(&[0.0, 0.0])).unwrap())
                - (v(&[-1.0, -1.0]) - t.evaluate(&v(&[-1.0, -1.0])).unwrap())),
            2.0,
        );
        assert_relative_eq!(d.unwrap(), 0.5, epsilon = 1e-15);
        let est = estimate_modulus(&t, 1000, 3, 0).unwrap();
        assert_relative_eq!(est.value, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn witness_reproduces_value() {
        let t = Operator::linear(Matrix::from_row_slice(2, 2, &[0.2, 0.3, -0.1, 0.6])).unwrap();
        let est = estimate_modulus(&t, 500, 4, 10).unwrap();
        let (x, y) = est.witness.clone().unwrap();
        let c = Complement(&t);
        let q = ratio_at(Quantity::Modulus, &c, &x, &y).unwrap().unwrap();
        assert_relative_eq!(q, est.value, epsilon = 1e-12);
    }

    #[test]
    fn skew_matrix_monotone_value_is_zero() {
        let a = MonotoneOperator::linear(Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
        let est = estimate_value(Quantity::MonotoneValue, &a, 1000, 1).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.direction, Direction::UpperBound);
    }

    #[test]
    fn lipschitz_of_scaled_identity() {
        let t = Operator::linear(Matrix::identity(3, 3) * 0.4).unwrap();
        let est = estimate_value(Quantity::LipschitzValue, &t, 200, 2).unwrap();
        assert_relative_eq!(est.value, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn complement_of_projection_is_firm() {
        let c = ConvexSet::halfspace(v(&[0.0, 1.0]), 1.0).unwrap();
        let t = Operator::projection(c);
        let est = estimate_value(Quantity::CocoerciveValue, &Complement(&t), 2000, 5).unwrap();
        assert!(est.value >= 1.0 - 1e-12 && est.value <= 1.0 + 1e-9, "{}", est.value);
    }
}
