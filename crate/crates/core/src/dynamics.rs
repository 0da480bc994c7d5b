//! Orbits, the limiting operator `T∞`, and its comparison with the projection onto `Fix T`.

use rayon::prelude::*;

use crate::error::{check_dim, invalid, Error, Result};
use crate::estimator::estimate::{estimate_modulus, ValueEstimate};
use crate::estimator::sampling::random_points;
use crate::linalg::Vector;
use crate::operators::operator::Operator;
use crate::operators::sets::ConvexSet;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
/// Tolerance used to validate a caller-supplied fixed-point set.
pub const FIX_SET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    /// `points[0] = x₀`, `points[i+1] = T(points[i])`.
    pub points: Vec<Vector>,
    pub converged: bool,
    /// `‖Tx − x‖` at the last point.
    pub residual: f64,
    pub iterations: usize,
}

impl Orbit {
    pub fn last(&self) -> &Vector {
        self.points.last().expect("an orbit holds at least its starting point")
    }
}

/// Iterates `x ← Tx` until `‖Tx − x‖ ≤ tol` or `max_iter` steps.
/// Hitting the cap is reported through `converged = false`, not as an error.
pub fn orbit(op: &Operator, x0: &Vector, tol: f64, max_iter: usize) -> Result<Orbit> {
    check_dim(op.dim(), x0.len())?;
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(invalid("tolerance must be finite and >= 0"));
    }
    let mut points = vec![x0.clone()];
    let mut residual = f64::INFINITY;
    for it in 0..max_iter {
        let x = points.last().expect("nonempty");
        let tx = op.evaluate(x)?;
        residual = (&tx - x).norm();
        if residual <= tol {
            return Ok(Orbit {
                points,
                converged: true,
                residual,
                iterations: it,
            });
        }
        points.push(tx);
    }
    Ok(Orbit {
        points,
        converged: false,
        residual,
        iterations: max_iter,
    })
}

/// `T∞x`: the terminal point of the orbit from `x`.
pub fn limiting_apply(op: &Operator, x: &Vector, tol: f64, max_iter: usize) -> Result<Vector> {
    let o = orbit(op, x, tol, max_iter)?;
    if !o.converged {
        return Err(Error::NonConvergence {
            iterations: o.iterations,
            residual: o.residual,
        });
    }
    Ok(o.points.into_iter().last().expect("nonempty"))
}

fn inner_tol(tol: f64) -> f64 {
    (tol * 1e-2).min(DEFAULT_TOL)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitPropertiesReport {
    pub points: usize,
    /// Largest `‖T(T∞x) − T∞x‖`.
    pub max_range_residual: f64,
    /// Largest `‖T∞(T∞x) − T∞x‖`.
    pub max_idempotence_residual: f64,
    pub range_in_fix: bool,
    pub idempotent: bool,
    /// First point at which a property failed.
    pub witness: Option<Vector>,
}

/// Checks at `n` seeded points that `T∞` lands in `Fix T` and is idempotent.
pub fn limiting_properties_check(op: &Operator, n: usize, seed: u64, tol: f64) -> Result<LimitPropertiesReport> {
    let xs = random_points(op.dim(), n, seed);
    let it = inner_tol(tol);
    let results: Vec<Result<(f64, f64)>> = xs
        .par_iter()
        .map(|x| {
            let l = limiting_apply(op, x, it, DEFAULT_MAX_ITER)?;
            let range = (op.evaluate(&l)? - &l).norm();
            let idem = (limiting_apply(op, &l, it, DEFAULT_MAX_ITER)? - &l).norm();
            Ok((range, idem))
        })
        .collect();
    let mut report = LimitPropertiesReport {
        points: n,
        max_range_residual: 0.0,
        max_idempotence_residual: 0.0,
        range_in_fix: true,
        idempotent: true,
        witness: None,
    };
    for (i, r) in results.into_iter().enumerate() {
        let (range, idem) = r?;
        report.max_range_residual = report.max_range_residual.max(range);
        report.max_idempotence_residual = report.max_idempotence_residual.max(idem);
        if (range > tol || idem > tol) && report.witness.is_none() {
            report.witness = Some(xs[i].clone());
        }
    }
    report.range_in_fix = report.max_range_residual <= tol;
    report.idempotent = report.max_idempotence_residual <= tol;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Projection,
    NotProjection,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Projection => "projection",
            Verdict::NotProjection => "not_projection",
        }
    }
}

/// A point where `T∞` and `P_{Fix T}` disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitWitness {
    pub x: Vector,
    pub limit: Vector,
    pub projection: Vector,
    /// `‖x − T∞x‖`.
    pub distance_to_limit: f64,
    /// `‖x − P_{Fix T}x‖`.
    pub distance_to_projection: f64,
    /// `‖T∞x − P_{Fix T}x‖`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub witness: Option<LimitWitness>,
    pub max_gap: f64,
    pub points: usize,
    /// Sampled lower bound on `k(T∞)`; above 1/2 it independently rules out a projection.
    pub limit_modulus: ValueEstimate,
}

/// Compares `T∞` with `P_F` for a caller-supplied `F = Fix T` at the probes
/// followed by `n` seeded points. `F` is validated first: limits must lie in
/// `F`, and projections onto `F` must be fixed by `T`.
pub fn classify_limit(
    op: &Operator,
    fix_set: &ConvexSet,
    probes: &[Vector],
    n: usize,
    seed: u64,
    tol: f64,
) -> Result<Classification> {
    check_dim(op.dim(), fix_set.dim())?;
    for p in probes {
        check_dim(op.dim(), p.len())?;
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid("tolerance must be finite and > 0"));
    }
    let mut xs: Vec<Vector> = probes.to_vec();
    xs.extend(random_points(op.dim(), n, seed));
    let it = inner_tol(tol);
    let rows: Vec<Result<(Vector, Vector, f64)>> = xs
        .par_iter()
        .map(|x| {
            let limit = limiting_apply(op, x, it, DEFAULT_MAX_ITER)?;
            let projection = fix_set.project(x)?;
            let fixed = (op.evaluate(&projection)? - &projection).norm();
            Ok((limit, projection, fixed))
        })
        .collect();
    let mut witness = None;
    let mut max_gap: f64 = 0.0;
    for (x, row) in xs.iter().zip(rows) {
        let (limit, projection, fixed) = row?;
        let scale = x.norm().max(1.0);
        if fixed > FIX_SET_TOL * scale {
            return Err(Error::FixSetMismatch(format!(
                "projection {:?} of a sample is moved by {fixed:e}",
                projection.as_slice()
            )));
        }
        if fix_set.distance(&limit)? > FIX_SET_TOL * scale {
            return Err(Error::FixSetMismatch(format!(
                "limit {:?} lies outside the supplied set",
                limit.as_slice()
            )));
        }
        let gap = (&limit - &projection).norm();
        max_gap = max_gap.max(gap);
        if gap > 10.0 * tol && witness.is_none() {
            witness = Some(LimitWitness {
                distance_to_limit: (x - &limit).norm(),
                distance_to_projection: (x - &projection).norm(),
                x: x.clone(),
                limit,
                projection,
                gap,
            });
        }
    }
    let limit_op = Operator::limit(op.clone(), it, DEFAULT_MAX_ITER)?;
    let limit_modulus = estimate_modulus(&limit_op, n.max(1), seed, 0)?;
    let verdict = if witness.is_some() || limit_modulus.value > 0.5 + 1e-9 {
        Verdict::NotProjection
    } else {
        Verdict::Projection
    };
    Ok(Classification {
        verdict,
        witness,
        max_gap,
        points: xs.len(),
        limit_modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn identity_converges_immediately() {
        let o = orbit(&Operator::identity(2).unwrap(), &v(&[1.0, 2.0]), 1e-10, 10).unwrap();
        assert!(o.converged);
        assert_eq!(o.iterations, 0);
        assert_eq!(o.points.len(), 1);
    }

    #[test]
    fn ball_projection_converges_after_one_step() {
        let t = Operator::projection(ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap());
        let o = orbit(&t, &v(&[2.0, 0.0]), 1e-10, 10).unwrap();
        assert!(o.converged);
        assert_eq!(o.iterations, 1);
        assert_eq!(o.last(), &v(&[1.0, 0.0]));
    }

    #[test]
    fn capped_orbit_is_reported_not_fatal() {
        let t = Operator::linear(crate::linalg::Matrix::from_element(1, 1, 0.9)).unwrap();
        let o = orbit(&t, &v(&[1.0]), 1e-12, 5).unwrap();
        assert!(!o.converged);
        assert_eq!(o.iterations, 5);
        assert!(limiting_apply(&t, &v(&[1.0]), 1e-12, 5).is_err());
    }

    #[test]
    fn firm_scalar_limit_is_clamp() {
        let g = catalog::averaged_clamp();
        assert_relative_eq!(limiting_apply(&g, &v(&[5.0]), 1e-12, 10_000).unwrap()[0], 1.0, epsilon = 1e-11);
        let c = classify_limit(&g, &catalog::unit_interval(), &[], 50, 0, 1e-10).unwrap();
        assert_eq!(c.verdict, Verdict::Projection);
    }

    #[test]
    fn wrong_fix_set_is_rejected() {
        let g = catalog::averaged_clamp();
        let wrong = ConvexSet::boxed(v(&[0.0]), v(&[2.0])).unwrap();
        assert!(matches!(
            classify_limit(&g, &wrong, &[], 20, 0, 1e-10),
            Err(Error::FixSetMismatch(_))
        ));
    }
}
