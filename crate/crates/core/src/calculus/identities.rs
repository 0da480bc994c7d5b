//! Pointwise checks of resolvent, Yosida and Moreau-envelope identities.
//!
//! The left-hand sides are computed without the closed forms used by the
//! operator catalog: resolvents of single-valued operators are obtained by a
//! fixed-point solve that only touches the operator itself.

use std::fmt;

use crate::calculus::matrix::matrix_modulus;
use crate::calculus::rules::exact_modulus;
use crate::error::{invalid, Result};
use crate::estimator::estimate::estimate_modulus;
use crate::estimator::sampling::random_points;
use crate::linalg::{Matrix, Vector};
use crate::operators::functions::{ConvexFunction, FunctionKind};
use crate::operators::monotone::{MonotoneKind, MonotoneOperator};
use crate::operators::operator::Operator;
use crate::operators::sets::ConvexSet;

/// Residual below which an identity counts as verified.
pub const IDENTITY_TOL: f64 = 1e-9;
const SOLVE_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentitySuite {
    /// `J_{αY_μ(A)} = μ/(μ+α)·Id + α/(μ+α)·J_{(μ+α)A}`.
    YosidaResolvent,
    /// `Y_μ(A) = μ⁻¹(Id − J_{μA})` is the inverse of `μId + A⁻¹`.
    YosidaIdentity,
    /// `P_{αe_μf} = μ/(μ+α)·Id + α/(μ+α)·P_{(μ+α)f}`.
    MoreauEnvelope,
    /// `k(J_{Y_μ(N_C)}) = 1/(2(μ+1))`.
    NormalConeYosida,
    /// `k(2J_A − Id) = 2k(J_A)`.
    ReflectedResolvent,
    /// `J_{αY_{1−α}(A)} = (1−α)Id + αJ_A` for `α ∈ [0, 1)`.
    RelaxedYosida,
}

impl IdentitySuite {
    pub const ALL: [IdentitySuite; 6] = [
        IdentitySuite::YosidaResolvent,
        IdentitySuite::YosidaIdentity,
        IdentitySuite::MoreauEnvelope,
        IdentitySuite::NormalConeYosida,
        IdentitySuite::ReflectedResolvent,
        IdentitySuite::RelaxedYosida,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentitySuite::YosidaResolvent => "yosida_resolvent",
            IdentitySuite::YosidaIdentity => "yosida_identity",
            IdentitySuite::MoreauEnvelope => "moreau_envelope",
            IdentitySuite::NormalConeYosida => "normal_cone_yosida",
            IdentitySuite::ReflectedResolvent => "reflected_resolvent",
            IdentitySuite::RelaxedYosida => "relaxed_yosida",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|suite| suite.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown identity suite {s:?}")))
    }
}

impl fmt::Display for IdentitySuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Modulus values compared by a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusComparison {
    pub expected: f64,
    pub derived: f64,
    /// Sampled lower bound, which must not exceed `expected`.
    pub sampled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub suite: IdentitySuite,
    pub subject: String,
    pub mu: f64,
    pub alpha: f64,
    pub points: usize,
    pub max_residual: f64,
    pub modulus: Option<ModulusComparison>,
    pub passed: bool,
}

/// Evaluates one identity suite for the monotone operator `a` at `points` seeded points.
///
/// `MoreauEnvelope` needs `a = ∂f`; `NormalConeYosida` needs `a = N_C`.
pub fn verify_identities(
    suite: IdentitySuite,
    a: &MonotoneOperator,
    mu: f64,
    alpha: f64,
    points: usize,
    seed: u64,
) -> Result<IdentityReport> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(invalid("mu must be finite and > 0"));
    }
    let alpha_ok = match suite {
        IdentitySuite::RelaxedYosida => (0.0..1.0).contains(&alpha),
        _ => alpha.is_finite() && alpha > 0.0,
    };
    if !alpha_ok {
        return Err(invalid(format!("alpha = {alpha} is outside the range of suite {suite}")));
    }
    let xs = random_points(a.dim(), points, seed);
    let mut max_residual: f64 = 0.0;
    let mut modulus = None;
    match suite {
        IdentitySuite::YosidaResolvent => {
            for x in &xs {
                let lhs = solve_resolvent(&|z: &Vector| yosida_apply(a, mu, z), alpha, mu, x)?;
                let outer = a.resolvent(mu + alpha, x)?;
                let rhs = x * (mu / (mu + alpha)) + outer * (alpha / (mu + alpha));
                max_residual = max_residual.max((lhs - rhs).norm());
            }
        }
        IdentitySuite::YosidaIdentity => {
            let y = MonotoneOperator::yosida(mu, a.clone())?;
            for x in &xs {
                let u = (x - a.resolvent(mu, x)?) / mu;
                let inclusion = a.inclusion_residual(&(x - &u * mu), &u)?;
                let library = (y.apply(x)? - &u).norm();
                max_residual = max_residual.max(inclusion).max(library);
            }
        }
        IdentitySuite::MoreauEnvelope => {
            let MonotoneKind::Subdifferential(f) = a.kind() else {
                return Err(invalid("moreau_envelope suite needs a subdifferential"));
            };
            let envelope = ConvexFunction::moreau_envelope(f.clone(), mu, alpha)?;
            for x in &xs {
                let grad = |z: &Vector| Ok((z - f.prox_scaled(mu, z)?) / mu);
                let lhs = solve_resolvent(&grad, alpha, mu, x)?;
                let outer = f.prox_scaled(mu + alpha, x)?;
                let rhs = x * (mu / (mu + alpha)) + outer * (alpha / (mu + alpha));
                let library = (envelope.prox(x)? - &rhs).norm();
                max_residual = max_residual.max((lhs - rhs).norm()).max(library);
            }
        }
        IdentitySuite::NormalConeYosida => {
            let MonotoneKind::NormalCone(set) = a.kind() else {
                return Err(invalid("normal_cone_yosida suite needs a normal cone"));
            };
            let op = Operator::resolvent(MonotoneOperator::yosida(mu, a.clone())?, 1.0)?;
            for x in &xs {
                let rhs = x * (mu / (mu + 1.0)) + set.project(x)? / (mu + 1.0);
                max_residual = max_residual.max((op.evaluate(x)? - rhs).norm());
            }
            let expected = if set.is_whole_space() { 0.0 } else { 1.0 / (2.0 * (mu + 1.0)) };
            let derived = exact_modulus(&op).upper;
            let sampled = estimate_modulus(&op, points, seed, 0)?.value;
            max_residual = max_residual.max((derived - expected).abs());
            modulus = Some(ModulusComparison {
                expected,
                derived,
                sampled: Some(sampled),
            });
        }
        IdentitySuite::ReflectedResolvent => {
            let reflected = Operator::reflected_resolvent(a.clone());
            for x in &xs {
                let rhs = a.resolvent(1.0, x)? * 2.0 - x;
                max_residual = max_residual.max((reflected.evaluate(x)? - rhs).norm());
            }
            let resolvent_k = exact_modulus(&Operator::resolvent(a.clone(), 1.0)?).upper;
            let expected = (2.0 * resolvent_k).min(1.0);
            let derived = independent_reflected_modulus(a)?;
            let sampled = estimate_modulus(&reflected, points, seed, 0)?.value;
            if let Some(k) = derived {
                max_residual = max_residual.max((k - expected).abs());
            }
            modulus = Some(ModulusComparison {
                expected,
                derived: derived.unwrap_or(f64::NAN),
                sampled: Some(sampled),
            });
        }
        IdentitySuite::RelaxedYosida => {
            let m = 1.0 - alpha;
            for x in &xs {
                let lhs = if alpha == 0.0 {
                    x.clone()
                } else {
                    solve_resolvent(&|z: &Vector| yosida_apply(a, m, z), alpha, m, x)?
                };
                let rhs = x * (1.0 - alpha) + a.resolvent(1.0, x)? * alpha;
                max_residual = max_residual.max((lhs - rhs).norm());
            }
            let expected = alpha * exact_modulus(&Operator::resolvent(a.clone(), 1.0)?).upper;
            let derived = if alpha == 0.0 {
                exact_modulus(&Operator::identity(a.dim())?).upper
            } else {
                let op = Operator::resolvent(MonotoneOperator::yosida(m, a.clone())?, alpha)?;
                exact_modulus(&op).upper
            };
            max_residual = max_residual.max((derived - expected).abs());
            modulus = Some(ModulusComparison {
                expected,
                derived,
                sampled: None,
            });
        }
    }
    let sampled_ok = modulus
        .as_ref()
        .and_then(|m| m.sampled)
        .zip(modulus.as_ref().map(|m| m.expected))
        .is_none_or(|(s, e)| s <= e + IDENTITY_TOL);
    Ok(IdentityReport {
        suite,
        subject: describe(a),
        mu,
        alpha,
        points,
        max_residual,
        modulus,
        passed: max_residual < IDENTITY_TOL && sampled_ok,
    })
}

/// `Y_μ(A)z = μ⁻¹(z − J_{μA}z)`.
fn yosida_apply(a: &MonotoneOperator, mu: f64, z: &Vector) -> Result<Vector> {
    Ok((z - a.resolvent(mu, z)?) / mu)
}

/// Solves `z + α·G(z) = x` for a `μ`-cocoercive `G` with the relaxed iteration
/// `z ← z − γ(z + αG(z) − x)`, `γ = 2β/(1+2β)`, `β = μ/α`, which contracts with factor `1/(1+2β)`.
fn solve_resolvent(
    g: &dyn Fn(&Vector) -> Result<Vector>,
    alpha: f64,
    mu: f64,
    x: &Vector,
) -> Result<Vector> {
    let beta = mu / alpha;
    let gamma = 2.0 * beta / (1.0 + 2.0 * beta);
    let mut z = x.clone();
    let scale = x.norm().max(1.0);
    let mut previous = f64::INFINITY;
    for _ in 0..SOLVE_MAX_ITER {
        let step = (&z + g(&z)? * alpha - x) * gamma;
        let size = step.norm();
        z -= &step;
        // Stop at the rounding floor: tiny steps, or steps that stopped shrinking.
        if size <= 1e-15 * scale || (size >= previous && size <= 1e-12 * scale) {
            break;
        }
        previous = size;
    }
    Ok(z)
}

/// `k(R_A)` by a route that does not go through `2k(J_A)`.
fn independent_reflected_modulus(a: &MonotoneOperator) -> Result<Option<f64>> {
    Ok(match a.kind() {
        MonotoneKind::LinearMonotone(m) => {
            let n = m.nrows();
            let id = Matrix::identity(n, n);
            let j = crate::linalg::inverse(&(&id + m))?;
            Some(matrix_modulus(&(j * 2.0 - id))?)
        }
        MonotoneKind::NormalCone(set) => Some(exact_modulus(&Operator::reflector(set.clone())).upper),
        _ => None,
    })
}

fn describe(a: &MonotoneOperator) -> String {
    match a.kind() {
        MonotoneKind::LinearMonotone(m) => format!("linear {}x{}", m.nrows(), m.ncols()),
        MonotoneKind::NormalCone(_) => "normal_cone".into(),
        MonotoneKind::Subdifferential(f) => match f.kind() {
            FunctionKind::Indicator(_) => "subdifferential of indicator".into(),
            FunctionKind::Quadratic(_) => "subdifferential of quadratic".into(),
            FunctionKind::HalfDistanceSquared { .. } => "subdifferential of half distance squared".into(),
            FunctionKind::Huber { .. } => "subdifferential of huber".into(),
            FunctionKind::Support { .. } => "subdifferential of support".into(),
            FunctionKind::MoreauEnvelope { .. } => "subdifferential of moreau envelope".into(),
            FunctionKind::ScalarPiecewiseConvex { .. } => "subdifferential of piecewise convex".into(),
        },
        MonotoneKind::Scaled { .. } => "scaled".into(),
        MonotoneKind::Yosida { .. } => "yosida".into(),
    }
}

/// The three reference operators: `diag(2)`, the 2×2 rotation by π/2, and the normal cone of the unit ball.
pub fn reference_operators() -> Vec<MonotoneOperator> {
    let diag = MonotoneOperator::linear(Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]))
        .expect("diag(2) is monotone");
    let skew = MonotoneOperator::linear(Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]))
        .expect("skew matrices are monotone");
    let ball = ConvexSet::ball(Vector::zeros(2), 1.0).expect("unit ball");
    vec![diag, skew, MonotoneOperator::normal_cone(ball)]
}

/// Every suite applicable to each reference operator, plus the Moreau-envelope
/// suite on the functions behind them (`½⟨x, 2x⟩` and `ι_ball`).
pub fn standard_suites(mu: f64, alpha: f64, points: usize, seed: u64) -> Result<Vec<IdentityReport>> {
    let mut reports = Vec::new();
    for a in reference_operators() {
        for suite in [
            IdentitySuite::YosidaResolvent,
            IdentitySuite::YosidaIdentity,
            IdentitySuite::ReflectedResolvent,
        ] {
            reports.push(verify_identities(suite, &a, mu, alpha, points, seed)?);
        }
        for relax in [0.0, 0.5] {
            reports.push(verify_identities(IdentitySuite::RelaxedYosida, &a, mu, relax, points, seed)?);
        }
        if let MonotoneKind::NormalCone(_) = a.kind() {
            reports.push(verify_identities(IdentitySuite::NormalConeYosida, &a, mu, 1.0, points, seed)?);
        }
    }
    let quad = ConvexFunction::quadratic(Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]))?;
    let ball = ConvexFunction::indicator(ConvexSet::ball(Vector::zeros(2), 1.0)?);
    for f in [quad, ball] {
        let a = MonotoneOperator::subdifferential(f);
        reports.push(verify_identities(IdentitySuite::MoreauEnvelope, &a, mu, alpha, points, seed)?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_suites_pass() {
        for report in standard_suites(1.0, 1.0, 200, 3).unwrap() {
            assert!(report.passed, "{report:?}");
        }
    }

    #[test]
    fn normal_cone_modulus_is_one_quarter() {
        let a = reference_operators().pop().unwrap();
        let r = verify_identities(IdentitySuite::NormalConeYosida, &a, 1.0, 1.0, 100, 0).unwrap();
        assert_eq!(r.modulus.unwrap().derived, 0.25);
    }

    #[test]
    fn relaxation_at_zero_is_identity() {
        let a = reference_operators().remove(0);
        let r = verify_identities(IdentitySuite::RelaxedYosida, &a, 1.0, 0.0, 50, 0).unwrap();
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.modulus.unwrap().derived, 0.0);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in IdentitySuite::ALL {
            assert_eq!(IdentitySuite::parse(s.as_str()).unwrap(), s);
        }
    }
}
