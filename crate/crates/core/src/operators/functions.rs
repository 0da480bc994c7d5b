//! Catalog of proper lsc convex functions with closed-form proximal maps.

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{ensure_finite_mat, min_sym_eigenvalue, solve, Matrix, Vector};
use crate::operators::sets::{ConvexSet, SetKind};

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionKind {
    /// `ι_C`.
    Indicator(ConvexSet),
    /// `½⟨x, Qx⟩` with `Q` symmetric PSD.
    Quadratic(Matrix),
    /// `(α/2)·d_C²`.
    HalfDistanceSquared { set: ConvexSet, alpha: f64 },
    /// `α·H_μ`, where `H_μ = e_μ‖·‖` is the Huber function.
    Huber { mu: f64, alpha: f64 },
    /// `λ·σ_C`.
    Support { set: ConvexSet, lambda: f64 },
    /// `α·e_μ f`.
    MoreauEnvelope {
        inner: Box<ConvexFunction>,
        mu: f64,
        alpha: f64,
    },
    /// Convex piecewise-linear function on ℝ with kinks at `breakpoints`;
    /// `slopes[i]` applies left of `breakpoints[i]`, the last slope right of all of them.
    ScalarPiecewiseConvex {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexFunction {
    dim: usize,
    kind: FunctionKind,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and > 0 (got {v})")))
    }
}

impl ConvexFunction {
    pub fn indicator(set: ConvexSet) -> Self {
        Self {
            dim: set.dim(),
            kind: FunctionKind::Indicator(set),
        }
    }

    pub fn quadratic(q: Matrix) -> Result<Self> {
        ensure_finite_mat(&q, "quadratic matrix")?;
        if !q.is_square() || q.nrows() == 0 {
            return Err(invalid("quadratic matrix must be square and nonempty"));
        }
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-12 * q.amax().max(1.0) {
            return Err(invalid("quadratic matrix must be symmetric"));
        }
        if min_sym_eigenvalue(&q) < -1e-12 {
            return Err(invalid("quadratic matrix must be positive semidefinite"));
        }
        Ok(Self {
            dim: q.nrows(),
            kind: FunctionKind::Quadratic(q),
        })
    }

    pub fn half_distance_squared(set: ConvexSet, alpha: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        Ok(Self {
            dim: set.dim(),
            kind: FunctionKind::HalfDistanceSquared { set, alpha },
        })
    }

    pub fn huber(dim: usize, mu: f64, alpha: f64) -> Result<Self> {
        positive("mu", mu)?;
        positive("alpha", alpha)?;
        if dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        Ok(Self {
            dim,
            kind: FunctionKind::Huber { mu, alpha },
        })
    }

    pub fn support(set: ConvexSet, lambda: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        Ok(Self {
            dim: set.dim(),
            kind: FunctionKind::Support { set, lambda },
        })
    }

    pub fn moreau_envelope(inner: ConvexFunction, mu: f64, alpha: f64) -> Result<Self> {
        positive("mu", mu)?;
        positive("alpha", alpha)?;
        Ok(Self {
            dim: inner.dim,
            kind: FunctionKind::MoreauEnvelope {
                inner: Box::new(inner),
                mu,
                alpha,
            },
        })
    }

    pub fn scalar_piecewise_convex(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(invalid("need exactly one more slope than breakpoints"));
        }
        if breakpoints.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("piecewise convex data"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("breakpoints must be strictly increasing"));
        }
        if slopes.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("slopes must be nondecreasing for convexity"));
        }
        Ok(Self {
            dim: 1,
            kind: FunctionKind::ScalarPiecewiseConvex { breakpoints, slopes },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    /// `P_{t·f}(x)`, the proximal map of the scaled function.
    pub fn prox_scaled(&self, t: f64, x: &Vector) -> Result<Vector> {
        check_dim(self.dim, x.len())?;
        match &self.kind {
            FunctionKind::Indicator(set) => set.project(x),
            FunctionKind::Quadratic(q) => {
                let a = Matrix::identity(self.dim, self.dim) + q * t;
                solve(&a, x)
            }
            FunctionKind::HalfDistanceSquared { set, alpha } => {
                let s = t * alpha;
                Ok((x + set.project(x)? * s) / (1.0 + s))
            }
            FunctionKind::Huber { mu, alpha } => {
                let s = t * alpha;
                let outer = prox_norm(mu + s, x);
                Ok(envelope_mix(*mu, s, x, &outer))
            }
            FunctionKind::Support { set, lambda } => {
                let s = t * lambda;
                Ok(x - set.project(&(x / s))? * s)
            }
            FunctionKind::MoreauEnvelope { inner, mu, alpha } => {
                let s = t * alpha;
                let outer = inner.prox_scaled(mu + s, x)?;
                Ok(envelope_mix(*mu, s, x, &outer))
            }
            FunctionKind::ScalarPiecewiseConvex { breakpoints, slopes } => Ok(Vector::from_element(
                1,
                prox_piecewise(breakpoints, slopes, t, x[0]),
            )),
        }
    }

    pub fn prox(&self, x: &Vector) -> Result<Vector> {
        self.prox_scaled(1.0, x)
    }

    /// Function value; `+∞` outside the domain.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        match &self.kind {
            FunctionKind::Indicator(set) => Ok(if set.contains(x, 1e-12)? {
                0.0
            } else {
                f64::INFINITY
            }),
            FunctionKind::Quadratic(q) => Ok(0.5 * x.dot(&(q * x))),
            FunctionKind::HalfDistanceSquared { set, alpha } => {
                let d = set.distance(x)?;
                Ok(0.5 * alpha * d * d)
            }
            FunctionKind::Huber { mu, alpha } => {
                let r = x.norm();
                Ok(alpha * if r <= *mu { r * r / (2.0 * mu) } else { r - mu / 2.0 })
            }
            FunctionKind::Support { set, lambda } => Ok(lambda * support_value(set, x)?),
            FunctionKind::MoreauEnvelope { inner, mu, alpha } => {
                let p = inner.prox_scaled(*mu, x)?;
                let d = (x - &p).norm();
                Ok(alpha * (inner.value(&p)? + d * d / (2.0 * mu)))
            }
            FunctionKind::ScalarPiecewiseConvex { breakpoints, slopes } => {
                Ok(piecewise_value(breakpoints, slopes, x[0]))
            }
        }
    }

    /// `P_{t·f}` as `x ↦ Mx + b` when it is affine.
    pub fn affine_prox(&self, t: f64) -> Option<(Matrix, Vector)> {
        let n = self.dim;
        let id = Matrix::identity(n, n);
        match &self.kind {
            FunctionKind::Indicator(set) => set.affine_projection(),
            FunctionKind::Quadratic(q) => {
                let inv = (&id + q * t).try_inverse()?;
                Some((inv, Vector::zeros(n)))
            }
            FunctionKind::HalfDistanceSquared { set, alpha } => {
                let s = t * alpha;
                let (p, c) = set.affine_projection()?;
                Some(((id + p * s) / (1.0 + s), c * (s / (1.0 + s))))
            }
            FunctionKind::Huber { .. } => None,
            FunctionKind::Support { set, lambda } => {
                // x − s·P_C(x/s) with P_C x = Px + c.
                let s = t * lambda;
                let (p, c) = set.affine_projection()?;
                Some((id - p, c * -s))
            }
            FunctionKind::MoreauEnvelope { inner, mu, alpha } => {
                let s = t * alpha;
                let (m, b) = inner.affine_prox(mu + s)?;
                let denom = mu + s;
                Some((id * (mu / denom) + m * (s / denom), b * (s / denom)))
            }
            FunctionKind::ScalarPiecewiseConvex { slopes, .. } => {
                if slopes.windows(2).all(|w| w[0] == w[1]) {
                    Some((id, Vector::from_element(1, -t * slopes[0])))
                } else {
                    None
                }
            }
        }
    }

    /// Whether `∇f` exists everywhere and is Lipschitz.
    pub fn is_lipschitz_smooth(&self) -> bool {
        match &self.kind {
            FunctionKind::Indicator(set) => set.is_whole_space(),
            FunctionKind::Quadratic(_)
            | FunctionKind::HalfDistanceSquared { .. }
            | FunctionKind::Huber { .. }
            | FunctionKind::MoreauEnvelope { .. } => true,
            FunctionKind::Support { set, .. } => set.is_singleton(),
            FunctionKind::ScalarPiecewiseConvex { slopes, .. } => {
                slopes.windows(2).all(|w| w[0] == w[1])
            }
        }
    }

    /// `∇f(x)` for functions that are differentiable everywhere.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim, x.len())?;
        if !self.is_lipschitz_smooth() {
            return Err(Error::SetValued("subdifferential of a nonsmooth function".into()));
        }
        match &self.kind {
            FunctionKind::Indicator(_) => Ok(Vector::zeros(self.dim)),
            FunctionKind::Quadratic(q) => Ok(q * x),
            FunctionKind::HalfDistanceSquared { set, alpha } => Ok((x - set.project(x)?) * *alpha),
            FunctionKind::Huber { mu, alpha } => {
                let r = x.norm();
                Ok(if r <= *mu { x * (alpha / mu) } else { x * (alpha / r) })
            }
            FunctionKind::Support { set, lambda } => Ok(set.project(&Vector::zeros(self.dim))? * *lambda),
            FunctionKind::MoreauEnvelope { inner, mu, alpha } => {
                Ok((x - inner.prox_scaled(*mu, x)?) * (alpha / mu))
            }
            FunctionKind::ScalarPiecewiseConvex { slopes, .. } => {
                Ok(Vector::from_element(1, slopes[0]))
            }
        }
    }
}

/// `μ/(μ+s)·x + s/(μ+s)·outer`, the proximal map of `s·e_μ f` given `outer = P_{(μ+s)f}x`.
fn envelope_mix(mu: f64, s: f64, x: &Vector, outer: &Vector) -> Vector {
    let denom = mu + s;
    x * (mu / denom) + outer * (s / denom)
}

/// Proximal map of `t‖·‖` (block soft-thresholding).
fn prox_norm(t: f64, x: &Vector) -> Vector {
    let r = x.norm();
    if r <= t {
        Vector::zeros(x.len())
    } else {
        x * (1.0 - t / r)
    }
}

fn prox_piecewise(breakpoints: &[f64], slopes: &[f64], t: f64, x: f64) -> f64 {
    let m = breakpoints.len();
    for i in 0..=m {
        let lo = if i == 0 { f64::NEG_INFINITY } else { breakpoints[i - 1] };
        let hi = if i == m { f64::INFINITY } else { breakpoints[i] };
        let u = x - t * slopes[i];
        if u > lo && u < hi {
            return u;
        }
        if i < m {
            // Kink at breakpoints[i]: x − b ∈ t·[s_i, s_{i+1}].
            let b = breakpoints[i];
            if x - t * slopes[i + 1] <= b && b <= x - t * slopes[i] {
                return b;
            }
        }
    }
    unreachable!("prox of a convex piecewise-linear function always exists")
}

fn piecewise_value(breakpoints: &[f64], slopes: &[f64], x: f64) -> f64 {
    if breakpoints.is_empty() {
        return slopes[0] * x;
    }
    // Anchored so that f(breakpoints[0]) = 0.
    let mut value = 0.0;
    let mut at = breakpoints[0];
    if x <= at {
        return slopes[0] * (x - at);
    }
    for (i, &b) in breakpoints.iter().enumerate().skip(1) {
        if x <= b {
            return value + slopes[i] * (x - at);
        }
        value += slopes[i] * (b - at);
        at = b;
    }
    value + slopes[breakpoints.len()] * (x - at)
}

/// `σ_C(x) = sup_{c∈C} ⟨c, x⟩`.
fn support_value(set: &ConvexSet, x: &Vector) -> Result<f64> {
    let orthogonal = |basis: &Matrix| (basis.transpose() * x).norm() <= 1e-12 * x.norm().max(1.0);
    Ok(match set.kind() {
        SetKind::Singleton(p) => p.dot(x),
        SetKind::Ball { center, radius } => {
            if x.norm() == 0.0 {
                center.dot(x)
            } else {
                center.dot(x) + radius * x.norm()
            }
        }
        SetKind::Box { lower, upper } => {
            let mut total = 0.0;
            for i in 0..x.len() {
                let term = if x[i] > 0.0 {
                    upper[i] * x[i]
                } else if x[i] < 0.0 {
                    lower[i] * x[i]
                } else {
                    0.0
                };
                total += term;
            }
            total
        }
        SetKind::Halfspace(h) => {
            // Finite only along −normal: x = −τn with τ ≥ 0.
            let n = h.normal();
            let tau = -x.dot(n) / n.norm_squared();
            if tau >= 0.0 && (x + n * tau).norm() <= 1e-12 * x.norm().max(1.0) {
                -tau * h.offset()
            } else {
                f64::INFINITY
            }
        }
        SetKind::LinearSubspace { basis, .. } => {
            if orthogonal(basis) {
                0.0
            } else {
                f64::INFINITY
            }
        }
        SetKind::AffineSubspace { basis, anchor } => {
            if orthogonal(basis) {
                anchor.dot(x)
            } else {
                f64::INFINITY
            }
        }
        SetKind::HalfspaceIntersection(_) => {
            return Err(Error::UnsupportedFunction(
                "support function value of a halfspace intersection".into(),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    /// Brute-force argmin of f(u) + (1/2)(u - x)^2 on a fine 1-D grid.
    fn grid_prox(f: &ConvexFunction, x: f64, lo: f64, hi: f64) -> f64 {
        let steps = 200_000;
        let mut best = (f64::INFINITY, lo);
        for i in 0..=steps {
            let u = lo + (hi - lo) * i as f64 / steps as f64;
            let val = f.value(&v(&[u])).unwrap() + 0.5 * (u - x) * (u - x);
            if val < best.0 {
                best = (val, u);
            }
        }
        best.1
    }

    #[test]
    fn quadratic_prox_matches_hand_solve_and_grid() {
        let f = ConvexFunction::quadratic(Matrix::from_element(1, 1, 3.0)).unwrap();
        assert_relative_eq!(f.prox(&v(&[4.0])).unwrap()[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(grid_prox(&f, 4.0, -5.0, 5.0), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn indicator_prox_is_projection() {
        let f = ConvexFunction::indicator(ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap());
        assert_eq!(f.prox(&v(&[2.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
    }

    #[test]
    fn half_distance_squared_prox_is_midpoint_for_unit_alpha() {
        let c = ConvexSet::halfspace(v(&[1.0, 0.0]), 1.0).unwrap();
        let f = ConvexFunction::half_distance_squared(c.clone(), 1.0).unwrap();
        let x = v(&[-3.0, 2.0]);
        let expected = (&x + c.project(&x).unwrap()) / 2.0;
        assert_relative_eq!(f.prox(&x).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn huber_prox_matches_grid() {
        let f = ConvexFunction::huber(1, 0.5, 2.0).unwrap();
        for &x in &[-4.0, -0.3, 0.0, 0.7, 3.5] {
            let p = f.prox(&v(&[x])).unwrap()[0];
            assert_relative_eq!(p, grid_prox(&f, x, -6.0, 6.0), epsilon = 1e-4);
        }
    }

    #[test]
    fn support_prox_matches_grid() {
        let c = ConvexSet::boxed(v(&[-1.0]), v(&[2.0])).unwrap();
        let f = ConvexFunction::support(c, 0.5).unwrap();
        for &x in &[-3.0, -0.2, 0.4, 1.5, 4.0] {
            let p = f.prox(&v(&[x])).unwrap()[0];
            assert_relative_eq!(p, grid_prox(&f, x, -6.0, 6.0), epsilon = 1e-4);
        }
    }

    #[test]
    fn envelope_prox_matches_grid() {
        let inner = ConvexFunction::indicator(ConvexSet::boxed(v(&[0.0]), v(&[1.0])).unwrap());
        let f = ConvexFunction::moreau_envelope(inner, 0.7, 1.3).unwrap();
        for &x in &[-2.0, 0.5, 2.5] {
            let p = f.prox(&v(&[x])).unwrap()[0];
            assert_relative_eq!(p, grid_prox(&f, x, -4.0, 4.0), epsilon = 1e-4);
        }
    }

    #[test]
    fn piecewise_prox_matches_grid() {
        let f = ConvexFunction::scalar_piecewise_convex(vec![-1.0, 1.0], vec![-2.0, 0.0, 1.0]).unwrap();
        for &x in &[-5.0, -1.5, -0.5, 0.3, 1.2, 2.5, 4.0] {
            let p = f.prox(&v(&[x])).unwrap()[0];
            assert_relative_eq!(p, grid_prox(&f, x, -8.0, 8.0), epsilon = 1e-4);
        }
    }

    #[test]
    fn piecewise_rejects_nonconvex_slopes() {
        assert!(ConvexFunction::scalar_piecewise_convex(vec![0.0], vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn quadratic_rejects_indefinite() {
        let q = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(ConvexFunction::quadratic(q).is_err());
    }

    #[test]
    fn gradient_of_nonsmooth_is_set_valued() {
        let f = ConvexFunction::indicator(ConvexSet::ball(v(&[0.0]), 1.0).unwrap());
        assert!(matches!(f.gradient(&v(&[0.0])), Err(Error::SetValued(_))));
    }
}
