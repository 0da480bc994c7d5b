//! Nonexpansive operators as evaluable trees.

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{ensure_finite_mat, ensure_finite_vec, spectral_norm, Matrix, Vector};
use crate::operators::functions::ConvexFunction;
use crate::operators::monotone::MonotoneOperator;
use crate::operators::sets::ConvexSet;

/// Rejection threshold for the certified spectral norm of linear parts.
pub const SPECTRAL_NORM_SLACK: f64 = 1e-9;

/// `x ↦ slope·x + intercept` on one piece of a scalar map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePiece {
    pub slope: f64,
    pub intercept: f64,
}

impl AffinePiece {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Self { slope, intercept }
    }

    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Identity,
    Constant(Vector),
    /// `Id + v`.
    Shift(Vector),
    LinearMatrix(Matrix),
    /// `x ↦ Mx + b`.
    Affine { matrix: Matrix, shift: Vector },
    Projection(ConvexSet),
    /// `2P_C − Id`.
    Reflector(ConvexSet),
    Prox(ConvexFunction),
    /// `J_{αA}`.
    Resolvent { operator: MonotoneOperator, alpha: f64 },
    /// `2J_A − Id`.
    ReflectedResolvent(MonotoneOperator),
    /// `(1−λ)Id + λT`.
    Relaxation { lambda: f64, inner: Box<Operator> },
    /// `T₁ ∘ T₂ ∘ … ∘ Tₘ`; the first entry is applied last.
    Compose(Vec<Operator>),
    ConvexCombination { weights: Vec<f64>, operators: Vec<Operator> },
    /// `Id − P_A + P_B(2P_A − Id)`.
    DouglasRachford { a: ConvexSet, b: ConvexSet },
    /// Continuous piecewise-affine map on ℝ; `pieces[i]` applies left of
    /// `breakpoints[i]`, the last piece right of all breakpoints.
    ScalarPiecewise { breakpoints: Vec<f64>, pieces: Vec<AffinePiece> },
    /// Pointwise limit of the iterates of `inner`.
    LimitOperator { inner: Box<Operator>, tol: f64, max_iter: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    kind: OperatorKind,
}

fn certify_nonexpansive(m: &Matrix) -> Result<()> {
    let norm = spectral_norm(m);
    if norm > 1.0 + SPECTRAL_NORM_SLACK {
        return Err(Error::NotNonexpansive { norm });
    }
    Ok(())
}

fn check_square(m: &Matrix) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(invalid("matrix must be square and nonempty"));
    }
    Ok(())
}

fn nonempty(v: &Vector) -> Result<()> {
    if v.is_empty() {
        return Err(invalid("dimension must be >= 1"));
    }
    Ok(())
}

impl Operator {
    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        Ok(Self {
            dim,
            kind: OperatorKind::Identity,
        })
    }

    pub fn constant(value: Vector) -> Result<Self> {
        nonempty(&value)?;
        ensure_finite_vec(&value, "constant value")?;
        Ok(Self {
            dim: value.len(),
            kind: OperatorKind::Constant(value),
        })
    }

    pub fn shift(offset: Vector) -> Result<Self> {
        nonempty(&offset)?;
        ensure_finite_vec(&offset, "shift vector")?;
        Ok(Self {
            dim: offset.len(),
            kind: OperatorKind::Shift(offset),
        })
    }

    /// Linear map, certified to have spectral norm at most `1 + 1e−9`.
    pub fn linear(m: Matrix) -> Result<Self> {
        ensure_finite_mat(&m, "linear matrix")?;
        check_square(&m)?;
        certify_nonexpansive(&m)?;
        Ok(Self {
            dim: m.nrows(),
            kind: OperatorKind::LinearMatrix(m),
        })
    }

    pub fn affine(matrix: Matrix, shift: Vector) -> Result<Self> {
        ensure_finite_mat(&matrix, "affine matrix")?;
        ensure_finite_vec(&shift, "affine shift")?;
        check_square(&matrix)?;
        check_dim(matrix.nrows(), shift.len())?;
        certify_nonexpansive(&matrix)?;
        Ok(Self {
            dim: matrix.nrows(),
            kind: OperatorKind::Affine { matrix, shift },
        })
    }

    pub fn projection(set: ConvexSet) -> Self {
        Self {
            dim: set.dim(),
            kind: OperatorKind::Projection(set),
        }
    }

    pub fn reflector(set: ConvexSet) -> Self {
        Self {
            dim: set.dim(),
            kind: OperatorKind::Reflector(set),
        }
    }

    pub fn prox(f: ConvexFunction) -> Self {
        Self {
            dim: f.dim(),
            kind: OperatorKind::Prox(f),
        }
    }

    pub fn resolvent(operator: MonotoneOperator, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid(format!("resolvent scale must be finite and > 0 (got {alpha})")));
        }
        Ok(Self {
            dim: operator.dim(),
            kind: OperatorKind::Resolvent { operator, alpha },
        })
    }

    pub fn reflected_resolvent(operator: MonotoneOperator) -> Self {
        Self {
            dim: operator.dim(),
            kind: OperatorKind::ReflectedResolvent(operator),
        }
    }

    pub fn relaxation(lambda: f64, inner: Operator) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(invalid(format!("relaxation parameter must lie in [0, 1] (got {lambda})")));
        }
        Ok(Self {
            dim: inner.dim,
            kind: OperatorKind::Relaxation {
                lambda,
                inner: Box::new(inner),
            },
        })
    }

    /// `ops[0] ∘ ops[1] ∘ …`.
    pub fn compose(ops: Vec<Operator>) -> Result<Self> {
        let dim = common_dim(&ops)?;
        Ok(Self {
            dim,
            kind: OperatorKind::Compose(ops),
        })
    }

    pub fn convex_combination(weights: Vec<f64>, operators: Vec<Operator>) -> Result<Self> {
        let dim = common_dim(&operators)?;
        if weights.len() != operators.len() {
            return Err(invalid("need one weight per operator"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("weights must sum to 1 (got {total})")));
        }
        Ok(Self {
            dim,
            kind: OperatorKind::ConvexCombination { weights, operators },
        })
    }

    pub fn douglas_rachford(a: ConvexSet, b: ConvexSet) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        Ok(Self {
            dim: a.dim(),
            kind: OperatorKind::DouglasRachford { a, b },
        })
    }

    pub fn scalar_piecewise(breakpoints: Vec<f64>, pieces: Vec<AffinePiece>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(invalid("need exactly one more piece than breakpoints"));
        }
        let finite = breakpoints.iter().all(|b| b.is_finite())
            && pieces.iter().all(|p| p.slope.is_finite() && p.intercept.is_finite());
        if !finite {
            return Err(Error::NonFinite("piecewise map data"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("breakpoints must be strictly increasing"));
        }
        for (i, &b) in breakpoints.iter().enumerate() {
            let (l, r) = (pieces[i].at(b), pieces[i + 1].at(b));
            if (l - r).abs() > 1e-12 * l.abs().max(1.0) {
                return Err(invalid(format!("piecewise map is discontinuous at {b}")));
            }
        }
        if let Some(p) = pieces.iter().find(|p| p.slope.abs() > 1.0) {
            return Err(Error::NotNonexpansive { norm: p.slope.abs() });
        }
        Ok(Self {
            dim: 1,
            kind: OperatorKind::ScalarPiecewise { breakpoints, pieces },
        })
    }

    /// Limiting operator `x ↦ lim Tⁿx`, run until `‖Tx − x‖ ≤ tol`.
    pub fn limit(inner: Operator, tol: f64, max_iter: usize) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(invalid("tolerance must be finite and > 0"));
        }
        if max_iter == 0 {
            return Err(invalid("max_iter must be >= 1"));
        }
        Ok(Self {
            dim: inner.dim,
            kind: OperatorKind::LimitOperator {
                inner: Box::new(inner),
                tol,
                max_iter,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// Short variant name used in traces and reports.
    pub fn name(&self) -> &'static str {
        match &self.kind {
            OperatorKind::Identity => "identity",
            OperatorKind::Constant(_) => "constant",
            OperatorKind::Shift(_) => "shift",
            OperatorKind::LinearMatrix(_) => "matrix",
            OperatorKind::Affine { .. } => "affine",
            OperatorKind::Projection(_) => "projection",
            OperatorKind::Reflector(_) => "reflector",
            OperatorKind::Prox(_) => "prox",
            OperatorKind::Resolvent { .. } => "resolvent",
            OperatorKind::ReflectedResolvent(_) => "reflected_resolvent",
            OperatorKind::Relaxation { .. } => "relaxation",
            OperatorKind::Compose(_) => "compose",
            OperatorKind::ConvexCombination { .. } => "convex_combination",
            OperatorKind::DouglasRachford { .. } => "douglas_rachford",
            OperatorKind::ScalarPiecewise { .. } => "scalar_piecewise",
            OperatorKind::LimitOperator { .. } => "limit",
        }
    }

    pub fn evaluate(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim, x.len())?;
        match &self.kind {
            OperatorKind::Identity => Ok(x.clone()),
            OperatorKind::Constant(c) => Ok(c.clone()),
            OperatorKind::Shift(v) => Ok(x + v),
            OperatorKind::LinearMatrix(m) => Ok(m * x),
            OperatorKind::Affine { matrix, shift } => Ok(matrix * x + shift),
            OperatorKind::Projection(set) => set.project(x),
            OperatorKind::Reflector(set) => Ok(set.project(x)? * 2.0 - x),
            OperatorKind::Prox(f) => f.prox(x),
            OperatorKind::Resolvent { operator, alpha } => operator.resolvent(*alpha, x),
            OperatorKind::ReflectedResolvent(a) => Ok(a.resolvent(1.0, x)? * 2.0 - x),
            OperatorKind::Relaxation { lambda, inner } => {
                Ok(x * (1.0 - lambda) + inner.evaluate(x)? * *lambda)
            }
            OperatorKind::Compose(ops) => {
                let mut y = x.clone();
                for op in ops.iter().rev() {
                    y = op.evaluate(&y)?;
                }
                Ok(y)
            }
            OperatorKind::ConvexCombination { weights, operators } => {
                let mut acc = Vector::zeros(self.dim);
                for (w, op) in weights.iter().zip(operators) {
                    acc += op.evaluate(x)? * *w;
                }
                Ok(acc)
            }
            OperatorKind::DouglasRachford { a, b } => {
                let pa = a.project(x)?;
                let reflected = &pa * 2.0 - x;
                Ok(x - pa + b.project(&reflected)?)
            }
            OperatorKind::ScalarPiecewise { breakpoints, pieces } => {
                let i = breakpoints.partition_point(|&b| b < x[0]);
                Ok(Vector::from_element(1, pieces[i].at(x[0])))
            }
            OperatorKind::LimitOperator { inner, tol, max_iter } => {
                let mut current = x.clone();
                let mut residual = f64::INFINITY;
                for _ in 0..*max_iter {
                    let next = inner.evaluate(&current)?;
                    residual = (&next - &current).norm();
                    if residual <= *tol {
                        return Ok(current);
                    }
                    current = next;
                }
                Err(Error::NonConvergence {
                    iterations: *max_iter,
                    residual,
                })
            }
        }
    }

    /// The operator as `x ↦ Mx + b` when every node of the tree is affine.
    pub fn affine_form(&self) -> Option<(Matrix, Vector)> {
        let n = self.dim;
        let id = || Matrix::identity(n, n);
        match &self.kind {
            OperatorKind::Identity => Some((id(), Vector::zeros(n))),
            OperatorKind::Constant(c) => Some((Matrix::zeros(n, n), c.clone())),
            OperatorKind::Shift(v) => Some((id(), v.clone())),
            OperatorKind::LinearMatrix(m) => Some((m.clone(), Vector::zeros(n))),
            OperatorKind::Affine { matrix, shift } => Some((matrix.clone(), shift.clone())),
            OperatorKind::Projection(set) => set.affine_projection(),
            OperatorKind::Reflector(set) => {
                let (p, c) = set.affine_projection()?;
                Some((p * 2.0 - id(), c * 2.0))
            }
            OperatorKind::Prox(f) => f.affine_prox(1.0),
            OperatorKind::Resolvent { operator, alpha } => operator.affine_resolvent(*alpha),
            OperatorKind::ReflectedResolvent(a) => {
                let (m, b) = a.affine_resolvent(1.0)?;
                Some((m * 2.0 - id(), b * 2.0))
            }
            OperatorKind::Relaxation { lambda, inner } => {
                let (m, b) = inner.affine_form()?;
                Some((id() * (1.0 - lambda) + m * *lambda, b * *lambda))
            }
            OperatorKind::Compose(ops) => {
                let mut acc = (id(), Vector::zeros(n));
                for op in ops.iter().rev() {
                    let (m, b) = op.affine_form()?;
                    acc = (&m * &acc.0, &m * &acc.1 + b);
                }
                Some(acc)
            }
            OperatorKind::ConvexCombination { weights, operators } => {
                let mut acc = (Matrix::zeros(n, n), Vector::zeros(n));
                for (w, op) in weights.iter().zip(operators) {
                    let (m, b) = op.affine_form()?;
                    acc.0 += m * *w;
                    acc.1 += b * *w;
                }
                Some(acc)
            }
            OperatorKind::DouglasRachford { a, b } => {
                let (pa, ca) = a.affine_projection()?;
                let (pb, cb) = b.affine_projection()?;
                let m = id() - &pa + &pb * (&pa * 2.0 - id());
                let shift = -&ca + &pb * (&ca * 2.0) + cb;
                Some((m, shift))
            }
            OperatorKind::ScalarPiecewise { breakpoints, pieces } => {
                if breakpoints.is_empty() {
                    let p = pieces[0];
                    Some((
                        Matrix::from_element(1, 1, p.slope),
                        Vector::from_element(1, p.intercept),
                    ))
                } else {
                    None
                }
            }
            OperatorKind::LimitOperator { .. } => None,
        }
    }
}

fn common_dim(ops: &[Operator]) -> Result<usize> {
    let first = ops.first().ok_or_else(|| invalid("operator list must be nonempty"))?;
    for op in ops {
        check_dim(first.dim, op.dim)?;
    }
    Ok(first.dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn line_and_slab() -> (ConvexSet, ConvexSet) {
        let line = ConvexSet::span(&Matrix::from_column_slice(2, 1, &[1.0, 1.0])).unwrap();
        let slab = ConvexSet::halfspace_intersection(vec![
            crate::operators::sets::Halfspace::new(v(&[1.0, 1.0]), 0.0).unwrap(),
            crate::operators::sets::Halfspace::new(v(&[-1.0, 0.0]), -2.0).unwrap(),
        ])
        .unwrap();
        (line, slab)
    }

    #[test]
    fn identity_returns_input() {
        let t = Operator::identity(2).unwrap();
        assert_eq!(t.evaluate(&v(&[3.0, -1.0])).unwrap(), v(&[3.0, -1.0]));
    }

    #[test]
    fn douglas_rachford_first_step() {
        let (line, slab) = line_and_slab();
        let t = Operator::douglas_rachford(line, slab).unwrap();
        assert_relative_eq!(t.evaluate(&v(&[4.0, 10.0])).unwrap(), v(&[-1.0, 7.0]), epsilon = 1e-12);
    }

    #[test]
    fn linear_rejects_expansive_matrix() {
        let m = Matrix::from_row_slice(2, 2, &[1.1, 0.0, 0.0, 0.5]);
        assert!(matches!(Operator::linear(m), Err(Error::NotNonexpansive { .. })));
    }

    #[test]
    fn compose_applies_last_entry_first() {
        let t = Operator::compose(vec![
            Operator::linear(Matrix::from_element(1, 1, 0.5)).unwrap(),
            Operator::shift(v(&[2.0])).unwrap(),
        ])
        .unwrap();
        assert_eq!(t.evaluate(&v(&[0.0])).unwrap(), v(&[1.0]));
    }

    #[test]
    fn scalar_piecewise_checks_continuity_and_slopes() {
        let ok = Operator::scalar_piecewise(
            vec![0.0, 1.0],
            vec![AffinePiece::new(0.0, 0.0), AffinePiece::new(1.0, 0.0), AffinePiece::new(-0.5, 1.5)],
        )
        .unwrap();
        assert_eq!(ok.evaluate(&v(&[2.0])).unwrap(), v(&[0.5]));
        assert_eq!(ok.evaluate(&v(&[-3.0])).unwrap(), v(&[0.0]));
        let jump = Operator::scalar_piecewise(vec![0.0], vec![AffinePiece::new(0.0, 0.0), AffinePiece::new(0.0, 1.0)]);
        assert!(jump.is_err());
        let steep = Operator::scalar_piecewise(vec![], vec![AffinePiece::new(2.0, 0.0)]);
        assert!(steep.is_err());
    }

    #[test]
    fn affine_form_matches_evaluation() {
        let (line, _) = line_and_slab();
        let plane = ConvexSet::affine_subspace(Matrix::from_column_slice(2, 1, &[1.0, 0.0]), v(&[0.0, 1.0])).unwrap();
        let t = Operator::compose(vec![
            Operator::relaxation(0.3, Operator::reflector(line.clone())).unwrap(),
            Operator::douglas_rachford(line, plane).unwrap(),
            Operator::shift(v(&[0.5, -1.0])).unwrap(),
        ])
        .unwrap();
        let (m, b) = t.affine_form().unwrap();
        for x in [v(&[1.0, 2.0]), v(&[-3.0, 0.5])] {
            assert_relative_eq!(t.evaluate(&x).unwrap(), &m * &x + &b, epsilon = 1e-12);
        }
    }

    #[test]
    fn limit_operator_reaches_fixed_point() {
        let t = Operator::limit(Operator::linear(Matrix::from_element(1, 1, 0.5)).unwrap(), 1e-12, 1000).unwrap();
        assert!(t.evaluate(&v(&[8.0])).unwrap()[0].abs() < 1e-11);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let t = Operator::identity(2).unwrap();
        assert!(matches!(t.evaluate(&v(&[1.0])), Err(Error::DimensionMismatch { .. })));
    }
}
