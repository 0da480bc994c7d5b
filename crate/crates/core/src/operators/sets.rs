//! Closed convex sets with exact (or Dykstra-iterative) projections.

use nalgebra::SVD;

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{ensure_finite_mat, ensure_finite_vec, orthonormal_span, solve, Matrix, Vector};

/// Maximum number of Dykstra sweeps for a halfspace intersection.
pub const DYKSTRA_MAX_SWEEPS: usize = 100_000;
/// Stop once a full Dykstra sweep moves the iterate by at most this much.
pub const DYKSTRA_TOL: f64 = 1e-10;

const ORTHONORMAL_TOL: f64 = 1e-12;

/// The closed halfspace `{x : ⟨normal, x⟩ ≥ offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    normal: Vector,
    offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        ensure_finite_vec(&normal, "halfspace normal")?;
        if !offset.is_finite() {
            return Err(Error::NonFinite("halfspace offset"));
        }
        if normal.norm() == 0.0 {
            return Err(invalid("halfspace normal must be nonzero"));
        }
        Ok(Self { normal, offset })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed slack `⟨n, x⟩ − offset`; negative outside.
    pub fn slack(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let s = self.slack(x);
        if s >= 0.0 {
            x.clone()
        } else {
            x - &self.normal * (s / self.normal.norm_squared())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    /// Per-coordinate bounds; infinite bounds are allowed.
    Box { lower: Vector, upper: Vector },
    /// Closed ball; an infinite radius denotes the whole space.
    Ball { center: Vector, radius: f64 },
    Halfspace(Halfspace),
    /// Columns of `basis` are orthonormal. `spanning` keeps independent
    /// caller-supplied generators; projecting through them avoids the rounding
    /// of normalized directions such as (1, 1)/√2.
    LinearSubspace { basis: Matrix, spanning: Option<Matrix> },
    AffineSubspace { basis: Matrix, anchor: Vector },
    Singleton(Vector),
    HalfspaceIntersection(Vec<Halfspace>),
}

/// A nonempty closed convex subset of ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSet {
    dim: usize,
    kind: SetKind,
}

impl ConvexSet {
    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.iter().chain(upper.iter()).any(|v| v.is_nan()) {
            return Err(Error::NonFinite("box bounds"));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(invalid("box requires lower <= upper"));
        }
        if lower.iter().any(|&l| l == f64::INFINITY) || upper.iter().any(|&u| u == f64::NEG_INFINITY)
        {
            return Err(invalid("box bounds must admit at least one point"));
        }
        nonzero_dim(lower.len())?;
        Ok(Self {
            dim: lower.len(),
            kind: SetKind::Box { lower, upper },
        })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        ensure_finite_vec(&center, "ball center")?;
        if radius.is_nan() || radius < 0.0 {
            return Err(invalid("ball radius must be >= 0"));
        }
        nonzero_dim(center.len())?;
        Ok(Self {
            dim: center.len(),
            kind: SetKind::Ball { center, radius },
        })
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        nonzero_dim(normal.len())?;
        let h = Halfspace::new(normal, offset)?;
        Ok(Self {
            dim: h.normal.len(),
            kind: SetKind::Halfspace(h),
        })
    }

    /// Linear subspace spanned by the orthonormal columns of `basis`.
    pub fn linear_subspace(basis: Matrix) -> Result<Self> {
        ensure_finite_mat(&basis, "subspace basis")?;
        check_orthonormal(&basis)?;
        nonzero_dim(basis.nrows())?;
        Ok(Self {
            dim: basis.nrows(),
            kind: SetKind::LinearSubspace { basis, spanning: None },
        })
    }

    /// Linear subspace spanned by the columns of `vectors` (need not be orthonormal).
    pub fn span(vectors: &Matrix) -> Result<Self> {
        ensure_finite_mat(vectors, "spanning vectors")?;
        let mut set = Self::linear_subspace(orthonormal_span(vectors, 1e-10))?;
        if let SetKind::LinearSubspace { basis, spanning } = &mut set.kind {
            if basis.ncols() == vectors.ncols() && vectors.ncols() > 0 {
                *spanning = Some(vectors.clone());
            }
        }
        Ok(set)
    }

    pub fn affine_subspace(basis: Matrix, anchor: Vector) -> Result<Self> {
        ensure_finite_mat(&basis, "subspace basis")?;
        ensure_finite_vec(&anchor, "affine anchor")?;
        check_dim(basis.nrows(), anchor.len())?;
        check_orthonormal(&basis)?;
        nonzero_dim(anchor.len())?;
        Ok(Self {
            dim: anchor.len(),
            kind: SetKind::AffineSubspace { basis, anchor },
        })
    }

    pub fn singleton(point: Vector) -> Result<Self> {
        ensure_finite_vec(&point, "singleton point")?;
        nonzero_dim(point.len())?;
        Ok(Self {
            dim: point.len(),
            kind: SetKind::Singleton(point),
        })
    }

    /// Intersection of halfspaces. Nonemptiness is not checked here; an empty
    /// intersection surfaces as `NonConvergence` during projection.
    pub fn halfspace_intersection(halfspaces: Vec<Halfspace>) -> Result<Self> {
        let dim = halfspaces
            .first()
            .map(|h| h.normal.len())
            .ok_or_else(|| invalid("halfspace intersection needs at least one halfspace"))?;
        for h in &halfspaces {
            check_dim(dim, h.normal.len())?;
        }
        nonzero_dim(dim)?;
        Ok(Self {
            dim,
            kind: SetKind::HalfspaceIntersection(halfspaces),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    /// True when the set is all of ℝⁿ.
    pub fn is_whole_space(&self) -> bool {
        match &self.kind {
            SetKind::Box { lower, upper } => {
                lower.iter().all(|l| l.is_infinite()) && upper.iter().all(|u| u.is_infinite())
            }
            SetKind::Ball { radius, .. } => radius.is_infinite(),
            SetKind::LinearSubspace { basis, .. } | SetKind::AffineSubspace { basis, .. } => {
                basis.ncols() == self.dim
            }
            SetKind::Halfspace(_) | SetKind::Singleton(_) | SetKind::HalfspaceIntersection(_) => {
                false
            }
        }
    }

    pub fn is_singleton(&self) -> bool {
        match &self.kind {
            SetKind::Singleton(_) => true,
            SetKind::Box { lower, upper } => lower == upper,
            SetKind::Ball { radius, .. } => *radius == 0.0,
            SetKind::LinearSubspace { basis, .. } | SetKind::AffineSubspace { basis, .. } => {
                basis.ncols() == 0
            }
            SetKind::Halfspace(_) | SetKind::HalfspaceIntersection(_) => false,
        }
    }

    /// Whether `P_C` is an affine map (subspaces and points).
    pub fn is_affine(&self) -> bool {
        matches!(
            self.kind,
            SetKind::LinearSubspace { .. } | SetKind::AffineSubspace { .. } | SetKind::Singleton(_)
        ) || self.is_whole_space()
    }

    /// `P_C` as `x ↦ Mx + b` when the set is affine.
    pub fn affine_projection(&self) -> Option<(Matrix, Vector)> {
        let n = self.dim;
        if self.is_whole_space() {
            return Some((Matrix::identity(n, n), Vector::zeros(n)));
        }
        match &self.kind {
            SetKind::LinearSubspace { basis, .. } => Some((basis * basis.transpose(), Vector::zeros(n))),
            SetKind::AffineSubspace { basis, anchor } => {
                let p = basis * basis.transpose();
                let b = anchor - &p * anchor;
                Some((p, b))
            }
            SetKind::Singleton(point) => Some((Matrix::zeros(n, n), point.clone())),
            _ => None,
        }
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim, x.len())?;
        Ok(match &self.kind {
            SetKind::Box { lower, upper } => Vector::from_fn(self.dim, |i, _| {
                x[i].clamp(lower[i], upper[i])
            }),
            SetKind::Ball { center, radius } => {
                let d = x - center;
                let nd = d.norm();
                if nd <= *radius {
                    x.clone()
                } else {
                    center + d * (*radius / nd)
                }
            }
            SetKind::Halfspace(h) => h.project(x),
            SetKind::LinearSubspace { spanning: Some(v), .. } => project_onto_span(v, x)?,
            SetKind::LinearSubspace { basis, .. } => basis * (basis.transpose() * x),
            SetKind::AffineSubspace { basis, anchor } => {
                anchor + basis * (basis.transpose() * (x - anchor))
            }
            SetKind::Singleton(p) => p.clone(),
            SetKind::HalfspaceIntersection(hs) => dykstra(hs, x)?,
        })
    }

    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }
}

fn nonzero_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("dimension must be >= 1"));
    }
    Ok(())
}

/// `V (VᵀV)⁻¹ Vᵀ x` for independent columns `V`.
fn project_onto_span(v: &Matrix, x: &Vector) -> Result<Vector> {
    let vtx = v.transpose() * x;
    if v.ncols() == 1 {
        let d = v.column(0);
        return Ok(d * (vtx[0] / d.norm_squared()));
    }
    Ok(v * solve(&(v.transpose() * v), &vtx)?)
}

fn check_orthonormal(basis: &Matrix) -> Result<()> {
    let k = basis.ncols();
    if k > basis.nrows() {
        return Err(invalid("subspace basis has more columns than rows"));
    }
    let gram = basis.transpose() * basis;
    let err = (gram - Matrix::identity(k, k)).amax();
    if err > ORTHONORMAL_TOL {
        return Err(invalid(format!(
            "subspace basis columns are not orthonormal (error {err:e})"
        )));
    }
    Ok(())
}

/// Dykstra's alternating projections onto an intersection of halfspaces,
/// followed by an active-set polish.
fn dykstra(hs: &[Halfspace], z: &Vector) -> Result<Vector> {
    let mut x = z.clone();
    let mut increments = vec![Vector::zeros(z.len()); hs.len()];
    let mut converged = false;
    let mut last_move = f64::INFINITY;
    for _ in 0..DYKSTRA_MAX_SWEEPS {
        let before = x.clone();
        for (h, p) in hs.iter().zip(increments.iter_mut()) {
            let shifted = &x + &*p;
            let y = h.project(&shifted);
            *p = shifted - &y;
            x = y;
        }
        last_move = (&x - before).norm();
        let feasible = hs.iter().all(|h| h.slack(&x) >= -DYKSTRA_TOL);
        if last_move <= DYKSTRA_TOL && feasible {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: DYKSTRA_MAX_SWEEPS,
            residual: last_move,
        });
    }
    Ok(polish(hs, z, x))
}

/// Projects `z` onto the affine hull of the constraints active at the Dykstra
/// point `x`; keeps the result only if it is feasible and close to `x`.
fn polish(hs: &[Halfspace], z: &Vector, x: Vector) -> Vector {
    let active: Vec<&Halfspace> = hs
        .iter()
        .filter(|h| h.slack(&x) / h.normal.norm() <= 1e-8)
        .collect();
    if active.is_empty() {
        return x;
    }
    let n = z.len();
    let rows = Matrix::from_fn(active.len(), n, |r, c| active[r].normal[c]);
    let residual = &rows * z - Vector::from_fn(active.len(), |r, _| active[r].offset);
    let gram = &rows * rows.transpose();
    let multipliers = if active.len() == 1 {
        Vector::from_element(1, residual[0] / gram[(0, 0)])
    } else if let Ok(m) = solve(&gram, &residual) {
        m
    } else if let Ok(pinv) = SVD::new(gram, true, true).pseudo_inverse(1e-12) {
        pinv * residual
    } else {
        return x;
    };
    let candidate = z - rows.transpose() * multipliers;
    let feasible = hs
        .iter()
        .all(|h| h.slack(&candidate) / h.normal.norm() >= -1e-13);
    if feasible && (&candidate - &x).norm() <= 1e-8 {
        candidate
    } else {
        x
    }
}
