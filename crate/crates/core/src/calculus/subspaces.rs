use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{null_space, orthonormal_span, Matrix};
use crate::operators::sets::{ConvexSet, SetKind};

const CUTOFF: f64 = 1e-10;

/// Two linear subspaces with the cosine of their Friedrichs angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspacePair {
    pub u: Matrix,
    pub v: Matrix,
    pub intersection_dim: usize,
    pub friedrichs_cosine: f64,
}

impl SubspacePair {
    /// Builds the pair from two `LinearSubspace` sets.
    pub fn new(u: &ConvexSet, v: &ConvexSet) -> Result<Self> {
        check_dim(u.dim(), v.dim())?;
        let basis = |s: &ConvexSet| match s.kind() {
            SetKind::LinearSubspace { basis, .. } => Ok(basis.clone()),
            _ => Err(invalid("subspace pair needs linear subspaces")),
        };
        Self::from_bases(basis(u)?, basis(v)?)
    }

    /// Builds the pair from orthonormal basis matrices (columns).
    pub fn from_bases(u: Matrix, v: Matrix) -> Result<Self> {
        check_dim(u.nrows(), v.nrows())?;
        let n = u.nrows();
        let (p, q) = (u.ncols(), v.ncols());
        let intersection = if p == 0 || q == 0 {
            Matrix::zeros(n, 0)
        } else {
            // (a, b) with Ua = Vb parametrize U ∩ V.
            let mut stacked = Matrix::zeros(n, p + q);
            stacked.view_mut((0, 0), (n, p)).copy_from(&u);
            stacked.view_mut((0, p), (n, q)).copy_from(&(-&v));
            let ns = null_space(&stacked, CUTOFF);
            orthonormal_span(&(&u * ns.rows(0, p)), CUTOFF)
        };
        let deflate = |b: &Matrix| {
            let residual = b - &intersection * (intersection.transpose() * b);
            orthonormal_span(&residual, CUTOFF)
        };
        let (ur, vr) = (deflate(&u), deflate(&v));
        let friedrichs_cosine = if ur.ncols() == 0 || vr.ncols() == 0 {
            0.0
        } else {
            let gram = ur.transpose() * &vr;
            gram.singular_values().max().clamp(0.0, 1.0)
        };
        Ok(Self {
            intersection_dim: intersection.ncols(),
            u,
            v,
            friedrichs_cosine,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.intersection_dim == self.u.ncols() && self.intersection_dim == self.v.ncols()
    }
}

/// `(1 + c_F)/(2 + c_F)`, the modulus of `P_V P_U` for distinct subspaces.
pub fn two_subspace_modulus(pair: &SubspacePair) -> Result<f64> {
    if pair.is_degenerate() {
        return Err(Error::DegeneratePair);
    }
    let c = pair.friedrichs_cosine;
    Ok((1.0 + c) / (2.0 + c))
}
