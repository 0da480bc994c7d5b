use crate::error::{invalid, Error, Result};
use crate::operators::operator::{AffinePiece, Operator, OperatorKind};

/// `(1 − min slope)/2` for a continuous piecewise-affine nonexpansive map on ℝ.
pub fn scalar_modulus(op: &Operator) -> Result<f64> {
    match op.kind() {
        OperatorKind::ScalarPiecewise { pieces, .. } => scalar_modulus_from_pieces(pieces),
        _ => Err(invalid(format!("scalar modulus needs a piecewise map, got {}", op.name()))),
    }
}

pub fn scalar_modulus_from_pieces(pieces: &[AffinePiece]) -> Result<f64> {
    if pieces.is_empty() {
        return Err(invalid("piecewise map has no pieces"));
    }
    let mut min_slope = f64::INFINITY;
    for p in pieces {
        if !(-1.0..=1.0).contains(&p.slope) {
            return Err(Error::NotNonexpansive { norm: p.slope.abs() });
        }
        min_slope = min_slope.min(p.slope);
    }
    Ok((1.0 - min_slope) / 2.0)
}
