use thiserror::Error;

/// Errors raised while building or analysing operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not nonexpansive (spectral norm {norm})")]
    NotNonexpansive { norm: f64 },

    #[error("iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("no closed-form proximal map for {0}")]
    UnsupportedFunction(String),

    #[error("operator is set-valued: {0}")]
    SetValued(String),

    #[error("subspace pair is degenerate (U = V)")]
    DegeneratePair,

    #[error("every sampled pair was degenerate")]
    AllPairsDegenerate,

    #[error("operator is not normally nonexpansive (modulus bound {k})")]
    NotNormallyNonexpansive { k: f64 },

    #[error("inversion exceeded {iterations} iterations (residual {residual:e})")]
    MaxIterExceeded { iterations: usize, residual: f64 },

    #[error("bi-Lipschitz bound violated: ratio {ratio} outside [{lower}, 1]")]
    ViolationFound {
        x: Vec<f64>,
        y: Vec<f64>,
        ratio: f64,
        lower: f64,
    },

    #[error("supplied fixed-point set does not match the operator: {0}")]
    FixSetMismatch(String),
}

impl Error {
    /// True for errors caused by malformed input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NonFinite(_)
                | Error::InvalidParameter(_)
                | Error::NotNonexpansive { .. }
                | Error::UnsupportedFunction(_)
                | Error::DegeneratePair
                | Error::FixSetMismatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
