//! Calculus and numerical verification of averagedness for nonexpansive operators on ℝⁿ.

pub mod calculus;
pub mod catalog;
pub mod dynamics;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod operators;

/// Version of this library, echoed in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use calculus::{exact_modulus, matrix_modulus, scalar_modulus, two_subspace_modulus, ModulusBound, Rule};
pub use dynamics::{classify_limit, limiting_apply, orbit, Orbit, Verdict};
pub use error::{Error, Result};
pub use estimator::{estimate_modulus, estimate_value, Quantity, ValueEstimate};
pub use linalg::{Matrix, Vector};
pub use operators::{
    AffinePiece, ConvexFunction, ConvexSet, FunctionKind, Halfspace, MonotoneKind,
    MonotoneOperator, Operator, OperatorKind, SetKind,
};
