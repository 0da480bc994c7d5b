//! Convex sets, convex functions, monotone operators and nonexpansive operator trees.

pub mod functions;
pub mod monotone;
pub mod operator;
pub mod sets;

pub use functions::{ConvexFunction, FunctionKind};
pub use monotone::{MonotoneKind, MonotoneOperator};
pub use operator::{AffinePiece, Operator, OperatorKind};
pub use sets::{ConvexSet, Halfspace, SetKind};
