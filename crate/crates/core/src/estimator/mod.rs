//! Sampled bounds, falsification, contraction inversion and bi-Lipschitz checks.

pub mod bilipschitz;
pub mod estimate;
pub mod falsify;
pub mod invert;
pub mod sampling;

pub use bilipschitz::{bilipschitz_check, BiLipschitzReport};
pub use estimate::{
    estimate_modulus, estimate_on_pairs, estimate_value, pair_ratio, refine, Complement,
    Direction, Quantity, ValueEstimate, VectorMap,
};
pub use falsify::{averaged_excess, falsify_averaged, Violation};
pub use invert::{invert_by_contraction, Inversion};
