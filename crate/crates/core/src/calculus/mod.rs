//! Exact moduli and certified intervals derived from the structure of an operator.

pub mod bound;
pub mod identities;
pub mod matrix;
pub mod rules;
pub mod scalar;
pub mod subspaces;

pub use bound::{ogura_yamada, ModulusBound, Rule, TraceStep};
pub use identities::{
    standard_suites, verify_identities, IdentityReport, IdentitySuite, ModulusComparison,
};
pub use matrix::matrix_modulus;
pub use rules::exact_modulus;
pub use scalar::{scalar_modulus, scalar_modulus_from_pieces};
pub use subspaces::{two_subspace_modulus, SubspacePair};
