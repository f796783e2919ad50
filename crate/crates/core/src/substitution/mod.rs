//! Parsing and validation of symbolic substitutions: substitution matrix,
//! exact interval lengths, digit sets and the tile equation.

mod digits;
mod lengths;
mod matrix;
mod spec;

pub use digits::{derive_digit_sets, digit_set_is_collision_free, iterate_digit_sets, validate_tile_equation, DigitSets};
pub use lengths::{derive_lengths, parse_beta_expr};
pub use matrix::{build_matrix, check_primitive, derive_min_poly, SubMatrix};
pub use spec::{parse_spec, SpecParams, SubstitutionSpec};

use crate::algebra::AlgebraError;

#[derive(Debug, thiserror::Error)]
pub enum SubstitutionError {
    #[error("spec schema error at {location}: {message}")]
    Schema { location: String, message: String },
    #[error("substitution matrix is not primitive (no power up to {bound} is positive)")]
    NotPrimitive { bound: usize },
    #[error("no exact Perron eigenvector over Q(beta): {reason}")]
    NoExactEigenvector { reason: String },
    #[error("length override rejected: {reason}")]
    LengthOverride { reason: String },
    #[error("length expression error: {0}")]
    LengthExpr(String),
    #[error("tile equation fails for letter '{letter}': {kind} at position {position}")]
    GapOrOverlap {
        letter: char,
        kind: String,
        position: f64,
    },
    #[error("digit-set iteration exceeds the size cap of {cap} elements")]
    SizeLimit { cap: usize },
    #[error("minimal polynomial override rejected: {reason}")]
    MinPolyOverride { reason: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
