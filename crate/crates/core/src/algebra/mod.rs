//! Exact arithmetic in Q(beta) and its numeric Galois embeddings.

mod field;
mod poly;
mod roots;

pub use field::{field_from_min_poly, inverse_of_beta, AlgebraicElement, FieldContext, FieldRef};
pub use poly::IntPolynomial;
pub use roots::{find_roots, galois_embed, pisot_family_check, EmbeddingData, PisotVerdict, RootKind};

#[derive(Debug, thiserror::Error)]
pub enum AlgebraError {
    #[error("polynomial is not monic: {poly}")]
    NonMonic { poly: String },
    #[error("polynomial is not squarefree: {poly}")]
    NotSquarefree { poly: String },
    #[error("zero polynomial has no roots")]
    ZeroPolynomial,
    #[error("elements belong to different field contexts")]
    ContextMismatch,
    #[error("expansion is not unimodular (constant term {constant_term}), its inverse leaves Z[beta]")]
    NotUnimodular { constant_term: String },
    #[error("root iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("no real root exceeds 1; not an inflation factor")]
    NoExpandingRoot,
    #[error("element is not invertible in this context")]
    NotInvertible,
    #[error("Pisot test inconclusive: a conjugate has modulus {modulus} within tolerance of 1")]
    Inconclusive { modulus: f64 },
    #[error("factorization supports degree <= 10, got {degree}")]
    FactorDegreeLimit { degree: usize },
    #[error("factorization candidate budget exceeded")]
    FactorBudget,
}
