//! Cut-and-project analysis of one-dimensional substitution point sets.
//!
//! Given a primitive symbolic substitution with an algebraic inflation
//! factor, this crate derives exact tile lengths and digit sets, generates
//! the fixed-point control points, builds the associated cut-and-project
//! scheme with Euclidean internal space, searches for an algebraic
//! coincidence, computes the per-letter windows as attractors of the dual
//! iterated function system, and condenses everything into a verdict with
//! finite-radius evidence.
//!
//! Approximate numerics are generic over the [`Scalar`] floating type
//! (`f32` or `f64`); exact data lives on arbitrary-precision integers.
//! The `*64` aliases below are the instantiations the command-line front
//! end uses.

pub mod algebra;
pub mod coincidence;
pub mod cps;
pub mod pipeline;
pub mod pointset;
pub mod render;
pub mod scalar;
pub mod substitution;
pub mod window;

pub use scalar::Scalar;

pub use algebra::{AlgebraicElement, FieldContext, FieldRef, IntPolynomial};
pub use pipeline::{run_pipeline, PipelineParams, Stage, Verdict, VerdictReport};

/// Default f64 instantiations of the scalar-generic types.
pub type EmbeddingData64 = algebra::EmbeddingData<f64>;
pub type SubMatrix64 = substitution::SubMatrix<f64>;
pub type CpsContext64 = cps::CpsContext<f64>;
pub type DualIfs64 = window::DualIfs<f64>;
pub type WindowApprox64 = window::WindowApprox<f64>;
pub type PipelineRun64 = pipeline::PipelineRun<f64>;
pub type Artifacts64 = pipeline::Artifacts<f64>;

/// Single-precision counterparts, for quick exploratory runs.
pub type EmbeddingData32 = algebra::EmbeddingData<f32>;
pub type CpsContext32 = cps::CpsContext<f32>;
pub type WindowApprox32 = window::WindowApprox<f32>;
