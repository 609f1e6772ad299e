//! Orthogonal dictionary learning and sparse coding by hierarchical
//! Riemannian pursuit (HRP).
//!
//! Given samples `Y = D*·X*` with an orthogonal dictionary `D*` and sparse
//! codes `X*`, the learner recovers `D*` up to column signs and permutation
//! in two stages:
//!
//! 1. maximize `(1/L) Σ ‖Dᵀyᵢ‖³₃` over 𝕆(N) with the generalized power
//!    method, each step being the polar factor of the gradient;
//! 2. minimize `(1/L) Σ ‖Dᵀyᵢ‖₁` on the affine tangent relaxation
//!    `RᵀD + DᵀR = 2I` around the Stage-One point `R` with projected
//!    subgradient steps of geometrically decaying length, then project back
//!    onto 𝕆(N).
//!
//! Modules:
//! - [`manifold`]: polar factor, tangent projections, sphere helpers.
//! - [`synth`]: Bernoulli-Gaussian codes, Haar orthogonal dictionaries.
//! - [`learner`]: the two-stage solver, its sphere variant, the ℓ4 baseline
//!   and the complete-dictionary pipeline.
//! - [`codes`]: direct and hard-thresholded sparse codes.
//! - [`metrics`]: sign-permutation RMSE, atom error, compression metrics.
//! - [`ingest`]: delimited sensor tables with missing data.
//! - [`experiment`]: Monte-Carlo trial runners shared by the CLI and tests.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codes;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod learner;
pub mod manifold;
pub mod metrics;
pub mod synth;

pub use error::{HrpError, Result};
pub use manifold::{OrthoDict, SquareMatrix, UnitVector};
pub use synth::{DataMatrix, SparseCodeMatrix};
