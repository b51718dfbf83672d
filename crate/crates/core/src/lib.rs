//! Matrix-valued model spaces `K_Θ` for rational inner functions and the
//! asymmetric truncated Toeplitz operators acting between them.
//!
//! Functions live on a grid of roots of unity; model spaces carry an
//! orthonormal basis so that every operator becomes a dense complex
//! matrix. On top of that the crate provides compressed shifts, defect
//! operators, the `τ` and Crofoot unitaries, and decision procedures for
//! membership in `MT(Θ₁, Θ₂)` with symbol recovery.

pub mod characterize;
pub mod config;
pub mod error;
pub mod linalg;
pub mod matfun;
pub mod modelspace;
pub mod ops;
pub mod random;
#[cfg(test)]
mod testutil;

pub use config::GlobalConfig;
pub use error::{Error, Result};
