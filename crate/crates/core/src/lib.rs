//! Solvers for l1-regularized generalized linear models (Lasso, sparse
//! logistic regression, multitask Lasso) built around duality-gap
//! certificates.
//!
//! The distinguishing piece is dual extrapolation: the solvers keep a short
//! history of residual-like vectors, combine them through a small normalized
//! least-squares system and rescale the result into the dual feasible set.
//! The tighter certificates drive the stopping criterion, Gap Safe feature
//! screening ([`solvers::gap_safe_screen`]) and the working-set outer loop
//! ([`celer::celer_solve`]). A prox-Newton inner solver for logistic
//! regression lives in [`proxnewton`].
//!
//! The crate is `no_std` (with `alloc`); file formats, timing and the
//! benchmark CLI live in the companion `pathbench` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod celer;
pub mod datafit;
pub mod dataset;
pub mod extrapolation;
mod float;
pub mod matrix;
pub mod proxnewton;
pub mod solvers;

pub use datafit::{DualCertificate, ModelKind, Provenance};
pub use dataset::{Dataset, Targets};
pub use matrix::DesignMatrix;
pub use solvers::{Algorithm, SolveReport, SolverParams};
