//! Spectral-window eigensolver for real symmetric sparse matrices.
//!
//! The solver computes all eigenpairs inside a target interval
//! `[lambda_min, lambda_max]` in two phases: a randomized warmstart
//! (Gaussian sketch plus power iteration on a shifted/scaled operator)
//! followed by contour-integration refinement (FEAST iterations with a
//! rational filter built from Gauss-Legendre quadrature on a circle
//! enclosing the interval). The aggressive configurations reduce the
//! quadrature order and cap the refinement count, relying on the
//! warmstart for the dominant spectral information.
//!
//! Supporting machinery:
//! - [`sparse`]: CSR storage, sparse products, Matrix Market I/O.
//! - [`solver`]: direct and iterative solvers for the shifted systems
//!   `(z I - A) X = B` with complex shifts.
//! - [`contour`]: quadrature contours and the induced rational filter.
//! - [`warmstart`]: randomized range finder, closed-form residual bound,
//!   and power-iteration-count selection.
//! - [`feast`]: the refinement engine and its per-iteration diagnostics.
//! - [`analysis`]: standalone evaluators for the error recursion, the
//!   Davis-Kahan bound, and the speedup model.
//! - [`problems`]: benchmark problem generators (random geometric graph
//!   Laplacians, synthetic diagonal spectra).
//! - [`oracle`]: a self-contained dense symmetric eigensolver used as
//!   ground truth in tests and benchmarks.

pub mod analysis;
pub mod contour;
pub mod dense;
pub mod error;
pub mod feast;
pub mod oracle;
pub mod problems;
pub mod solver;
pub mod sparse;
pub mod warmstart;

pub use dense::DenseMatrix;
pub use error::Error;
pub use sparse::SymmetricSparseMatrix;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
