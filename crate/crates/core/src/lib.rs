//! Kernel regularization toolkit.
//!
//! The toolkit covers the whole pipeline of regularized estimation over a
//! reproducing kernel Hilbert space (RKHS):
//!
//! * [`rkhs`] — kernels, kernel sections, finite kernel expansions, and exact
//!   inner products / norms on expansions.
//! * [`functional`] — bounded linear functionals (point evaluation, sampled
//!   convolution, discrete-measure expectation), their representers, and Gram
//!   matrices of representers.
//! * [`regularizer`] — radial nondecreasing profiles `h(‖w‖)` (including
//!   indicator balls for constrained formulations), explicit non-radial
//!   regularizers on ℝⁿ, and sampling-based condition checkers.
//! * [`reduce`] — the reduction of the infinite-dimensional problem to the
//!   coefficient space of the representers, plus solvers for ridge, SVM,
//!   kernel PCA, norm-constrained, and scalar-family problems.
//! * [`oracle`] — brute-force reference minimizers (grid search + multistart
//!   descent) used to validate every production solver at desk scale.
//! * [`theorem`] — numerical probes of the Hilbert-space geometry that makes
//!   the reduction work: rotation paths, sublevel-set shape, span distance of
//!   oracle minimizers, and the λ(γ) trend of scalar families.
//! * [`config`] / [`report`] / [`runner`] — the configuration-driven
//!   experiment runner behind the `kernelreg` CLI.
//!
//! All numerical types are immutable values and all operations are pure
//! functions of (inputs, seed), so everything is safe to share across threads
//! and reruns are reproducible bit for bit.

pub mod config;
pub mod extreal;
pub mod functional;
pub mod oracle;
pub mod reduce;
pub mod regularizer;
pub mod report;
pub mod rkhs;
pub mod runner;
pub mod sampling;
pub mod theorem;

use thiserror::Error;

/// Errors for kernel and solver operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("kernel mismatch: operands live in different RKHSs")]
    KernelMismatch,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("singular system (estimated condition {cond:.3e}); jitter did not help")]
    Singular { cond: f64 },

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("solver failed: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default tolerance for eigenvalue floors of Gram matrices, per matrix row.
///
/// A Gram matrix of dimension `m` is accepted as positive semidefinite when
/// every eigenvalue is ≥ `-TOL_PSD_PER_DIM * m`.
pub const TOL_PSD_PER_DIM: f64 = 1e-8;

/// Relative tolerance for identities that hold exactly in exact arithmetic
/// (reproducing property, Riesz consistency, reduction identity).
pub const TOL_EVAL: f64 = 1e-9;

/// Absolute tolerance for finite comparisons in regularizer condition
/// checkers. Comparisons involving +∞ are exact.
pub const TOL_CHECK: f64 = 1e-9;

/// Eigenvalue floor for a Gram matrix of dimension `m`.
pub fn tol_psd(m: usize) -> f64 {
    TOL_PSD_PER_DIM * m as f64
}
