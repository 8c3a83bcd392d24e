//! Error type shared by every fallible routine in the crate.

use alloc::string::String;

/// Convenience alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of state construction, linear algebra, and the physical
/// checks layered on top of them.
///
/// Variants carry the measured magnitude that triggered the failure so a
/// caller can report how far out of tolerance the input was, not just that
/// it was.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A Fock-space cutoff too small to represent the requested object.
    #[error("cutoff must be at least {min}, got {got}")]
    InvalidCutoff { min: usize, got: usize },

    /// Matrix dimensions (or mode counts) of the operands do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix required to be Hermitian deviates from its adjoint.
    #[error("matrix is not Hermitian (max deviation {dev:.3e})")]
    NotHermitian { dev: f64 },

    /// A matrix required to be positive semidefinite has a negative
    /// eigenvalue beyond tolerance.
    #[error("matrix is not positive semidefinite (eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    /// A trace or norm required to equal one deviates beyond tolerance.
    #[error("trace deviates from one by {dev:.3e}")]
    BadTrace { dev: f64 },

    /// Truncation leakage at the Fock cutoff exceeds the configured gate.
    #[error("truncation leakage {leakage:.3e} exceeds tolerance {tol:.3e}")]
    Truncation { leakage: f64, tol: f64 },

    /// A constructed operator failed its unitarity self-check.
    #[error("operator is not unitary (max deviation of U\u{2020}U from I: {dev:.3e})")]
    NotUnitary { dev: f64 },

    /// A scalar argument lies outside the domain of the requested function.
    #[error("{what} outside domain: {value}")]
    Domain { what: &'static str, value: f64 },

    /// Entropy requested for a matrix flagged as possibly non-positive
    /// (e.g. the output of a partial transposition).
    #[error("entropy is undefined for a possibly non-positive matrix")]
    EntropyUndefined,

    /// The superfidelity argument G² came out negative, which cannot happen
    /// for a pair of physical states.
    #[error("superfidelity argument is negative ({g2:.3e}); operand is not a physical state")]
    GSquaredNegative { g2: f64 },

    /// Rényi order outside the range where the sandwiched divergence is
    /// implemented.
    #[error("sandwiched Renyi divergence requires order alpha >= 1/2, got {alpha}")]
    UnsupportedOrder { alpha: f64 },

    /// A covariance matrix dips below the Heisenberg limit, so no Gaussian
    /// state can reproduce it.
    #[error("covariance matrix is below the Heisenberg limit (symplectic eigenvalue {nu:.6})")]
    BelowHeisenberg { nu: f64 },

    /// A matrix expected to be symplectic fails S Ω Sᵀ = Ω.
    #[error("matrix is not symplectic (defect {dev:.3e})")]
    NotSymplectic { dev: f64 },

    /// An internal cross-check failed; indicates accumulated numerical error
    /// rather than invalid input.
    #[error("numeric inconsistency in {what} (magnitude {value:.3e})")]
    NumericInconsistency { what: &'static str, value: f64 },

    /// A state specification names an unknown family.
    #[error("unknown state family '{0}'")]
    UnknownFamily(String),

    /// A state specification is missing a parameter or carries an invalid
    /// one.
    #[error("invalid state parameter: {0}")]
    InvalidParam(String),

    /// An iterative routine failed to converge within its iteration budget.
    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
}
