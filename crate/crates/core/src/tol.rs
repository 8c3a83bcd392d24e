//! Numerical tolerances shared across the crate.
//!
//! Every validation the crate performs — Hermiticity of a density matrix,
//! positivity of its spectrum, unit trace, unitarity of a constructed
//! operator, truncation leakage at the cutoff — compares against one of the
//! thresholds collected here, so a caller can loosen or tighten them in one
//! place instead of threading bare floats through every call site.

/// Validation thresholds used by constructors and checks.
///
/// The defaults suit double precision at the dimensions this crate is meant
/// for (cutoffs of a few hundred on one mode, a few tens per mode on two).
/// Routines that accept a `Tolerances` reference document which fields they
/// consult.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Maximum entrywise deviation |M − M†| tolerated before a matrix is
    /// rejected as non-Hermitian.
    pub herm: f64,
    /// Most negative eigenvalue tolerated in a nominally positive
    /// semidefinite matrix; eigenvalues in `[-psd, 0]` are clamped to zero.
    pub psd: f64,
    /// Maximum deviation of a trace (or norm) from one.
    pub norm: f64,
    /// Maximum entrywise deviation of U†U from the identity for constructed
    /// unitaries.
    pub unitary: f64,
    /// Maximum truncation leakage (trace deficit or population near the
    /// cutoff) before a state is rejected as under-resolved.
    pub trunc: f64,
    /// Slack used when comparing bound values against measured quantities,
    /// e.g. when deciding whether an inequality margin is genuinely negative.
    pub bound: f64,
}

impl Tolerances {
    /// The default thresholds as a `const` (usable in statics).
    pub const DEFAULT: Self = Self {
        herm: 1e-10,
        psd: 1e-8,
        norm: 1e-8,
        unitary: 1e-6,
        trunc: 1e-10,
        bound: 1e-6,
    };

    /// Returns a copy with the truncation threshold replaced.
    ///
    /// Sweeps over strongly squeezed two-mode states intentionally run with
    /// a looser truncation gate than the default; this keeps that one-field
    /// override readable at the call site.
    #[must_use]
    pub fn with_trunc(mut self, trunc: f64) -> Self {
        self.trunc = trunc;
        self
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
