//! Scalar functionals of states: purity, von Neumann entropy, Uhlmann
//! fidelity, superfidelity, the sandwiched Rényi relative entropy, and the
//! non-Gaussianity measures built on them.
//!
//! Non-Gaussianity is measured against the Gaussian reference state ρ_G
//! carrying the same first and second moments as ρ:
//!
//! * `non_gaussianity`: 𝒩(ρ) = −2 ln F(ρ, ρ_G), the sandwiched Rényi
//!   relative entropy of order 1/2 between ρ and its reference.
//! * `non_gaussianity_g`: 𝒩_g(ρ) = −2 ln G(ρ, ρ_G) with the superfidelity
//!   G ≥ F, a cheaper lower bound 𝒩_g ≤ 𝒩 needing only trace products.
//! * `gaussianity`: g(ρ) = Tr[ρ ρ_G] / Tr[ρ_G²], the overlap with the
//!   reference normalized so that g = 1 for every Gaussian state.
//!
//! Both 𝒩 and 𝒩_g vanish exactly on Gaussian states. The reference is
//! synthesized in a Fock space padded until its own truncation tail is below
//! [`REFERENCE_TAIL`], so the comparison charges ρ only for its physics, not
//! for the reference's clipped tail (a thermal reference renormalized at the
//! input's own cutoff would otherwise inflate 𝒩 of high Fock states by
//! ~1e-5).

use alloc::format;
use alloc::vec::Vec;

use libm::{fabs, log, pow, sqrt};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{check_truncation, DensityMatrix, Modes};
use crate::gaussian::{moments_of, reference_gaussian};
use crate::linalg::{self, CMat, Eigh};
use crate::tol::Tolerances;

/// Tail target for the padded Gaussian reference.
pub const REFERENCE_TAIL: f64 = 1e-9;

/// Padding ceiling for single-mode references; beyond it the loop accepts
/// the best reference available rather than growing without bound.
const PAD_CAP_ONE: usize = 320;

/// Padding ceiling per mode for two-mode references (the matrices are d²×d²).
const PAD_CAP_TWO: usize = 24;

/// Purity deficit below which an argument is treated as rank one inside
/// [`uhlmann_fidelity`]. The shortcut F = √Tr[ρσ] is exact for pure ρ, and
/// at deficit 1e-12 the substitution error is far below the 1e-9 clamp
/// window.
const PURITY_SHORTCUT: f64 = 1e-12;

/// Width of the window in which out-of-range results of exact-arithmetic
/// identities (inner superfidelity roots ≥ 0, 𝒩_g ≥ 0) are attributed to
/// rounding and clamped; larger excursions raise errors instead.
const CLAMP_WINDOW: f64 = 1e-9;

/// Excursion of F outside [0, 1] still attributed to numerics. The spectral
/// route takes square roots of eigenvalues whose absolute error is at
/// machine scale, so near-zero parts of the spectrum contribute a positive
/// bias of order √ε each; for F ≈ 1 the total overshoot reaches ~1e-8.
/// Anything past this window means an operand was not a state.
const FIDELITY_GUARD: f64 = 1e-6;

/// Relative threshold under which an eigenvalue of σ counts as numerically
/// zero when deciding support questions for the Rényi divergence. Kept far
/// below any physical thermal weight so genuine small tails still contribute.
const NULL_CUT: f64 = 1e-14;

/// Tr[ρ²]. Meaningful for any Hermitian unit-trace matrix, including
/// partial transposes.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.mat().trace_product_re(rho.mat())
}

/// −Tr[ρ ln ρ] in nats.
///
/// Refuses matrices flagged as possibly non-positive (`EntropyUndefined`);
/// re-wrap through [`DensityMatrix::new`] after a PSD check to lift the
/// flag. Eigenvalues in [−tol.psd, 0] are treated as zeros; anything lower
/// raises `NotPsd`.
pub fn von_neumann_entropy(rho: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    if rho.maybe_nonpositive() {
        return Err(Error::EntropyUndefined);
    }
    let eig = psd_eigh(rho.mat(), tol)?;
    let mut s = 0.0;
    for &l in &eig.values {
        if l > 0.0 {
            s -= l * log(l);
        }
    }
    Ok(s.max(0.0))
}

/// Uhlmann fidelity F(ρ, σ) = Tr√(√ρ σ √ρ) ∈ [0, 1].
///
/// When either argument is within [`PURITY_SHORTCUT`] of unit purity the
/// rank-one identity F = √Tr[ρσ] is used instead of the spectral route.
/// Results outside [0, 1] by more than [`FIDELITY_GUARD`] raise
/// `NumericInconsistency`; smaller excursions clamp.
pub fn uhlmann_fidelity(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: &Tolerances,
) -> Result<f64> {
    check_same_shape(rho, sigma)?;
    ensure_state(rho, tol)?;
    ensure_state(sigma, tol)?;
    let f = if purity(rho) >= 1.0 - PURITY_SHORTCUT || purity(sigma) >= 1.0 - PURITY_SHORTCUT {
        sqrt(rho.mat().trace_product_re(sigma.mat()).max(0.0))
    } else {
        let root = linalg::matrix_sqrt_psd(rho.mat(), tol.psd)?;
        let inner = root.mul(sigma.mat()).mul(&root).hermitized();
        let eig = psd_eigh(&inner, tol)?;
        let mut f = 0.0;
        for &l in &eig.values {
            if l > 0.0 {
                f += sqrt(l);
            }
        }
        f
    };
    if !(-FIDELITY_GUARD..=1.0 + FIDELITY_GUARD).contains(&f) {
        return Err(Error::NumericInconsistency {
            what: "fidelity out of [0, 1]",
            value: f,
        });
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Superfidelity G(ρ, σ) = √(Tr[ρσ] + √(1 − Tr ρ²)·√(1 − Tr σ²)).
///
/// G ≥ F for every pair of states, with equality when either is pure. The
/// purity deficits are clamped to zero when within [`CLAMP_WINDOW`] below
/// it; a deficit (or the whole G² argument) more negative than that means an
/// operand is not a physical state and raises `GSquaredNegative`.
///
/// Unlike the spectral measures, G is a polynomial in its operands, so
/// inputs flagged `maybe_nonpositive` are accepted without a spectral
/// check: the entanglement pipeline feeds reduced partial transposes here
/// on purpose, and `GSquaredNegative` is then a certificate that the
/// operand was not a state.
pub fn superfidelity(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    _tol: &Tolerances,
) -> Result<f64> {
    check_same_shape(rho, sigma)?;
    let overlap = rho.mat().trace_product_re(sigma.mat());
    let dr = purity_deficit(rho)?;
    let ds = purity_deficit(sigma)?;
    let g2 = overlap + sqrt(dr) * sqrt(ds);
    if g2 < 0.0 {
        return Err(Error::GSquaredNegative { g2 });
    }
    Ok(sqrt(g2))
}

fn purity_deficit(rho: &DensityMatrix) -> Result<f64> {
    let d = 1.0 - purity(rho);
    if d < -CLAMP_WINDOW {
        return Err(Error::GSquaredNegative { g2: d });
    }
    // Roundoff-scale deficits of numerically pure states snap to zero in
    // both directions: √ at zero would otherwise amplify ~1e-14 noise to
    // ~1e-7 and break the pure-state identity G = F.
    if d < PURITY_SHORTCUT {
        return Ok(0.0);
    }
    Ok(d)
}

/// Sandwiched Rényi relative entropy
/// S_α(ρ‖σ) = ln Tr[(σ^((1−α)/2α) ρ σ^((1−α)/2α))^α] / (α − 1) in nats.
///
/// Implemented for α ≥ 1/2 (`UnsupportedOrder` below). The α → 1 limit is
/// the quantum relative entropy Tr[ρ(ln ρ − ln σ)], taken when
/// |α − 1| < 1e-12. Support handling:
///
/// * α ≥ 1: if ρ places more than tol.psd weight on σ's numerical null
///   space the divergence is +∞.
/// * 1/2 ≤ α < 1: the divergence stays finite across support violations;
///   the trace formula evaluates it with σ's null directions excluded,
///   which is its continuous extension (for α = 1/2 it reproduces
///   −2 ln F(ρ, σ) exactly, F being insensitive to σ's null space).
pub fn renyi_relative_entropy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: f64,
    tol: &Tolerances,
) -> Result<f64> {
    if !(alpha >= 0.5) || !alpha.is_finite() {
        return Err(Error::UnsupportedOrder { alpha });
    }
    check_same_shape(rho, sigma)?;
    ensure_state(rho, tol)?;
    ensure_state(sigma, tol)?;
    if fabs(alpha - 1.0) < 1e-12 {
        return relative_entropy_limit(rho, sigma, tol);
    }
    let es = psd_eigh(sigma.mat(), tol)?;
    let cut = null_cut(&es);
    if alpha > 1.0 && null_weight(rho, &es, cut) > tol.psd {
        return Ok(f64::INFINITY);
    }
    let beta = (1.0 - alpha) / (2.0 * alpha);
    let half = es.apply_fn(|l| if l > cut { pow(l, beta) } else { 0.0 });
    let sandwich = half.mul(rho.mat()).mul(&half).hermitized();
    let em = psd_eigh(&sandwich, tol)?;
    let mut tr = 0.0;
    for &l in &em.values {
        if l > 0.0 {
            tr += pow(l, alpha);
        }
    }
    if tr < 1e-300 {
        return Ok(f64::INFINITY);
    }
    finish_divergence(log(tr) / (alpha - 1.0))
}

/// α → 1 limit: Tr[ρ ln ρ] − Σ_j ⟨v_j|ρ|v_j⟩ ln μ_j over σ = Σ μ_j |v_j⟩⟨v_j|.
fn relative_entropy_limit(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: &Tolerances,
) -> Result<f64> {
    let er = psd_eigh(rho.mat(), tol)?;
    let mut rho_log_rho = 0.0;
    for &l in &er.values {
        if l > 0.0 {
            rho_log_rho += l * log(l);
        }
    }
    let es = psd_eigh(sigma.mat(), tol)?;
    let cut = null_cut(&es);
    let n = es.values.len();
    let pv = rho.mat().mul(&es.vectors);
    let mut cross = 0.0;
    let mut lost = 0.0;
    for j in 0..n {
        let mut w = 0.0;
        for i in 0..n {
            w += (es.vectors[(i, j)].conj() * pv[(i, j)]).re;
        }
        let w = w.max(0.0);
        if es.values[j] > cut {
            cross += w * log(es.values[j]);
        } else {
            lost += w;
        }
    }
    if lost > tol.psd {
        return Ok(f64::INFINITY);
    }
    finish_divergence(rho_log_rho - cross)
}

/// Total ρ-weight on σ-eigenvectors with eigenvalue at or below `cut`.
fn null_weight(rho: &DensityMatrix, es: &Eigh, cut: f64) -> f64 {
    let n = es.values.len();
    let mut lost = 0.0;
    for j in 0..n {
        if es.values[j] > cut {
            continue;
        }
        let col: Vec<Complex64> = (0..n).map(|i| es.vectors[(i, j)]).collect();
        let rv = rho.mat().matvec(&col);
        let mut w = 0.0;
        for i in 0..n {
            w += (col[i].conj() * rv[i]).re;
        }
        lost += w.max(0.0);
    }
    lost
}

fn null_cut(es: &Eigh) -> f64 {
    let top = es.values.iter().fold(0.0f64, |m, &v| m.max(fabs(v)));
    NULL_CUT * top.max(f64::MIN_POSITIVE)
}

/// Divergences of unit-trace states are nonnegative; tolerate only
/// rounding-scale undershoot.
fn finish_divergence(s: f64) -> Result<f64> {
    if s < -1e-6 {
        return Err(Error::NumericInconsistency {
            what: "negative divergence",
            value: s,
        });
    }
    Ok(s.max(0.0))
}

/// 𝒩(ρ) = −2 ln F(ρ, ρ_G) against the padded Gaussian reference.
pub fn non_gaussianity(rho: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    let (state, reference) = reference_pair(rho, tol)?;
    let f = uhlmann_fidelity(&state, &reference, tol)?;
    Ok(ng_of_fidelity(f))
}

/// 𝒩_g(ρ) = −2 ln G(ρ, ρ_G); a lower bound on 𝒩 from trace products alone.
pub fn non_gaussianity_g(rho: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    let (state, reference) = reference_pair(rho, tol)?;
    let g = superfidelity(&state, &reference, tol)?;
    Ok(ng_of_superfidelity(g))
}

/// g(ρ) = Tr[ρ ρ_G] / Tr[ρ_G²]; equals 1 exactly when ρ is Gaussian.
pub fn gaussianity(rho: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    let (state, reference) = reference_pair(rho, tol)?;
    Ok(gaussianity_from(&state, &reference))
}

fn gaussianity_from(state: &DensityMatrix, reference: &DensityMatrix) -> f64 {
    state.mat().trace_product_re(reference.mat()) / purity(reference)
}

fn ng_of_fidelity(f: f64) -> f64 {
    if f <= 0.0 {
        f64::INFINITY
    } else {
        // F is already clamped into [0, 1], so the result is nonnegative.
        -2.0 * log(f)
    }
}

fn ng_of_superfidelity(g: f64) -> f64 {
    if g <= 0.0 {
        return f64::INFINITY;
    }
    let v = -2.0 * log(g);
    // G is not clamped above 1; absorb rounding-scale negatives only.
    if v > -CLAMP_WINDOW && v < 0.0 {
        0.0
    } else {
        v
    }
}

/// The scalar summary used by reports and the entanglement pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSet {
    /// Von Neumann entropy S(ρ) in nats.
    pub entropy: f64,
    /// Tr[ρ²].
    pub purity: f64,
    /// 𝒩(ρ) = −2 ln F(ρ, ρ_G).
    pub ng_fidelity: f64,
    /// 𝒩_g(ρ) = −2 ln G(ρ, ρ_G) ≤ ng_fidelity.
    pub ng_super: f64,
    /// g(ρ) = Tr[ρ ρ_G]/Tr[ρ_G²].
    pub gaussianity: f64,
}

/// Computes all [`MeasureSet`] entries, building the Gaussian reference once.
pub fn measure_set(rho: &DensityMatrix, tol: &Tolerances) -> Result<MeasureSet> {
    let entropy = von_neumann_entropy(rho, tol)?;
    let (state, reference) = reference_pair(rho, tol)?;
    let f = uhlmann_fidelity(&state, &reference, tol)?;
    let g = superfidelity(&state, &reference, tol)?;
    Ok(MeasureSet {
        entropy,
        purity: purity(rho),
        ng_fidelity: ng_of_fidelity(f),
        ng_super: ng_of_superfidelity(g),
        gaussianity: gaussianity_from(&state, &reference),
    })
}

/// Builds the Gaussian reference of `rho` in a Fock space large enough that
/// the reference's own tail is at most [`REFERENCE_TAIL`], and embeds `rho`
/// alongside it. Growth stops at [`PAD_CAP_ONE`]/[`PAD_CAP_TWO`] per mode.
pub(crate) fn reference_pair(
    rho: &DensityMatrix,
    tol: &Tolerances,
) -> Result<(DensityMatrix, DensityMatrix)> {
    let m = moments_of(rho, tol)?;
    let base = rho.dim_per_mode();
    let cap = match rho.modes() {
        Modes::One => PAD_CAP_ONE.max(base),
        Modes::Two => PAD_CAP_TWO.max(base),
    };
    // The thermal factors' own truncation gate is disabled; the loop judges
    // the finished reference by its measured tail instead.
    let loose = tol.with_trunc(1.0);
    let mut d = base;
    loop {
        let reference = reference_gaussian(&m, d, &loose)?;
        let tail = check_truncation(&reference).leakage();
        if tail <= REFERENCE_TAIL || d >= cap {
            return Ok((rho.embed(d)?, reference));
        }
        d = (d + (d + 1) / 2).max(d + 4).min(cap);
    }
}

fn ensure_state(rho: &DensityMatrix, tol: &Tolerances) -> Result<()> {
    // Flagged matrices (partial transposes) are admitted only after an
    // explicit spectral check shows they happen to be genuine states.
    if rho.maybe_nonpositive() {
        rho.check_psd(tol)?;
    }
    Ok(())
}

fn check_same_shape(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.modes() != b.modes() || a.dim_per_mode() != b.dim_per_mode() {
        return Err(Error::DimensionMismatch(format!(
            "states live in different spaces: {:?} at cutoff {} vs {:?} at cutoff {}",
            a.modes(),
            a.dim_per_mode(),
            b.modes(),
            b.dim_per_mode()
        )));
    }
    Ok(())
}

/// Eigendecomposition gated on positive semidefiniteness: eigenvalues below
/// −tol.psd (relative to the largest magnitude) raise `NotPsd`, and small
/// negatives are clamped to zero in the returned values.
fn psd_eigh(mat: &CMat, tol: &Tolerances) -> Result<Eigh> {
    let mut eig = linalg::eigh(mat)?;
    let scale = eig
        .values
        .iter()
        .fold(0.0f64, |acc, &x| acc.max(fabs(x)))
        .max(1.0);
    for v in eig.values.iter_mut() {
        if *v < 0.0 {
            if *v < -tol.psd * scale {
                return Err(Error::NotPsd { min_eig: *v });
            }
            *v = 0.0;
        }
    }
    Ok(eig)
}
