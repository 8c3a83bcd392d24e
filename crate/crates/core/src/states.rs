//! Constructors for the state families used in the examples and figures:
//! Fock, coherent and thermal basics, squeezed thermals, even/odd cat
//! states, photon-added coherent states, and the two-mode-squeezed coupled
//! cat–thermal family driving the entanglement sweeps.
//!
//! Every constructor gates its output with the truncation check, so a state
//! that does not fit at the requested cutoff is an error rather than a
//! silently clipped approximation.

use alloc::string::String;
use alloc::vec::Vec;

use libm::{cosh, exp, sinh, sqrt};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    check_truncation, check_truncation_vec, squeeze, thermal_state, two_mode_squeeze_blocks,
    DensityMatrix, FockVector, Modes,
};
use crate::linalg::CMat;
use crate::tol::Tolerances;

/// |0⟩ at cutoff d.
pub fn vacuum(d: usize) -> Result<FockVector> {
    number_state(0, d)
}

/// |n⟩ at cutoff d.
pub fn number_state(n: usize, d: usize) -> Result<FockVector> {
    if n >= d {
        return Err(Error::InvalidCutoff { min: n + 1, got: d });
    }
    let mut amps = alloc::vec![Complex64::new(0.0, 0.0); d.max(2)];
    amps[n] = Complex64::new(1.0, 0.0);
    FockVector::new(amps, &Tolerances::DEFAULT)
}

/// Coherent state |α⟩, amplitudes e^{−|α|²/2} αⁿ/√n!.
pub fn coherent(alpha: Complex64, d: usize, tol: &Tolerances) -> Result<FockVector> {
    let v = FockVector::renormalized(coherent_amps(alpha, d.max(2)))?;
    check_truncation_vec(&v).check(tol)?;
    Ok(v)
}

/// Exact (un-renormalized) coherent amplitudes; their squared norm is
/// 1 − (mass beyond the cutoff), so the renormalizing constructors recover
/// the true truncation deficit.
fn coherent_amps(alpha: Complex64, d: usize) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(d);
    let mut c = Complex64::new(exp(-alpha.norm_sqr() / 2.0), 0.0);
    for n in 0..d {
        amps.push(c);
        c = c * alpha / sqrt((n + 1) as f64);
    }
    amps
}

/// Squeezed thermal state S(ξ) τ(n̄) S(ξ)†.
pub fn squeezed_thermal(
    xi: Complex64,
    nbar: f64,
    d: usize,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    // The thermal factor is built under a disabled gate: squeezing spreads
    // the distribution, so only the final state's tail is meaningful.
    let tau = thermal_state(nbar, d, &tol.with_trunc(1.0))?;
    let rho = if xi.norm_sqr() > 0.0 {
        squeeze(xi, d)?.conjugate_state(&tau)?
    } else {
        tau
    };
    check_truncation(&rho).check(tol)?;
    Ok(rho)
}

/// Even cat state (|α⟩ + |−α⟩)/√(2(1 + e^{−2|α|²})): the even-photon half
/// of |α⟩, reducing to vacuum as α → 0.
pub fn even_cat(alpha: Complex64, d: usize, tol: &Tolerances) -> Result<FockVector> {
    cat(alpha, d, tol, 0)
}

/// Odd cat state (|α⟩ − |−α⟩)/√(2(1 − e^{−2|α|²})): the odd-photon half of
/// |α⟩, reducing to |1⟩ as α → 0 (the limit is built in; no special case).
pub fn odd_cat(alpha: Complex64, d: usize, tol: &Tolerances) -> Result<FockVector> {
    cat(alpha, d, tol, 1)
}

/// Shared cat ladder: amplitudes (α²)ᵏ/√((2k+p)! · S) on rungs 2k+p, with
/// S = cosh|α|² (even) or sinh|α|²/|α|² (odd). The global phase αᵖ/|α|ᵖ is
/// dropped — physically irrelevant, and dropping it makes the α → 0 limit
/// exact: the k = 0 rung survives alone, leaving |0⟩ (even) or |1⟩ (odd).
/// The ladder's squared norm is 1 − (mass beyond the cutoff), so the
/// recorded deficit is the true truncation loss.
fn cat(alpha: Complex64, d: usize, tol: &Tolerances, parity: usize) -> Result<FockVector> {
    let x = alpha.norm_sqr();
    let s = if parity == 0 {
        cosh(x)
    } else if x < 1e-8 {
        1.0 + x * x / 6.0
    } else {
        sinh(x) / x
    };
    let a2 = alpha * alpha;
    let mut amps = alloc::vec![Complex64::new(0.0, 0.0); d.max(2)];
    let mut c = Complex64::new(1.0 / sqrt(s), 0.0);
    let mut n = parity;
    while n < amps.len() {
        amps[n] = c;
        if n + 2 < amps.len() {
            c = c * a2 / sqrt(((n + 1) * (n + 2)) as f64);
        }
        n += 2;
    }
    let v = FockVector::renormalized(amps)?;
    check_truncation_vec(&v).check(tol)?;
    Ok(v)
}

/// Photon-added coherent state a†|α⟩/√(1 + |α|²), reducing to |1⟩ at α = 0.
pub fn pacs(alpha: Complex64, d: usize, tol: &Tolerances) -> Result<FockVector> {
    let dim = d.max(2);
    let base = coherent_amps(alpha, dim);
    let scale = sqrt(1.0 + alpha.norm_sqr());
    let mut amps = alloc::vec![Complex64::new(0.0, 0.0); dim];
    for n in 1..dim {
        amps[n] = base[n - 1] * sqrt(n as f64) / scale;
    }
    let v = FockVector::renormalized(amps)?;
    check_truncation_vec(&v).check(tol)?;
    Ok(v)
}

/// The coupled cat–thermal family of the entanglement sweeps:
/// S^{AB}(r) (|ψ₋(α)⟩⟨ψ₋| ⊗ τ(n̄)) S^{AB}(r)†, with |ψ₋⟩ the odd cat.
///
/// α and r are real (a phase on either can be rotated away by local
/// Gaussian unitaries, which change no verdict); r must be nonnegative.
/// Built rank by rank — the two-mode squeezer is applied to each thermal
/// component |ψ₋⟩⊗|w⟩ as a blockwise matrix–vector product — so the cost
/// stays at O(d⁴) per component instead of dense d²×d² conjugations.
pub fn cat_thermal_tms(
    alpha: f64,
    nbar: f64,
    r: f64,
    d: usize,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    if !(r >= 0.0) {
        return Err(Error::Domain {
            what: "two-mode squeezing r",
            value: r,
        });
    }
    let loose = tol.with_trunc(1.0);
    let cat = odd_cat(Complex64::new(alpha, 0.0), d, &loose)?;
    let tau = thermal_state(nbar, d, &loose)?;
    let squeezer = if r > 0.0 {
        Some(two_mode_squeeze_blocks(Complex64::new(r, 0.0), d)?)
    } else {
        None
    };
    let mut mat = CMat::zeros(d * d, d * d);
    let mut component = alloc::vec![Complex64::new(0.0, 0.0); d * d];
    for w in 0..d {
        let t = tau.population(w);
        if t < 1e-18 {
            continue;
        }
        for slot in component.iter_mut() {
            *slot = Complex64::new(0.0, 0.0);
        }
        for n in 0..d {
            component[n * d + w] = cat.amp(n);
        }
        match &squeezer {
            Some(u) => mat.add_outer(&u.matvec(&component), t),
            None => mat.add_outer(&component, t),
        }
    }
    // The blockwise squeezer is exactly unitary on the truncated space, so
    // the trace stays at 1 to machine precision; the recorded deficit is
    // the mass the factors lost before squeezing, and population spilled
    // toward the cutoff is what the final truncation gate measures.
    let deficit = cat.deficit() + tau.deficit();
    let rho = DensityMatrix::from_parts(mat, Modes::Two, d, false, deficit);
    check_truncation(&rho).check(tol)?;
    Ok(rho)
}

/// A constructed state: pure families keep their amplitudes, mixed families
/// are density matrices.
#[derive(Debug, Clone)]
pub enum BuiltState {
    Pure(FockVector),
    Mixed(DensityMatrix),
}

impl BuiltState {
    pub fn into_density(self) -> DensityMatrix {
        match self {
            BuiltState::Pure(v) => v.to_density(),
            BuiltState::Mixed(m) => m,
        }
    }

    pub fn modes(&self) -> Modes {
        match self {
            BuiltState::Pure(_) => Modes::One,
            BuiltState::Mixed(m) => m.modes(),
        }
    }
}

/// Declarative description of a state; the single dispatch point shared by
/// the CLI's state files and the test corpus.
#[derive(Debug, Clone)]
pub enum StateSpec {
    Vacuum {
        cutoff: usize,
    },
    Number {
        n: usize,
        cutoff: usize,
    },
    Coherent {
        alpha: Complex64,
        cutoff: usize,
    },
    Thermal {
        nbar: f64,
        cutoff: usize,
    },
    SqueezedThermal {
        xi: Complex64,
        nbar: f64,
        cutoff: usize,
    },
    EvenCat {
        alpha: Complex64,
        cutoff: usize,
    },
    OddCat {
        alpha: Complex64,
        cutoff: usize,
    },
    Pacs {
        alpha: Complex64,
        cutoff: usize,
    },
    CatThermalTms {
        alpha: f64,
        nbar: f64,
        r: f64,
        cutoff: usize,
    },
    /// Raw density-matrix payload, row-major over the product basis.
    Dense {
        data: Vec<Complex64>,
        modes: Modes,
        cutoff: usize,
    },
}

impl StateSpec {
    pub fn cutoff(&self) -> usize {
        match self {
            StateSpec::Vacuum { cutoff }
            | StateSpec::Number { cutoff, .. }
            | StateSpec::Coherent { cutoff, .. }
            | StateSpec::Thermal { cutoff, .. }
            | StateSpec::SqueezedThermal { cutoff, .. }
            | StateSpec::EvenCat { cutoff, .. }
            | StateSpec::OddCat { cutoff, .. }
            | StateSpec::Pacs { cutoff, .. }
            | StateSpec::CatThermalTms { cutoff, .. }
            | StateSpec::Dense { cutoff, .. } => *cutoff,
        }
    }
}

/// Builds the described state, validating dense payloads (Hermiticity,
/// unit trace, positivity) and gating truncation everywhere.
pub fn build(spec: &StateSpec, tol: &Tolerances) -> Result<BuiltState> {
    match spec {
        StateSpec::Vacuum { cutoff } => Ok(BuiltState::Pure(vacuum(*cutoff)?)),
        StateSpec::Number { n, cutoff } => Ok(BuiltState::Pure(number_state(*n, *cutoff)?)),
        StateSpec::Coherent { alpha, cutoff } => {
            Ok(BuiltState::Pure(coherent(*alpha, *cutoff, tol)?))
        }
        StateSpec::Thermal { nbar, cutoff } => {
            Ok(BuiltState::Mixed(thermal_state(*nbar, *cutoff, tol)?))
        }
        StateSpec::SqueezedThermal { xi, nbar, cutoff } => Ok(BuiltState::Mixed(
            squeezed_thermal(*xi, *nbar, *cutoff, tol)?,
        )),
        StateSpec::EvenCat { alpha, cutoff } => {
            Ok(BuiltState::Pure(even_cat(*alpha, *cutoff, tol)?))
        }
        StateSpec::OddCat { alpha, cutoff } => Ok(BuiltState::Pure(odd_cat(*alpha, *cutoff, tol)?)),
        StateSpec::Pacs { alpha, cutoff } => Ok(BuiltState::Pure(pacs(*alpha, *cutoff, tol)?)),
        StateSpec::CatThermalTms {
            alpha,
            nbar,
            r,
            cutoff,
        } => Ok(BuiltState::Mixed(cat_thermal_tms(
            *alpha, *nbar, *r, *cutoff, tol,
        )?)),
        StateSpec::Dense {
            data,
            modes,
            cutoff,
        } => {
            let total = match modes {
                Modes::One => *cutoff,
                Modes::Two => cutoff * cutoff,
            };
            if data.len() != total * total {
                return Err(Error::DimensionMismatch(String::from(
                    "dense payload length does not match cutoff",
                )));
            }
            let mat = CMat::from_fn(total, total, |i, j| data[i * total + j]);
            let rho = DensityMatrix::new(mat, *modes, tol)?;
            rho.check_psd(tol)?;
            Ok(BuiltState::Mixed(rho))
        }
    }
}
