//! Uncertainty bounds on √det V for single-mode states, and the two-mode
//! generalisation used by the entanglement criterion.
//!
//! The ladder, weakest to strongest (each is a lower bound on √det V):
//!
//! * Robertson–Schrödinger: √det V ≥ 1/2, saturated by pure Gaussians.
//! * Entropy-bounded: √det V ≥ h⁻¹(S), saturated by all Gaussian states,
//!   where h(x) = −(x−1/2)ln(x−1/2) + (x+1/2)ln(x+1/2) is the entropy of a
//!   thermal state with symplectic eigenvalue x.
//! * Non-Gaussianity-and-entropy (NE): √det V ≥ h⁻¹(S + 𝒩), saturated by
//!   Gaussian states and by every Fock state |n⟩.
//! * Weak NE: √det V ≥ h⁻¹(−ln μ + 𝒩_g) with μ = Tr[ρ²], computable from
//!   trace formulas alone; coincides with NE on pure states.
//!
//! For pure states there is additionally the purity–Gaussianity (PG) bound,
//! a piecewise function of the gaussianity g alone, defined for g > 2/e.
//! Two modes: h(ν₊) + h(ν₋) ≥ S + 𝒩 with ν± the symplectic eigenvalues,
//! whose feasible (ν₊, ν₋) region at a given budget B = S + 𝒩 is computed
//! by [`ne_region`].

use alloc::vec::Vec;

use libm::{exp, log, sqrt};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, Modes};
use crate::gaussian::{moments_of, MomentData};
use crate::measures::measure_set;
use crate::tol::Tolerances;

/// Slack below zero accepted for quantities that are nonnegative up to
/// rounding (entropies, non-Gaussianities) before raising a domain error.
const NONNEG_SLACK: f64 = 1e-9;

/// Purity above which a state counts as pure for the PG bound.
const PG_PURITY: f64 = 1.0 - 1e-6;

/// h(x) = −(x−1/2)ln(x−1/2) + (x+1/2)ln(x+1/2), the von Neumann entropy of
/// a Gaussian state with symplectic eigenvalue x; h(1/2) = 0 via 0·ln 0 = 0.
///
/// Strictly increasing on [1/2, ∞); arguments below 1/2 − 1e-12 are a
/// domain error.
pub fn h(x: f64) -> Result<f64> {
    if !(x >= 0.5 - 1e-12) {
        return Err(Error::Domain {
            what: "h argument",
            value: x,
        });
    }
    let a = (x - 0.5).max(0.0);
    let b = x + 0.5;
    let low = if a > 0.0 { -a * log(a) } else { 0.0 };
    Ok(low + b * log(b))
}

/// The inverse of [`h`]: the unique x ≥ 1/2 with h(x) = y, to |h(x) − y| ≤
/// 1e-10, by bisection on [1/2, 1/2 + e^y] (the upper bracket doubles until
/// h exceeds y, though h(1/2 + e^y) ≈ y + 1 already clears it).
pub fn h_inverse(y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::Domain {
            what: "h_inverse argument",
            value: y,
        });
    }
    if y == 0.0 {
        return Ok(0.5);
    }
    let mut hi = 0.5 + exp(y);
    while h(hi)? < y {
        hi = 0.5 + 2.0 * (hi - 0.5);
    }
    let mut lo = 0.5;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Robertson–Schrödinger margin √det V − 1/2 for single-mode moments.
pub fn rs_check(m: &MomentData) -> Result<f64> {
    if m.modes != Modes::One {
        return Err(Error::DimensionMismatch(alloc::string::String::from(
            "RS check takes single-mode moments",
        )));
    }
    Ok(m.sqrt_det_v() - 0.5)
}

/// Entropy-bounded lower bound on √det V: h⁻¹(S).
pub fn eb_bound(s: f64) -> Result<f64> {
    h_inverse(nonneg(s, "entropy")?)
}

/// NE lower bound on √det V: h⁻¹(S + 𝒩).
pub fn ne_bound(s: f64, n: f64) -> Result<f64> {
    h_inverse(nonneg(s, "entropy")? + nonneg(n, "non-Gaussianity")?)
}

/// Weak NE lower bound on √det V: h⁻¹(−ln μ + 𝒩_g), needing only trace
/// formulas. Purity may exceed 1 by at most 1e-6 (treated as 1).
pub fn ne_weak_bound(mu: f64, ng: f64) -> Result<f64> {
    if !(mu > 0.0) || mu > 1.0 + 1e-6 {
        return Err(Error::Domain {
            what: "purity",
            value: mu,
        });
    }
    h_inverse(-log(mu.min(1.0)) + nonneg(ng, "non-Gaussianity")?)
}

/// Purity–Gaussianity bound for pure states, as a lower bound on √det V.
///
/// The underlying bound is on det V: g/(2(2−g)) for g > 1 and
/// (2 + 2√(1−g) − g)/(2g) for 2/e < g ≤ 1, both equal to 1/2 at g = 1 (so
/// the reported √-scale value there is 1/√2). Below g = 2/e no bound exists
/// and `None` is returned (callers fall back to RS). The bound diverges as
/// g → 2, and pure states cannot reach g ≥ 2.
pub fn pg_bound_pure(g: f64) -> Result<Option<f64>> {
    if !(g > 0.0) {
        return Err(Error::Domain {
            what: "gaussianity",
            value: g,
        });
    }
    if g <= 2.0 / core::f64::consts::E {
        return Ok(None);
    }
    let det_bound = if g > 1.0 {
        if g >= 2.0 {
            return Err(Error::Domain {
                what: "gaussianity",
                value: g,
            });
        }
        g / (2.0 * (2.0 - g))
    } else {
        (2.0 + 2.0 * sqrt((1.0 - g).max(0.0)) - g) / (2.0 * g)
    };
    Ok(Some(sqrt(det_bound)))
}

/// Two-mode NE margin h(ν₊) + h(ν₋) − S − 𝒩; nonnegative for every
/// physical state and zero for Gaussian ones.
pub fn two_mode_ne_check(nu_plus: f64, nu_minus: f64, s: f64, n: f64) -> Result<f64> {
    Ok(h(nu_plus)? + h(nu_minus)?
        - nonneg(s, "entropy")?
        - nonneg(n, "non-Gaussianity")?)
}

/// The (ν₊, ν₋) pairs still admissible at entropy-plus-non-Gaussianity
/// budget B: mask[i][j] ⇔ h(ν[i]) + h(ν[j]) ≥ B and ν[i] ≥ ν[j] (≥ 1/2 by
/// grid construction).
#[derive(Debug, Clone)]
pub struct RegionMask {
    /// Shared axis for both ν₊ (rows) and ν₋ (columns), from 1/2 to nu_max.
    pub nu: Vec<f64>,
    /// Row-major admissibility, rows indexed by ν₊.
    pub mask: Vec<bool>,
}

impl RegionMask {
    pub fn steps(&self) -> usize {
        self.nu.len()
    }

    pub fn at(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.nu.len() + j]
    }
}

/// Evaluates the admissible (ν₊, ν₋) region for budget `b` on a uniform
/// `steps`-point grid over [1/2, nu_max].
pub fn ne_region(b: f64, nu_max: f64, steps: usize) -> Result<RegionMask> {
    if !(b >= 0.0) {
        return Err(Error::Domain {
            what: "region budget",
            value: b,
        });
    }
    if !(nu_max > 0.5) || steps < 2 {
        return Err(Error::Domain {
            what: "region grid",
            value: nu_max,
        });
    }
    let mut nu = Vec::with_capacity(steps);
    let mut hval = Vec::with_capacity(steps);
    for i in 0..steps {
        let x = 0.5 + (nu_max - 0.5) * i as f64 / (steps - 1) as f64;
        nu.push(x);
        hval.push(h(x)?);
    }
    let mut mask = Vec::with_capacity(steps * steps);
    for i in 0..steps {
        for j in 0..steps {
            mask.push(nu[i] >= nu[j] && hval[i] + hval[j] >= b);
        }
    }
    Ok(RegionMask { nu, mask })
}

/// Every single-mode bound evaluated on one state, with its margin
/// √det V − bound. `rs` is the constant 1/2; `pg` is present only when the
/// state is pure (purity ≥ 1 − 1e-6) and its gaussianity exceeds 2/e.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub sqrt_det_v: f64,
    pub rs: f64,
    pub eb: f64,
    pub ne: f64,
    pub ne_weak: f64,
    pub pg: Option<f64>,
    /// (bound name, √det V − bound) for every bound present.
    pub margins: Vec<(&'static str, f64)>,
}

/// Computes all applicable bounds for a single-mode state.
pub fn bound_report(rho: &DensityMatrix, tol: &Tolerances) -> Result<BoundReport> {
    let m = moments_of(rho, tol)?;
    if m.modes != Modes::One {
        return Err(Error::DimensionMismatch(alloc::string::String::from(
            "bound report takes a single-mode state",
        )));
    }
    let ms = measure_set(rho, tol)?;
    let sqrt_det_v = m.sqrt_det_v();
    let rs = 0.5;
    let eb = eb_bound(ms.entropy)?;
    let ne = ne_bound(ms.entropy, ms.ng_fidelity)?;
    let ne_weak = ne_weak_bound(ms.purity, ms.ng_super)?;
    let pg = if ms.purity >= PG_PURITY {
        pg_bound_pure(ms.gaussianity)?
    } else {
        None
    };
    let mut margins = alloc::vec![
        ("rs", sqrt_det_v - rs),
        ("eb", sqrt_det_v - eb),
        ("ne", sqrt_det_v - ne),
        ("ne_weak", sqrt_det_v - ne_weak),
    ];
    if let Some(p) = pg {
        margins.push(("pg", sqrt_det_v - p));
    }
    Ok(BoundReport {
        sqrt_det_v,
        rs,
        eb,
        ne,
        ne_weak,
        pg,
        margins,
    })
}

fn nonneg(y: f64, what: &'static str) -> Result<f64> {
    if y < -NONNEG_SLACK {
        return Err(Error::Domain { what, value: y });
    }
    Ok(y.max(0.0))
}
