//! States and operators of one or two bosonic modes under a Fock cutoff.
//!
//! A mode truncated at cutoff `d` keeps the number states |0⟩ … |d−1⟩. Two
//! modes use the row-major product basis |n_A, n_B⟩ ↦ n_A·d + n_B. The
//! truncation is an approximation contract, not an afterthought: states
//! record the probability mass their construction lost at the cutoff, and
//! [`check_truncation`] measures how much population sits dangerously close
//! to it, so callers can reject under-resolved computations instead of
//! silently degrading.
//!
//! Operator constructors build the standard continuous-variable toolbox —
//! annihilation and quadratures, displacement D(α) = exp(αa† − ᾱa),
//! squeezing S(ξ) = exp[(ξ(a†)² − ξ̄a²)/2], phase rotation exp(−iθa†a),
//! two-mode squeezing exp(ξa†b† − ξ̄ab), and the beamsplitter
//! exp[θ(e^{iφ}a†b − e^{−iφ}ab†)] with transmissivity cos²θ. Each unitary is
//! the exact exponential of the truncated generator, taken blockwise over
//! the photon-number sectors the generator preserves, and is therefore
//! exactly unitary on the truncated space up to roundoff.

pub(crate) mod sector;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{fabs, sqrt};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::tol::Tolerances;

use sector::BlockUnitary;

/// Mode count of a state or operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modes {
    One,
    Two,
}

/// Which subsystem an operation keeps or acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

const MIN_CUTOFF: usize = 2;

fn check_cutoff(d: usize) -> Result<()> {
    if d < MIN_CUTOFF {
        return Err(Error::InvalidCutoff {
            min: MIN_CUTOFF,
            got: d,
        });
    }
    Ok(())
}

/// Two-mode row-major basis index.
#[inline]
pub(crate) fn idx2(d: usize, na: usize, nb: usize) -> usize {
    na * d + nb
}

// ---------------------------------------------------------------------------
// Pure states
// ---------------------------------------------------------------------------

/// A single-mode pure state as Fock amplitudes ⟨n|ψ⟩, 0 ≤ n < d.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
    deficit: f64,
}

impl FockVector {
    /// Wraps a normalized amplitude vector; the norm must be within
    /// `tol.norm` of one.
    pub fn new(amps: Vec<Complex64>, tol: &Tolerances) -> Result<Self> {
        check_cutoff(amps.len())?;
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let dev = fabs(sqrt(norm_sqr) - 1.0);
        if dev > tol.norm {
            return Err(Error::BadTrace { dev });
        }
        Ok(Self { amps, deficit: 0.0 })
    }

    /// Builds a state from the truncation of a known infinite amplitude
    /// sequence: the lost mass `1 − Σ|aₙ|²` is recorded as the deficit and
    /// the amplitudes are renormalized.
    pub(crate) fn renormalized(amps: Vec<Complex64>) -> Result<Self> {
        check_cutoff(amps.len())?;
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr <= 1e-300 {
            return Err(Error::InvalidParam(String::from(
                "state has no support below the cutoff",
            )));
        }
        let deficit = (1.0 - norm_sqr).max(0.0);
        let scale = Complex64::new(1.0 / sqrt(norm_sqr), 0.0);
        Ok(Self {
            amps: amps.into_iter().map(|a| a * scale).collect(),
            deficit,
        })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, n: usize) -> Complex64 {
        self.amps[n]
    }

    /// Probability mass the construction lost to the cutoff.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    /// Zero-pads to a larger cutoff. The physical state is unchanged.
    pub fn embed(&self, d: usize) -> Result<Self> {
        if d < self.dim() {
            return Err(Error::InvalidCutoff {
                min: self.dim(),
                got: d,
            });
        }
        let mut amps = self.amps.clone();
        amps.resize(d, Complex64::new(0.0, 0.0));
        Ok(Self {
            amps,
            deficit: self.deficit,
        })
    }

    /// The projector |ψ⟩⟨ψ| as a density matrix.
    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let mut mat = CMat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        DensityMatrix {
            modes: Modes::One,
            dim_per_mode: d,
            mat,
            maybe_nonpositive: false,
            deficit: self.deficit,
        }
    }
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

/// A density matrix on one or two truncated modes.
///
/// `maybe_nonpositive` marks matrices that are Hermitian and unit-trace but
/// deliberately allowed to have negative eigenvalues — the output of a
/// partial transposition. Spectral functions that require a state (entropy,
/// fidelity) refuse such matrices; purity and moments remain meaningful.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    modes: Modes,
    dim_per_mode: usize,
    mat: CMat,
    maybe_nonpositive: bool,
    deficit: f64,
}

impl DensityMatrix {
    /// Validates Hermiticity (within `tol.herm`, relative to the largest
    /// entry) and unit trace (within `tol.norm`). Positivity is *not*
    /// checked here; use [`DensityMatrix::check_psd`] when it matters.
    pub fn new(mat: CMat, modes: Modes, tol: &Tolerances) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch(String::from(
                "density matrix must be square",
            )));
        }
        let dim = mat.rows();
        let dim_per_mode = match modes {
            Modes::One => dim,
            Modes::Two => {
                let d = isqrt(dim);
                if d * d != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "two-mode dimension {dim} is not a perfect square"
                    )));
                }
                d
            }
        };
        check_cutoff(dim_per_mode)?;
        let scale = mat.max_abs().max(1.0);
        let herm_dev = mat.herm_deviation();
        if herm_dev > tol.herm * scale {
            return Err(Error::NotHermitian { dev: herm_dev });
        }
        let tr = mat.trace();
        let tr_dev = (tr - Complex64::new(1.0, 0.0)).norm();
        if tr_dev > tol.norm {
            return Err(Error::BadTrace { dev: tr_dev });
        }
        Ok(Self {
            modes,
            dim_per_mode,
            mat,
            maybe_nonpositive: false,
            deficit: 0.0,
        })
    }

    /// Internal constructor for matrices whose validity is guaranteed by
    /// construction.
    pub(crate) fn from_parts(
        mat: CMat,
        modes: Modes,
        dim_per_mode: usize,
        maybe_nonpositive: bool,
        deficit: f64,
    ) -> Self {
        debug_assert_eq!(
            mat.rows(),
            match modes {
                Modes::One => dim_per_mode,
                Modes::Two => dim_per_mode * dim_per_mode,
            }
        );
        Self {
            modes,
            dim_per_mode,
            mat,
            maybe_nonpositive,
            deficit,
        }
    }

    pub fn modes(&self) -> Modes {
        self.modes
    }

    /// Cutoff of each mode.
    pub fn dim_per_mode(&self) -> usize {
        self.dim_per_mode
    }

    /// Dimension of the full (possibly product) space.
    pub fn total_dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn maybe_nonpositive(&self) -> bool {
        self.maybe_nonpositive
    }

    /// Probability mass lost to the cutoff during construction.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Population ⟨i|ρ|i⟩ of a basis state, by flat index.
    pub fn population(&self, i: usize) -> f64 {
        self.mat[(i, i)].re
    }

    /// Eigenvalue check against `-tol.psd` (scaled by the largest
    /// eigenvalue magnitude).
    pub fn check_psd(&self, tol: &Tolerances) -> Result<()> {
        let eig = crate::linalg::eigh(&self.mat)?;
        let scale = eig
            .values
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(fabs(x)))
            .max(1.0);
        if let Some(&min) = eig.values.iter().find(|&&x| x < -tol.psd * scale) {
            return Err(Error::NotPsd { min_eig: min });
        }
        Ok(())
    }

    /// Rescales to unit trace, keeping the recorded deficit.
    pub fn renormalized(&self) -> Self {
        let tr = self.trace();
        Self {
            modes: self.modes,
            dim_per_mode: self.dim_per_mode,
            mat: self.mat.scaled(Complex64::new(1.0 / tr, 0.0)),
            maybe_nonpositive: self.maybe_nonpositive,
            deficit: self.deficit,
        }
    }

    /// Zero-pads each mode to a larger cutoff; the physical state is
    /// unchanged. Two-mode matrices are re-indexed into the larger product
    /// basis.
    pub fn embed(&self, d: usize) -> Result<Self> {
        let p = self.dim_per_mode;
        if d < p {
            return Err(Error::InvalidCutoff { min: p, got: d });
        }
        if d == p {
            return Ok(self.clone());
        }
        let mat = match self.modes {
            Modes::One => {
                let mut m = CMat::zeros(d, d);
                for i in 0..p {
                    for j in 0..p {
                        m[(i, j)] = self.mat[(i, j)];
                    }
                }
                m
            }
            Modes::Two => {
                let mut m = CMat::zeros(d * d, d * d);
                for ia in 0..p {
                    for ib in 0..p {
                        for ja in 0..p {
                            for jb in 0..p {
                                m[(idx2(d, ia, ib), idx2(d, ja, jb))] =
                                    self.mat[(idx2(p, ia, ib), idx2(p, ja, jb))];
                            }
                        }
                    }
                }
                m
            }
        };
        Ok(Self {
            modes: self.modes,
            dim_per_mode: d,
            mat,
            maybe_nonpositive: self.maybe_nonpositive,
            deficit: self.deficit,
        })
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = libm::sqrt(n as f64) as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// A dense operator on one or two truncated modes, with a display label.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    modes: Modes,
    dim_per_mode: usize,
    mat: CMat,
    label: String,
}

impl ModeOperator {
    pub(crate) fn from_parts(
        mat: CMat,
        modes: Modes,
        dim_per_mode: usize,
        label: String,
    ) -> Self {
        Self {
            modes,
            dim_per_mode,
            mat,
            label,
        }
    }

    pub fn modes(&self) -> Modes {
        self.modes
    }

    pub fn dim_per_mode(&self) -> usize {
        self.dim_per_mode
    }

    pub fn total_dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Conjugate transpose, with a decorated label.
    pub fn adjoint(&self) -> Self {
        Self {
            modes: self.modes,
            dim_per_mode: self.dim_per_mode,
            mat: self.mat.adjoint(),
            label: format!("({})†", self.label),
        }
    }

    /// Applies the operator to a pure state: `self · ψ` (no renormalization).
    pub fn apply(&self, psi: &FockVector) -> Result<Vec<Complex64>> {
        if self.modes != Modes::One || self.total_dim() != psi.dim() {
            return Err(Error::DimensionMismatch(String::from(
                "operator and state dimensions differ",
            )));
        }
        Ok(self.mat.matvec(psi.amps()))
    }

    /// Unitary conjugation `U ρ U†`, preserving the state's bookkeeping.
    pub fn conjugate_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if self.modes != rho.modes() || self.total_dim() != rho.total_dim() {
            return Err(Error::DimensionMismatch(String::from(
                "operator and state dimensions differ",
            )));
        }
        let mat = self.mat.mul(rho.mat()).mul(&self.mat.adjoint());
        Ok(DensityMatrix::from_parts(
            mat,
            rho.modes(),
            rho.dim_per_mode(),
            rho.maybe_nonpositive(),
            rho.deficit(),
        ))
    }
}

fn unitary_guard(dev: f64) -> Result<()> {
    if dev > Tolerances::DEFAULT.unitary {
        return Err(Error::NotUnitary { dev });
    }
    Ok(())
}

fn block_unitary_operator(
    dim: usize,
    groups: &[Vec<usize>],
    g: impl Fn(usize, usize) -> Complex64,
    modes: Modes,
    dim_per_mode: usize,
    label: String,
) -> Result<ModeOperator> {
    let u = BlockUnitary::from_skew_generator(dim, groups, g)?;
    unitary_guard(u.unitarity_deviation())?;
    Ok(ModeOperator::from_parts(
        u.to_dense(),
        modes,
        dim_per_mode,
        label,
    ))
}

/// Annihilation operator: a|n⟩ = √n |n−1⟩.
pub fn annihilation(d: usize) -> Result<ModeOperator> {
    check_cutoff(d)?;
    let mut mat = CMat::zeros(d, d);
    for n in 1..d {
        mat[(n - 1, n)] = Complex64::new(sqrt(n as f64), 0.0);
    }
    Ok(ModeOperator::from_parts(
        mat,
        Modes::One,
        d,
        String::from("a"),
    ))
}

/// Creation operator a†.
pub fn creation(d: usize) -> Result<ModeOperator> {
    let a = annihilation(d)?;
    Ok(ModeOperator::from_parts(
        a.mat.adjoint(),
        Modes::One,
        d,
        String::from("a†"),
    ))
}

/// Number operator a†a (diagonal).
pub fn number(d: usize) -> Result<ModeOperator> {
    check_cutoff(d)?;
    let mat = CMat::from_real_diag(&(0..d).map(|n| n as f64).collect::<Vec<_>>());
    Ok(ModeOperator::from_parts(
        mat,
        Modes::One,
        d,
        String::from("n"),
    ))
}

/// Quadratures x = (a + a†)/√2 and p = −i(a − a†)/√2, so [x, p] = i below
/// the cutoff and vacuum variances are 1/2.
pub fn quadratures(d: usize) -> Result<(ModeOperator, ModeOperator)> {
    let a = annihilation(d)?;
    let adj = a.mat.adjoint();
    let inv_sqrt2 = 1.0 / sqrt(2.0);
    let x = a.mat.add(&adj).scaled(Complex64::new(inv_sqrt2, 0.0));
    let p = a
        .mat
        .sub(&adj)
        .scaled(Complex64::new(0.0, -inv_sqrt2));
    Ok((
        ModeOperator::from_parts(x, Modes::One, d, String::from("x")),
        ModeOperator::from_parts(p, Modes::One, d, String::from("p")),
    ))
}

/// Displacement D(α) = exp(αa† − ᾱa).
pub fn displacement(alpha: Complex64, d: usize) -> Result<ModeOperator> {
    check_cutoff(d)?;
    let g = move |i: usize, j: usize| -> Complex64 {
        if i == j + 1 {
            alpha * sqrt(i as f64)
        } else if j == i + 1 {
            -alpha.conj() * sqrt(j as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    block_unitary_operator(
        d,
        &sector::full_sector(d),
        g,
        Modes::One,
        d,
        format!("D({:.4}{:+.4}i)", alpha.re, alpha.im),
    )
}

/// Single-mode squeeze S(ξ) = exp[(ξ(a†)² − ξ̄a²)/2]. Real ξ = r > 0
/// stretches x: Var(x) = e^{2r}/2 on S(r)|0⟩.
pub fn squeeze(xi: Complex64, d: usize) -> Result<ModeOperator> {
    check_cutoff(d)?;
    let g = move |i: usize, j: usize| -> Complex64 {
        if i == j + 2 {
            // ⟨j+2| ξ(a†)²/2 |j⟩
            xi * (0.5 * sqrt((j + 1) as f64 * (j + 2) as f64))
        } else if j == i + 2 {
            -xi.conj() * (0.5 * sqrt((i + 1) as f64 * (i + 2) as f64))
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    block_unitary_operator(
        d,
        &sector::parity_sectors(d),
        g,
        Modes::One,
        d,
        format!("S({:.4}{:+.4}i)", xi.re, xi.im),
    )
}

/// Phase rotation exp(−iθ a†a); Heisenberg action a ↦ a e^{−iθ}.
pub fn phase_rotation(theta: f64, d: usize) -> Result<ModeOperator> {
    check_cutoff(d)?;
    let mut mat = CMat::zeros(d, d);
    for n in 0..d {
        mat[(n, n)] = Complex64::new(0.0, -theta * n as f64).exp();
    }
    Ok(ModeOperator::from_parts(
        mat,
        Modes::One,
        d,
        format!("R({theta:.4})"),
    ))
}

/// Two-mode squeeze exp(ξ a†b† − ξ̄ ab) on the product basis with per-mode
/// cutoff `d`. Applied to vacuum it yields the two-mode squeezed state with
/// Schmidt coefficients tanhⁿr / cosh r for ξ = r.
pub fn two_mode_squeeze(xi: Complex64, d: usize) -> Result<ModeOperator> {
    check_cutoff(d)?;
    let u = two_mode_squeeze_blocks(xi, d)?;
    unitary_guard(u.unitarity_deviation())?;
    Ok(ModeOperator::from_parts(
        u.to_dense(),
        Modes::Two,
        d,
        format!("S2({:.4}{:+.4}i)", xi.re, xi.im),
    ))
}

/// Blockwise form of the two-mode squeeze, for internal pipelines that never
/// need the dense matrix.
pub(crate) fn two_mode_squeeze_blocks(xi: Complex64, d: usize) -> Result<BlockUnitary> {
    let g = move |i: usize, j: usize| -> Complex64 {
        let (ia, ib) = (i / d, i % d);
        let (ja, jb) = (j / d, j % d);
        if ia == ja + 1 && ib == jb + 1 {
            xi * sqrt((ja + 1) as f64 * (jb + 1) as f64)
        } else if ja == ia + 1 && jb == ib + 1 {
            -xi.conj() * sqrt((ia + 1) as f64 * (ib + 1) as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    BlockUnitary::from_skew_generator(d * d, &sector::difference_sectors(d), g)
}

/// Beamsplitter exp[θ(e^{iφ} a†b − e^{−iφ} ab†)]; transmissivity cos²θ.
///
/// On a single photon: U|1,0⟩ = cos θ|1,0⟩ − e^{−iφ} sin θ|0,1⟩.
pub fn beamsplitter(theta: f64, phi: f64, d: usize) -> Result<ModeOperator> {
    check_cutoff(d)?;
    let u = passive_blocks(
        [
            [Complex64::new(0.0, 0.0), Complex64::from_polar(theta, phi)],
            [-Complex64::from_polar(theta, -phi), Complex64::new(0.0, 0.0)],
        ],
        d,
    )?;
    unitary_guard(u.unitarity_deviation())?;
    Ok(ModeOperator::from_parts(
        u.to_dense(),
        Modes::Two,
        d,
        format!("BS({theta:.4},{phi:.4})"),
    ))
}

/// Blockwise exponential of a general two-mode passive generator
/// G = Σ_kl g[k][l] a_k† a_l − h.c. is not assumed; the caller supplies the
/// full coefficient matrix of G = Σ_kl g[k][l] a_k† a_l and G must be
/// skew-Hermitian (g anti-Hermitian as a 2×2 matrix).
pub(crate) fn passive_blocks(g: [[Complex64; 2]; 2], d: usize) -> Result<BlockUnitary> {
    let entry = move |i: usize, j: usize| -> Complex64 {
        let (ia, ib) = (i / d, i % d);
        let (ja, jb) = (j / d, j % d);
        let mut z = Complex64::new(0.0, 0.0);
        if ia == ja && ib == jb {
            z += g[0][0] * ja as f64 + g[1][1] * jb as f64;
        }
        // a†b : (ja+1, jb−1) ← (ja, jb)
        if jb > 0 && ia == ja + 1 && ib + 1 == jb {
            z += g[0][1] * sqrt((ja + 1) as f64 * jb as f64);
        }
        // ab† : (ja−1, jb+1) ← (ja, jb)
        if ja > 0 && ia + 1 == ja && ib == jb + 1 {
            z += g[1][0] * sqrt(ja as f64 * (jb + 1) as f64);
        }
        z
    };
    BlockUnitary::from_skew_generator(d * d, &sector::total_sectors(d), entry)
}

/// Thermal state τ(n̄): diagonal with geometric weights ∝ (n̄/(n̄+1))ⁿ,
/// renormalized on the truncated space. The exact tail mass (n̄/(n̄+1))^d is
/// recorded as the deficit and must pass `tol.trunc`.
pub fn thermal_state(nbar: f64, d: usize, tol: &Tolerances) -> Result<DensityMatrix> {
    check_cutoff(d)?;
    if !(nbar >= 0.0) {
        return Err(Error::Domain {
            what: "thermal occupation n̄",
            value: nbar,
        });
    }
    let q = nbar / (nbar + 1.0);
    let deficit = if q == 0.0 {
        0.0
    } else {
        libm::exp(d as f64 * libm::log(q))
    };
    if deficit > tol.trunc {
        return Err(Error::Truncation {
            leakage: deficit,
            tol: tol.trunc,
        });
    }
    let mut weights = Vec::with_capacity(d);
    let mut w = 1.0 - q;
    let mut total = 0.0;
    for _ in 0..d {
        weights.push(w);
        total += w;
        w *= q;
    }
    let mat = CMat::from_real_diag(
        &weights.iter().map(|w| w / total).collect::<Vec<_>>(),
    );
    Ok(DensityMatrix::from_parts(
        mat,
        Modes::One,
        d,
        false,
        deficit,
    ))
}

// ---------------------------------------------------------------------------
// Composition and reduction
// ---------------------------------------------------------------------------

/// Tensor product of two single-mode states with equal cutoffs.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    if a.modes() != Modes::One || b.modes() != Modes::One {
        return Err(Error::DimensionMismatch(String::from(
            "tensor expects two single-mode states",
        )));
    }
    if a.dim_per_mode() != b.dim_per_mode() {
        return Err(Error::DimensionMismatch(format!(
            "cutoffs differ: {} vs {}",
            a.dim_per_mode(),
            b.dim_per_mode()
        )));
    }
    let mat = a.mat().kron(b.mat());
    let deficit = 1.0 - (1.0 - a.deficit()) * (1.0 - b.deficit());
    Ok(DensityMatrix::from_parts(
        mat,
        Modes::Two,
        a.dim_per_mode(),
        a.maybe_nonpositive() || b.maybe_nonpositive(),
        deficit,
    ))
}

/// Tensor product of two single-mode operators with equal cutoffs.
pub fn tensor_ops(a: &ModeOperator, b: &ModeOperator) -> Result<ModeOperator> {
    if a.modes() != Modes::One || b.modes() != Modes::One {
        return Err(Error::DimensionMismatch(String::from(
            "tensor_ops expects two single-mode operators",
        )));
    }
    if a.dim_per_mode() != b.dim_per_mode() {
        return Err(Error::DimensionMismatch(format!(
            "cutoffs differ: {} vs {}",
            a.dim_per_mode(),
            b.dim_per_mode()
        )));
    }
    Ok(ModeOperator::from_parts(
        a.mat().kron(b.mat()),
        Modes::Two,
        a.dim_per_mode(),
        format!("{}⊗{}", a.label(), b.label()),
    ))
}

/// Reduced state of one mode of a two-mode density matrix.
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix> {
    if rho.modes() != Modes::Two {
        return Err(Error::DimensionMismatch(String::from(
            "partial_trace expects a two-mode state",
        )));
    }
    let d = rho.dim_per_mode();
    let mut mat = CMat::zeros(d, d);
    match keep {
        Subsystem::A => {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in 0..d {
                        acc += rho.mat()[(idx2(d, i, m), idx2(d, j, m))];
                    }
                    mat[(i, j)] = acc;
                }
            }
        }
        Subsystem::B => {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in 0..d {
                        acc += rho.mat()[(idx2(d, m, i), idx2(d, m, j))];
                    }
                    mat[(i, j)] = acc;
                }
            }
        }
    }
    Ok(DensityMatrix::from_parts(
        mat,
        Modes::One,
        d,
        rho.maybe_nonpositive(),
        rho.deficit(),
    ))
}

/// Partial transposition on mode B: ρ^{T_B}[(i,m),(j,n)] = ρ[(i,n),(j,m)].
///
/// The result stays Hermitian with unit trace but may have negative
/// eigenvalues — that is the point — so it is flagged `maybe_nonpositive`.
pub fn partial_transpose_b(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.modes() != Modes::Two {
        return Err(Error::DimensionMismatch(String::from(
            "partial_transpose_b expects a two-mode state",
        )));
    }
    let d = rho.dim_per_mode();
    let mut mat = CMat::zeros(d * d, d * d);
    for ia in 0..d {
        for ib in 0..d {
            for ja in 0..d {
                for jb in 0..d {
                    mat[(idx2(d, ia, ib), idx2(d, ja, jb))] =
                        rho.mat()[(idx2(d, ia, jb), idx2(d, ja, ib))];
                }
            }
        }
    }
    Ok(DensityMatrix::from_parts(
        mat,
        Modes::Two,
        d,
        true,
        rho.deficit(),
    ))
}

// ---------------------------------------------------------------------------
// Truncation accounting
// ---------------------------------------------------------------------------

/// How much of a state escapes, or crowds, the cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    /// Probability mass the construction lost beyond the cutoff.
    pub deficit: f64,
    /// Population currently in the top tenth of the basis (any mode).
    pub tail_mass: f64,
}

impl TruncationReport {
    /// The larger of the two leakage indicators.
    pub fn leakage(&self) -> f64 {
        self.deficit.max(self.tail_mass)
    }

    /// Errors if the leakage exceeds `tol.trunc`.
    pub fn check(&self, tol: &Tolerances) -> Result<()> {
        let leakage = self.leakage();
        if leakage > tol.trunc {
            return Err(Error::Truncation {
                leakage,
                tol: tol.trunc,
            });
        }
        Ok(())
    }
}

/// First Fock index counted as "near the cutoff": the top tenth of the
/// basis, at least one level.
fn tail_start(d: usize) -> usize {
    d - (d / 10).max(1)
}

/// Truncation health of a density matrix.
pub fn check_truncation(rho: &DensityMatrix) -> TruncationReport {
    let d = rho.dim_per_mode();
    let start = tail_start(d);
    let tail_mass = match rho.modes() {
        Modes::One => (start..d).map(|n| rho.population(n)).sum(),
        Modes::Two => {
            let mut acc = 0.0;
            for na in 0..d {
                for nb in 0..d {
                    if na >= start || nb >= start {
                        acc += rho.population(idx2(d, na, nb));
                    }
                }
            }
            acc
        }
    };
    TruncationReport {
        deficit: rho.deficit(),
        tail_mass: tail_mass.max(0.0),
    }
}

/// Truncation health of a pure state.
pub fn check_truncation_vec(psi: &FockVector) -> TruncationReport {
    let d = psi.dim();
    let start = tail_start(d);
    let tail_mass = (start..d).map(|n| psi.amp(n).norm_sqr()).sum();
    TruncationReport {
        deficit: psi.deficit(),
        tail_mass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::Tolerances;

    const TOL: Tolerances = Tolerances::DEFAULT;

    /// Closed-form coherent amplitudes e^{−|α|²/2} αⁿ/√n!, built iteratively.
    fn coherent_amps(alpha: Complex64, d: usize) -> Vec<Complex64> {
        let mut amps = Vec::with_capacity(d);
        let mut c = Complex64::new(libm::exp(-alpha.norm_sqr() / 2.0), 0.0);
        for n in 0..d {
            amps.push(c);
            c = c * alpha / sqrt((n + 1) as f64);
        }
        amps
    }

    fn expectation(op: &CMat, v: &[Complex64]) -> Complex64 {
        let av = op.matvec(v);
        v.iter()
            .zip(av.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    #[test]
    fn annihilation_matrix_elements() {
        let a = annihilation(6).unwrap();
        for n in 1..6 {
            assert!((a.mat()[(n - 1, n)].re - sqrt(n as f64)).abs() < 1e-15);
        }
        assert_eq!(a.mat()[(3, 2)].re, 0.0);
        assert!(matches!(
            annihilation(1),
            Err(Error::InvalidCutoff { .. })
        ));
    }

    #[test]
    fn quadrature_commutator_is_i_below_cutoff() {
        let d = 8;
        let (x, p) = quadratures(d).unwrap();
        let comm = x.mat().mul(p.mat()).sub(&p.mat().mul(x.mat()));
        // [x, p] = i(I − d |d−1⟩⟨d−1|) on the truncated space.
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j && i < d - 1 {
                    Complex64::new(0.0, 1.0)
                } else if i == j {
                    Complex64::new(0.0, 1.0 - d as f64)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((comm[(i, j)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn displacement_generates_coherent_state() {
        let d = 40;
        let alpha = Complex64::new(1.0, 0.0);
        let dop = displacement(alpha, d).unwrap();
        let vac = FockVector::new(
            {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[0] = Complex64::new(1.0, 0.0);
                v
            },
            &TOL,
        )
        .unwrap();
        let got = dop.apply(&vac).unwrap();
        let want = coherent_amps(alpha, d);
        for n in 0..d {
            assert!(
                (got[n] - want[n]).norm() < 1e-12,
                "amplitude mismatch at n={n}"
            );
        }
        assert!(dop.mat().unitarity_deviation() < 1e-11);
    }

    #[test]
    fn squeeze_variances_match_closed_form() {
        let d = 60;
        let r = 0.5;
        let s = squeeze(Complex64::new(r, 0.0), d).unwrap();
        let mut vac = vec![Complex64::new(0.0, 0.0); d];
        vac[0] = Complex64::new(1.0, 0.0);
        let sv = s.mat().matvec(&vac);
        let (x, p) = quadratures(d).unwrap();
        let x2 = expectation(&x.mat().mul(x.mat()), &sv).re;
        let p2 = expectation(&p.mat().mul(p.mat()), &sv).re;
        assert!((x2 - libm::exp(2.0 * r) / 2.0).abs() < 1e-10);
        assert!((p2 - libm::exp(-2.0 * r) / 2.0).abs() < 1e-10);
    }

    #[test]
    fn phase_rotation_rotates_annihilation() {
        let d = 12;
        let theta = 0.83;
        let rot = phase_rotation(theta, d).unwrap();
        let a = annihilation(d).unwrap();
        let lhs = rot.mat().adjoint().mul(a.mat()).mul(rot.mat());
        let rhs = a.mat().scaled(Complex64::new(0.0, -theta).exp());
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn two_mode_squeeze_schmidt_coefficients() {
        let d = 24;
        let r = 0.4;
        let u = two_mode_squeeze(Complex64::new(r, 0.0), d).unwrap();
        let mut vac = vec![Complex64::new(0.0, 0.0); d * d];
        vac[0] = Complex64::new(1.0, 0.0);
        let tmsv = u.mat().matvec(&vac);
        let (tr, ch) = (libm::tanh(r), libm::cosh(r));
        for n in 0..=4usize {
            let want = libm::pow(tr, n as f64) / ch;
            let got = tmsv[idx2(d, n, n)];
            assert!(
                (got.re - want).abs() < 1e-8 && got.im.abs() < 1e-12,
                "Schmidt coefficient mismatch at n={n}"
            );
        }
        // No support off the diagonal n_A = n_B.
        assert!(tmsv[idx2(d, 1, 0)].norm() < 1e-14);
        assert!(tmsv[idx2(d, 0, 3)].norm() < 1e-14);
    }

    #[test]
    fn two_mode_squeeze_reduced_state_is_thermal() {
        let d = 24;
        let r = 0.4;
        let u = two_mode_squeeze(Complex64::new(r, 0.0), d).unwrap();
        let mut vac = vec![Complex64::new(0.0, 0.0); d * d];
        vac[0] = Complex64::new(1.0, 0.0);
        let tmsv = u.mat().matvec(&vac);
        let mut mat = CMat::zeros(d * d, d * d);
        mat.add_outer(&tmsv, 1.0);
        let rho = DensityMatrix::from_parts(mat, Modes::Two, d, false, 0.0);
        let reduced = partial_trace(&rho, Subsystem::B).unwrap();
        let nbar = libm::sinh(r) * libm::sinh(r);
        let tau = thermal_state(nbar, d, &TOL.with_trunc(1.0)).unwrap();
        // The ideal reduced state has weights (1−q)qⁿ with no renormalization
        // needed at this r and d; compare against the renormalized thermal.
        assert!(reduced.mat().max_abs_diff(tau.mat()) < 1e-8);
    }

    #[test]
    fn beamsplitter_single_photon_convention() {
        let d = 6;
        let (theta, phi) = (0.7, 0.3);
        let bs = beamsplitter(theta, phi, d).unwrap();
        let mut one_a = vec![Complex64::new(0.0, 0.0); d * d];
        one_a[idx2(d, 1, 0)] = Complex64::new(1.0, 0.0);
        let out = bs.mat().matvec(&one_a);
        let t = out[idx2(d, 1, 0)];
        let r = out[idx2(d, 0, 1)];
        assert!((t - Complex64::new(libm::cos(theta), 0.0)).norm() < 1e-12);
        let want_r = -Complex64::from_polar(libm::sin(theta), -phi);
        assert!((r - want_r).norm() < 1e-12);
        // Transmissivity cos²θ.
        assert!((t.norm_sqr() - libm::cos(theta).powi(2)).abs() < 1e-12);
        // Vacuum is invariant.
        let mut vac = vec![Complex64::new(0.0, 0.0); d * d];
        vac[0] = Complex64::new(1.0, 0.0);
        let out_vac = bs.mat().matvec(&vac);
        assert!((out_vac[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn thermal_state_purity_and_gate() {
        let tau = thermal_state(1.0, 48, &TOL).unwrap();
        let purity = tau.mat().mul(tau.mat()).trace().re;
        assert!((purity - 1.0 / 3.0).abs() < 1e-12);
        // n̄ = 3 at d = 24 leaks (3/4)^24 ≈ 1e−3 — far beyond the default gate.
        assert!(matches!(
            thermal_state(3.0, 24, &TOL),
            Err(Error::Truncation { .. })
        ));
        // Same construction under an explicit looser gate succeeds and
        // records the deficit.
        let loose = thermal_state(3.0, 24, &TOL.with_trunc(0.05)).unwrap();
        let want = libm::pow(0.75, 24.0);
        assert!((loose.deficit() - want).abs() < 1e-15);
        assert!((loose.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_and_partial_trace_roundtrip() {
        let d = 10;
        let tau_a = thermal_state(0.5, d, &TOL.with_trunc(1e-2)).unwrap();
        let coh = FockVector::renormalized(coherent_amps(Complex64::new(0.8, -0.2), d))
            .unwrap();
        let rho_b = coh.to_density();
        let joint = tensor(&tau_a, &rho_b).unwrap();
        assert!((joint.trace() - 1.0).abs() < 1e-12);
        let back_a = partial_trace(&joint, Subsystem::A).unwrap();
        let back_b = partial_trace(&joint, Subsystem::B).unwrap();
        assert!(back_a.mat().max_abs_diff(tau_a.mat()) < 1e-13);
        assert!(back_b.mat().max_abs_diff(rho_b.mat()) < 1e-13);
    }

    #[test]
    fn partial_transpose_is_hermitian_involution() {
        let d = 6;
        let r = 0.5;
        let u = two_mode_squeeze(Complex64::new(r, 0.0), d).unwrap();
        let mut vac = vec![Complex64::new(0.0, 0.0); d * d];
        vac[0] = Complex64::new(1.0, 0.0);
        let tmsv = u.mat().matvec(&vac);
        let mut mat = CMat::zeros(d * d, d * d);
        mat.add_outer(&tmsv, 1.0);
        let rho = DensityMatrix::from_parts(mat, Modes::Two, d, false, 0.0);
        let pt = partial_transpose_b(&rho).unwrap();
        assert!(pt.maybe_nonpositive());
        assert!(pt.mat().herm_deviation() < 1e-14);
        assert!((pt.trace() - 1.0).abs() < 1e-12);
        let back = partial_transpose_b(&pt).unwrap();
        assert!(back.mat().max_abs_diff(rho.mat()) < 1e-15);
        // On a product state the partial transpose is still a valid state.
        let tau = thermal_state(0.3, d, &TOL.with_trunc(1e-3)).unwrap();
        let prod = tensor(&tau, &tau).unwrap();
        let prod_pt = partial_transpose_b(&prod).unwrap();
        prod_pt.check_psd(&TOL).unwrap();
    }

    #[test]
    fn truncation_report_flags_crowded_states() {
        let comfy = FockVector::renormalized(coherent_amps(Complex64::new(1.0, 0.0), 40))
            .unwrap();
        let rep = check_truncation_vec(&comfy);
        assert!(rep.leakage() < 1e-12);
        rep.check(&TOL).unwrap();

        let cramped =
            FockVector::renormalized(coherent_amps(Complex64::new(6.0, 0.0), 10)).unwrap();
        let rep = check_truncation_vec(&cramped);
        assert!(rep.leakage() > 0.5);
        assert!(rep.check(&TOL).is_err());

        // |n⟩ far from the cutoff has exactly zero leakage.
        let mut amps = vec![Complex64::new(0.0, 0.0); 10];
        amps[5] = Complex64::new(1.0, 0.0);
        let number_state = FockVector::new(amps, &TOL).unwrap();
        assert_eq!(check_truncation_vec(&number_state).leakage(), 0.0);
    }

    #[test]
    fn density_matrix_validation() {
        let mut bad_herm = CMat::identity(4).scaled(Complex64::new(0.25, 0.0));
        bad_herm[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(
            DensityMatrix::new(bad_herm, Modes::One, &TOL),
            Err(Error::NotHermitian { .. })
        ));
        let bad_trace = CMat::identity(4).scaled(Complex64::new(0.3, 0.0));
        assert!(matches!(
            DensityMatrix::new(bad_trace, Modes::One, &TOL),
            Err(Error::BadTrace { .. })
        ));
        let not_square_product = CMat::identity(6).scaled(Complex64::new(1.0 / 6.0, 0.0));
        assert!(matches!(
            DensityMatrix::new(not_square_product, Modes::Two, &TOL),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn embed_preserves_two_mode_structure() {
        let d = 4;
        let u = two_mode_squeeze(Complex64::new(0.3, 0.0), d).unwrap();
        let mut vac = vec![Complex64::new(0.0, 0.0); d * d];
        vac[0] = Complex64::new(1.0, 0.0);
        let tmsv = u.mat().matvec(&vac);
        let mut mat = CMat::zeros(d * d, d * d);
        mat.add_outer(&tmsv, 1.0);
        let rho = DensityMatrix::from_parts(mat, Modes::Two, d, false, 0.0);
        let big = rho.embed(7).unwrap();
        assert_eq!(big.total_dim(), 49);
        assert!((big.trace() - 1.0).abs() < 1e-13);
        for na in 0..d {
            for nb in 0..d {
                let small_idx = idx2(d, na, nb);
                let big_idx = idx2(7, na, nb);
                assert_eq!(big.mat()[(big_idx, big_idx)], rho.mat()[(small_idx, small_idx)]);
            }
        }
        let reduced_small = partial_trace(&rho, Subsystem::A).unwrap();
        let reduced_big = partial_trace(&big, Subsystem::A).unwrap();
        for n in 0..d {
            assert!(
                (reduced_big.mat()[(n, n)] - reduced_small.mat()[(n, n)]).norm() < 1e-14
            );
        }
    }
}
