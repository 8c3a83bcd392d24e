//! Quadrature moments, symplectic structure, and Gaussian reference states.
//!
//! The covariance matrix V of a state (ordering x₁, p₁, x₂, p₂; symmetrized
//! second moments) carries all of its Gaussian content. This module extracts
//! V and the mean vector from a truncated density matrix, computes the
//! symplectic invariants and eigenvalues, factors covariance matrices
//! through the Williamson normal form V = S·diag(ν,ν,…)·Sᵀ, splits
//! symplectic matrices into passive · squeeze · passive factors
//! (Bloch–Messiah), lifts symplectic matrices to Fock-space unitaries, and
//! finally synthesizes the *reference Gaussian* of a state: the Gaussian
//! state with the same first and second moments, built as displaced,
//! squeezed thermal states.
//!
//! The symplectic form is Ω = ⊕ⱼ [[0, 1], [−1, 0]], so S is symplectic iff
//! S Ω Sᵀ = Ω, and a physical covariance matrix satisfies ν_min ≥ 1/2.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::{atan2, exp, fabs, log, sqrt};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    self, check_truncation, displacement, phase_rotation, squeeze, tensor, thermal_state,
    DensityMatrix, ModeOperator, Modes,
};
use crate::linalg::{self, CMat};
use crate::tol::Tolerances;

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

/// First and second quadrature moments of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentData {
    pub modes: Modes,
    /// Mean vector (⟨x₁⟩, ⟨p₁⟩, …), length 2·(number of modes).
    pub mean: Vec<f64>,
    /// Row-major symmetric covariance matrix of the same ordering.
    pub cov: Vec<f64>,
}

impl MomentData {
    pub fn n_modes(&self) -> usize {
        match self.modes {
            Modes::One => 1,
            Modes::Two => 2,
        }
    }

    /// Side length of the covariance matrix.
    pub fn dim(&self) -> usize {
        2 * self.n_modes()
    }

    pub fn cov_at(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.dim() + j]
    }

    /// Determinant of the covariance matrix.
    pub fn det_cov(&self) -> f64 {
        det_small(&self.cov, self.dim())
    }

    /// √det V — for a single mode this is the symplectic eigenvalue ν.
    pub fn sqrt_det_v(&self) -> f64 {
        let d = self.det_cov();
        if d <= 0.0 {
            0.0
        } else {
            sqrt(d)
        }
    }

    /// Determinants of the 2×2 blocks A (mode 1), B (mode 2), C (cross).
    ///
    /// Only meaningful for two-mode data.
    pub fn block_dets(&self) -> (f64, f64, f64) {
        let det2 = |a: f64, b: f64, c: f64, d: f64| a * d - b * c;
        (
            det2(
                self.cov_at(0, 0),
                self.cov_at(0, 1),
                self.cov_at(1, 0),
                self.cov_at(1, 1),
            ),
            det2(
                self.cov_at(2, 2),
                self.cov_at(2, 3),
                self.cov_at(3, 2),
                self.cov_at(3, 3),
            ),
            det2(
                self.cov_at(0, 2),
                self.cov_at(0, 3),
                self.cov_at(1, 2),
                self.cov_at(1, 3),
            ),
        )
    }
}

fn det_small(m: &[f64], n: usize) -> f64 {
    match n {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            // cofactor expansion along the first row; n ≤ 4 in practice
            let mut det = 0.0;
            for j in 0..n {
                let mut minor = Vec::with_capacity((n - 1) * (n - 1));
                for r in 1..n {
                    for c in 0..n {
                        if c != j {
                            minor.push(m[r * n + c]);
                        }
                    }
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                det += sign * m[j] * det_small(&minor, n - 1);
            }
            det
        }
    }
}

/// Extracts mean vector and covariance matrix from a density matrix.
///
/// The state must pass [`check_truncation`] under `tol.trunc` — moments of
/// an under-resolved state are silently wrong, which is exactly the failure
/// mode this gate exists to catch. Works on partial transposes too (the
/// matrix only needs to be Hermitian with unit trace).
pub fn moments_of(rho: &DensityMatrix, tol: &Tolerances) -> Result<MomentData> {
    check_truncation(rho).check(tol)?;
    match rho.modes() {
        Modes::One => {
            let d = rho.dim_per_mode();
            let m = rho.mat();
            // ⟨a⟩ = Σ √n ρ[n, n−1],  ⟨a²⟩ = Σ √(n(n−1)) ρ[n, n−2],
            // ⟨a†a⟩ = Σ n ρ[n, n].
            let mut a1 = Complex64::new(0.0, 0.0);
            let mut a2 = Complex64::new(0.0, 0.0);
            let mut nbar = 0.0;
            for n in 0..d {
                let nf = n as f64;
                nbar += nf * m[(n, n)].re;
                if n >= 1 {
                    a1 += m[(n, n - 1)] * sqrt(nf);
                }
                if n >= 2 {
                    a2 += m[(n, n - 2)] * sqrt(nf * (nf - 1.0));
                }
            }
            let mean_x = core::f64::consts::SQRT_2 * a1.re;
            let mean_p = core::f64::consts::SQRT_2 * a1.im;
            let vxx = a2.re + nbar + 0.5 - mean_x * mean_x;
            let vpp = -a2.re + nbar + 0.5 - mean_p * mean_p;
            let vxp = a2.im - mean_x * mean_p;
            Ok(MomentData {
                modes: Modes::One,
                mean: vec![mean_x, mean_p],
                cov: vec![vxx, vxp, vxp, vpp],
            })
        }
        Modes::Two => {
            let d = rho.dim_per_mode();
            let m = rho.mat();
            let idx = |na: usize, nb: usize| na * d + nb;
            // Single-mode sums per mode plus the two cross correlators
            // ⟨a_A a_B⟩ and ⟨a_A a_B†⟩.
            let mut a_a = Complex64::new(0.0, 0.0);
            let mut a_b = Complex64::new(0.0, 0.0);
            let mut a2_a = Complex64::new(0.0, 0.0);
            let mut a2_b = Complex64::new(0.0, 0.0);
            let mut n_a = 0.0;
            let mut n_b = 0.0;
            let mut ab = Complex64::new(0.0, 0.0); // ⟨a_A a_B⟩
            let mut ab_dag = Complex64::new(0.0, 0.0); // ⟨a_A a_B†⟩
            for na in 0..d {
                for nb in 0..d {
                    let row = idx(na, nb);
                    let (fa, fb) = (na as f64, nb as f64);
                    n_a += fa * m[(row, row)].re;
                    n_b += fb * m[(row, row)].re;
                    if na >= 1 {
                        a_a += m[(row, idx(na - 1, nb))] * sqrt(fa);
                    }
                    if nb >= 1 {
                        a_b += m[(row, idx(na, nb - 1))] * sqrt(fb);
                    }
                    if na >= 2 {
                        a2_a += m[(row, idx(na - 2, nb))] * sqrt(fa * (fa - 1.0));
                    }
                    if nb >= 2 {
                        a2_b += m[(row, idx(na, nb - 2))] * sqrt(fb * (fb - 1.0));
                    }
                    if na >= 1 && nb >= 1 {
                        ab += m[(row, idx(na - 1, nb - 1))] * sqrt(fa * fb);
                    }
                    if na >= 1 && nb + 1 < d {
                        ab_dag += m[(row, idx(na - 1, nb + 1))] * sqrt(fa * (fb + 1.0));
                    }
                }
            }
            let sq2 = core::f64::consts::SQRT_2;
            let mean = vec![sq2 * a_a.re, sq2 * a_a.im, sq2 * a_b.re, sq2 * a_b.im];
            let mut cov = vec![0.0; 16];
            let mut set = |i: usize, j: usize, v: f64| {
                cov[i * 4 + j] = v;
                cov[j * 4 + i] = v;
            };
            set(0, 0, a2_a.re + n_a + 0.5 - mean[0] * mean[0]);
            set(1, 1, -a2_a.re + n_a + 0.5 - mean[1] * mean[1]);
            set(0, 1, a2_a.im - mean[0] * mean[1]);
            set(2, 2, a2_b.re + n_b + 0.5 - mean[2] * mean[2]);
            set(3, 3, -a2_b.re + n_b + 0.5 - mean[3] * mean[3]);
            set(2, 3, a2_b.im - mean[2] * mean[3]);
            // Cross covariances from z₁ = ⟨a_A a_B⟩ and z₂ = ⟨a_A a_B†⟩:
            //   Cov(x_A, x_B) = Re z₁ + Re z₂ − ⟨x_A⟩⟨x_B⟩
            //   Cov(x_A, p_B) = Im z₁ − Im z₂ − ⟨x_A⟩⟨p_B⟩
            //   Cov(p_A, x_B) = Im z₁ + Im z₂ − ⟨p_A⟩⟨x_B⟩
            //   Cov(p_A, p_B) = Re z₂ − Re z₁ − ⟨p_A⟩⟨p_B⟩
            set(0, 2, ab.re + ab_dag.re - mean[0] * mean[2]);
            set(0, 3, ab.im - ab_dag.im - mean[0] * mean[3]);
            set(1, 2, ab.im + ab_dag.im - mean[1] * mean[2]);
            set(1, 3, ab_dag.re - ab.re - mean[1] * mean[3]);
            Ok(MomentData {
                modes: Modes::Two,
                mean,
                cov,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Small real matrices
// ---------------------------------------------------------------------------

/// Small dense real matrix (row-major), sized for symplectic work: 2×2 or
/// 4×4 in practice.
#[derive(Debug, Clone, PartialEq)]
pub struct RMat {
    n: usize,
    data: Vec<f64>,
}

impl RMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    /// The symplectic form Ω = ⊕ [[0, 1], [−1, 0]] on `n_modes` modes.
    pub fn omega(n_modes: usize) -> Self {
        let mut m = Self::zeros(2 * n_modes);
        for k in 0..n_modes {
            m.set(2 * k, 2 * k + 1, 1.0);
            m.set(2 * k + 1, 2 * k, -1.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mul(&self, rhs: &RMat) -> RMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = RMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.at(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * rhs.at(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> RMat {
        let n = self.n;
        let mut out = RMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.at(i, j));
            }
        }
        out
    }

    pub fn max_abs_diff(&self, rhs: &RMat) -> f64 {
        self.data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| fabs(a - b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|&x| fabs(x)).fold(0.0, f64::max)
    }

    /// Deviation of S Ω Sᵀ from Ω — zero for a symplectic matrix.
    pub fn symplectic_defect(&self) -> f64 {
        let n_modes = self.n / 2;
        let omega = RMat::omega(n_modes);
        self.mul(&omega)
            .mul(&self.transpose())
            .max_abs_diff(&omega)
    }

    fn to_cmat(&self) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| Complex64::new(self.at(i, j), 0.0))
    }

    /// Eigendecomposition of a symmetric matrix; eigenvalues ascending,
    /// eigenvectors exactly real (columns).
    pub fn sym_eig(&self) -> Result<(Vec<f64>, RMat)> {
        let eig = linalg::eigh(&self.to_cmat())?;
        let n = self.n;
        let mut vectors = RMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                vectors.set(i, j, eig.vectors[(i, j)].re);
            }
        }
        Ok((eig.values, vectors))
    }

    /// `V f(Λ) Vᵀ` for a symmetric matrix.
    pub fn sym_func(&self, mut f: impl FnMut(f64) -> f64) -> Result<RMat> {
        let (values, vectors) = self.sym_eig()?;
        let n = self.n;
        let mut scaled = RMat::zeros(n);
        for j in 0..n {
            let fj = f(values[j]);
            for i in 0..n {
                scaled.set(i, j, vectors.at(i, j) * fj);
            }
        }
        Ok(scaled.mul(&vectors.transpose()))
    }
}

// ---------------------------------------------------------------------------
// Symplectic invariants and eigenvalues
// ---------------------------------------------------------------------------

/// The invariants that enter the two-mode uncertainty machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticInvariants {
    /// det V.
    pub det_v: f64,
    /// For two modes, Δ = det A + det B + 2 det C; absent on one mode.
    pub delta: Option<f64>,
}

/// Computes det V (and Δ on two modes).
pub fn symplectic_invariants(m: &MomentData) -> SymplecticInvariants {
    match m.modes {
        Modes::One => SymplecticInvariants {
            det_v: m.det_cov(),
            delta: None,
        },
        Modes::Two => {
            let (da, db, dc) = m.block_dets();
            SymplecticInvariants {
                det_v: m.det_cov(),
                delta: Some(da + db + 2.0 * dc),
            }
        }
    }
}

/// Symplectic eigenvalues (ν₊, ν₋), ν₊ ≥ ν₋.
///
/// One mode: ν = √det V, returned twice. Two modes:
/// ν±² = (Δ ± √(Δ² − 4 det V)) / 2. A radicand that is negative beyond
/// roundoff, or det V ≤ 0, is a domain error — such a V is not a physical
/// covariance matrix.
pub fn symplectic_eigenvalues(m: &MomentData) -> Result<(f64, f64)> {
    let inv = symplectic_invariants(m);
    if inv.det_v <= 0.0 {
        return Err(Error::Domain {
            what: "det V",
            value: inv.det_v,
        });
    }
    match inv.delta {
        None => {
            let nu = sqrt(inv.det_v);
            Ok((nu, nu))
        }
        Some(delta) => {
            let radicand = delta * delta - 4.0 * inv.det_v;
            let scale = (delta * delta).max(1.0);
            if radicand < -1e-10 * scale {
                return Err(Error::Domain {
                    what: "Δ² − 4 det V",
                    value: radicand,
                });
            }
            let root = sqrt(radicand.max(0.0));
            let hi = (delta + root) / 2.0;
            let lo = (delta - root) / 2.0;
            if lo <= 0.0 {
                return Err(Error::Domain {
                    what: "ν₋²",
                    value: lo,
                });
            }
            Ok((sqrt(hi), sqrt(lo)))
        }
    }
}

// ---------------------------------------------------------------------------
// Williamson normal form
// ---------------------------------------------------------------------------

/// Result of the Williamson decomposition V = S · diag(ν₁,ν₁,ν₂,ν₂,…) · Sᵀ.
#[derive(Debug, Clone)]
pub struct Williamson {
    pub s: RMat,
    /// Symplectic eigenvalues, descending — the larger ν sits on the first
    /// mode of the normal form.
    pub nu: Vec<f64>,
}

/// Williamson decomposition of a positive definite covariance matrix.
///
/// Construction: with A = V^{−1/2} Ω V^{−1/2} (real antisymmetric), the
/// Hermitian matrix iA has eigenpairs ±1/ν_j with eigenvectors z_j, z̄_j.
/// Writing z_j = (u_j − i w_j)/√2 for the +1/ν_j vectors, the columns
/// (u_j, w_j) form an orthogonal O with OᵀAO in canonical antisymmetric
/// form, and S = V^{1/2} O D^{−1/2} does the job. Orthogonality of all the
/// u, w vectors — including for degenerate ν — is automatic, because ±1/ν
/// eigenspaces of a Hermitian matrix are orthogonal and z̄ always lives in
/// the opposite one.
pub fn williamson(m: &MomentData) -> Result<Williamson> {
    let n = m.dim();
    let n_modes = m.n_modes();
    let v = RMat::from_rows(n, m.cov.clone());
    // V must be symmetric positive definite.
    let sym_dev = v.max_abs_diff(&v.transpose());
    if sym_dev > 1e-9 * v.max_abs().max(1.0) {
        return Err(Error::NotHermitian { dev: sym_dev });
    }
    let (vals, _) = v.sym_eig()?;
    if vals[0] <= 0.0 {
        return Err(Error::NotPsd { min_eig: vals[0] });
    }
    let v_sqrt = v.sym_func(sqrt)?;
    let v_inv_sqrt = v.sym_func(|x| 1.0 / sqrt(x))?;
    let a = v_inv_sqrt.mul(&RMat::omega(n_modes)).mul(&v_inv_sqrt);
    // iA is Hermitian.
    let ia = CMat::from_fn(n, n, |i, j| Complex64::new(0.0, a.at(i, j)));
    let eig = linalg::eigh(&ia)?;
    // Positive eigenvalues 1/ν_j sit in the upper half, ascending — which
    // orders ν descending, the convention used throughout.
    let mut o = RMat::zeros(n);
    let mut nu = Vec::with_capacity(n_modes);
    for (block, idx) in (n_modes..n).enumerate() {
        let mu = eig.values[idx];
        if mu <= 0.0 {
            return Err(Error::NumericInconsistency {
                what: "Williamson eigenvalue pairing",
                value: mu,
            });
        }
        nu.push(1.0 / mu);
        let sq2 = core::f64::consts::SQRT_2;
        for row in 0..n {
            let z = eig.vectors[(row, idx)];
            o.set(row, 2 * block, sq2 * z.re);
            o.set(row, 2 * block + 1, -(sq2 * z.im));
        }
    }
    // S = V^{1/2} O D^{−1/2}.
    let mut d_inv_sqrt = RMat::zeros(n);
    for (j, &nu_j) in nu.iter().enumerate() {
        let w = 1.0 / sqrt(nu_j);
        d_inv_sqrt.set(2 * j, 2 * j, w);
        d_inv_sqrt.set(2 * j + 1, 2 * j + 1, w);
    }
    let s = v_sqrt.mul(&o).mul(&d_inv_sqrt);
    let defect = s.symplectic_defect();
    if defect > 1e-8 * s.max_abs().max(1.0) {
        return Err(Error::NotSymplectic { dev: defect });
    }
    // Reconstruction check: V = S D Sᵀ.
    let mut d_full = RMat::zeros(n);
    for (j, &nu_j) in nu.iter().enumerate() {
        d_full.set(2 * j, 2 * j, nu_j);
        d_full.set(2 * j + 1, 2 * j + 1, nu_j);
    }
    let rebuilt = s.mul(&d_full).mul(&s.transpose());
    let dev = rebuilt.max_abs_diff(&v);
    if dev > 1e-8 * v.max_abs().max(1.0) {
        return Err(Error::NumericInconsistency {
            what: "Williamson reconstruction",
            value: dev,
        });
    }
    Ok(Williamson { s, nu })
}

// ---------------------------------------------------------------------------
// Bloch–Messiah decomposition
// ---------------------------------------------------------------------------

/// Result of the Bloch–Messiah factorization S = O1 · Z · O2 with O1, O2
/// orthogonal symplectic and Z = ⊕ diag(e^{r_j}, e^{−r_j}).
#[derive(Debug, Clone)]
pub struct BlochMessiah {
    pub o1: RMat,
    /// Squeeze parameters, descending, r_j ≥ 0.
    pub r: Vec<f64>,
    pub o2: RMat,
}

/// Factors a symplectic matrix into passive · squeeze · passive.
///
/// Via the polar decomposition S = P·O: P = (SSᵀ)^{1/2} is symmetric
/// positive definite *and* symplectic, so its eigenvalues come in pairs
/// e^{±r_j} with the e^{−r_j} eigenvector reachable from the e^{+r_j} one
/// as Ωᵀu. Assembling those pairs into an orthogonal symplectic O1 gives
/// P = O1 Z O1ᵀ and therefore S = O1 Z (O1ᵀ O).
pub fn bloch_messiah(s: &RMat) -> Result<BlochMessiah> {
    let n = s.n();
    let n_modes = n / 2;
    let defect = s.symplectic_defect();
    if defect > 1e-8 * s.max_abs().max(1.0) {
        return Err(Error::NotSymplectic { dev: defect });
    }
    let ssd = s.mul(&s.transpose());
    let (vals, vecs) = ssd.sym_eig()?;
    // Eigenvalues of SSᵀ are e^{±2r}; log halves them to ±r.
    // Pair up: eigenvalues > 1 pick their partner automatically; the
    // eigenvalue-1 subspace is paired greedily with w = Ωᵀu.
    let omega_t = RMat::omega(n_modes).transpose();
    let tol_one = 1e-9 * vals[n - 1].max(1.0);
    let mut pairs: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new(); // (r, u, w)
    let col = |m: &RMat, j: usize| -> Vec<f64> { (0..n).map(|i| m.at(i, j)).collect() };
    let apply = |m: &RMat, x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| m.at(i, j) * x[j]).sum())
            .collect()
    };
    // Descending eigenvalues > 1.
    for j in (0..n).rev() {
        if vals[j] > 1.0 + tol_one {
            let u = col(&vecs, j);
            let w = apply(&omega_t, &u);
            pairs.push((0.5 * log(vals[j]), u, w));
        }
    }
    // Eigenvalue-1 subspace: pick any unit vector u, pair it with Ωᵀu
    // (also in the subspace, orthogonal to u since Ω is antisymmetric),
    // project both directions out of the rest, and repeat.
    let mut ones: Vec<Vec<f64>> = (0..n)
        .filter(|&j| fabs(vals[j] - 1.0) <= tol_one)
        .map(|j| col(&vecs, j))
        .collect();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    while let Some(u) = ones.pop() {
        let w = apply(&omega_t, &u);
        pairs.push((0.0, u, w.clone()));
        // Re-orthonormalize the remainder against w (the popped u was
        // already orthogonal to the rest); one vector drops out because w
        // lies in their span.
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(ones.len().saturating_sub(1));
        for mut v in ones {
            let c = dot(&v, &w);
            for (vi, wi) in v.iter_mut().zip(w.iter()) {
                *vi -= c * wi;
            }
            for q in &kept {
                let c = dot(&v, q);
                for (vi, qi) in v.iter_mut().zip(q.iter()) {
                    *vi -= c * qi;
                }
            }
            let norm = sqrt(dot(&v, &v));
            if norm > 1e-8 {
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                kept.push(v);
            }
        }
        ones = kept;
    }
    if pairs.len() != n_modes {
        return Err(Error::NumericInconsistency {
            what: "Bloch–Messiah eigenvalue pairing",
            value: pairs.len() as f64,
        });
    }
    // Sort squeeze strengths descending and assemble O1.
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("NaN squeeze parameter"));
    let mut o1 = RMat::zeros(n);
    let mut r = Vec::with_capacity(n_modes);
    for (j, (rj, u, w)) in pairs.iter().enumerate() {
        r.push(*rj);
        for i in 0..n {
            o1.set(i, 2 * j, u[i]);
            o1.set(i, 2 * j + 1, w[i]);
        }
    }
    // Z and the second factor O2 = Z^{-1} O1ᵀ S.
    let mut z_inv = RMat::zeros(n);
    for (j, &rj) in r.iter().enumerate() {
        z_inv.set(2 * j, 2 * j, exp(-rj));
        z_inv.set(2 * j + 1, 2 * j + 1, exp(rj));
    }
    let o2 = z_inv.mul(&o1.transpose()).mul(s);
    // Self-checks: both factors orthogonal symplectic, and the product
    // reconstructs S.
    for (name, o) in [("O1", &o1), ("O2", &o2)] {
        let orth = o.mul(&o.transpose()).max_abs_diff(&RMat::identity(n));
        let symp = o.symplectic_defect();
        if orth > 1e-8 || symp > 1e-8 {
            return Err(Error::NumericInconsistency {
                what: if name == "O1" {
                    "Bloch–Messiah O1 factor"
                } else {
                    "Bloch–Messiah O2 factor"
                },
                value: orth.max(symp),
            });
        }
    }
    let mut z = RMat::zeros(n);
    for (j, &rj) in r.iter().enumerate() {
        z.set(2 * j, 2 * j, exp(rj));
        z.set(2 * j + 1, 2 * j + 1, exp(-rj));
    }
    let rebuilt = o1.mul(&z).mul(&o2);
    let dev = rebuilt.max_abs_diff(s);
    if dev > 1e-8 * s.max_abs().max(1.0) {
        return Err(Error::NumericInconsistency {
            what: "Bloch–Messiah reconstruction",
            value: dev,
        });
    }
    Ok(BlochMessiah { o1, r, o2 })
}

// ---------------------------------------------------------------------------
// Lifting symplectic matrices to Fock space
// ---------------------------------------------------------------------------

/// Extracts the N×N complex unitary u of an orthogonal symplectic matrix,
/// defined by the Heisenberg action U† a_k U = Σ_l u_kl a_l.
fn passive_to_unitary_matrix(o: &RMat) -> Result<Vec<Complex64>> {
    let n_modes = o.n() / 2;
    let mut u = vec![Complex64::new(0.0, 0.0); n_modes * n_modes];
    for k in 0..n_modes {
        for l in 0..n_modes {
            let re = o.at(2 * k, 2 * l);
            let im = o.at(2 * k + 1, 2 * l);
            // Consistency of the block structure [[Re, −Im], [Im, Re]].
            let dev = fabs(o.at(2 * k, 2 * l + 1) + im).max(fabs(o.at(2 * k + 1, 2 * l + 1) - re));
            if dev > 1e-8 {
                return Err(Error::NumericInconsistency {
                    what: "passive block structure",
                    value: dev,
                });
            }
            u[k * n_modes + l] = Complex64::new(re, im);
        }
    }
    Ok(u)
}

/// Hermitian H with e^{−iH} = u for a 2×2 unitary u.
///
/// Writes u = e^{iψ}·(cos χ + i sin χ n̂·σ) and returns H = −ψI − χ n̂·σ.
/// Every component is read off linearly from the entries (plus one atan2),
/// so near-degenerate u — in particular multiples of the identity with
/// rounding-level dirt — never routes through an ill-conditioned
/// eigenvector solve. (An eigenvalue-based variant did, and for u ≈ e^{iφ}I
/// could assign both eigendirections to the same axis, silently lifting a
/// different rotation.)
fn log_unitary_2x2(u: &[Complex64]) -> Result<[[Complex64; 2]; 2]> {
    let det = u[0] * u[3] - u[1] * u[2];
    if fabs(det.norm() - 1.0) > 1e-6 {
        return Err(Error::NotUnitary {
            dev: fabs(det.norm() - 1.0),
        });
    }
    let psi = 0.5 * det.arg();
    let ph = Complex64::from_polar(1.0, -psi);
    let v: Vec<Complex64> = u.iter().map(|z| z * ph).collect();
    let cos_chi = 0.5 * (v[0].re + v[3].re);
    let sx = 0.5 * (v[1].im + v[2].im);
    let sy = 0.5 * (v[1].re - v[2].re);
    let sz = 0.5 * (v[0].im - v[3].im);
    let sin_chi = sqrt(sx * sx + sy * sy + sz * sz);
    let chi = atan2(sin_chi, cos_chi);
    // Below the axis-resolution floor the rotation is ±I: at χ ≈ 0 the axis
    // is irrelevant because χ·n̂ vanishes, at χ ≈ π because e^{iπ n̂·σ} = −I
    // for every axis.
    let (nx, ny, nz) = if sin_chi > 1e-12 {
        (sx / sin_chi, sy / sin_chi, sz / sin_chi)
    } else {
        (0.0, 0.0, if cos_chi < 0.0 { 1.0 } else { 0.0 })
    };
    Ok([
        [
            Complex64::new(-psi - chi * nz, 0.0),
            Complex64::new(-chi * nx, chi * ny),
        ],
        [
            Complex64::new(-chi * nx, -chi * ny),
            Complex64::new(-psi + chi * nz, 0.0),
        ],
    ])
}

/// A symplectic matrix lifted to a Fock-space unitary, kept in factored
/// form so it can be applied without ever building a dense N×N matrix.
pub(crate) enum SymplecticLift {
    One {
        u: CMat,
    },
    Two {
        o1: fock::sector::BlockUnitary,
        za: CMat,
        zb: CMat,
        o2: fock::sector::BlockUnitary,
    },
}

impl SymplecticLift {
    /// U M U†.
    pub fn conjugate(&self, m: &CMat) -> CMat {
        match self {
            SymplecticLift::One { u } => u.mul(m).mul(&u.adjoint()),
            SymplecticLift::Two { o1, za, zb, o2 } => {
                let step = o2.conjugate_dense(m);
                let step = kron_conjugate(za, zb, &step);
                o1.conjugate_dense(&step)
            }
        }
    }

    /// Dense form (for the public operator API).
    pub fn to_dense(&self) -> CMat {
        match self {
            SymplecticLift::One { u } => u.clone(),
            SymplecticLift::Two { o1, za, zb, o2 } => {
                let z = za.kron(zb);
                o1.mul_dense(&z.mul(&o2.to_dense()))
            }
        }
    }

    pub fn unitarity_deviation(&self) -> f64 {
        match self {
            SymplecticLift::One { u } => u.unitarity_deviation(),
            SymplecticLift::Two { o1, za, zb, o2 } => o1
                .unitarity_deviation()
                .max(za.unitarity_deviation())
                .max(zb.unitarity_deviation())
                .max(o2.unitarity_deviation()),
        }
    }
}

/// (A ⊗ B) · M for d×d factors against a d²×c matrix.
fn kron_mul_left(a: &CMat, b: &CMat, m: &CMat) -> CMat {
    let d = a.rows();
    let cols = m.cols();
    // T[(j,k), :] = Σ_l B[k,l] M[(j,l), :]
    let mut t = CMat::zeros(d * d, cols);
    for j in 0..d {
        for k in 0..d {
            for l in 0..d {
                let w = b[(k, l)];
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                let src = m.row(j * d + l);
                let dst_row = j * d + k;
                let dst = &mut t.data_mut()[dst_row * cols..(dst_row + 1) * cols];
                for (o, s) in dst.iter_mut().zip(src.iter()) {
                    *o += w * s;
                }
            }
        }
    }
    // Y[(i,k), :] = Σ_j A[i,j] T[(j,k), :]
    let mut y = CMat::zeros(d * d, cols);
    for i in 0..d {
        for j in 0..d {
            let w = a[(i, j)];
            if w.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..d {
                let src = t.row(j * d + k);
                let dst_row = i * d + k;
                let dst = &mut y.data_mut()[dst_row * cols..(dst_row + 1) * cols];
                for (o, s) in dst.iter_mut().zip(src.iter()) {
                    *o += w * s;
                }
            }
        }
    }
    y
}

/// (A ⊗ B) M (A ⊗ B)†.
pub(crate) fn kron_conjugate(a: &CMat, b: &CMat, m: &CMat) -> CMat {
    let left = kron_mul_left(a, b, m);
    kron_mul_left(a, b, &left.adjoint()).adjoint()
}

/// Builds the factored Fock-space lift of a symplectic matrix.
pub(crate) fn symplectic_lift(s: &RMat, d: usize) -> Result<SymplecticLift> {
    match s.n() {
        2 => {
            // One mode: S = O1 Z O2 with O_i plain rotations.
            let bm = bloch_messiah(s)?;
            let theta1 = rotation_angle(&bm.o1)?;
            let theta2 = rotation_angle(&bm.o2)?;
            let u = phase_rotation(theta1, d)?
                .mat()
                .mul(squeeze(Complex64::new(bm.r[0], 0.0), d)?.mat())
                .mul(phase_rotation(theta2, d)?.mat());
            Ok(SymplecticLift::One { u })
        }
        4 => {
            let bm = bloch_messiah(s)?;
            let o1 = passive_lift(&bm.o1, d)?;
            let o2 = passive_lift(&bm.o2, d)?;
            let za = squeeze(Complex64::new(bm.r[0], 0.0), d)?.mat().clone();
            let zb = squeeze(Complex64::new(bm.r[1], 0.0), d)?.mat().clone();
            Ok(SymplecticLift::Two { o1, za, zb, o2 })
        }
        other => Err(Error::DimensionMismatch(format!(
            "symplectic lift supports 2x2 and 4x4 matrices, got {other}x{other}"
        ))),
    }
}

/// Rotation angle θ of a single-mode orthogonal symplectic matrix, matching
/// the transport of exp(−iθ a†a): M = [[cos θ, sin θ], [−sin θ, cos θ]].
fn rotation_angle(o: &RMat) -> Result<f64> {
    let dev = fabs(o.at(0, 0) - o.at(1, 1)).max(fabs(o.at(0, 1) + o.at(1, 0)));
    if dev > 1e-8 {
        return Err(Error::NumericInconsistency {
            what: "single-mode passive factor",
            value: dev,
        });
    }
    Ok(atan2(o.at(0, 1), o.at(0, 0)))
}

/// Lifts a two-mode orthogonal symplectic matrix to its Fock-space unitary
/// via the generator Ĥ = Σ H_kl a_k† a_l with e^{−iH} = u.
fn passive_lift(o: &RMat, d: usize) -> Result<fock::sector::BlockUnitary> {
    let u = passive_to_unitary_matrix(o)?;
    let h = log_unitary_2x2(&u)?;
    let minus_i = Complex64::new(0.0, -1.0);
    let g = [
        [h[0][0] * minus_i, h[0][1] * minus_i],
        [h[1][0] * minus_i, h[1][1] * minus_i],
    ];
    fock::passive_blocks(g, d)
}

/// Lifts a symplectic matrix to the unitary realizing it on Fock space:
/// the output U transports moments as mean → S·mean, V → S V Sᵀ.
pub fn symplectic_to_unitary(s: &RMat, d: usize) -> Result<ModeOperator> {
    let lift = symplectic_lift(s, d)?;
    let dev = lift.unitarity_deviation();
    if dev > Tolerances::DEFAULT.unitary {
        return Err(Error::NotUnitary { dev });
    }
    let (modes, label) = match s.n() {
        2 => (Modes::One, String::from("U[S]")),
        _ => (Modes::Two, String::from("U[S,2]")),
    };
    Ok(ModeOperator::from_parts(lift.to_dense(), modes, d, label))
}

// ---------------------------------------------------------------------------
// Reference Gaussian
// ---------------------------------------------------------------------------

/// Synthesizes the Gaussian state with the same first and second moments.
///
/// One mode: the covariance ellipse V = Rot(θ)·diag(v₊, v₋)·Rot(θ)ᵀ fixes a
/// squeezed thermal state D(α) S(ξ) τ(n̄) S(ξ)† D(α)† with n̄ = √det V − 1/2
/// and ξ = r e^{2iθ}, e^{2r} = v₊/√det V. Two modes: Williamson gives
/// V = S D Sᵀ; the reference is the lifted S applied to the thermal product
/// τ(ν₊ − 1/2) ⊗ τ(ν₋ − 1/2), then displaced.
///
/// Fails with `BelowHeisenberg` when a symplectic eigenvalue is below
/// 1/2 − tol.psd (no Gaussian state has such moments), and propagates the
/// truncation gate of the thermal factors under `tol.trunc`.
pub fn reference_gaussian(m: &MomentData, d: usize, tol: &Tolerances) -> Result<DensityMatrix> {
    match m.modes {
        Modes::One => {
            let (vxx, vxp, vpp) = (m.cov_at(0, 0), m.cov_at(0, 1), m.cov_at(1, 1));
            let det = m.det_cov();
            if det <= 0.0 {
                return Err(Error::Domain {
                    what: "det V",
                    value: det,
                });
            }
            let nu = sqrt(det);
            if nu < 0.5 - tol.psd {
                return Err(Error::BelowHeisenberg { nu });
            }
            let nu = nu.max(0.5);
            let nbar = nu - 0.5;
            // Principal axes of the covariance ellipse.
            let theta = 0.5 * atan2(2.0 * vxp, vxx - vpp);
            let avg = 0.5 * (vxx + vpp);
            let half_diff = sqrt(0.25 * (vxx - vpp) * (vxx - vpp) + vxp * vxp);
            let v_major = avg + half_diff;
            let r = 0.5 * log((v_major / nu).max(1.0));
            let xi = Complex64::from_polar(r, 2.0 * theta);
            let alpha = Complex64::new(
                m.mean[0] / core::f64::consts::SQRT_2,
                m.mean[1] / core::f64::consts::SQRT_2,
            );
            // Identity factors (r = 0 for isotropic covariances, α = 0 for
            // centered states) are skipped outright: exact, and it keeps the
            // common thermal/Fock reference path at a single matrix build.
            let mut rho = thermal_state(nbar, d, tol)?;
            if r > 0.0 {
                rho = squeeze(xi, d)?.conjugate_state(&rho)?;
            }
            if alpha.norm_sqr() > 0.0 {
                rho = displacement(alpha, d)?.conjugate_state(&rho)?;
            }
            Ok(rho)
        }
        Modes::Two => {
            let w = williamson(m)?;
            for &nu in &w.nu {
                if nu < 0.5 - tol.psd {
                    return Err(Error::BelowHeisenberg { nu });
                }
            }
            let tau_a = thermal_state((w.nu[0] - 0.5).max(0.0), d, tol)?;
            let tau_b = thermal_state((w.nu[1] - 0.5).max(0.0), d, tol)?;
            let thermal_product = tensor(&tau_a, &tau_b)?;
            let lift = symplectic_lift(&w.s, d)?;
            let dev = lift.unitarity_deviation();
            if dev > tol.unitary {
                return Err(Error::NotUnitary { dev });
            }
            let conjugated = lift.conjugate(thermal_product.mat());
            let alpha_a = Complex64::new(
                m.mean[0] / core::f64::consts::SQRT_2,
                m.mean[1] / core::f64::consts::SQRT_2,
            );
            let alpha_b = Complex64::new(
                m.mean[2] / core::f64::consts::SQRT_2,
                m.mean[3] / core::f64::consts::SQRT_2,
            );
            let displaced = if alpha_a.norm_sqr() + alpha_b.norm_sqr() > 0.0 {
                let da = displacement(alpha_a, d)?;
                let db = displacement(alpha_b, d)?;
                kron_conjugate(da.mat(), db.mat(), &conjugated)
            } else {
                conjugated
            };
            Ok(DensityMatrix::from_parts(
                displaced,
                Modes::Two,
                d,
                false,
                thermal_product.deficit(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{two_mode_squeeze, FockVector};
    use libm::{cos, sin};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: Tolerances = Tolerances::DEFAULT;

    fn coherent_vec(alpha: Complex64, d: usize) -> FockVector {
        let mut amps = Vec::with_capacity(d);
        let mut c = Complex64::new(libm::exp(-alpha.norm_sqr() / 2.0), 0.0);
        for n in 0..d {
            amps.push(c);
            c = c * alpha / sqrt((n + 1) as f64);
        }
        FockVector::renormalized(amps).unwrap()
    }

    fn number_density(n: usize, d: usize) -> DensityMatrix {
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[n] = Complex64::new(1.0, 0.0);
        FockVector::new(amps, &TOL).unwrap().to_density()
    }

    #[test]
    fn coherent_moments_match_closed_form() {
        let alpha = Complex64::new(1.0, 0.5);
        let rho = coherent_vec(alpha, 40).to_density();
        let m = moments_of(&rho, &TOL).unwrap();
        let sq2 = core::f64::consts::SQRT_2;
        assert!((m.mean[0] - sq2 * alpha.re).abs() < 1e-10);
        assert!((m.mean[1] - sq2 * alpha.im).abs() < 1e-10);
        assert!((m.cov_at(0, 0) - 0.5).abs() < 1e-10);
        assert!((m.cov_at(1, 1) - 0.5).abs() < 1e-10);
        assert!(m.cov_at(0, 1).abs() < 1e-10);
    }

    #[test]
    fn number_state_moments() {
        let rho = number_density(1, 12);
        let m = moments_of(&rho, &TOL).unwrap();
        assert!(m.mean[0].abs() < 1e-14 && m.mean[1].abs() < 1e-14);
        assert!((m.cov_at(0, 0) - 1.5).abs() < 1e-13);
        assert!((m.cov_at(1, 1) - 1.5).abs() < 1e-13);
        assert!((m.sqrt_det_v() - 1.5).abs() < 1e-12);
    }

    /// Brute-force oracle for cat-state moments: expectation values over a
    /// superposition of coherent states via the closed-form overlaps
    /// ⟨β|γ⟩ = exp(−|β|²/2 − |γ|²/2 + β̄γ), ⟨β|a|γ⟩ = γ⟨β|γ⟩, etc.
    fn cat_moments_oracle(alpha: f64, sign: f64) -> (f64, f64, f64) {
        let comps = [(alpha, 1.0), (-alpha, sign)];
        let overlap = |b: f64, g: f64| libm::exp(-b * b / 2.0 - g * g / 2.0 + b * g);
        let mut norm = 0.0;
        let mut a1 = 0.0;
        let mut a2 = 0.0;
        let mut nn = 0.0;
        for &(b, cb) in &comps {
            for &(g, cg) in &comps {
                let w = cb * cg * overlap(b, g);
                norm += w;
                a1 += w * g;
                a2 += w * g * g;
                nn += w * b * g;
            }
        }
        a1 /= norm;
        a2 /= norm;
        nn /= norm;
        // Vxx = ⟨a²⟩ + ⟨n⟩ + 1/2 − ⟨x⟩² (real α keeps everything real).
        let mean_x = core::f64::consts::SQRT_2 * a1;
        let vxx = a2 + nn + 0.5 - mean_x * mean_x;
        let vpp = -a2 + nn + 0.5;
        (mean_x, vxx, vpp)
    }

    #[test]
    fn odd_cat_moments_match_overlap_oracle() {
        let alpha = 1.2;
        let d = 40;
        // Odd cat ∝ |α⟩ − |−α⟩.
        let plus = coherent_vec(Complex64::new(alpha, 0.0), d);
        let mut amps: Vec<Complex64> = plus.amps().to_vec();
        let minus = coherent_vec(Complex64::new(-alpha, 0.0), d);
        for (a, b) in amps.iter_mut().zip(minus.amps()) {
            *a -= b;
        }
        let cat = FockVector::renormalized(amps).unwrap();
        let m = moments_of(&cat.to_density(), &TOL).unwrap();
        let (mean_x, vxx, vpp) = cat_moments_oracle(alpha, -1.0);
        assert!((m.mean[0] - mean_x).abs() < 1e-9);
        assert!((m.cov_at(0, 0) - vxx).abs() < 1e-9);
        assert!((m.cov_at(1, 1) - vpp).abs() < 1e-9);
        assert!(m.cov_at(0, 1).abs() < 1e-9);
    }

    /// Closed-form two-mode squeezed vacuum covariance.
    fn tmsv_cov(r: f64) -> Vec<f64> {
        let (ch, sh) = (libm::cosh(2.0 * r) / 2.0, libm::sinh(2.0 * r) / 2.0);
        vec![
            ch, 0.0, sh, 0.0, //
            0.0, ch, 0.0, -sh, //
            sh, 0.0, ch, 0.0, //
            0.0, -sh, 0.0, ch,
        ]
    }

    fn tmsv_density(r: f64, d: usize) -> DensityMatrix {
        let u = two_mode_squeeze(Complex64::new(r, 0.0), d).unwrap();
        let mut vac = vec![Complex64::new(0.0, 0.0); d * d];
        vac[0] = Complex64::new(1.0, 0.0);
        let psi = u.mat().matvec(&vac);
        let mut mat = CMat::zeros(d * d, d * d);
        mat.add_outer(&psi, 1.0);
        DensityMatrix::from_parts(mat, Modes::Two, d, false, 0.0)
    }

    #[test]
    fn tmsv_moments_match_closed_form() {
        let r = 0.6;
        let rho = tmsv_density(r, 24);
        let m = moments_of(&rho, &TOL.with_trunc(1e-6)).unwrap();
        let want = tmsv_cov(r);
        for i in 0..4 {
            assert!(m.mean[i].abs() < 1e-10);
            for j in 0..4 {
                assert!(
                    (m.cov_at(i, j) - want[i * 4 + j]).abs() < 1e-8,
                    "cov mismatch at ({i},{j})"
                );
            }
        }
        // Invariants: det V = 1/16, Δ = 1/2, ν± = 1/2.
        let inv = symplectic_invariants(&m);
        assert!((inv.det_v - 1.0 / 16.0).abs() < 1e-8);
        assert!((inv.delta.unwrap() - 0.5).abs() < 1e-8);
        let (np, nm) = symplectic_eigenvalues(&m).unwrap();
        assert!((np - 0.5).abs() < 1e-7 && (nm - 0.5).abs() < 1e-7);
    }

    #[test]
    fn thermal_product_symplectic_eigenvalues() {
        let d = 30;
        let ta = thermal_state(0.8, d, &TOL.with_trunc(1e-6)).unwrap();
        let tb = thermal_state(0.2, d, &TOL.with_trunc(1e-6)).unwrap();
        let joint = tensor(&ta, &tb).unwrap();
        let m = moments_of(&joint, &TOL.with_trunc(1e-6)).unwrap();
        let (np, nm) = symplectic_eigenvalues(&m).unwrap();
        assert!((np - 1.3).abs() < 1e-6);
        assert!((nm - 0.7).abs() < 1e-6);
    }

    /// Random symplectic built from rotation, squeeze, and beamsplitter
    /// transport factors.
    fn random_symplectic(rng: &mut ChaCha8Rng, n_modes: usize, squeeze_cap: f64) -> RMat {
        let n = 2 * n_modes;
        let mut s = RMat::identity(n);
        for _ in 0..6 {
            let choice: u8 = rng.gen_range(0..3);
            let f = match choice {
                0 => {
                    // per-mode rotations
                    let mut f = RMat::zeros(n);
                    for k in 0..n_modes {
                        let t: f64 = rng.gen_range(-3.0..3.0);
                        f.set(2 * k, 2 * k, cos(t));
                        f.set(2 * k, 2 * k + 1, sin(t));
                        f.set(2 * k + 1, 2 * k, -sin(t));
                        f.set(2 * k + 1, 2 * k + 1, cos(t));
                    }
                    f
                }
                1 => {
                    // per-mode squeezes
                    let mut f = RMat::zeros(n);
                    for k in 0..n_modes {
                        let r: f64 = rng.gen_range(-squeeze_cap..squeeze_cap);
                        f.set(2 * k, 2 * k, exp(r));
                        f.set(2 * k + 1, 2 * k + 1, exp(-r));
                    }
                    f
                }
                _ => {
                    if n_modes == 1 {
                        RMat::identity(n)
                    } else {
                        // real beamsplitter transport
                        let t: f64 = rng.gen_range(-1.5..1.5);
                        let (c, sn) = (cos(t), sin(t));
                        let mut f = RMat::zeros(n);
                        for q in 0..2 {
                            f.set(q, q, c);
                            f.set(q, q + 2, sn);
                            f.set(q + 2, q, -sn);
                            f.set(q + 2, q + 2, c);
                        }
                        f
                    }
                }
            };
            s = s.mul(&f);
        }
        s
    }

    #[test]
    fn williamson_recovers_synthetic_decompositions() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..30 {
            let s0 = random_symplectic(&mut rng, 2, 0.8);
            // Random ν ≥ 1/2, including exact degeneracy every few trials.
            let nu1: f64 = rng.gen_range(0.5..2.5);
            let nu2: f64 = if trial % 5 == 0 {
                nu1
            } else {
                rng.gen_range(0.5..nu1.max(0.51))
            };
            let (hi, lo) = if nu1 >= nu2 { (nu1, nu2) } else { (nu2, nu1) };
            let mut dmat = RMat::zeros(4);
            for (j, &v) in [hi, lo].iter().enumerate() {
                dmat.set(2 * j, 2 * j, v);
                dmat.set(2 * j + 1, 2 * j + 1, v);
            }
            let v = s0.mul(&dmat).mul(&s0.transpose());
            let m = MomentData {
                modes: Modes::Two,
                mean: vec![0.0; 4],
                cov: v.data().to_vec(),
            };
            let w = williamson(&m).unwrap();
            assert!(
                (w.nu[0] - hi).abs() < 1e-8 && (w.nu[1] - lo).abs() < 1e-8,
                "trial {trial}: ν mismatch {:?} vs ({hi}, {lo})",
                w.nu
            );
            // Reconstruction and symplecticity are checked inside
            // williamson; also compare against symplectic_eigenvalues.
            // The Δ-formula loses half the working precision when ν₊ ≈ ν₋
            // (Δ² − 4 det V cancels), so compare loosely.
            let (np, nm) = symplectic_eigenvalues(&m).unwrap();
            assert!((np - hi).abs() < 1e-6 && (nm - lo).abs() < 1e-6);
        }
    }

    #[test]
    fn bloch_messiah_factors_synthetic_symplectics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let s = random_symplectic(&mut rng, 2, 0.8);
            let bm = bloch_messiah(&s).unwrap();
            assert!(bm.r[0] >= bm.r[1] && bm.r[1] >= -1e-12);
        }
        // Orthogonal input: no squeezing.
        let mut rot = RMat::zeros(4);
        for (k, t) in [(0usize, 0.4f64), (1, -1.1)] {
            rot.set(2 * k, 2 * k, cos(t));
            rot.set(2 * k, 2 * k + 1, sin(t));
            rot.set(2 * k + 1, 2 * k, -sin(t));
            rot.set(2 * k + 1, 2 * k + 1, cos(t));
        }
        let bm = bloch_messiah(&rot).unwrap();
        assert!(bm.r[0].abs() < 1e-10 && bm.r[1].abs() < 1e-10);
        // Pure squeeze: recovered exactly.
        let mut z = RMat::zeros(4);
        for (j, r) in [(0usize, 0.7f64), (1, 0.3)] {
            z.set(2 * j, 2 * j, exp(r));
            z.set(2 * j + 1, 2 * j + 1, exp(-r));
        }
        let bm = bloch_messiah(&z).unwrap();
        assert!((bm.r[0] - 0.7).abs() < 1e-10 && (bm.r[1] - 0.3).abs() < 1e-10);
    }

    #[test]
    fn single_mode_lift_transports_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = 60;
        for _ in 0..5 {
            let s = random_symplectic(&mut rng, 1, 0.4);
            let u = symplectic_to_unitary(&s, d).unwrap();
            let rho = coherent_vec(Complex64::new(0.4, -0.3), d).to_density();
            let m0 = moments_of(&rho, &TOL).unwrap();
            let out = u.conjugate_state(&rho).unwrap();
            let m1 = moments_of(&out, &TOL.with_trunc(1e-8)).unwrap();
            // mean → S·mean
            for i in 0..2 {
                let want: f64 = (0..2).map(|j| s.at(i, j) * m0.mean[j]).sum();
                assert!((m1.mean[i] - want).abs() < 1e-6);
            }
            // V → S V Sᵀ
            let v0 = RMat::from_rows(2, m0.cov.clone());
            let want = s.mul(&v0).mul(&s.transpose());
            let got = RMat::from_rows(2, m1.cov.clone());
            assert!(got.max_abs_diff(&want) < 1e-6);
        }
    }

    #[test]
    fn two_mode_lift_transports_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = 18;
        for _ in 0..4 {
            let s = random_symplectic(&mut rng, 2, 0.25);
            let u = symplectic_to_unitary(&s, d).unwrap();
            // A mildly displaced product state.
            let rho_a = coherent_vec(Complex64::new(0.3, 0.1), d).to_density();
            let rho_b = coherent_vec(Complex64::new(-0.2, 0.2), d).to_density();
            let rho = tensor(&rho_a, &rho_b).unwrap();
            let m0 = moments_of(&rho, &TOL).unwrap();
            let out = u.conjugate_state(&rho).unwrap();
            let m1 = moments_of(&out, &TOL.with_trunc(1e-6)).unwrap();
            for i in 0..4 {
                let want: f64 = (0..4).map(|j| s.at(i, j) * m0.mean[j]).sum();
                assert!((m1.mean[i] - want).abs() < 1e-5, "mean transport failed");
            }
            let v0 = RMat::from_rows(4, m0.cov.clone());
            let want = s.mul(&v0).mul(&s.transpose());
            let got = RMat::from_rows(4, m1.cov.clone());
            assert!(
                got.max_abs_diff(&want) < 1e-5,
                "cov transport failed: dev {}",
                got.max_abs_diff(&want)
            );
        }
    }

    #[test]
    fn lift_handles_scalar_passive_factors() {
        // A p-stretched product squeeze factors into per-mode quarter
        // rotations around an x-stretched squeeze; those passive pieces are
        // multiples of the identity in the unitary picture, the corner where
        // an ill-conditioned eigenvector solve once lifted the wrong
        // rotation while staying perfectly unitary. Equal parameters add a
        // degenerate pairing subspace on top.
        let d = 14;
        let quarter = {
            let mut o = RMat::zeros(4);
            for k in 0..2 {
                o.set(2 * k, 2 * k + 1, 1.0);
                o.set(2 * k + 1, 2 * k, -1.0);
            }
            o
        };
        let squeeze_pair = |r1: f64, r2: f64| {
            let mut s = RMat::zeros(4);
            s.set(0, 0, exp(-r1));
            s.set(1, 1, exp(r1));
            s.set(2, 2, exp(-r2));
            s.set(3, 3, exp(r2));
            s
        };
        let cases = [
            squeeze_pair(0.183, 0.179),
            squeeze_pair(0.25, 0.25),
            squeeze_pair(0.02, 0.0),
            quarter,
        ];
        let rho_a = coherent_vec(Complex64::new(0.3, 0.1), d).to_density();
        let rho_b = coherent_vec(Complex64::new(-0.2, 0.2), d).to_density();
        let rho = tensor(&rho_a, &rho_b).unwrap();
        let m0 = moments_of(&rho, &TOL).unwrap();
        for (case, s) in cases.iter().enumerate() {
            let u = symplectic_to_unitary(s, d).unwrap();
            let out = u.conjugate_state(&rho).unwrap();
            let m1 = moments_of(&out, &TOL.with_trunc(1e-6)).unwrap();
            for i in 0..4 {
                let want: f64 = (0..4).map(|j| s.at(i, j) * m0.mean[j]).sum();
                assert!(
                    (m1.mean[i] - want).abs() < 1e-6,
                    "mean transport failed in case {case}"
                );
            }
            let v0 = RMat::from_rows(4, m0.cov.clone());
            let want = s.mul(&v0).mul(&s.transpose());
            let got = RMat::from_rows(4, m1.cov.clone());
            assert!(
                got.max_abs_diff(&want) < 1e-6,
                "cov transport failed in case {case}: dev {}",
                got.max_abs_diff(&want)
            );
        }
    }

    #[test]
    fn beamsplitter_transport_matches_lift_convention() {
        // The dense beamsplitter and the lift of its transport matrix must
        // act identically on states (they may differ by a global phase).
        let d = 14;
        let (theta, phi) = (0.6, 0.9);
        let bs = crate::fock::beamsplitter(theta, phi, d).unwrap();
        // Transport blocks from u_kl: [[Re, −Im], [Im, Re]].
        let u = [
            [
                Complex64::new(cos(theta), 0.0),
                Complex64::from_polar(sin(theta), phi),
            ],
            [
                -Complex64::from_polar(sin(theta), -phi),
                Complex64::new(cos(theta), 0.0),
            ],
        ];
        let mut s = RMat::zeros(4);
        for k in 0..2 {
            for l in 0..2 {
                s.set(2 * k, 2 * l, u[k][l].re);
                s.set(2 * k, 2 * l + 1, -u[k][l].im);
                s.set(2 * k + 1, 2 * l, u[k][l].im);
                s.set(2 * k + 1, 2 * l + 1, u[k][l].re);
            }
        }
        let lifted = symplectic_to_unitary(&s, d).unwrap();
        let rho_a = coherent_vec(Complex64::new(0.5, -0.1), d).to_density();
        let rho_b = coherent_vec(Complex64::new(0.2, 0.3), d).to_density();
        let rho = tensor(&rho_a, &rho_b).unwrap();
        let via_bs = bs.conjugate_state(&rho).unwrap();
        let via_lift = lifted.conjugate_state(&rho).unwrap();
        assert!(via_bs.mat().max_abs_diff(via_lift.mat()) < 1e-8);
    }

    #[test]
    fn reference_gaussian_roundtrips_gaussian_moments() {
        let d = 70;
        // Displaced squeezed thermal with a rotated squeeze axis.
        let tau = thermal_state(0.4, d, &TOL).unwrap();
        let sq = squeeze(Complex64::from_polar(0.5, 0.8), d).unwrap();
        let disp = displacement(Complex64::new(0.7, -0.4), d).unwrap();
        let rho = disp
            .conjugate_state(&sq.conjugate_state(&tau).unwrap())
            .unwrap();
        let m = moments_of(&rho, &TOL.with_trunc(1e-8)).unwrap();
        let reference = reference_gaussian(&m, d, &TOL.with_trunc(1e-8)).unwrap();
        let m_ref = moments_of(&reference, &TOL.with_trunc(1e-8)).unwrap();
        for i in 0..2 {
            assert!((m_ref.mean[i] - m.mean[i]).abs() < 1e-6);
            for j in 0..2 {
                assert!((m_ref.cov_at(i, j) - m.cov_at(i, j)).abs() < 1e-6);
            }
        }
        // The reference of a Gaussian state is the state itself.
        assert!(reference.mat().max_abs_diff(rho.mat()) < 1e-6);
    }

    #[test]
    fn reference_gaussian_of_cat_matches_cat_moments() {
        let d = 60;
        let alpha = 1.0;
        let plus = coherent_vec(Complex64::new(alpha, 0.0), d);
        let minus = coherent_vec(Complex64::new(-alpha, 0.0), d);
        let mut amps: Vec<Complex64> = plus.amps().to_vec();
        for (a, b) in amps.iter_mut().zip(minus.amps()) {
            *a -= b;
        }
        let cat = FockVector::renormalized(amps).unwrap();
        let m = moments_of(&cat.to_density(), &TOL).unwrap();
        let reference = reference_gaussian(&m, d, &TOL.with_trunc(1e-8)).unwrap();
        let m_ref = moments_of(&reference, &TOL.with_trunc(1e-8)).unwrap();
        for i in 0..2 {
            assert!((m_ref.mean[i] - m.mean[i]).abs() < 1e-6);
            for j in 0..2 {
                assert!((m_ref.cov_at(i, j) - m.cov_at(i, j)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn reference_gaussian_two_mode_roundtrip() {
        let d = 20;
        let rho = tmsv_density(0.45, d);
        let m = moments_of(&rho, &TOL.with_trunc(1e-7)).unwrap();
        let reference = reference_gaussian(&m, d, &TOL.with_trunc(1e-7)).unwrap();
        let m_ref = moments_of(&reference, &TOL.with_trunc(1e-6)).unwrap();
        for i in 0..4 {
            assert!((m_ref.mean[i] - m.mean[i]).abs() < 1e-5);
            for j in 0..4 {
                assert!(
                    (m_ref.cov_at(i, j) - m.cov_at(i, j)).abs() < 1e-5,
                    "two-mode reference cov mismatch at ({i},{j}): {} vs {}",
                    m_ref.cov_at(i, j),
                    m.cov_at(i, j)
                );
            }
        }
        // The reference is built through local squeezes and passives whose
        // truncated total-number sectors above n_A + n_B = d are incomplete,
        // so the two constructions of the same state agree only to the mass
        // the squeezed factors put there (~4e-5 at d = 20, r = 0.45).
        let dev = reference.mat().max_abs_diff(rho.mat());
        assert!(dev < 1e-4, "state mismatch: max abs diff {dev}");
    }

    #[test]
    fn reference_gaussian_rejects_subheisenberg_covariance() {
        let m = MomentData {
            modes: Modes::One,
            mean: vec![0.0, 0.0],
            cov: vec![0.3, 0.0, 0.0, 0.3],
        };
        assert!(matches!(
            reference_gaussian(&m, 20, &TOL),
            Err(Error::BelowHeisenberg { .. })
        ));
    }
}
