//! Dense complex linear algebra for truncated Fock-space work.
//!
//! Everything operates on [`CMat`], a row-major matrix of `Complex64`. The
//! routines implemented here are the ones the rest of the crate actually
//! needs — multiplication, a Hermitian eigensolver, the matrix exponential,
//! and the positive-semidefinite square root — tuned for dimensions up to a
//! few hundred. The eigensolver is a cyclic Jacobi iteration with complex
//! rotations: slower than a tridiagonalization pipeline at large dimension,
//! but compact, numerically robust, and it keeps real inputs exactly real,
//! which the symplectic routines rely on.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use libm::{fabs, log, sqrt};
pub use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix entry by entry from `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a square diagonal matrix from real entries.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Raw row-major storage.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Borrow of one row as a slice.
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix product `self · rhs`.
    ///
    /// The complex product is assembled from four real matrix products so
    /// the inner loops stay contiguous and vectorizable; this is the hot
    /// path of the whole crate.
    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product shape mismatch: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        let (ar, ai) = split_planes(&self.data);
        let (br, bi) = split_planes(&rhs.data);
        let mut crr = vec![0.0f64; m * n];
        let mut cri = vec![0.0f64; m * n];
        rgemm(&ar, &br, &mut crr, m, k, n, 1.0);
        rgemm(&ai, &bi, &mut crr, m, k, n, -1.0);
        rgemm(&ar, &bi, &mut cri, m, k, n, 1.0);
        rgemm(&ai, &br, &mut cri, m, k, n, 1.0);
        let data = crr
            .iter()
            .zip(cri.iter())
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        CMat {
            rows: m,
            cols: n,
            data,
        }
    }

    /// Matrix–vector product `self · v`.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in self.row(i).iter().zip(v.iter()) {
                acc += a * b;
            }
            out.push(acc);
        }
        out
    }

    /// Entrywise sum.
    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| a + b)
            .collect();
        CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Entrywise difference.
    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| a - b)
            .collect();
        CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Scalar multiple.
    pub fn scaled(&self, s: Complex64) -> CMat {
        let data = self.data.iter().map(|a| a * s).collect();
        CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// In-place `self += s · rhs`.
    pub fn add_assign_scaled(&mut self, rhs: &CMat, s: Complex64) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a += s * b;
        }
    }

    /// In-place rank-one update `self += w · v v†` with real weight `w`.
    pub fn add_outer(&mut self, v: &[Complex64], w: f64) {
        assert_eq!(self.rows, v.len());
        assert_eq!(self.cols, v.len());
        let n = v.len();
        for i in 0..n {
            let vi = v[i] * w;
            let row = &mut self.data[i * n..(i + 1) * n];
            for (entry, vj) in row.iter_mut().zip(v.iter()) {
                *entry += vi * vj.conj();
            }
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Transpose without conjugation.
    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> CMat {
        let data = self.data.iter().map(|a| a.conj()).collect();
        CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Trace (sum of diagonal entries).
    pub fn trace(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows.min(self.cols) {
            acc += self[(i, i)];
        }
        acc
    }

    /// `Tr[self · rhs]` computed without forming the product.
    pub fn trace_product(&self, rhs: &CMat) -> Complex64 {
        assert_eq!(self.cols, rhs.rows);
        assert_eq!(self.rows, rhs.cols);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self[(i, j)] * rhs[(j, i)];
            }
        }
        acc
    }

    /// Real part of `Tr[self · rhs]` computed without forming the product.
    pub fn trace_product_re(&self, rhs: &CMat) -> f64 {
        assert_eq!(self.cols, rhs.rows);
        assert_eq!(self.rows, rhs.cols);
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                let b = rhs[(j, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|a| a.norm_sqr()).sum())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn herm_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn hermitized(&self) -> CMat {
        assert!(self.is_square());
        CMat::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &CMat) -> CMat {
        let (p, q) = (rhs.rows, rhs.cols);
        CMat::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * rhs[(i % p, j % q)]
        })
    }

    /// Largest entrywise deviation from another matrix.
    pub fn max_abs_diff(&self, rhs: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Checks U†U = I to the given entrywise tolerance.
    pub fn unitarity_deviation(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&CMat::identity(self.rows))
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:+.3e}{:+.3e}i ", z.re, z.im)?;
            }
            writeln!(f, "{}", if self.cols > 8 { "…" } else { "" })?;
        }
        if self.rows > 8 {
            writeln!(f, "  …")?;
        }
        write!(f, "]")
    }
}

fn split_planes(data: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let mut re = Vec::with_capacity(data.len());
    let mut im = Vec::with_capacity(data.len());
    for z in data {
        re.push(z.re);
        im.push(z.im);
    }
    (re, im)
}

/// `c += alpha · a · b` for row-major real matrices, i-k-j loop order so the
/// inner update runs over contiguous rows of `b` and `c`.
fn rgemm(a: &[f64], b: &[f64], c: &mut [f64], m: usize, k: usize, n: usize, alpha: f64) {
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let crow = &mut c[i * n..(i + 1) * n];
        for (kk, &aik) in arow.iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            let s = alpha * aik;
            let brow = &b[kk * n..(kk + 1) * n];
            for (cv, &bv) in crow.iter_mut().zip(brow.iter()) {
                *cv += s * bv;
            }
        }
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// `values` are ascending; column `j` of `vectors` is the eigenvector for
/// `values[j]`, so `A = V diag(values) V†`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigh {
    /// Rebuilds `V f(Λ) V†` for a real function of the eigenvalues.
    pub fn apply_fn(&self, mut f: impl FnMut(f64) -> f64) -> CMat {
        let n = self.values.len();
        let v = &self.vectors;
        let mut scaled = CMat::zeros(n, n);
        for j in 0..n {
            let fj = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] = v[(i, j)] * fj;
            }
        }
        scaled.mul(&v.adjoint())
    }
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized to `(A + A†)/2` before iterating, so slight
/// Hermiticity violations are averaged away rather than amplified; callers
/// that care should validate with [`CMat::herm_deviation`] first. Real
/// symmetric input yields exactly real eigenvectors.
pub fn eigh(a: &CMat) -> Result<Eigh> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(String::from(
            "eigh requires a square matrix",
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Eigh {
            values: Vec::new(),
            vectors: CMat::zeros(0, 0),
        });
    }
    let mut m = a.hermitized();
    let mut v = CMat::identity(n);
    let scale = m.max_abs().max(1.0);

    const MAX_SWEEPS: usize = 60;
    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if sqrt(off) <= 1e-15 * scale * (n as f64) {
            return Ok(finish_eigh(m, v));
        }
        // During the first sweeps skip entries already small relative to the
        // total off-diagonal mass; classic threshold strategy.
        let thresh = if sweep < 3 {
            0.2 * off / ((n * n) as f64)
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let abs_apq = apq.norm();
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if abs_apq * abs_apq <= thresh {
                    continue;
                }
                // Rotation is a no-op once the entry is negligible against
                // the local diagonal.
                if abs_apq <= 1e-300 || 1e16 * abs_apq <= fabs(app) + fabs(aqq) {
                    m[(p, q)] = Complex64::new(0.0, 0.0);
                    m[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                // Factor out the phase of a_pq, then a real Jacobi rotation:
                // with tau = (a_qq − a_pp)/(2|a_pq|), pick the smaller-angle
                // root t = sign(tau)/(|tau| + sqrt(1 + tau²)).
                let phase = apq / abs_apq;
                let tau = (aqq - app) / (2.0 * abs_apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = t * c;
                // Unitary J differs from identity in columns p,q:
                //   J[:,p] = (c, −s·conj(phase)),  J[:,q] = (s, c·conj(phase)).
                let sp = s * phase.conj();
                let cp = c * phase.conj();
                // Columns p and q of M (skipping rows p,q, fixed below).
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    let new_p = mip * c - miq * sp;
                    let new_q = mip * s + miq * cp;
                    m[(i, p)] = new_p;
                    m[(i, q)] = new_q;
                    // Hermitian mirror for the row entries.
                    m[(p, i)] = new_p.conj();
                    m[(q, i)] = new_q.conj();
                }
                // The 2x2 block in closed form.
                m[(p, p)] = Complex64::new(app - t * abs_apq, 0.0);
                m[(q, q)] = Complex64::new(aqq + t * abs_apq, 0.0);
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                // Accumulate V ← V·J.
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * sp;
                    v[(i, q)] = vip * s + viq * cp;
                }
            }
        }
    }
    Err(Error::NoConvergence {
        what: "Jacobi eigensolver",
        iterations: MAX_SWEEPS,
    })
}

fn finish_eigh(m: CMat, v: CMat) -> Eigh {
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("NaN eigenvalue"));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| v[(i, order[j])]);
    Eigh { values, vectors }
}

/// Matrix exponential.
///
/// Skew-Hermitian input (the generator of every unitary built in this
/// crate) is exponentiated through its eigendecomposition, which yields an
/// exactly unitary result up to roundoff. Anything else falls back to
/// scaling-and-squaring with a Taylor series on the scaled matrix.
pub fn expm(a: &CMat) -> Result<CMat> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(String::from(
            "expm requires a square matrix",
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let scale = a.max_abs();
    // Skew-Hermitian test: A + A† = 0.
    let mut skew_dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            skew_dev = skew_dev.max((a[(i, j)] + a[(j, i)].conj()).norm());
        }
    }
    if skew_dev <= 1e-12 * scale.max(1.0) {
        return expm_skew_hermitian(a);
    }
    expm_taylor(a)
}

/// Exponential of a skew-Hermitian matrix via `A = iH`, `exp(A) = V e^{iΛ} V†`.
pub fn expm_skew_hermitian(a: &CMat) -> Result<CMat> {
    let n = a.rows();
    // H = −iA is Hermitian.
    let h = a.scaled(Complex64::new(0.0, -1.0));
    let eig = eigh(&h)?;
    let v = &eig.vectors;
    let mut scaled = CMat::zeros(n, n);
    for j in 0..n {
        let phase = Complex64::new(0.0, eig.values[j]).exp();
        for i in 0..n {
            scaled[(i, j)] = v[(i, j)] * phase;
        }
    }
    Ok(scaled.mul(&v.adjoint()))
}

fn expm_taylor(a: &CMat) -> Result<CMat> {
    let n = a.rows();
    // One-norm (max column sum) drives the scaling.
    let mut norm1 = 0.0f64;
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            col += a[(i, j)].norm();
        }
        norm1 = norm1.max(col);
    }
    let squarings = if norm1 <= 0.5 {
        0
    } else {
        libm::ceil(log(norm1 / 0.5) / log(2.0)) as u32 + 1
    };
    let t = a.scaled(Complex64::new(1.0 / libm::exp2(squarings as f64), 0.0));
    let mut sum = CMat::identity(n);
    let mut term = CMat::identity(n);
    let mut converged = false;
    for k in 1..=64 {
        term = term.mul(&t).scaled(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
        if term.max_abs() <= 1e-18 * sum.max_abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "matrix exponential Taylor series",
            iterations: 64,
        });
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    Ok(sum)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-psd_tol, 0)` are treated as roundoff and clamped to
/// zero; anything more negative is rejected.
pub fn matrix_sqrt_psd(a: &CMat, psd_tol: f64) -> Result<CMat> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(String::from(
            "matrix_sqrt_psd requires a square matrix",
        )));
    }
    let eig = eigh(a)?;
    let scale = eig
        .values
        .iter()
        .fold(0.0f64, |acc, &x| acc.max(fabs(x)))
        .max(1.0);
    if let Some(&min) = eig
        .values
        .iter()
        .find(|&&x| x < -psd_tol * scale)
    {
        return Err(Error::NotPsd { min_eig: min });
    }
    Ok(eig
        .apply_fn(|x| if x > 0.0 { sqrt(x) } else { 0.0 })
        .hermitized())
}
