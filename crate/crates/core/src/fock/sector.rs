//! Block structure of Gaussian unitaries in the truncated Fock basis.
//!
//! Every Gaussian unitary this crate needs commutes with a simple
//! photon-number bookkeeping rule, so its generator is block diagonal in a
//! known partition of the basis:
//!
//! * passives (beamsplitters, phase rotations) conserve the total photon
//!   number n_A + n_B,
//! * two-mode squeezing conserves the photon-number difference n_A − n_B,
//! * single-mode squeezing conserves photon-number parity,
//! * displacement conserves nothing (one full block).
//!
//! Exponentiating the generator block by block is exact — there is no
//! leakage between blocks to approximate away — and turns an O(N³) dense
//! eigendecomposition at N = d² into many O(d³) ones. The blocks are kept
//! as-is and applied to dense matrices by row/column combination, which is
//! what makes large parameter sweeps affordable.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{expm_skew_hermitian, CMat};

/// A unitary stored as diagonal blocks over a partition of the basis.
#[derive(Clone)]
pub(crate) struct BlockUnitary {
    dim: usize,
    blocks: Vec<Block>,
}

#[derive(Clone)]
pub(crate) struct Block {
    /// Global basis indices this block acts on, in block-row order.
    idx: Vec<usize>,
    mat: CMat,
}

/// Partition of the two-mode basis (row-major index n_A·d + n_B) by total
/// photon number n_A + n_B.
pub(crate) fn total_sectors(d: usize) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = alloc::vec![Vec::new(); 2 * d - 1];
    for na in 0..d {
        for nb in 0..d {
            groups[na + nb].push(na * d + nb);
        }
    }
    groups
}

/// Partition of the two-mode basis by photon-number difference n_A − n_B.
pub(crate) fn difference_sectors(d: usize) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = alloc::vec![Vec::new(); 2 * d - 1];
    for na in 0..d {
        for nb in 0..d {
            // shift the difference into 0..2d-1
            groups[na + (d - 1) - nb].push(na * d + nb);
        }
    }
    groups
}

/// Partition of the single-mode basis by photon-number parity.
pub(crate) fn parity_sectors(d: usize) -> Vec<Vec<usize>> {
    let even = (0..d).step_by(2).collect();
    let odd = (1..d).step_by(2).collect();
    alloc::vec![even, odd]
}

/// The trivial partition: one block spanning the whole basis.
pub(crate) fn full_sector(dim: usize) -> Vec<Vec<usize>> {
    alloc::vec![(0..dim).collect()]
}

impl BlockUnitary {
    /// Exponentiates a skew-Hermitian generator given entrywise by
    /// `g(row, col)` over the supplied basis partition.
    ///
    /// The closure is only evaluated inside blocks; entries that would
    /// couple different blocks are assumed zero (that is the caller's claim
    /// in choosing the partition, and the tests pin it).
    pub fn from_skew_generator(
        dim: usize,
        groups: &[Vec<usize>],
        g: impl Fn(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut blocks = Vec::new();
        for group in groups {
            if group.is_empty() {
                continue;
            }
            let b = group.len();
            let gen = CMat::from_fn(b, b, |i, j| g(group[i], group[j]));
            let mat = expm_skew_hermitian(&gen)?;
            blocks.push(Block {
                idx: group.clone(),
                mat,
            });
        }
        Ok(Self { dim, blocks })
    }

    /// Expands to a dense matrix.
    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for b in &self.blocks {
            for (bi, &gi) in b.idx.iter().enumerate() {
                for (bj, &gj) in b.idx.iter().enumerate() {
                    m[(gi, gj)] = b.mat[(bi, bj)];
                }
            }
        }
        m
    }

    /// `U · v`.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.dim];
        for b in &self.blocks {
            for (bi, &gi) in b.idx.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (bj, &gj) in b.idx.iter().enumerate() {
                    acc += b.mat[(bi, bj)] * v[gj];
                }
                out[gi] = acc;
            }
        }
        out
    }

    /// `U · M` by row combination; cost O(nnz(U) · cols(M)).
    pub fn mul_dense(&self, m: &CMat) -> CMat {
        assert_eq!(m.rows(), self.dim);
        let cols = m.cols();
        let mut out = CMat::zeros(self.dim, cols);
        for b in &self.blocks {
            for (bi, &gi) in b.idx.iter().enumerate() {
                // out[gi, :] = Σ_bj mat[bi, bj] · m[gj, :]
                for (bj, &gj) in b.idx.iter().enumerate() {
                    let w = b.mat[(bi, bj)];
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    let (srow, orow) = (m.row(gj), gi * cols);
                    let dst = &mut out.data_mut()[orow..orow + cols];
                    for (o, s) in dst.iter_mut().zip(srow.iter()) {
                        *o += w * s;
                    }
                }
            }
        }
        out
    }

    /// `M · U†` by column combination.
    pub fn mul_dense_right_adjoint(&self, m: &CMat) -> CMat {
        assert_eq!(m.cols(), self.dim);
        let rows = m.rows();
        let mut out = CMat::zeros(rows, self.dim);
        let mut gathered: Vec<Complex64> = Vec::new();
        for r in 0..rows {
            for b in &self.blocks {
                gathered.clear();
                gathered.extend(b.idx.iter().map(|&gj| m[(r, gj)]));
                for (bi, &gi) in b.idx.iter().enumerate() {
                    // (M U†)[r, gi] = Σ_bj M[r, gj] · conj(U[gi, gj])
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (bj, &val) in gathered.iter().enumerate() {
                        acc += val * b.mat[(bi, bj)].conj();
                    }
                    out[(r, gi)] = acc;
                }
            }
        }
        out
    }

    /// `U M U†`.
    pub fn conjugate_dense(&self, m: &CMat) -> CMat {
        self.mul_dense_right_adjoint(&self.mul_dense(m))
    }

    /// Worst blockwise deviation of U†U from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.mat.unitarity_deviation())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn covers_exactly_once(groups: &[Vec<usize>], dim: usize) {
        let mut seen = alloc::vec![0usize; dim];
        for g in groups {
            for &i in g {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn partitions_cover_basis() {
        covers_exactly_once(&total_sectors(5), 25);
        covers_exactly_once(&difference_sectors(5), 25);
        covers_exactly_once(&parity_sectors(7), 7);
        covers_exactly_once(&full_sector(9), 9);
    }

    #[test]
    fn block_exponential_matches_dense_exponential() {
        // A passive-style generator on d=4 two-mode space, exponentiated
        // blockwise and densely; results must agree entrywise.
        let d = 4;
        let dim = d * d;
        let theta = 0.37;
        let gen_entry = |i: usize, j: usize| -> Complex64 {
            let (ia, ib) = (i / d, i % d);
            let (ja, jb) = (j / d, j % d);
            let mut z = Complex64::new(0.0, 0.0);
            if ia == ja + 1 && ib + 1 == jb {
                z += Complex64::new(theta, 0.0)
                    * libm::sqrt(((ja + 1) * jb) as f64);
            }
            if ja == ia + 1 && jb + 1 == ib {
                z -= Complex64::new(theta, 0.0)
                    * libm::sqrt(((ia + 1) * ib) as f64);
            }
            z
        };
        let blockwise =
            BlockUnitary::from_skew_generator(dim, &total_sectors(d), gen_entry).unwrap();
        let dense_gen = CMat::from_fn(dim, dim, gen_entry);
        let dense = crate::linalg::expm(&dense_gen).unwrap();
        assert!(blockwise.to_dense().max_abs_diff(&dense) < 1e-12);
        assert!(blockwise.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn dense_products_match_block_products() {
        let d = 4;
        let dim = d * d;
        let r = 0.3;
        let gen_entry = |i: usize, j: usize| -> Complex64 {
            let (ia, ib) = (i / d, i % d);
            let (ja, jb) = (j / d, j % d);
            let mut z = Complex64::new(0.0, 0.0);
            if ia == ja + 1 && ib == jb + 1 {
                z += Complex64::new(r, 0.0) * libm::sqrt(((ja + 1) * (jb + 1)) as f64);
            }
            if ja == ia + 1 && jb == ib + 1 {
                z -= Complex64::new(r, 0.0) * libm::sqrt(((ia + 1) * (ib + 1)) as f64);
            }
            z
        };
        let u = BlockUnitary::from_skew_generator(dim, &difference_sectors(d), gen_entry)
            .unwrap();
        let ud = u.to_dense();
        let m = CMat::from_fn(dim, dim, |i, j| {
            Complex64::new((i * 31 % 7) as f64 - 3.0, (j * 17 % 5) as f64 - 2.0)
        });
        assert!(u.mul_dense(&m).max_abs_diff(&ud.mul(&m)) < 1e-12);
        assert!(
            u.mul_dense_right_adjoint(&m)
                .max_abs_diff(&m.mul(&ud.adjoint()))
                < 1e-12
        );
        assert!(u.conjugate_dense(&m).max_abs_diff(&ud.mul(&m).mul(&ud.adjoint())) < 1e-12);
        let v: Vec<Complex64> = (0..dim)
            .map(|i| Complex64::new(i as f64 * 0.1, -(i as f64) * 0.05))
            .collect();
        let uv = u.matvec(&v);
        let uv_dense = ud.matvec(&v);
        let dev = uv
            .iter()
            .zip(uv_dense.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(dev < 1e-12);
    }
}
