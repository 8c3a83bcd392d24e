//! Entanglement detection for two-mode states: the Simon–Duan test on
//! partially transposed covariance matrices, and the sharper criterion that
//! feeds the reduced partial transpose through the entropy–non-Gaussianity
//! bound machinery.
//!
//! The pipeline mirrors the analysis this library exists to reproduce:
//! partially transpose the state, Williamson-diagonalize the mirrored
//! covariance Ṽ, undo the symplectic part with the lifted unitary, and trace
//! out mode A. What remains, σ^B, would be a thermal-like state with
//! covariance ν̃₋·I if the original state were separable; entanglement
//! surfaces either as ν̃₋ < 1/2 (the classic PPT violation), as σ^B being
//! certifiably unphysical (purity above one, or a negative superfidelity
//! argument), or as σ^B violating the weak uncertainty bound
//! h(ν̃₋) ≥ −ln μ + 𝒩_g(σ^B).

use alloc::string::String;
use alloc::vec::Vec;

use libm::{fabs, log};
use num_complex::Complex64;

use crate::bounds::h;
use crate::error::{Error, Result};
use crate::fock::{
    displacement, partial_trace, partial_transpose_b, thermal_state, DensityMatrix, Modes,
    Subsystem,
};
use crate::gaussian::{
    moments_of, symplectic_eigenvalues, symplectic_lift, williamson, MomentData, RMat,
};
use crate::measures::{non_gaussianity, purity, superfidelity, von_neumann_entropy};
use crate::states::cat_thermal_tms;
use crate::tol::Tolerances;

/// Maximum allowed deviation of cov(σ^B) from ν̃₋·I — an end-to-end check
/// on the Williamson ordering, the unitary lift, and the reduction.
const SELF_CHECK: f64 = 1e-4;

/// Cutoff the sweep escalates to (once) when a cell fails its truncation
/// gate at the requested cutoff.
const ESCALATED_CUTOFF: usize = 28;

/// Which stage of the pipeline decided the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// ν̃₋ < 1/2: the mirrored covariance itself violates Heisenberg
    /// (subsumes the Simon–Duan test).
    HeisenbergViolation,
    /// σ^B is certifiably not a state: purity above one, or a negative
    /// superfidelity argument.
    UnphysicalPurity,
    /// The weak (or strong) uncertainty bound on σ^B is violated.
    NeViolation,
    Undetected,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::HeisenbergViolation => "heisenberg-violation",
            Branch::UnphysicalPurity => "unphysical-purity",
            Branch::NeViolation => "ne-violation",
            Branch::Undetected => "undetected",
        }
    }
}

/// Which test produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    SimonDuan,
    NeWeak,
    NeStrong,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::SimonDuan => "simon-duan",
            Criterion::NeWeak => "ne-weak",
            Criterion::NeStrong => "ne-strong",
        }
    }
}

/// Outcome of an entanglement test.
///
/// Fields beyond the verdict are filled in as far as the pipeline ran:
/// a detection at the covariance stage never builds σ^B, so its purity,
/// non-Gaussianity, and the bound's two sides stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementVerdict {
    pub detected: bool,
    pub branch: Branch,
    /// Symplectic eigenvalues (ν̃₊, ν̃₋) of the mirrored covariance.
    pub nu_tilde: (f64, f64),
    /// Purity μ of σ^B.
    pub mu_b: Option<f64>,
    /// Superfidelity non-Gaussianity 𝒩_g of σ^B (raw; a negative value
    /// means σ^B sits closer to its reference than any state could).
    pub ng_b: Option<f64>,
    /// Left side h(ν̃₋) of the decisive inequality.
    pub lhs: Option<f64>,
    /// Right side −ln μ + 𝒩_g (weak) or S + 𝒩 (strong).
    pub rhs: Option<f64>,
    pub criterion: Criterion,
}

impl EntanglementVerdict {
    fn covariance_only(
        detected: bool,
        branch: Branch,
        nu_tilde: (f64, f64),
        criterion: Criterion,
    ) -> Self {
        Self {
            detected,
            branch,
            nu_tilde,
            mu_b: None,
            ng_b: None,
            lhs: None,
            rhs: None,
            criterion,
        }
    }
}

/// Mirror reflection of a two-mode covariance under partial transposition
/// of mode B: p_B → −p_B, so the fourth row and column of V (and the fourth
/// mean entry) flip sign. Applying it twice returns the input.
pub fn pt_covariance(m: &MomentData) -> Result<MomentData> {
    if m.modes != Modes::Two {
        return Err(Error::DimensionMismatch(String::from(
            "pt_covariance expects two-mode moments",
        )));
    }
    let mut mean = m.mean.clone();
    mean[3] = -mean[3];
    let mut cov = m.cov.clone();
    for k in 0..4 {
        cov[3 * 4 + k] = -cov[3 * 4 + k];
        cov[k * 4 + 3] = -cov[k * 4 + 3];
    }
    Ok(MomentData {
        modes: Modes::Two,
        mean,
        cov,
    })
}

/// Simon–Duan test: entangled if the mirrored covariance violates
/// ν̃₋ ≥ 1/2 beyond `tol.bound`.
///
/// Only fails on moments that are not a covariance matrix at all
/// (non-positive det V); every physical state's moments are in domain.
pub fn simon_duan(m: &MomentData, tol: &Tolerances) -> Result<EntanglementVerdict> {
    let mirrored = pt_covariance(m)?;
    let (nu_p, nu_m) = symplectic_eigenvalues(&mirrored)?;
    let detected = nu_m < 0.5 - tol.bound;
    let branch = if detected {
        Branch::HeisenbergViolation
    } else {
        Branch::Undetected
    };
    Ok(EntanglementVerdict::covariance_only(
        detected,
        branch,
        (nu_p, nu_m),
        Criterion::SimonDuan,
    ))
}

/// Inverse of a symplectic matrix via S⁻¹ = Ωᵀ Sᵀ Ω.
fn symplectic_inverse(s: &RMat) -> RMat {
    let omega = RMat::omega(s.n() / 2);
    omega.transpose().mul(&s.transpose()).mul(&omega)
}

/// The full reduced-partial-transpose criterion, branches ordered from
/// cheapest and logically strongest to the final inequality:
///
/// 1. ν̃₋ < 1/2 − `tol.bound` → detected (`heisenberg-violation`);
/// 2. otherwise build σ^B = Tr_A[Û ρ^{T_B} Û†] with Û the lift of the
///    inverse Williamson symplectic of Ṽ, and verify cov(σ^B) = ν̃₋·I to
///    [`SELF_CHECK`];
/// 3. μ = Tr[(σ^B)²] > 1 + margin → detected (`unphysical-purity`);
/// 4. 𝒩_g of σ^B against the displaced thermal with n̄ = ν̃₋ − 1/2 and
///    σ^B's own first moments; a negative superfidelity argument → detected
///    (`unphysical-purity`);
/// 5. h(ν̃₋) < −ln μ + 𝒩_g − margin → detected (`ne-violation`);
/// 6. with `strong` set and σ^B positive semidefinite to `tol.psd`, the
///    entropy form is tried as well: h(ν̃₋) < S(σ^B) + 𝒩(σ^B) − margin
///    → detected (`ne-violation`, criterion `ne-strong`).
///
/// Branch 1 compares exact moments, so it uses `tol.bound` directly.
/// Branches 3–6 compare quantities carried through the truncated transport,
/// whose certified accuracy is only the self-check bar, so their detection
/// margin is `max(tol.bound, SELF_CHECK)`: a violation smaller than the
/// transport resolution is never reported.
///
/// A failed step-2 self-check means the transported state does not fit the
/// cutoff it was handed at, not that anything is wrong with the state, so
/// the evaluation is retried once with ρ embedded unchanged in a larger
/// space (doubled, capped at 16 extra levels). Only a persistent failure —
/// or any other numeric inconsistency surviving the retry — is an error.
///
/// The Williamson convention puts the smaller ν̃ on mode B, which is the
/// mode kept — validated end to end by the covariance self-check.
pub fn ne_criterion(
    rho: &DensityMatrix,
    strong: bool,
    tol: &Tolerances,
) -> Result<EntanglementVerdict> {
    match ne_criterion_at(rho, strong, tol) {
        Err(Error::NumericInconsistency { .. }) => {
            let d = rho.dim_per_mode();
            let bigger = rho.embed((2 * d).min(d + 16))?;
            ne_criterion_at(&bigger, strong, tol)
        }
        other => other,
    }
}

fn ne_criterion_at(
    rho: &DensityMatrix,
    strong: bool,
    tol: &Tolerances,
) -> Result<EntanglementVerdict> {
    if rho.modes() != Modes::Two {
        return Err(Error::DimensionMismatch(String::from(
            "ne_criterion expects a two-mode state",
        )));
    }
    let d = rho.dim_per_mode();
    let m = moments_of(rho, tol)?;
    let mirrored = pt_covariance(&m)?;
    let (nu_p, nu_m) = symplectic_eigenvalues(&mirrored)?;
    let nu_tilde = (nu_p, nu_m);
    if nu_m < 0.5 - tol.bound {
        return Ok(EntanglementVerdict::covariance_only(
            true,
            Branch::HeisenbergViolation,
            nu_tilde,
            Criterion::NeWeak,
        ));
    }

    let w = williamson(&mirrored)?;
    let lift = symplectic_lift(&symplectic_inverse(&w.s), d)?;
    let dev = lift.unitarity_deviation();
    if dev > tol.unitary {
        return Err(Error::NotUnitary { dev });
    }
    let pt = partial_transpose_b(rho)?;
    let sigma_ab = DensityMatrix::from_parts(
        lift.conjugate(pt.mat()),
        Modes::Two,
        d,
        true,
        pt.deficit(),
    );
    let sigma_b = partial_trace(&sigma_ab, Subsystem::B)?;

    let mb = moments_of(&sigma_b, tol)?;
    let mut iso_dev: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let target = if i == j { nu_m } else { 0.0 };
            iso_dev = iso_dev.max(fabs(mb.cov_at(i, j) - target));
        }
    }
    if iso_dev > SELF_CHECK {
        return Err(Error::NumericInconsistency {
            what: "reduced-state covariance vs ν̃₋·I",
            value: iso_dev,
        });
    }

    let margin = SELF_CHECK.max(tol.bound);
    let mu = purity(&sigma_b);
    if mu > 1.0 + margin {
        let mut v = EntanglementVerdict::covariance_only(
            true,
            Branch::UnphysicalPurity,
            nu_tilde,
            Criterion::NeWeak,
        );
        v.mu_b = Some(mu);
        return Ok(v);
    }

    let mut reference = thermal_state((nu_m - 0.5).max(0.0), d, tol)?;
    let alpha_b = Complex64::new(
        mb.mean[0] / core::f64::consts::SQRT_2,
        mb.mean[1] / core::f64::consts::SQRT_2,
    );
    if alpha_b.norm_sqr() > 0.0 {
        reference = displacement(alpha_b, d)?.conjugate_state(&reference)?;
    }
    let g = match superfidelity(&sigma_b, &reference, tol) {
        Ok(g) => g,
        Err(Error::GSquaredNegative { .. }) => {
            let mut v = EntanglementVerdict::covariance_only(
                true,
                Branch::UnphysicalPurity,
                nu_tilde,
                Criterion::NeWeak,
            );
            v.mu_b = Some(mu);
            return Ok(v);
        }
        Err(e) => return Err(e),
    };
    if g <= 0.0 {
        return Err(Error::NumericInconsistency {
            what: "superfidelity of σ^B vanished",
            value: g,
        });
    }
    let ng = -2.0 * log(g);
    let lhs = h(nu_m.max(0.5))?;
    let rhs = -log(mu) + ng;
    let mut verdict = EntanglementVerdict {
        detected: false,
        branch: Branch::Undetected,
        nu_tilde,
        mu_b: Some(mu),
        ng_b: Some(ng),
        lhs: Some(lhs),
        rhs: Some(rhs),
        criterion: Criterion::NeWeak,
    };
    if lhs < rhs - margin {
        verdict.detected = true;
        verdict.branch = Branch::NeViolation;
        return Ok(verdict);
    }

    if strong && sigma_b.check_psd(tol).is_ok() {
        // PSD is now verified, so the partial-transpose lineage flag can be
        // lifted for the spectral measures.
        let cleared = DensityMatrix::from_parts(
            sigma_b.mat().clone(),
            Modes::One,
            sigma_b.dim_per_mode(),
            false,
            sigma_b.deficit(),
        );
        let s_b = von_neumann_entropy(&cleared, tol)?;
        let n_b = non_gaussianity(&cleared, tol)?;
        let strong_rhs = s_b + n_b;
        verdict.criterion = Criterion::NeStrong;
        verdict.rhs = Some(strong_rhs);
        if lhs < strong_rhs - margin {
            verdict.detected = true;
            verdict.branch = Branch::NeViolation;
        }
    }
    Ok(verdict)
}

/// One cell of a parameter sweep over the coupled cat–thermal family.
#[derive(Debug)]
pub enum CellOutcome {
    Resolved {
        /// Cutoff actually used (the requested one, or the escalated one).
        cutoff: usize,
        /// Simon–Duan verdict on the same moments.
        simon_duan: bool,
        verdict: EntanglementVerdict,
    },
    Failed {
        error: Error,
    },
}

impl CellOutcome {
    pub fn detected(&self) -> Option<bool> {
        match self {
            CellOutcome::Resolved { verdict, .. } => Some(verdict.detected),
            CellOutcome::Failed { .. } => None,
        }
    }
}

/// Verdict grid over (r, n̄) for fixed cat amplitude α.
#[derive(Debug)]
pub struct SweepGrid {
    pub alpha: f64,
    pub r_values: Vec<f64>,
    pub nbar_values: Vec<f64>,
    /// Row-major over (r index, n̄ index).
    pub cells: Vec<CellOutcome>,
}

impl SweepGrid {
    pub fn at(&self, i_r: usize, i_n: usize) -> &CellOutcome {
        &self.cells[i_r * self.nbar_values.len() + i_n]
    }
}

/// Evaluates one sweep cell: builds the coupled cat–thermal state at the
/// given cutoff, runs both the Simon–Duan test and the full criterion, and
/// escalates the cutoff once (to [`ESCALATED_CUTOFF`]) if the first attempt
/// fails its truncation gate or a pipeline self-check — both symptoms of a
/// state that needs more levels, which rebuilding (unlike embedding) also
/// fixes at the source.
pub fn sweep_cell(
    alpha: f64,
    r: f64,
    nbar: f64,
    d: usize,
    strong: bool,
    tol: &Tolerances,
) -> CellOutcome {
    let attempt = |cutoff: usize| -> Result<CellOutcome> {
        let rho = cat_thermal_tms(alpha, nbar, r, cutoff, tol)?;
        let m = moments_of(&rho, tol)?;
        let sd = simon_duan(&m, tol)?;
        let verdict = ne_criterion(&rho, strong, tol)?;
        Ok(CellOutcome::Resolved {
            cutoff,
            simon_duan: sd.detected,
            verdict,
        })
    };
    match attempt(d) {
        Ok(cell) => cell,
        Err(Error::Truncation { .. } | Error::NumericInconsistency { .. })
            if d < ESCALATED_CUTOFF =>
        {
            match attempt(ESCALATED_CUTOFF) {
                Ok(cell) => cell,
                Err(error) => CellOutcome::Failed { error },
            }
        }
        Err(error) => CellOutcome::Failed { error },
    }
}

/// Runs [`sweep_cell`] over the full (r, n̄) grid in index order. Cells are
/// independent; callers needing parallelism can invoke `sweep_cell` per
/// cell and assemble by index to get the identical grid.
pub fn criterion_sweep(
    alpha: f64,
    r_values: &[f64],
    nbar_values: &[f64],
    d: usize,
    strong: bool,
    tol: &Tolerances,
) -> SweepGrid {
    let mut cells = Vec::with_capacity(r_values.len() * nbar_values.len());
    for &r in r_values {
        for &nbar in nbar_values {
            cells.push(sweep_cell(alpha, r, nbar, d, strong, tol));
        }
    }
    SweepGrid {
        alpha,
        r_values: r_values.to_vec(),
        nbar_values: nbar_values.to_vec(),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{tensor, two_mode_squeeze};
    use crate::linalg::CMat;
    use crate::states::{coherent, number_state, odd_cat, squeezed_thermal, vacuum};
    use approx::assert_abs_diff_eq;
    use libm::exp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: Tolerances = Tolerances::DEFAULT;

    fn tmsv(r: f64, d: usize) -> DensityMatrix {
        let product = tensor(
            &vacuum(d).unwrap().to_density(),
            &vacuum(d).unwrap().to_density(),
        )
        .unwrap();
        two_mode_squeeze(Complex64::new(r, 0.0), d)
            .unwrap()
            .conjugate_state(&product)
            .unwrap()
    }

    #[test]
    fn pt_covariance_mirrors_p_b_and_is_an_involution() {
        let a = Complex64::new(0.6, -0.2);
        let b = Complex64::new(-0.3, 0.8);
        let rho = tensor(
            &coherent(a, 16, &TOL).unwrap().to_density(),
            &coherent(b, 16, &TOL).unwrap().to_density(),
        )
        .unwrap();
        let m = moments_of(&rho, &TOL).unwrap();
        let mirrored = pt_covariance(&m).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(mirrored.mean[k], m.mean[k], epsilon = 1e-12);
        }
        assert_abs_diff_eq!(mirrored.mean[3], -m.mean[3], epsilon = 1e-12);
        let back = pt_covariance(&mirrored).unwrap();
        for k in 0..16 {
            assert_abs_diff_eq!(back.cov[k], m.cov[k], epsilon = 1e-15);
        }
        // A product state's mirrored covariance is still a physical one.
        let (_, nu_m) = symplectic_eigenvalues(&mirrored).unwrap();
        assert!(nu_m >= 0.5 - 1e-9);
    }

    #[test]
    fn tmsv_nu_tilde_matches_the_closed_form() {
        for &r in &[0.1, 0.3, 0.6] {
            let m = moments_of(&tmsv(r, 24), &TOL).unwrap();
            let mirrored = pt_covariance(&m).unwrap();
            let (nu_p, nu_m) = symplectic_eigenvalues(&mirrored).unwrap();
            assert_abs_diff_eq!(nu_m, exp(-2.0 * r) / 2.0, epsilon = 1e-6);
            assert_abs_diff_eq!(nu_p, exp(2.0 * r) / 2.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn simon_duan_detects_exactly_the_squeezed_cases() {
        let undetected = simon_duan(&moments_of(&tmsv(0.0, 16), &TOL).unwrap(), &TOL).unwrap();
        assert!(!undetected.detected);
        assert_eq!(undetected.branch, Branch::Undetected);
        assert_eq!(undetected.criterion, Criterion::SimonDuan);
        for &r in &[0.1, 0.3, 0.6] {
            let v = simon_duan(&moments_of(&tmsv(r, 24), &TOL).unwrap(), &TOL).unwrap();
            assert!(v.detected, "TMSV r = {r} must be detected");
            assert_eq!(v.branch, Branch::HeisenbergViolation);
        }
    }

    #[test]
    fn ne_criterion_branch_one_agrees_with_simon_duan() {
        let rho = tmsv(0.3, 20);
        let v = ne_criterion(&rho, false, &TOL).unwrap();
        assert!(v.detected);
        assert_eq!(v.branch, Branch::HeisenbergViolation);
        assert!(v.mu_b.is_none() && v.lhs.is_none());
        let sd = simon_duan(&moments_of(&rho, &TOL).unwrap(), &TOL).unwrap();
        assert_eq!(sd.detected, v.detected);
        assert_abs_diff_eq!(sd.nu_tilde.1, v.nu_tilde.1, epsilon = 1e-14);
    }

    #[test]
    fn separable_products_pass_the_full_pipeline_undetected() {
        // Mixed covariance shapes on both sides exercise the Williamson
        // ordering, the lift, and the self-check.
        let loose = TOL.with_trunc(1e-6);
        let rho = tensor(
            &odd_cat(Complex64::new(1.0, 0.0), 20, &loose)
                .unwrap()
                .to_density(),
            &thermal_state(0.8, 20, &loose).unwrap(),
        )
        .unwrap();
        let v = ne_criterion(&rho, false, &loose).unwrap();
        assert!(!v.detected);
        assert_eq!(v.branch, Branch::Undetected);
        let mu = v.mu_b.unwrap();
        assert!(mu > 0.0 && mu <= 1.0 + 1e-6);
        assert!(v.lhs.unwrap() >= v.rhs.unwrap() - 1e-6);
        assert!(v.nu_tilde.1 >= 0.5 - 1e-9);
    }

    #[test]
    fn strong_mode_runs_on_psd_reductions() {
        // The squeezed factor keeps ~2.5e-6 of window mass at this cutoff;
        // budget for it rather than inflating the space.
        let loose = TOL.with_trunc(1e-5);
        let rho = tensor(
            &squeezed_thermal(Complex64::new(0.3, 0.0), 0.4, 20, &loose).unwrap(),
            &thermal_state(0.5, 20, &loose).unwrap(),
        )
        .unwrap();
        let weak = ne_criterion(&rho, false, &loose).unwrap();
        assert!(!weak.detected);
        assert_eq!(weak.criterion, Criterion::NeWeak);
        let strong = ne_criterion(&rho, true, &loose).unwrap();
        assert!(!strong.detected);
        // σ^B of a separable Gaussian is a genuine (near-)thermal state, so
        // the strong evaluation runs and its bound also holds.
        assert_eq!(strong.criterion, Criterion::NeStrong);
        assert!(strong.lhs.unwrap() >= strong.rhs.unwrap() - 1e-6);
    }

    #[test]
    fn coupled_family_round_trip_through_the_sweep_cell() {
        let sweep_tol = TOL.with_trunc(0.05);
        // Zero squeezing: a product state, undetected.
        let cell = sweep_cell(1.0, 0.0, 0.5, 20, false, &sweep_tol);
        match &cell {
            CellOutcome::Resolved {
                simon_duan,
                verdict,
                ..
            } => {
                assert!(!simon_duan);
                assert!(!verdict.detected);
            }
            CellOutcome::Failed { error } => panic!("r = 0 cell failed: {error}"),
        }
        // Strong squeezing at low n̄: detected at the covariance stage.
        let cell = sweep_cell(1.0, 0.8, 0.2, 20, false, &sweep_tol);
        match &cell {
            CellOutcome::Resolved {
                simon_duan,
                verdict,
                ..
            } => {
                assert!(simon_duan);
                assert!(verdict.detected);
                assert_eq!(verdict.branch, Branch::HeisenbergViolation);
            }
            CellOutcome::Failed { error } => panic!("r = 0.8 cell failed: {error}"),
        }
        // A hopeless cutoff stays failed even after escalation.
        let cell = sweep_cell(1.0, 1.5, 30.0, 12, false, &sweep_tol);
        assert!(matches!(cell, CellOutcome::Failed { .. }));
    }

    #[test]
    fn sweep_grid_is_deterministic_and_indexed_row_major() {
        let sweep_tol = TOL.with_trunc(0.05);
        let r = [0.0, 0.4];
        let n = [0.1, 0.6, 1.1];
        let a = criterion_sweep(1.0, &r, &n, 16, false, &sweep_tol);
        let b = criterion_sweep(1.0, &r, &n, 16, false, &sweep_tol);
        assert_eq!(a.cells.len(), 6);
        for (ca, cb) in a.cells.iter().zip(b.cells.iter()) {
            match (ca, cb) {
                (
                    CellOutcome::Resolved {
                        cutoff: da,
                        simon_duan: sa,
                        verdict: va,
                    },
                    CellOutcome::Resolved {
                        cutoff: db,
                        simon_duan: sb,
                        verdict: vb,
                    },
                ) => {
                    assert_eq!(da, db);
                    assert_eq!(sa, sb);
                    assert_eq!(va, vb);
                }
                _ => panic!("grid cells differ or failed"),
            }
        }
        // The r = 0 row is all undetected.
        for i_n in 0..n.len() {
            match a.at(0, i_n) {
                CellOutcome::Resolved { verdict, .. } => assert!(!verdict.detected),
                CellOutcome::Failed { error } => panic!("r = 0 cell failed: {error}"),
            }
        }
    }

    #[test]
    fn detection_is_monotone_in_squeezing_on_the_test_grid() {
        let sweep_tol = TOL.with_trunc(0.05);
        for &nbar in &[0.2, 1.0] {
            let mut seen_detected = false;
            for k in 0..7 {
                let r = 0.15 * k as f64;
                match sweep_cell(1.0, r, nbar, 20, false, &sweep_tol) {
                    CellOutcome::Resolved { verdict, .. } => {
                        if seen_detected {
                            assert!(
                                verdict.detected,
                                "detection lost at r = {r}, n̄ = {nbar}"
                            );
                        }
                        seen_detected |= verdict.detected;
                    }
                    CellOutcome::Failed { error } => {
                        panic!("cell r = {r}, n̄ = {nbar} failed: {error}")
                    }
                }
            }
            assert!(seen_detected, "no detection up to r = 0.9 at n̄ = {nbar}");
        }
    }

    // Temporary calibration probe: measures the transport self-check
    // deviation as a function of build and evaluation dimension across the
    // sweep's hard cells. Run with
    //   cargo test -p fockbound --lib entanglement -- --ignored --nocapture
    #[test]
    #[ignore]
    fn calibration_probe() {
        use crate::fock::thermal_state;
        use std::io::Write as _;
        use std::time::Instant;

        let tol = Tolerances::DEFAULT.with_trunc(0.05);
        let mut out = std::io::stdout();

        // Replicates the pipeline middle at a fixed evaluation dimension and
        // reports (nu_m, dev, mu, ng-or-flag, lhs, rhs).
        let probe = |rho: &DensityMatrix| -> Result<(f64, f64, f64, Option<f64>, f64, Option<f64>)> {
            let d = rho.dim_per_mode();
            let m = moments_of(rho, &tol)?;
            let mirrored = pt_covariance(&m)?;
            let (_, nu_m) = symplectic_eigenvalues(&mirrored)?;
            let w = williamson(&mirrored)?;
            let lift = symplectic_lift(&symplectic_inverse(&w.s), d)?;
            let pt = partial_transpose_b(rho)?;
            let sigma_ab = DensityMatrix::from_parts(
                lift.conjugate(pt.mat()),
                Modes::Two,
                d,
                true,
                pt.deficit(),
            );
            let sigma_b = partial_trace(&sigma_ab, Subsystem::B)?;
            let mb = moments_of(&sigma_b, &tol)?;
            let mut dev: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let target = if i == j { nu_m } else { 0.0 };
                    dev = dev.max(fabs(mb.cov_at(i, j) - target));
                }
            }
            let mu = purity(&sigma_b);
            let mut reference = thermal_state((nu_m - 0.5).max(0.0), d, &tol)?;
            let alpha_b = Complex64::new(
                mb.mean[0] / core::f64::consts::SQRT_2,
                mb.mean[1] / core::f64::consts::SQRT_2,
            );
            if alpha_b.norm_sqr() > 0.0 {
                reference = displacement(alpha_b, d)?.conjugate_state(&reference)?;
            }
            let ng = match superfidelity(&sigma_b, &reference, &tol) {
                Ok(g) => Some(-2.0 * log(g)),
                Err(Error::GSquaredNegative { .. }) => None,
                Err(e) => return Err(e),
            };
            let lhs = h(nu_m.max(0.5))?;
            let rhs = ng.map(|n| -log(mu) + n);
            Ok((nu_m, dev, mu, ng, lhs, rhs))
        };

        let mut run = |alpha: f64, nbar: f64, r: f64, builds: &[usize], evals: &[usize]| {
            for &b in builds {
                let rho = match cat_thermal_tms(alpha, nbar, r, b, &tol) {
                    Ok(rho) => rho,
                    Err(e) => {
                        writeln!(out, "a={alpha} nb={nbar} r={r} build={b}: BUILD FAILED {e:?}")
                            .unwrap();
                        continue;
                    }
                };
                let deficit = rho.deficit();
                let mut passed = false;
                for &d_eval in evals {
                    if d_eval < b {
                        continue;
                    }
                    let t0 = Instant::now();
                    let emb = rho.embed(d_eval).unwrap();
                    match probe(&emb) {
                        Ok((nu_m, dev, mu, ng, lhs, rhs)) => {
                            let dt = t0.elapsed().as_secs_f64();
                            let ng_s = ng
                                .map(|n| alloc::format!("{n:+.5}"))
                                .unwrap_or_else(|| String::from("g2<0!"));
                            let rhs_s = rhs
                                .map(|x| alloc::format!("{:+.5}", x - lhs))
                                .unwrap_or_else(|| String::from("--"));
                            writeln!(
                                out,
                                "a={alpha} nb={nbar} r={r} build={b} def={deficit:.1e} eval={d_eval}: {dt:5.1}s dev={dev:.2e} nu-={nu_m:.4} mu={mu:.4} ng={ng_s} viol={rhs_s}"
                            )
                            .unwrap();
                            if dev <= SELF_CHECK {
                                passed = true;
                            }
                        }
                        Err(e) => {
                            writeln!(
                                out,
                                "a={alpha} nb={nbar} r={r} build={b} eval={d_eval}: ERR {e:?}"
                            )
                            .unwrap();
                        }
                    }
                    out.flush().unwrap();
                    if passed {
                        break;
                    }
                }
                if passed {
                    break;
                }
            }
        };

        // Detection-strip cells (α = 1) that fail marginally today.
        for &(nbar, r) in &[(1.2, 0.55), (1.6, 0.50), (2.0, 0.45), (3.0, 0.45)] {
            run(1.0, nbar, r, &[24], &[24, 28, 32, 36, 40, 44, 48]);
        }
        // Candidate unphysical-purity zone: large r, moderate n̄, ν̃₋ ≥ 1/2.
        for &(nbar, r) in &[
            (1.5, 0.70),
            (1.8, 0.75),
            (2.0, 0.75),
            (2.0, 0.80),
            (2.5, 0.80),
        ] {
            run(
                1.0,
                nbar,
                r,
                &[24, 28, 32, 36],
                &[24, 28, 32, 36, 40, 44, 48, 56],
            );
        }
        // The reduced state of a deep Simon–Duan cell (purity edge case).
        run(1.0, 0.1, 1.2, &[24, 28, 32], &[24, 32, 40, 48]);
        run(0.0, 0.1, 1.2, &[24, 28, 32], &[24, 32, 40, 48]);
        // Hopeless control: decay rate where nothing should resolve.
        run(1.0, 3.0, 1.0, &[24], &[24, 32, 40, 48]);
    }

    #[test]
    fn no_false_positives_on_random_separable_mixtures() {
        let d = 12;
        let loose = TOL.with_trunc(1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let single = |rng: &mut ChaCha8Rng| -> DensityMatrix {
            match rng.gen_range(0..4) {
                0 => thermal_state(rng.gen_range(0.0..0.8), d, &loose).unwrap(),
                1 => coherent(Complex64::new(rng.gen_range(-0.8..0.8), 0.0), d, &loose)
                    .unwrap()
                    .to_density(),
                2 => number_state(rng.gen_range(0..3), d).unwrap().to_density(),
                _ => squeezed_thermal(
                    Complex64::new(rng.gen_range(0.0..0.4), 0.0),
                    rng.gen_range(0.0..0.5),
                    d,
                    &loose,
                )
                .unwrap(),
            }
        };
        for trial in 0..50 {
            let terms = rng.gen_range(1..4);
            let mut weights: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            let mut acc = CMat::zeros(d * d, d * d);
            for &w in &weights {
                let product = tensor(&single(&mut rng), &single(&mut rng)).unwrap();
                for (dst, src) in acc.data_mut().iter_mut().zip(product.mat().data()) {
                    *dst += src * w;
                }
            }
            let rho = DensityMatrix::new(acc, Modes::Two, &loose).unwrap();
            let v = ne_criterion(&rho, false, &loose).unwrap();
            assert!(
                !v.detected,
                "false positive on separable mixture {trial}: {v:?}"
            );
        }
    }
}
