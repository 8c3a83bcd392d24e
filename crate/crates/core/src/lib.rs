//! Numerics for continuous-variable states in a truncated Fock basis.
//!
//! The crate builds density matrices mode by mode under a photon-number
//! cutoff, extracts their quadrature moments, synthesizes the Gaussian
//! reference state with the same first and second moments, and evaluates a
//! family of uncertainty bounds that tighten the Robertson–Schrödinger
//! inequality √det V ≥ 1/2 using the state's entropy and its distance from
//! the Gaussian reference. On two modes the same machinery drives a
//! partial-transposition entanglement test that remains usable when the
//! covariance matrix alone is inconclusive.
//!
//! Conventions used throughout:
//!
//! * ħ = 1, quadratures x = (a + a†)/√2 and p = (a − a†)/(i√2), so
//!   [x, p] = i and the vacuum has Var(x) = Var(p) = 1/2.
//! * Covariance matrices are ordered (x₁, p₁, x₂, p₂, …) and defined with
//!   the symmetrized second moment, V_ij = ½⟨{r_i − ⟨r_i⟩, r_j − ⟨r_j⟩}⟩.
//! * The squeeze operator S(ξ) = exp[(ξ(a†)² − ξ̄a²)/2] with real ξ = r > 0
//!   stretches x: Var(x) = e^{2r}/2 on the squeezed vacuum.
//! * Entropies are in nats.
//!
//! The crate is `no_std` (with `alloc`); everything that touches the file
//! system, threads, or a terminal lives in the companion CLI crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod measures;
pub mod states;
pub mod tol;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use tol::Tolerances;
