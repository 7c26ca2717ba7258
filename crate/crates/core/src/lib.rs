//! Numerical laboratory for the local semicircle law of Wigner matrices.
//!
//! The crate is organised around the objects the theory talks about:
//!
//! * [`ensemble`] samples Wigner, GOE/GUE, moment-matched and Erdős–Rényi matrices.
//! * [`semicircle`] holds the exact analytics of the semicircle law (density,
//!   Stieltjes transform `m`, quantiles, typical locations, `Ψ`).
//! * [`resolvent`] computes Green functions and checks the exact resolvent
//!   identities (Ward, Schur, minors, the `1/G_ii = -z - s + Y_i` decomposition).
//! * [`spectral`] turns eigenvalues and eigenvectors into rigidity, delocalization,
//!   counting, edge and sine-kernel statistics.
//! * [`tracy_widom`] evaluates `F₂` as a Fredholm determinant of the Airy kernel.
//! * [`hs`] implements the Helffer–Sjöstrand and contour functional calculi.
//! * [`verification`] is the Monte Carlo harness: domain grids, local-law sweeps,
//!   empirical stochastic domination and scaling fits.

pub mod airy;
pub mod ensemble;
pub mod error;
pub mod hs;
pub mod linalg;
pub mod quadrature;
pub mod resolvent;
pub mod semicircle;
pub mod spectral;
pub mod stats;
pub mod tracy_widom;
pub mod verification;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
