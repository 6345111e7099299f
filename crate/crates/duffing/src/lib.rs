//! Steady states, photon statistics, and frequency-filtered emission spectra
//! of a single-mode resonator with an arbitrarily strong quartic
//! nonlinearity, in thermal equilibrium with its bath.
//!
//! The resonator is modelled by one of three Hamiltonians on a truncated
//! Fock space: the Kerr form `ω a†a + U a†a†aa`, the quartic (quantum
//! Duffing) form `ω a†a + U (a+a†)⁴`, or a general even power series in
//! `(a+a†)`. When the nonlinearity is comparable to the mode frequency the
//! usual optical master equation and input-output relations break down; the
//! dissipator has to be built on the exact energy eigenstates
//! ([`lindblad::build_eigenbasis_dissipator`]) and the measurable output
//! field on the positive/negative frequency components of the quadratures
//! ([`field::frequency_components`]). On top of the vectorized Liouvillian,
//! [`spectra`] evaluates one-photon spectra and frequency-resolved two-photon
//! correlation maps semi-analytically with weakly coupled two-level sensors,
//! and [`oracle`] provides independent brute-force cross-checks for both.
//!
//! All frequencies, rates, and temperatures are expressed in units of the
//! bare mode frequency `ω_a` unless a function says otherwise; temperatures
//! carry the Boltzmann constant.

pub mod error;
pub mod field;
pub mod fock;
pub mod lindblad;
pub mod oracle;
pub mod spectra;
pub mod thermal;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dense real matrix.
pub type RMatrix = nalgebra::DMatrix<f64>;
