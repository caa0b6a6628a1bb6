//! Non-Hermitian quadratic Hamiltonians with real spectra.
//!
//! The crate builds operators as normal-ordered polynomials in `x` and `p`,
//! transforms them with linear canonical (unit-determinant) maps, and checks
//! the resulting spectra two ways: in closed form at the critical Fock
//! frequencies, and by diagonalizing finite number-basis truncations.
//!
//! - [`weyl`]: exact operator algebra with `[x, p] = i` and the ladder rewrite.
//! - [`canonical`]: 2x2 canonical transforms, generators and quadratic Hamiltonians.
//! - [`spectra`]: three-parameter oscillator, Fock truncations, isospectrality
//!   and pseudo-Hermiticity checks.
//! - [`linalg`]: dense complex eigenvalue machinery.
//! - [`wavefun`]: position-space Hermite functions, quadrature and node counts.
//! - [`cli`]: the `simtrans` command-line front end.

pub mod canonical;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod spectra;
pub mod wavefun;
pub mod weyl;

pub use num_complex::Complex64;

pub use crate::error::{Error, Result};

/// Shorthand for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
