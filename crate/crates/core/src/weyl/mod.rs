//! Polynomial operators in position `x` and momentum `p` with `[x, p] = i`.
//!
//! Every [`WeylPoly`] is kept in normal order, `sum c_mn x^m p^n` with all
//! `x` factors to the left, which makes the term map a canonical form: two
//! operators are equal exactly when their maps are.

mod ladder;
pub(crate) mod ordered;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use self::ordered::{Accumulator, TermMap};
use crate::canonical::CanonicalTransform;
use crate::error::{Error, Result};

pub use ladder::LadderPoly;

/// `p x = x p + KAPPA`.
const KAPPA: Complex64 = Complex64::new(0.0, -1.0);

/// Normal-ordered complex polynomial in `x` and `p`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeylPoly {
    terms: TermMap,
}

impl WeylPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, Complex64::new(1.0, 0.0))
    }

    pub fn p() -> Self {
        Self::monomial(0, 1, Complex64::new(1.0, 0.0))
    }

    /// `c x^m p^n`.
    pub fn monomial(m: u32, n: u32, c: Complex64) -> Self {
        Self::from_terms([((m, n), c)])
    }

    /// Builds from `((m, n), c)` pairs, summing duplicates.
    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Complex64)>) -> Self {
        let mut acc = Accumulator::default();
        for (k, c) in terms {
            acc.push(k, c);
        }
        Self {
            terms: acc.finish(),
        }
    }

    /// Polynomial in `x` alone from coefficients `[c0, c1, ...]`.
    pub fn in_x(coeffs: &[Complex64]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(m, &c)| ((m as u32, 0), c)))
    }

    pub(crate) fn from_map(terms: TermMap) -> Self {
        Self { terms }
    }

    /// Terms in ascending `(m, n)` order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    /// Coefficient of `x^m p^n` (zero if absent).
    pub fn coeff(&self, m: u32, n: u32) -> Complex64 {
        self.terms.get(&(m, n)).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// Total degree `m + n` of the highest term; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(m, n)| m + n).max().unwrap_or(0)
    }

    pub fn is_position_only(&self) -> bool {
        self.terms.keys().all(|&(_, n)| n == 0)
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_map(ordered::scaled(&self.terms, s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_map(ordered::sum(&self.terms, &other.terms, 1.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_map(ordered::sum(&self.terms, &other.terms, -1.0))
    }

    /// Weyl product, reordered with `p x = x p - i`.
    pub fn mul(&self, other: &Self) -> Self {
        Self::from_map(ordered::product(&self.terms, &other.terms, KAPPA))
    }

    pub fn pow(&self, k: u32) -> Self {
        Self::from_map(ordered::power(&self.terms, k, KAPPA))
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self::sub(&self.mul(other), &other.mul(self))
    }

    /// Formal Hermitian conjugate: `(c x^m p^n)^† = conj(c) p^n x^m`, reordered.
    pub fn adjoint(&self) -> Self {
        let mut acc = Accumulator::default();
        for (&(m, n), &c) in &self.terms {
            let reversed = Self::mul(
                &Self::monomial(0, n, c.conj()),
                &Self::monomial(m, 0, Complex64::new(1.0, 0.0)),
            );
            for (k, v) in reversed.terms {
                acc.push(k, v);
            }
        }
        Self::from_map(acc.finish())
    }

    /// Parity composed with time reversal: `c x^m p^n -> conj(c) (-1)^m x^m p^n`.
    pub fn pt_transform(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(m, n), &c)| {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    ((m, n), c.conj() * sign)
                })
                .collect(),
        }
    }

    pub fn is_pt_symmetric(&self) -> bool {
        self.pt_transform().approx_eq(self, ordered::PRUNE_RELATIVE)
    }

    pub fn is_hermitian(&self) -> bool {
        self.adjoint().approx_eq(self, ordered::PRUNE_RELATIVE)
    }

    /// True when `self - other` vanishes to `rel_tol` times the larger
    /// coefficient scale of the two operands.
    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        let scale = self.max_coeff().max(other.max_coeff());
        let keys = self.terms.keys().chain(other.terms.keys());
        keys.into_iter()
            .all(|&(m, n)| (self.coeff(m, n) - other.coeff(m, n)).norm() <= rel_tol * scale)
    }

    /// `d/dx` of a position-only polynomial.
    pub fn derivative_x(&self) -> Result<Self> {
        if !self.is_position_only() {
            return Err(Error::NotPositionOnly);
        }
        Ok(Self::from_terms(
            self.terms
                .iter()
                .filter(|(&(m, _), _)| m > 0)
                .map(|(&(m, _), &c)| ((m - 1, 0), c * f64::from(m))),
        ))
    }

    /// Value of a position-only polynomial at real `x`.
    pub fn eval_x(&self, x: f64) -> Result<Complex64> {
        if !self.is_position_only() {
            return Err(Error::NotPositionOnly);
        }
        Ok(self
            .terms
            .iter()
            .map(|(&(m, _), &c)| c * x.powi(m as i32))
            .sum())
    }

    /// Image under `x -> u11 x + u12 p`, `p -> u21 x + u22 p`.
    pub fn substitute_linear(&self, u: &CanonicalTransform) -> Result<Self> {
        u.check_determinant()?;
        let x_img = Self::from_terms([((1, 0), u.u11()), ((0, 1), u.u12())]);
        let p_img = Self::from_terms([((1, 0), u.u21()), ((0, 1), u.u22())]);
        Ok(Self::from_map(ordered::substitute(
            &self.terms,
            &x_img.terms,
            &p_img.terms,
            KAPPA,
        )))
    }

    /// `e^{u(x)} H e^{-u(x)}`, i.e. `H` with `p -> p + i u'(x)` and `x` fixed.
    pub fn gauge_conjugate(&self, u: &Self) -> Result<Self> {
        let du = u.derivative_x()?;
        let p_img = Self::add(&Self::p(), &du.scale(Complex64::new(0.0, 1.0)));
        Ok(Self::from_map(ordered::substitute(
            &self.terms,
            &Self::x().terms,
            &p_img.terms,
            KAPPA,
        )))
    }

    /// Rewrites in ladder operators at frequency `omega`:
    /// `x = (a + a†)/sqrt(2 omega)`, `p = i sqrt(omega/2) (a† - a)`.
    pub fn to_ladder(&self, omega: f64) -> Result<LadderPoly> {
        LadderPoly::from_weyl(self, omega)
    }

    pub(crate) fn term_map(&self) -> &TermMap {
        &self.terms
    }
}

impl fmt::Display for WeylPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(m, n), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            match m {
                0 => {}
                1 => write!(f, "·x")?,
                _ => write!(f, "·x^{m}")?,
            }
            match n {
                0 => {}
                1 => write!(f, "·p")?,
                _ => write!(f, "·p^{n}")?,
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:path) => {
        impl $tr<&WeylPoly> for &WeylPoly {
            type Output = WeylPoly;
            fn $method(self, rhs: &WeylPoly) -> WeylPoly {
                $inner(self, rhs)
            }
        }
        impl $tr for WeylPoly {
            type Output = WeylPoly;
            fn $method(self, rhs: WeylPoly) -> WeylPoly {
                $inner(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, WeylPoly::add);
forward_binop!(Sub, sub, WeylPoly::sub);
forward_binop!(Mul, mul, WeylPoly::mul);

impl Mul<Complex64> for &WeylPoly {
    type Output = WeylPoly;
    fn mul(self, rhs: Complex64) -> WeylPoly {
        self.scale(rhs)
    }
}

impl Mul<f64> for &WeylPoly {
    type Output = WeylPoly;
    fn mul(self, rhs: f64) -> WeylPoly {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

impl Neg for &WeylPoly {
    type Output = WeylPoly;
    fn neg(self) -> WeylPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}
