use num_complex::Complex64;

use super::ordered::{self, Accumulator, TermMap};
use super::WeylPoly;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::spectra::FockMatrix;

/// `a a† = a† a + 1`.
const KAPPA: Complex64 = Complex64::new(1.0, 0.0);

/// Normal-ordered polynomial `sum c_rs (a†)^r a^s` at a fixed oscillator
/// frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderPoly {
    terms: TermMap,
    omega: f64,
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidFrequency {
            value: omega,
            expected: "finite and > 0",
        })
    }
}

impl LadderPoly {
    pub fn zero(omega: f64) -> Result<Self> {
        check_omega(omega)?;
        Ok(Self {
            terms: TermMap::new(),
            omega,
        })
    }

    /// `c (a†)^r a^s`.
    pub fn monomial(omega: f64, r: u32, s: u32, c: Complex64) -> Result<Self> {
        Self::from_terms(omega, [((r, s), c)])
    }

    pub fn from_terms(
        omega: f64,
        terms: impl IntoIterator<Item = ((u32, u32), Complex64)>,
    ) -> Result<Self> {
        check_omega(omega)?;
        let mut acc = Accumulator::default();
        for (k, c) in terms {
            acc.push(k, c);
        }
        Ok(Self {
            terms: acc.finish(),
            omega,
        })
    }

    /// `a† a`.
    pub fn number(omega: f64) -> Result<Self> {
        Self::monomial(omega, 1, 1, Complex64::new(1.0, 0.0))
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    /// Coefficient of `(a†)^r a^s`.
    pub fn coeff(&self, r: u32, s: u32) -> Complex64 {
        self.terms.get(&(r, s)).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn same_frequency(&self, other: &Self) {
        assert!(
            self.omega == other.omega,
            "ladder polynomials at different frequencies ({} vs {})",
            self.omega,
            other.omega
        );
    }

    /// Panics if the frequencies differ.
    pub fn add(&self, other: &Self) -> Self {
        self.same_frequency(other);
        Self {
            terms: ordered::sum(&self.terms, &other.terms, 1.0),
            omega: self.omega,
        }
    }

    /// Panics if the frequencies differ.
    pub fn sub(&self, other: &Self) -> Self {
        self.same_frequency(other);
        Self {
            terms: ordered::sum(&self.terms, &other.terms, -1.0),
            omega: self.omega,
        }
    }

    /// Panics if the frequencies differ.
    pub fn mul(&self, other: &Self) -> Self {
        self.same_frequency(other);
        Self {
            terms: ordered::product(&self.terms, &other.terms, KAPPA),
            omega: self.omega,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            terms: ordered::scaled(&self.terms, s),
            omega: self.omega,
        }
    }

    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        if self.omega != other.omega {
            return false;
        }
        let scale = self
            .terms
            .values()
            .chain(other.terms.values())
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        self.terms
            .keys()
            .chain(other.terms.keys())
            .all(|&(r, s)| (self.coeff(r, s) - other.coeff(r, s)).norm() <= rel_tol * scale)
    }

    pub(crate) fn from_weyl(a: &WeylPoly, omega: f64) -> Result<Self> {
        check_omega(omega)?;
        let cx = Complex64::new(1.0 / (2.0 * omega).sqrt(), 0.0);
        let cp = Complex64::new(0.0, (omega / 2.0).sqrt());
        let x_img: TermMap = [((1, 0), cx), ((0, 1), cx)].into_iter().collect();
        let p_img: TermMap = [((1, 0), cp), ((0, 1), -cp)].into_iter().collect();
        Ok(Self {
            terms: ordered::substitute(a.term_map(), &x_img, &p_img, KAPPA),
            omega,
        })
    }

    /// Back to `(x, p)`: `a = (sqrt(w) x + i p / sqrt(w)) / sqrt(2)`,
    /// `a† = (sqrt(w) x - i p / sqrt(w)) / sqrt(2)`.
    pub fn to_weyl(&self) -> WeylPoly {
        let sw = self.omega.sqrt();
        let s2 = std::f64::consts::SQRT_2;
        let cx = Complex64::new(sw / s2, 0.0);
        let cp = Complex64::new(0.0, 1.0 / (sw * s2));
        let create: TermMap = [((1, 0), cx), ((0, 1), -cp)].into_iter().collect();
        let annihilate: TermMap = [((1, 0), cx), ((0, 1), cp)].into_iter().collect();
        WeylPoly::from_map(ordered::substitute(
            &self.terms,
            &create,
            &annihilate,
            Complex64::new(0.0, -1.0),
        ))
    }

    /// Matrix of the operator on `|0>, ..., |N-1>`:
    /// `<m| (a†)^r a^s |n> = sqrt(n!/(n-s)!) sqrt((n-s+r)!/(n-s)!)` when
    /// `m = n - s + r`.
    pub fn fock_matrix(&self, n: usize) -> Result<FockMatrix> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "truncation size must be >= 1".into(),
            ));
        }
        let mut m = CMatrix::zeros(n, n);
        for (&(r, s), &c) in &self.terms {
            let (r, s) = (r as usize, s as usize);
            for col in s..n {
                let row = col - s + r;
                if row < n {
                    m[(row, col)] += c * ladder_factor(r, s, col);
                }
            }
        }
        Ok(FockMatrix::new(Complex64::new(self.omega, 0.0), m))
    }

    /// Single entry `<row| L |col>` without building the matrix.
    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.terms
            .iter()
            .filter(|(&(r, s), _)| col >= s as usize && col - s as usize + r as usize == row)
            .map(|(&(r, s), &c)| c * ladder_factor(r as usize, s as usize, col))
            .sum()
    }
}

/// `sqrt(n!/(n-s)!) * sqrt((n-s+r)!/(n-s)!)` as running products of square
/// roots, so nothing overflows for large `n`.
fn ladder_factor(r: usize, s: usize, n: usize) -> f64 {
    let mid = n - s;
    let down: f64 = (mid + 1..=n).map(|j| (j as f64).sqrt()).product();
    let up: f64 = (mid + 1..=mid + r).map(|j| (j as f64).sqrt()).product();
    down * up
}
