//! Linear canonical transformations of `(x, p)` and quadratic Hamiltonians.
//!
//! A [`CanonicalTransform`] maps `x -> u11 x + u12 p`, `p -> u21 x + u22 p`
//! with `u11 u22 - u21 u12 = 1`, so `[x, p] = i` survives. Complex entries
//! give non-unitary similarity transforms: the image of a Hermitian
//! Hamiltonian is generally non-Hermitian but keeps its spectrum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::weyl::WeylPoly;

/// `|det - 1|` allowed on construction.
pub const DET_TOL: f64 = 1e-12;

/// Below this `|theta|` the generator formulas switch to Taylor series.
const THETA_SERIES: f64 = 1e-6;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalTransform {
    u11: Complex64,
    u12: Complex64,
    u21: Complex64,
    u22: Complex64,
}

impl CanonicalTransform {
    /// Validates `|u11 u22 - u21 u12 - 1| <= 1e-12`.
    pub fn from_matrix(
        u11: Complex64,
        u12: Complex64,
        u21: Complex64,
        u22: Complex64,
    ) -> Result<Self> {
        let t = Self { u11, u12, u21, u22 };
        t.check_determinant()?;
        Ok(t)
    }

    pub fn identity() -> Self {
        Self {
            u11: ONE,
            u12: Complex64::new(0.0, 0.0),
            u21: Complex64::new(0.0, 0.0),
            u22: ONE,
        }
    }

    /// `x -> (x + i alpha p)/s`, `p -> (p + i beta x)/s` with `s = sqrt(1 + alpha beta)`.
    pub fn rath_mallick(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let s2 = ONE + alpha * beta;
        if s2.norm() <= f64::EPSILON * (1.0 + (alpha * beta).norm()) {
            return Err(Error::SingularParameters(format!(
                "1 + alpha*beta = 0 for alpha = {alpha}, beta = {beta}"
            )));
        }
        let inv = ONE / s2.sqrt();
        Ok(Self {
            u11: inv,
            u12: I * alpha * inv,
            u21: I * beta * inv,
            u22: inv,
        })
    }

    /// Conjugation by `exp((g/2) x^2)`: `x -> x`, `p -> p + i g x`.
    pub fn gauge(g: f64) -> Self {
        Self::gauge_complex(Complex64::new(g, 0.0))
    }

    /// [`gauge`](Self::gauge) with a complex strength.
    pub fn gauge_complex(g: Complex64) -> Self {
        Self {
            u11: ONE,
            u12: Complex64::new(0.0, 0.0),
            u21: I * g,
            u22: ONE,
        }
    }

    /// Transform generated by `(a, b, c)`:
    /// `u11 = cosh t - (c/t) sinh t`, `u12 = -(b/t) sinh t`,
    /// `u21 = (a/t) sinh t`, `u22 = cosh t + (c/t) sinh t`, `t^2 = c^2 - ab`.
    pub fn from_generator(g: &Generator) -> Self {
        Self::from_generator_theta(g, g.theta())
    }

    /// Same as [`from_generator`](Self::from_generator) with an explicit
    /// square-root branch for `theta`.
    pub fn from_generator_theta(g: &Generator, theta: Complex64) -> Self {
        let (ch, shc) = cosh_sinhc(theta);
        Self {
            u11: ch - g.c * shc,
            u12: -g.b * shc,
            u21: g.a * shc,
            u22: ch + g.c * shc,
        }
    }

    #[inline]
    pub fn u11(&self) -> Complex64 {
        self.u11
    }
    #[inline]
    pub fn u12(&self) -> Complex64 {
        self.u12
    }
    #[inline]
    pub fn u21(&self) -> Complex64 {
        self.u21
    }
    #[inline]
    pub fn u22(&self) -> Complex64 {
        self.u22
    }

    pub fn determinant(&self) -> Complex64 {
        self.u11 * self.u22 - self.u21 * self.u12
    }

    pub(crate) fn check_determinant(&self) -> Result<()> {
        let det = self.determinant();
        let deviation = (det - ONE).norm();
        if deviation <= DET_TOL && det.re.is_finite() && det.im.is_finite() {
            Ok(())
        } else {
            Err(Error::NonUnitDeterminant { det, deviation })
        }
    }

    /// Matrix product `self * other`: substituting with `other` first and
    /// then with `self` in the coefficient rows.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            u11: self.u11 * other.u11 + self.u12 * other.u21,
            u12: self.u11 * other.u12 + self.u12 * other.u22,
            u21: self.u21 * other.u11 + self.u22 * other.u21,
            u22: self.u21 * other.u12 + self.u22 * other.u22,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            u11: self.u22,
            u12: -self.u12,
            u21: -self.u21,
            u22: self.u11,
        }
    }

    /// Largest entrywise distance to `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        [
            self.u11 - other.u11,
            self.u12 - other.u12,
            self.u21 - other.u21,
            self.u22 - other.u22,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
    }

    /// Image of a quadratic Hamiltonian under the substitution.
    pub fn apply_to_quadratic(&self, h: &QuadraticHamiltonian) -> QuadraticHamiltonian {
        let Self { u11, u12, u21, u22 } = *self;
        let QuadraticHamiltonian { c_pp, c_xp, c_xx } = *h;
        QuadraticHamiltonian {
            c_pp: c_pp * u22 * u22 + c_xp * 2.0 * u12 * u22 + c_xx * u12 * u12,
            c_xx: c_pp * u21 * u21 + c_xp * 2.0 * u11 * u21 + c_xx * u11 * u11,
            c_xp: c_pp * u21 * u22 + c_xp * (u11 * u22 + u12 * u21) + c_xx * u11 * u12,
        }
    }

    /// Signed square-integrability margin `Re[(u11 + i u21)/(u22 - i u12)]`
    /// for the transformed oscillator ground state.
    pub fn normalizable(&self) -> Result<Normalizability> {
        let den = self.u22 - I * self.u12;
        let num = self.u11 + I * self.u21;
        if den.norm() <= f64::EPSILON * num.norm().max(1.0) {
            return Err(Error::DegenerateTransform(format!(
                "u22 - i u12 vanishes ({den})"
            )));
        }
        Ok(Normalizability {
            margin: (num / den).re,
        })
    }
}

/// Sign of `margin` decides square integrability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizability {
    pub margin: f64,
}

impl Normalizability {
    pub fn is_normalizable(&self) -> bool {
        self.margin > 0.0
    }
}

/// `(cosh t, sinh(t)/t)`; both are even in `t`, so either square-root branch works.
fn cosh_sinhc(theta: Complex64) -> (Complex64, Complex64) {
    if theta.norm() < THETA_SERIES {
        let t2 = theta * theta;
        let t4 = t2 * t2;
        let t6 = t4 * t2;
        let t8 = t4 * t4;
        let ch = ONE + t2 / 2.0 + t4 / 24.0 + t6 / 720.0 + t8 / 40_320.0;
        let shc = ONE + t2 / 6.0 + t4 / 120.0 + t6 / 5_040.0 + t8 / 362_880.0;
        (ch, shc)
    } else {
        (theta.cosh(), theta.sinh() / theta)
    }
}

/// Exponent parameters of `U = exp[(a/2) x^2 + (c/2)(xp + px) + (b/2) p^2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl Generator {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Self {
        Self { a, b, c }
    }

    /// Principal `sqrt(c^2 - ab)`.
    pub fn theta(&self) -> Complex64 {
        (self.c * self.c - self.a * self.b).sqrt()
    }

    /// Recovers `(alpha, beta)` of the coordinate-momentum transform generated
    /// by `exp(a x^2 + b p^2)`:
    /// `i alpha = (e^{2r} - 1) r / (a (e^{2r} + 1))`,
    /// `i beta = (1 - e^{2r}) r / (b (e^{2r} + 1))`, `r = sqrt(-ab)`.
    pub fn ratio_check(&self) -> Result<(Complex64, Complex64)> {
        if self.a.norm() == 0.0 || self.b.norm() == 0.0 {
            return Err(Error::InvalidArgument(
                "generator needs a != 0 and b != 0".into(),
            ));
        }
        if self.c.norm() != 0.0 {
            return Err(Error::InvalidArgument(
                "the (alpha, beta) inverse map is only defined for c = 0".into(),
            ));
        }
        let r = (-self.a * self.b).sqrt();
        // (e^{2r} - 1)/(e^{2r} + 1) = tanh r, evaluated without overflow.
        let t = r.tanh();
        let i_alpha = t * r / self.a;
        let i_beta = -t * r / self.b;
        Ok((-I * i_alpha, -I * i_beta))
    }

    /// Generator of the `x`/`p` adjoint action, `d/ds (x~, p~) = G (x~, p~)`,
    /// for the convention the closed-form entries follow.
    pub fn action_matrix(&self) -> [[Complex64; 2]; 2] {
        [[-self.c, -self.b], [self.a, self.c]]
    }

    /// `-i [(a/2) x^2 + (c/2)(xp + px) + (b/2) p^2]`, the operator whose
    /// commutators with `x` and `p` reproduce [`action_matrix`](Self::action_matrix).
    pub fn operator(&self) -> WeylPoly {
        let xp_px = WeylPoly::x() * WeylPoly::p() + WeylPoly::p() * WeylPoly::x();
        let k = WeylPoly::monomial(2, 0, self.a * 0.5)
            + xp_px.scale(self.c * 0.5)
            + WeylPoly::monomial(0, 2, self.b * 0.5);
        k.scale(-I)
    }
}

/// `H = c_pp p^2 + c_xp (xp + px) + c_xx x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticHamiltonian {
    pub c_pp: Complex64,
    pub c_xp: Complex64,
    pub c_xx: Complex64,
}

impl QuadraticHamiltonian {
    pub fn new(c_pp: Complex64, c_xp: Complex64, c_xx: Complex64) -> Self {
        Self { c_pp, c_xp, c_xx }
    }

    /// `(p^2 + x^2)/2`.
    pub fn harmonic() -> Self {
        Self::with_force_constant(1.0)
    }

    /// `p^2/2 + k x^2/2`.
    pub fn with_force_constant(k: f64) -> Self {
        Self::new(
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5 * k, 0.0),
        )
    }

    /// `(p + i beta x)^2/2 + (alpha^2 + beta^2) x^2/2`, collected.
    pub fn ahmed(alpha: f64, beta: Complex64) -> Self {
        Self::new(
            Complex64::new(0.5, 0.0),
            I * beta * 0.5,
            Complex64::new(0.5 * alpha * alpha, 0.0),
        )
    }

    /// The Hermitian member `(p - gamma x)^2/2 + k x^2/2`; Ahmed's choice is
    /// `k = alpha^2 - gamma^2`.
    pub fn shifted_momentum(gamma: f64, k: f64) -> Self {
        Self::new(
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.5 * gamma, 0.0),
            Complex64::new(0.5 * (gamma * gamma + k), 0.0),
        )
    }

    /// `c_pp c_xx - c_xp^2`; the spectrum is `sqrt(.)(2n + 1)`.
    pub fn discriminant(&self) -> Complex64 {
        self.c_pp * self.c_xx - self.c_xp * self.c_xp
    }

    /// Principal square root of [`discriminant`](Self::discriminant).
    pub fn level_spacing_half(&self) -> Complex64 {
        self.discriminant().sqrt()
    }

    pub fn to_weyl(&self) -> WeylPoly {
        let xp_px = WeylPoly::x() * WeylPoly::p() + WeylPoly::p() * WeylPoly::x();
        WeylPoly::monomial(0, 2, self.c_pp)
            + xp_px.scale(self.c_xp)
            + WeylPoly::monomial(2, 0, self.c_xx)
    }

    /// Reads the three coefficients back from a normal-ordered polynomial.
    /// The constant must be the `-i c_xp` left over from `xp + px = 2xp - i`.
    pub fn from_weyl(w: &WeylPoly) -> Result<Self> {
        for ((m, n), _) in w.terms() {
            if !matches!((m, n), (0, 2) | (1, 1) | (2, 0) | (0, 0)) {
                return Err(Error::InvalidArgument(format!(
                    "term x^{m} p^{n} is not part of a symmetric quadratic form"
                )));
            }
        }
        let c_xp = w.coeff(1, 1) * 0.5;
        let constant = w.coeff(0, 0);
        let expect = -I * c_xp;
        let scale = w.max_coeff().max(1e-300);
        if (constant - expect).norm() > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!(
                "constant term {constant} is not -i c_xp = {expect}"
            )));
        }
        Ok(Self::new(w.coeff(0, 2), c_xp, w.coeff(2, 0)))
    }

    /// All three coefficients real: the operator is Hermitian.
    pub fn has_real_coefficients(&self, tol: f64) -> bool {
        let s = self.scale();
        [self.c_pp, self.c_xp, self.c_xx]
            .iter()
            .all(|z| z.im.abs() <= tol * s)
    }

    /// Real `c_pp`, `c_xx` and imaginary `c_xp`: PT-symmetric form.
    pub fn has_pt_form(&self, tol: f64) -> bool {
        let s = self.scale();
        self.c_pp.im.abs() <= tol * s
            && self.c_xx.im.abs() <= tol * s
            && self.c_xp.re.abs() <= tol * s
    }

    fn scale(&self) -> f64 {
        self.c_pp
            .norm()
            .max(self.c_xp.norm())
            .max(self.c_xx.norm())
            .max(f64::MIN_POSITIVE)
    }

    /// Coefficients of `(a†a + 1/2)`-diagonal, `a^2` and `(a†)^2` at frequency
    /// `omega`, as `(b, lower, raise)` with `H = b (2a†a + 1) + lower a^2 + raise (a†)^2`.
    pub fn ladder_coefficients(&self, omega: Complex64) -> (Complex64, Complex64, Complex64) {
        let half_pp = self.c_pp * omega * 0.5;
        let half_xx = self.c_xx / (omega * 2.0);
        let mixed = I * self.c_xp;
        (
            half_pp + half_xx,
            -half_pp - mixed + half_xx,
            -half_pp + mixed + half_xx,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn re(v: f64) -> Complex64 {
        c64(v, 0.0)
    }

    #[test]
    fn from_matrix_examples() {
        let id = CanonicalTransform::from_matrix(re(1.0), re(0.0), re(0.0), re(1.0)).unwrap();
        assert_eq!(id, CanonicalTransform::identity());
        for beta in [-3.0, 0.0, 0.7, 12.5] {
            assert!(
                CanonicalTransform::from_matrix(re(1.0), re(0.0), c64(0.0, beta), re(1.0)).is_ok()
            );
        }
        let err = CanonicalTransform::from_matrix(re(1.0), re(1.0), re(1.0), re(1.0)).unwrap_err();
        assert!(err.to_string().contains("determinant 0"), "{err}");
    }

    #[test]
    fn generator_diagonal_case() {
        let t = 0.8;
        let u = CanonicalTransform::from_generator(&Generator::new(re(0.0), re(0.0), re(t)));
        assert!((u.u11() - re((-t).exp())).norm() < 1e-15);
        assert!((u.u22() - re(t.exp())).norm() < 1e-15);
        assert_eq!(u.u12(), re(0.0));
        assert_eq!(u.u21(), re(0.0));
    }

    #[test]
    fn generator_degenerate_theta() {
        // c^2 = ab exactly: theta = 0, the formulas collapse to [[1-c, -b], [a, 1+c]].
        let (a, b, c) = (c64(0.5, 0.2), c64(2.0, -0.8), re(0.0));
        let c = c + (a * b).sqrt();
        let g = Generator::new(a, b, c);
        assert!(g.theta().norm() < 1e-7);
        let u = CanonicalTransform::from_generator(&g);
        let expect = CanonicalTransform {
            u11: ONE - c,
            u12: -b,
            u21: a,
            u22: ONE + c,
        };
        assert!(u.distance(&expect) < 1e-12, "{u:?}");
        assert!((u.determinant() - ONE).norm() < 1e-12);
    }

    #[test]
    fn generator_is_branch_independent() {
        let g = Generator::new(c64(0.3, -0.1), c64(-1.2, 0.4), c64(0.25, 0.6));
        let th = g.theta();
        let plus = CanonicalTransform::from_generator_theta(&g, th);
        let minus = CanonicalTransform::from_generator_theta(&g, -th);
        assert!(plus.distance(&minus) < 1e-15);
        // series side of the switch too
        let small = Generator::new(re(1e-8), re(1e-8), re(3e-8));
        let a = CanonicalTransform::from_generator_theta(&small, small.theta());
        let b = CanonicalTransform::from_generator_theta(&small, -small.theta());
        assert_eq!(a, b);
    }

    #[test]
    fn series_matches_closed_form_at_switch() {
        for theta in [c64(0.999e-6, 0.0), c64(0.0, 0.999e-6), c64(5e-7, 5e-7)] {
            let (ch, shc) = cosh_sinhc(theta);
            assert!((ch - theta.cosh()).norm() < 1e-15);
            assert!((shc - theta.sinh() / theta).norm() < 1e-10);
        }
    }

    #[test]
    fn rath_mallick_examples() {
        assert_eq!(
            CanonicalTransform::rath_mallick(re(0.0), re(0.0)).unwrap(),
            CanonicalTransform::identity()
        );
        assert!(matches!(
            CanonicalTransform::rath_mallick(re(1.0), re(-1.0)),
            Err(Error::SingularParameters(_))
        ));
        let u = CanonicalTransform::rath_mallick(re(0.3), re(0.2)).unwrap();
        assert!((u.determinant() - ONE).norm() <= 1e-14);
    }

    #[test]
    fn gauge_group_law() {
        let (g1, g2) = (0.4, -1.3);
        let c = CanonicalTransform::gauge(g1).compose(&CanonicalTransform::gauge(g2));
        assert!(c.distance(&CanonicalTransform::gauge(g1 + g2)) < 1e-15);
        assert_eq!(
            CanonicalTransform::gauge(0.0),
            CanonicalTransform::identity()
        );
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let u = CanonicalTransform::rath_mallick(c64(0.3, 0.1), c64(-0.7, 0.2)).unwrap();
        assert!(
            u.compose(&u.inverse())
                .distance(&CanonicalTransform::identity())
                < 1e-14
        );
        assert!(
            u.inverse()
                .compose(&u)
                .distance(&CanonicalTransform::identity())
                < 1e-14
        );
    }

    #[test]
    fn apply_identity_and_rath_mallick() {
        let h = QuadraticHamiltonian::new(c64(0.3, 0.1), c64(-0.2, 0.5), c64(1.5, 0.0));
        assert_eq!(CanonicalTransform::identity().apply_to_quadratic(&h), h);

        let (al, be) = (0.45, -0.3);
        let u = CanonicalTransform::rath_mallick(re(al), re(be)).unwrap();
        let q = u.apply_to_quadratic(&QuadraticHamiltonian::harmonic());
        let s = 1.0 + al * be;
        assert!((q.c_pp - re((1.0 - al * al) / (2.0 * s))).norm() < 1e-15);
        assert!((q.c_xx - re((1.0 - be * be) / (2.0 * s))).norm() < 1e-15);
        assert!((q.c_xp - c64(0.0, (al + be) / (2.0 * s))).norm() < 1e-15);
        assert!(q.has_pt_form(1e-14));
        assert!(!q.has_real_coefficients(1e-14));
    }

    #[test]
    fn apply_gauge_gives_ahmed_operator() {
        let (al, be) = (0.8, 0.35);
        let base = QuadraticHamiltonian::with_force_constant(al * al + be * be);
        let q = CanonicalTransform::from_matrix(ONE, re(0.0), c64(0.0, be), ONE)
            .unwrap()
            .apply_to_quadratic(&base);
        let expect = QuadraticHamiltonian::ahmed(al, re(be));
        assert!((q.c_pp - expect.c_pp).norm() < 1e-15);
        assert!((q.c_xp - expect.c_xp).norm() < 1e-15);
        assert!((q.c_xx - expect.c_xx).norm() < 1e-15);
        // and directly against the expanded operator
        let direct = (WeylPoly::p() + WeylPoly::monomial(1, 0, c64(0.0, be)))
            .pow(2)
            .scale(re(0.5))
            + WeylPoly::monomial(2, 0, re(0.5 * (al * al + be * be)));
        assert!(q.to_weyl().approx_eq(&direct, 1e-14));
    }

    #[test]
    fn normalizability_examples() {
        let id = CanonicalTransform::identity().normalizable().unwrap();
        assert_eq!(id.margin, 1.0);
        assert!(id.is_normalizable());
        let edge = CanonicalTransform::from_matrix(ONE, re(0.0), c64(0.0, 1.0), ONE).unwrap();
        let m = edge.normalizable().unwrap();
        assert_eq!(m.margin, 0.0);
        assert!(!m.is_normalizable());
        let rm = CanonicalTransform::rath_mallick(re(0.3), re(0.2))
            .unwrap()
            .normalizable()
            .unwrap();
        assert!((rm.margin - 0.8 / 1.3).abs() < 1e-15);
    }

    #[test]
    fn normalizability_degenerate_denominator() {
        // u22 - i u12 = 0 with det 1: u12 = -i u22.
        let u22 = re(1.0);
        let u12 = c64(0.0, -1.0);
        let u11 = re(1.0);
        let u21 = (u11 * u22 - ONE) / u12;
        let t = CanonicalTransform::from_matrix(u11, u12, u21, u22).unwrap();
        assert!(matches!(
            t.normalizable(),
            Err(Error::DegenerateTransform(_))
        ));
    }

    #[test]
    fn ratio_check_examples() {
        let (al, be) = Generator::new(re(0.7), re(0.7), re(0.0))
            .ratio_check()
            .unwrap();
        assert!((al / be - re(-1.0)).norm() < 1e-12);
        assert!(Generator::new(re(0.0), re(1.0), re(0.0))
            .ratio_check()
            .is_err());
        assert!(Generator::new(re(1.0), re(1.0), re(0.1))
            .ratio_check()
            .is_err());
    }

    #[test]
    fn quadratic_weyl_round_trip() {
        let h = QuadraticHamiltonian::new(c64(0.3, 0.1), c64(-0.2, 0.5), c64(1.5, 0.0));
        let back = QuadraticHamiltonian::from_weyl(&h.to_weyl()).unwrap();
        assert!((back.c_pp - h.c_pp).norm() < 1e-15);
        assert!((back.c_xp - h.c_xp).norm() < 1e-15);
        assert!((back.c_xx - h.c_xx).norm() < 1e-15);
        assert!(QuadraticHamiltonian::from_weyl(&WeylPoly::x()).is_err());
        assert!(QuadraticHamiltonian::from_weyl(&WeylPoly::monomial(1, 1, ONE)).is_err());
    }
}
