//! Spectra of quadratic Hamiltonians in the number basis.
//!
//! In the oscillator basis at frequency `w`, a quadratic Hamiltonian only
//! couples `|n>` to `|n>` and `|n +- 2>`:
//! `H|n> = A_n |n-2> + B_n |n> + C_n |n+2>`. At the critical frequencies all
//! `C_n` vanish, the truncated matrix is upper triangular, and the spectrum
//! can be read off the diagonal.

use num_complex::Complex64;

use crate::canonical::{CanonicalTransform, QuadraticHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::{self, inner, sort_by_real, vec_norm, CMatrix};

/// Band coefficients at or below this fraction of their gross size are zero.
const BAND_PRUNE: f64 = 1e-14;

/// Minimum separation of eigenvalues retained by [`eta_check`].
pub const MIN_GAP: f64 = 1e-6;

/// `H = h11 p^2 + i h12 (xp + px) + h22 x^2` with real coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeParamOscillator {
    h11: f64,
    h12: f64,
    h22: f64,
    discriminant: f64,
}

impl ThreeParamOscillator {
    pub fn new(h11: f64, h12: f64, h22: f64) -> Result<Self> {
        if !(h11.is_finite() && h12.is_finite() && h22.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "oscillator coefficients must be finite, got ({h11}, {h12}, {h22})"
            )));
        }
        let discriminant = h11 * h22 + h12 * h12;
        if !discriminant.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "h11 h22 + h12^2 overflows for ({h11}, {h12}, {h22})"
            )));
        }
        Ok(Self {
            h11,
            h12,
            h22,
            discriminant,
        })
    }

    /// Image of `(p^2 + x^2)/2` under `rath_mallick(lambda, beta)`, written
    /// out directly: `h11 = (1 - l^2)/(2s)`, `h12 = (l + b)/(2s)`,
    /// `h22 = (1 - b^2)/(2s)`, `s = 1 + l b`.
    pub fn rath_mallick(lambda: f64, beta: f64) -> Result<Self> {
        let s = 1.0 + lambda * beta;
        if s == 0.0 || !s.is_finite() {
            return Err(Error::SingularParameters(format!(
                "1 + lambda*beta = 0 for lambda = {lambda}, beta = {beta}"
            )));
        }
        Self::new(
            (1.0 - lambda * lambda) / (2.0 * s),
            (lambda + beta) / (2.0 * s),
            (1.0 - beta * beta) / (2.0 * s),
        )
    }

    /// Reads a quadratic with real `c_pp`, `c_xx` and imaginary `c_xp`.
    pub fn from_quadratic(q: &QuadraticHamiltonian) -> Result<Self> {
        if !q.has_pt_form(1e-12) {
            return Err(Error::InvalidArgument(
                "quadratic needs real p^2, x^2 coefficients and an imaginary xp coefficient".into(),
            ));
        }
        Self::new(q.c_pp.re, q.c_xp.im, q.c_xx.re)
    }

    pub fn to_quadratic(&self) -> QuadraticHamiltonian {
        QuadraticHamiltonian::new(
            Complex64::new(self.h11, 0.0),
            Complex64::new(0.0, self.h12),
            Complex64::new(self.h22, 0.0),
        )
    }

    pub fn h11(&self) -> f64 {
        self.h11
    }
    pub fn h12(&self) -> f64 {
        self.h12
    }
    pub fn h22(&self) -> f64 {
        self.h22
    }

    /// `D = h11 h22 + h12^2`.
    pub fn discriminant(&self) -> f64 {
        self.discriminant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Where a reported eigenvalue came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchLabel {
    Plus,
    Minus,
    Numeric,
}

impl BranchLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchLabel::Plus => "omega_plus",
            BranchLabel::Minus => "omega_minus",
            BranchLabel::Numeric => "numeric",
        }
    }
}

impl From<Branch> for BranchLabel {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Plus => BranchLabel::Plus,
            Branch::Minus => BranchLabel::Minus,
        }
    }
}

/// Frequencies at which every `C_n` vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalFrequencies {
    /// `plus = (sqrt D - h12)/h11`, `minus = -(sqrt D + h12)/h11`. The labels
    /// follow the formulas; `sign_contract` records whether `plus > 0 > minus`
    /// with `h11 > 0`.
    Pair {
        plus: f64,
        minus: f64,
        sign_contract: bool,
    },
    /// `h11 = 0`: the single root `h22/(2 h12)`.
    Single(f64),
    /// `D = 0`: both roots collapse onto `-h12/h11`.
    Exceptional(f64),
    /// `D < 0`: broken phase, no real critical frequency.
    ComplexPair { discriminant: f64 },
    /// `h11 = h12 = 0`: the operator is `h22 x^2`.
    NoRoot,
}

impl CriticalFrequencies {
    pub fn branch(&self, b: Branch) -> Option<f64> {
        match (*self, b) {
            (CriticalFrequencies::Pair { plus, .. }, Branch::Plus) => Some(plus),
            (CriticalFrequencies::Pair { minus, .. }, Branch::Minus) => Some(minus),
            (CriticalFrequencies::Single(w), Branch::Plus) => Some(w),
            (CriticalFrequencies::Exceptional(w), _) => Some(w),
            _ => None,
        }
    }
}

/// `(A_n, B_n, C_n)`:
/// `A_n = (-h11 w/2 + h12 + h22/(2w)) sqrt(n(n-1))`,
/// `B_n = (h11 w/2 + h22/(2w)) (2n+1)`,
/// `C_n = (-h11 w/2 - h12 + h22/(2w)) sqrt((n+1)(n+2))`.
pub fn fock_coefficients(
    h: &ThreeParamOscillator,
    omega: f64,
    n: usize,
) -> Result<(f64, f64, f64)> {
    let (lower, diag, raise) = band_factors(h, omega)?;
    let nf = n as f64;
    Ok((
        lower * (nf * (nf - 1.0)).sqrt(),
        diag * (2.0 * nf + 1.0),
        raise * ((nf + 1.0) * (nf + 2.0)).sqrt(),
    ))
}

/// The `n`-independent parts of `A_n`, `B_n`, `C_n`, with near-cancelled
/// band factors set to zero.
fn band_factors(h: &ThreeParamOscillator, omega: f64) -> Result<(f64, f64, f64)> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::InvalidFrequency {
            value: omega,
            expected: "finite and nonzero",
        });
    }
    let kin = h.h11 * omega / 2.0;
    let pot = h.h22 / (2.0 * omega);
    let gross = kin.abs() + h.h12.abs() + pot.abs();
    let prune = |v: f64| {
        if v.abs() <= BAND_PRUNE * gross {
            0.0
        } else {
            v
        }
    };
    Ok((
        prune(-kin + h.h12 + pot),
        kin + pot,
        prune(-kin - h.h12 + pot),
    ))
}

pub fn critical_frequencies(h: &ThreeParamOscillator) -> CriticalFrequencies {
    let (h11, h12, h22, d) = (h.h11, h.h12, h.h22, h.discriminant);
    if h11 == 0.0 {
        return if h12 == 0.0 {
            CriticalFrequencies::NoRoot
        } else {
            CriticalFrequencies::Single(h22 / (2.0 * h12))
        };
    }
    if d < 0.0 {
        return CriticalFrequencies::ComplexPair { discriminant: d };
    }
    if d == 0.0 {
        return CriticalFrequencies::Exceptional(-h12 / h11);
    }
    let r = d.sqrt();
    // Rationalized forms avoid cancellation between sqrt(D) and h12.
    let plus = if h12 > 0.0 {
        h22 / (r + h12)
    } else {
        (r - h12) / h11
    };
    let minus = if h12 < 0.0 {
        -h22 / (r - h12)
    } else {
        -(r + h12) / h11
    };
    CriticalFrequencies::Pair {
        plus,
        minus,
        sign_contract: h11 > 0.0 && plus > 0.0 && minus < 0.0,
    }
}

/// `+- sqrt(D) (2n + 1)`.
pub fn closed_form_eigenvalue(h: &ThreeParamOscillator, n: usize, branch: Branch) -> Result<f64> {
    if h.discriminant < 0.0 {
        return Err(Error::ComplexSpectrum {
            discriminant: h.discriminant,
        });
    }
    Ok(branch.sign() * h.discriminant.sqrt() * (2.0 * n as f64 + 1.0))
}

/// Truncated number-basis matrix at a real frequency, `M[m, n] = <m|H|n>`.
pub fn build_fock_matrix(h: &ThreeParamOscillator, omega: f64, n: usize) -> Result<FockMatrix> {
    check_size(n)?;
    let (lower, diag, raise) = band_factors(h, omega)?;
    let m = banded(
        n,
        Complex64::new(lower, 0.0),
        Complex64::new(diag, 0.0),
        Complex64::new(raise, 0.0),
    );
    Ok(FockMatrix::new(Complex64::new(omega, 0.0), m))
}

/// Truncated matrix of a general quadratic at a possibly complex frequency.
pub fn quadratic_fock_matrix(
    q: &QuadraticHamiltonian,
    omega: Complex64,
    n: usize,
) -> Result<FockMatrix> {
    check_size(n)?;
    if omega.norm() == 0.0 || !omega.re.is_finite() || !omega.im.is_finite() {
        return Err(Error::InvalidFrequency {
            value: omega.norm(),
            expected: "finite and nonzero",
        });
    }
    let (diag, lower, raise) = q.ladder_coefficients(omega);
    let gross = (q.c_pp * omega).norm() / 2.0 + q.c_xp.norm() + (q.c_xx / omega).norm() / 2.0;
    let prune = |v: Complex64| {
        if v.norm() <= BAND_PRUNE * gross {
            Complex64::new(0.0, 0.0)
        } else {
            v
        }
    };
    let m = banded(n, prune(lower), diag, prune(raise));
    Ok(FockMatrix::new(omega, m))
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument(
            "truncation size must be >= 1".into(),
        ))
    } else {
        Ok(())
    }
}

/// `diag (2n+1)` on the diagonal, `lower sqrt(n(n-1))` at `(n-2, n)`,
/// `raise sqrt((n+1)(n+2))` at `(n+2, n)`.
fn banded(n: usize, lower: Complex64, diag: Complex64, raise: Complex64) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for j in 0..n {
        let jf = j as f64;
        m[(j, j)] = diag * (2.0 * jf + 1.0);
        if j >= 2 {
            m[(j - 2, j)] = lower * (jf * (jf - 1.0)).sqrt();
        }
        if j + 2 < n {
            m[(j + 2, j)] = raise * ((jf + 1.0) * (jf + 2.0)).sqrt();
        }
    }
    m
}

/// `Omega (2n + 1)` with `Omega = sqrt(c_pp c_xx - c_xp^2)` on the principal
/// branch; an imaginary part signals the broken phase.
pub fn general_quadratic_spectrum(q: &QuadraticHamiltonian, n: usize) -> Complex64 {
    q.level_spacing_half() * (2.0 * n as f64 + 1.0)
}

/// Critical frequency `(Omega - h12)/h11` of a general quadratic, with
/// `h11 = c_pp` and `h12 = -i c_xp`. `None` when `c_pp = 0`.
pub fn quadratic_critical_frequency(q: &QuadraticHamiltonian) -> Option<Complex64> {
    if q.c_pp.norm() == 0.0 {
        return None;
    }
    let h12 = Complex64::new(0.0, -1.0) * q.c_xp;
    Some((q.level_spacing_half() - h12) / q.c_pp)
}

/// Truncated matrix together with the frequency of its number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    omega: Complex64,
    matrix: CMatrix,
}

impl FockMatrix {
    pub fn new(omega: Complex64, matrix: CMatrix) -> Self {
        Self { omega, matrix }
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// No entry couples an even index to an odd one.
    pub fn preserves_parity(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| (i + j) % 2 == 0 || self.matrix[(i, j)].norm() == 0.0))
    }

    /// Rows and columns `s, s+2, s+4, ...`.
    pub fn parity_block(&self, s: usize) -> CMatrix {
        let idx: Vec<usize> = (s..self.dim()).step_by(2).collect();
        self.matrix.select(&idx)
    }

    /// All eigenvalues sorted by real part. Parity-preserving matrices are
    /// split into even and odd blocks first.
    pub fn numeric_spectrum(&self) -> Result<Vec<Complex64>> {
        let mut all = if self.dim() >= 2 && self.preserves_parity() {
            let mut v = linalg::eigenvalues_default(&self.parity_block(0))?;
            v.extend(linalg::eigenvalues_default(&self.parity_block(1))?);
            v
        } else {
            linalg::eigenvalues_default(&self.matrix)?
        };
        sort_by_real(&mut all);
        Ok(all)
    }
}

/// Terminating eigenvector at a critical frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: Complex64,
    /// Coefficients `d_0 ..= d_{2k+s}`; entries of the other parity are zero.
    pub coefficients: Vec<Complex64>,
    pub parity: usize,
    pub excitation: usize,
    /// `||(M - E) d|| / ||d||` on the generating truncation.
    pub residual: f64,
    pub omega: f64,
}

impl EigenPair {
    /// Highest occupied index `2k + s`.
    pub fn top(&self) -> usize {
        2 * self.excitation + self.parity
    }

    /// `||(M - E) d|| / ||d||` with `d` zero-padded to the size of `m`.
    pub fn residual_on(&self, m: &FockMatrix) -> Result<f64> {
        if m.dim() < self.coefficients.len() {
            return Err(Error::DimensionMismatch(format!(
                "truncation {} is smaller than the support {}",
                m.dim(),
                self.coefficients.len()
            )));
        }
        let mut d = self.coefficients.clone();
        d.resize(m.dim(), Complex64::new(0.0, 0.0));
        residual(m.matrix(), self.eigenvalue, &d)
    }
}

fn residual(m: &CMatrix, e: Complex64, d: &[Complex64]) -> Result<f64> {
    let md = m.mul_vec(d)?;
    let r: Vec<Complex64> = md.iter().zip(d).map(|(a, b)| a - e * b).collect();
    Ok(vec_norm(&r) / vec_norm(d))
}

/// `d_{n+2} = (E - B_n)/A_{n+2} d_n` from `d_s = 1` up to `n = 2k + s`, with
/// `E = B_{2k+s}` at the branch frequency, then scaled to unit norm.
pub fn eigenvector_coefficients(
    h: &ThreeParamOscillator,
    branch: Branch,
    k: usize,
    s: usize,
) -> Result<EigenPair> {
    if s > 1 {
        return Err(Error::InvalidArgument(format!(
            "parity must be 0 or 1, got {s}"
        )));
    }
    if h.discriminant <= 0.0 {
        return Err(if h.discriminant < 0.0 {
            Error::ComplexSpectrum {
                discriminant: h.discriminant,
            }
        } else {
            Error::NoCriticalFrequency("D = 0 is an exceptional point".into())
        });
    }
    let omega = critical_frequencies(h)
        .branch(branch)
        .ok_or_else(|| Error::NoCriticalFrequency(format!("no {branch:?} root for {h:?}")))?;
    let top = 2 * k + s;
    let (_, e, _) = fock_coefficients(h, omega, top)?;
    let mut d = vec![Complex64::new(0.0, 0.0); top + 1];
    if h.h12 == 0.0 {
        d[top] = Complex64::new(1.0, 0.0);
    } else {
        d[s] = Complex64::new(1.0, 0.0);
        let mut n = s;
        while n < top {
            let (_, b_n, _) = fock_coefficients(h, omega, n)?;
            let (a_next, _, _) = fock_coefficients(h, omega, n + 2)?;
            d[n + 2] = d[n] * ((e - b_n) / a_next);
            n += 2;
            if d[n].norm() > 1e150 {
                for z in d.iter_mut() {
                    *z *= 1e-150;
                }
            }
        }
    }
    let nrm = vec_norm(&d);
    for z in d.iter_mut() {
        *z /= nrm;
    }
    let gen = build_fock_matrix(h, omega, top + 3)?;
    let mut padded = d.clone();
    padded.resize(top + 3, Complex64::new(0.0, 0.0));
    let eigenvalue = Complex64::new(e, 0.0);
    let res = residual(gen.matrix(), eigenvalue, &padded)?;
    Ok(EigenPair {
        eigenvalue,
        coefficients: d,
        parity: s,
        excitation: k,
        residual: res,
        omega,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    /// Index of the reference level this eigenvalue was matched to.
    pub level: usize,
    pub eigenvalue: Complex64,
    pub reference: Complex64,
    pub deviation: f64,
    pub branch: BranchLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Sorted by the real part of `eigenvalue`.
    pub levels: Vec<LevelReport>,
    /// Reference levels left without a numeric partner.
    pub unmatched: Vec<usize>,
    pub truncation: usize,
    pub omega: Complex64,
    pub tolerance: f64,
    /// Normalizability margin of the transform, when one was involved.
    pub normalizability_margin: Option<f64>,
    pub passed: bool,
}

impl SpectrumReport {
    pub fn max_deviation(&self) -> f64 {
        self.levels.iter().map(|l| l.deviation).fold(0.0, f64::max)
    }

    pub fn normalizable(&self) -> Option<bool> {
        self.normalizability_margin.map(|m| m > 0.0)
    }
}

/// Diagonalizes the image of `(p^2 + x^2)/2` under `u` on an `n`-level
/// truncation at frequency 1 and compares its lowest `n_max` eigenvalues
/// with `n + 1/2`.
pub fn verify_isospectral(
    u: &CanonicalTransform,
    n: usize,
    n_max: usize,
    tol: f64,
) -> Result<SpectrumReport> {
    let reference: Vec<Complex64> = (0..n_max)
        .map(|k| Complex64::new(k as f64 + 0.5, 0.0))
        .collect();
    let mut report = verify_against(
        &QuadraticHamiltonian::harmonic(),
        u,
        1.0,
        n,
        &reference,
        tol,
    )?;
    report.normalizability_margin = u.normalizable().ok().map(|m| m.margin);
    Ok(report)
}

/// Like [`verify_isospectral`] for an arbitrary base Hamiltonian with known
/// levels `reference`, at number-basis frequency `omega`.
pub fn verify_against(
    base: &QuadraticHamiltonian,
    u: &CanonicalTransform,
    omega: f64,
    n: usize,
    reference: &[Complex64],
    tol: f64,
) -> Result<SpectrumReport> {
    let n_max = reference.len();
    if n_max == 0 || 4 * n_max > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= n_max <= N/4, got n_max = {n_max}, N = {n}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let q = u.apply_to_quadratic(base);
    let m = quadratic_fock_matrix(&q, Complex64::new(omega, 0.0), n)?;
    let numeric = m.numeric_spectrum()?;
    let (levels, unmatched) = match_levels(&numeric, reference);
    let passed = unmatched.is_empty() && levels.iter().all(|l| l.deviation <= tol);
    Ok(SpectrumReport {
        levels,
        unmatched,
        truncation: n,
        omega: m.omega(),
        tolerance: tol,
        normalizability_margin: None,
        passed,
    })
}

/// Greedy pairing: each reference level in order takes the nearest unused
/// numeric eigenvalue. Reference levels left over are returned as unmatched.
pub fn match_levels(
    numeric: &[Complex64],
    reference: &[Complex64],
) -> (Vec<LevelReport>, Vec<usize>) {
    let mut used = vec![false; numeric.len()];
    let mut levels = Vec::with_capacity(reference.len());
    let mut unmatched = Vec::new();
    for (level, &r) in reference.iter().enumerate() {
        let best = numeric
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|a, b| (a.1 - r).norm().total_cmp(&(b.1 - r).norm()));
        match best {
            Some((i, &z)) => {
                used[i] = true;
                levels.push(LevelReport {
                    level,
                    eigenvalue: z,
                    reference: r,
                    deviation: (z - r).norm(),
                    branch: BranchLabel::Numeric,
                });
            }
            None => unmatched.push(level),
        }
    }
    levels.sort_by(|a, b| {
        a.eigenvalue
            .re
            .total_cmp(&b.eigenvalue.re)
            .then(a.eigenvalue.im.total_cmp(&b.eigenvalue.im))
    });
    (levels, unmatched)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaReport {
    pub eigenvalues: Vec<Complex64>,
    /// `max |<Phi_m|phi_n> - delta_mn|`.
    pub biorthonormality_defect: f64,
    /// `max_n ||(eta M - M^dagger eta) phi_n||` over unit `phi_n`.
    pub pseudo_hermiticity_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Builds right eigenvectors of `M` and `M^dagger` for the lowest `n_max`
/// levels, rescales them to a biorthonormal pair, forms
/// `eta = sum |Phi_n><Phi_n|` and measures `eta M - M^dagger eta` on the
/// retained span.
pub fn eta_check(m: &FockMatrix, n_max: usize, tol: f64) -> Result<EtaReport> {
    let n = m.dim();
    if n_max == 0 || n_max > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= n_max <= N, got {n_max} for N = {n}"
        )));
    }
    let mut eig = m.numeric_spectrum()?;
    eig.truncate(n_max);
    for i in 0..eig.len() {
        for j in i + 1..eig.len() {
            let gap = (eig[i] - eig[j]).norm();
            if gap <= MIN_GAP {
                return Err(Error::DegenerateEigenvalues {
                    first: eig[i],
                    second: eig[j],
                    gap,
                });
            }
        }
    }
    let mat = m.matrix();
    let adj = mat.adjoint();
    let ev_tol = linalg::DEFAULT_TOL;
    let mut right = Vec::with_capacity(n_max);
    let mut left = Vec::with_capacity(n_max);
    for &lam in &eig {
        let phi = linalg::eigenvector(mat, lam, ev_tol)?;
        let mut big_phi = linalg::eigenvector(&adj, lam.conj(), ev_tol)?;
        let overlap = inner(&big_phi, &phi);
        if overlap.norm() == 0.0 {
            return Err(Error::InverseIteration {
                lambda: lam,
                residual: f64::INFINITY,
            });
        }
        let scale = overlap.conj().inv();
        for z in big_phi.iter_mut() {
            *z *= scale;
        }
        right.push(phi);
        left.push(big_phi);
    }

    let mut bi = 0.0f64;
    for (i, big_phi) in left.iter().enumerate() {
        for (j, phi) in right.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            bi = bi.max((inner(big_phi, phi) - target).norm());
        }
    }

    // eta v = sum_k Phi_k <Phi_k|v>
    let eta = |v: &[Complex64]| -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for big_phi in &left {
            let c = inner(big_phi, v);
            for (o, b) in out.iter_mut().zip(big_phi) {
                *o += b * c;
            }
        }
        out
    };
    let mut ph = 0.0f64;
    for phi in &right {
        let lhs = eta(&mat.mul_vec(phi)?);
        let rhs = adj.mul_vec(&eta(phi))?;
        let d: Vec<Complex64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        ph = ph.max(vec_norm(&d) / vec_norm(phi));
    }

    Ok(EtaReport {
        eigenvalues: eig,
        biorthonormality_defect: bi,
        pseudo_hermiticity_defect: ph,
        tolerance: tol,
        passed: bi <= tol && ph <= tol,
    })
}

/// Broken-phase probe for a general quadratic: the largest `|Im E|` among
/// the `n_max` lowest-modulus eigenvalues of the truncation built at the
/// critical frequency. Falls back to frequency 1 when `c_pp = 0`.
pub fn broken_phase_indicator(
    q: &QuadraticHamiltonian,
    n: usize,
    n_max: usize,
) -> Result<PhaseProbe> {
    let omega = quadratic_critical_frequency(q)
        .filter(|w| w.norm() > 0.0)
        .unwrap_or(Complex64::new(1.0, 0.0));
    let m = quadratic_fock_matrix(q, omega, n)?;
    let mut eig = m.numeric_spectrum()?;
    eig.sort_by(|a, b| {
        a.norm()
            .total_cmp(&b.norm())
            .then(a.re.total_cmp(&b.re))
            .then(a.im.total_cmp(&b.im))
    });
    eig.truncate(n_max);
    let max_imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    sort_by_real(&mut eig);
    Ok(PhaseProbe {
        omega,
        eigenvalues: eig,
        max_imag,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProbe {
    pub omega: Complex64,
    pub eigenvalues: Vec<Complex64>,
    pub max_imag: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn sho() -> ThreeParamOscillator {
        ThreeParamOscillator::new(0.5, 0.0, 0.5).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        for n in 0..6 {
            let (a, b, c) = fock_coefficients(&sho(), 1.0, n).unwrap();
            assert_eq!((a, c), (0.0, 0.0));
            assert!((b - (n as f64 + 0.5)).abs() < 1e-15);
        }
        let (a, b, c) = fock_coefficients(&sho(), 2.0, 2).unwrap();
        assert!((a + 3.0 * 2f64.sqrt() / 8.0).abs() < 1e-15);
        assert!((b - (0.5 + 0.125) * 5.0).abs() < 1e-15);
        assert!((c - (-0.5 + 0.125) * 12f64.sqrt()).abs() < 1e-15);
        let (a1, _, _) =
            fock_coefficients(&ThreeParamOscillator::new(0.4, 0.3, 0.6).unwrap(), 0.7, 1).unwrap();
        assert_eq!(a1, 0.0);
        assert!(fock_coefficients(&sho(), 0.0, 1).is_err());
    }

    #[test]
    fn critical_frequency_examples() {
        match critical_frequencies(&sho()) {
            CriticalFrequencies::Pair {
                plus,
                minus,
                sign_contract,
            } => {
                assert_eq!((plus, minus), (1.0, -1.0));
                assert!(sign_contract);
            }
            other => panic!("{other:?}"),
        }
        let broken = ThreeParamOscillator::new(0.5, 0.0, -0.5).unwrap();
        assert_eq!(
            critical_frequencies(&broken),
            CriticalFrequencies::ComplexPair {
                discriminant: -0.25
            }
        );
        let free = ThreeParamOscillator::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(critical_frequencies(&free), CriticalFrequencies::NoRoot);
        let single = ThreeParamOscillator::new(0.0, 0.25, 1.0).unwrap();
        assert_eq!(
            critical_frequencies(&single),
            CriticalFrequencies::Single(2.0)
        );
        let ep = ThreeParamOscillator::new(1.0, 1.0, -1.0).unwrap();
        assert_eq!(
            critical_frequencies(&ep),
            CriticalFrequencies::Exceptional(-1.0)
        );
    }

    #[test]
    fn rath_mallick_frequencies() {
        let (l, b) = (0.3, 0.2);
        let h = ThreeParamOscillator::rath_mallick(l, b).unwrap();
        assert!((h.discriminant() - 0.25).abs() < 1e-15);
        let CriticalFrequencies::Pair { plus, minus, .. } = critical_frequencies(&h) else {
            panic!()
        };
        assert!((plus - (1.0 - b) / (1.0 + l)).abs() < 1e-14);
        assert!((minus - (1.0 + b) / (l - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn rath_mallick_matches_transform() {
        let (l, b) = (-0.4, 0.7);
        let h = ThreeParamOscillator::rath_mallick(l, b)
            .unwrap()
            .to_quadratic();
        let u = CanonicalTransform::rath_mallick(c64(l, 0.0), c64(b, 0.0)).unwrap();
        let q = u.apply_to_quadratic(&QuadraticHamiltonian::harmonic());
        assert!((h.c_pp - q.c_pp).norm() < 1e-15);
        assert!((h.c_xp - q.c_xp).norm() < 1e-15);
        assert!((h.c_xx - q.c_xx).norm() < 1e-15);
    }

    #[test]
    fn closed_forms() {
        for n in 0..5 {
            let e = closed_form_eigenvalue(&sho(), n, Branch::Plus).unwrap();
            assert_eq!(e, n as f64 + 0.5);
            assert_eq!(
                closed_form_eigenvalue(&sho(), n, Branch::Minus).unwrap(),
                -e
            );
        }
        let broken = ThreeParamOscillator::new(0.5, 0.0, -0.5).unwrap();
        assert!(matches!(
            closed_form_eigenvalue(&broken, 0, Branch::Plus),
            Err(Error::ComplexSpectrum { .. })
        ));
    }

    #[test]
    fn sho_matrix_is_diagonal() {
        let m = build_fock_matrix(&sho(), 1.0, 5).unwrap();
        let d: Vec<_> = (0..5).map(|i| c64(i as f64 + 0.5, 0.0)).collect();
        assert_eq!(m.matrix(), &CMatrix::from_diagonal(&d));
    }

    #[test]
    fn triangular_at_critical_frequency() {
        let h = ThreeParamOscillator::new(0.4, 0.3, 0.6).unwrap();
        let w = critical_frequencies(&h).branch(Branch::Plus).unwrap();
        let m = build_fock_matrix(&h, w, 30).unwrap();
        assert!(m.matrix().is_upper_triangular());
        let eig = m.numeric_spectrum().unwrap();
        for (n, z) in eig.iter().enumerate() {
            let e = closed_form_eigenvalue(&h, n, Branch::Plus).unwrap();
            assert!((z.re - e).abs() <= 1e-12 * e.abs().max(1.0));
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn agrees_with_weyl_route() {
        let h = ThreeParamOscillator::new(0.4, -0.3, 0.6).unwrap();
        let w = 1.3;
        let a = build_fock_matrix(&h, w, 12).unwrap();
        let b = h
            .to_quadratic()
            .to_weyl()
            .to_ladder(w)
            .unwrap()
            .fock_matrix(12)
            .unwrap();
        let diff = a.matrix().sub(b.matrix()).unwrap();
        assert!(diff.max_abs() < 1e-13);
    }

    #[test]
    fn eigenvector_examples() {
        let h = ThreeParamOscillator::new(0.4, 0.3, 0.6).unwrap();
        for s in 0..2 {
            let e = eigenvector_coefficients(&h, Branch::Plus, 0, s).unwrap();
            assert_eq!(e.coefficients.len(), s + 1);
            assert_eq!(e.coefficients[s], c64(1.0, 0.0));
        }
        let sho_vec = eigenvector_coefficients(&sho(), Branch::Plus, 2, 1).unwrap();
        assert_eq!(sho_vec.coefficients[5], c64(1.0, 0.0));
        assert_eq!(
            sho_vec
                .coefficients
                .iter()
                .filter(|z| z.norm() > 0.0)
                .count(),
            1
        );

        let e = eigenvector_coefficients(&h, Branch::Plus, 3, 1).unwrap();
        assert!(e.residual <= 1e-12);
        let m = build_fock_matrix(&h, e.omega, 200).unwrap();
        assert!(e.residual_on(&m).unwrap() <= 1e-10);
        assert!(e.coefficients.iter().filter(|z| z.norm() > 0.0).count() >= 2);
        assert!(e.coefficients.iter().step_by(2).all(|z| z.norm() == 0.0));
        assert!((vec_norm(&e.coefficients) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn minus_branch_eigenvectors() {
        let h = ThreeParamOscillator::rath_mallick(0.3, 0.2).unwrap();
        for k in 0..4 {
            let e = eigenvector_coefficients(&h, Branch::Minus, k, 0).unwrap();
            let expect = closed_form_eigenvalue(&h, 2 * k, Branch::Minus).unwrap();
            assert!((e.eigenvalue.re - expect).abs() < 1e-12);
            assert!(e.residual < 1e-12);
        }
    }

    #[test]
    fn identity_is_isospectral() {
        let r = verify_isospectral(&CanonicalTransform::identity(), 40, 10, 1e-12).unwrap();
        assert!(r.passed);
        assert_eq!(r.max_deviation(), 0.0);
        assert_eq!(r.normalizable(), Some(true));
        assert!(verify_isospectral(&CanonicalTransform::identity(), 20, 6, 1e-12).is_err());
    }

    #[test]
    fn ahmed_spectrum_via_gauge() {
        let (al, be) = (0.8, 0.35);
        let k = al * al + be * be;
        let base = QuadraticHamiltonian::with_force_constant(k);
        let u = CanonicalTransform::gauge_complex(c64(0.0, be));
        let reference: Vec<_> = (0..8)
            .map(|n| c64(k.sqrt() * (n as f64 + 0.5), 0.0))
            .collect();
        let r = verify_against(&base, &u, 1.0, 160, &reference, 1e-8).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn matching_reports_leftovers() {
        let (levels, unmatched) = match_levels(&[c64(0.5, 0.0)], &[c64(0.5, 0.0), c64(1.5, 0.0)]);
        assert_eq!(levels.len(), 1);
        assert_eq!(unmatched, vec![1]);
    }

    #[test]
    fn eta_on_hermitian_matrix() {
        let m =
            build_fock_matrix(&ThreeParamOscillator::new(0.5, 0.0, 0.7).unwrap(), 1.0, 30).unwrap();
        let r = eta_check(&m, 6, 1e-10).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn eta_rejects_degenerate_levels() {
        let d = CMatrix::from_diagonal(&[c64(1.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0)]);
        let m = FockMatrix::new(c64(1.0, 0.0), d);
        assert!(matches!(
            eta_check(&m, 2, 1e-8),
            Err(Error::DegenerateEigenvalues { .. })
        ));
    }

    #[test]
    fn general_quadratic_examples() {
        let q = QuadraticHamiltonian::harmonic();
        assert_eq!(general_quadratic_spectrum(&q, 3), c64(3.5, 0.0));
        let unbroken = QuadraticHamiltonian::shifted_momentum(0.5, 1.0 - 0.25);
        assert!(general_quadratic_spectrum(&unbroken, 0).im.abs() < 1e-15);
        let broken = QuadraticHamiltonian::shifted_momentum(1.5, 1.0 - 2.25);
        let e = general_quadratic_spectrum(&broken, 0);
        assert!(e.re.abs() < 1e-15 && e.im > 0.0);
        for g in [0.0, 0.9, 3.0, 10.0] {
            let q = QuadraticHamiltonian::shifted_momentum(g, 0.3);
            assert!(general_quadratic_spectrum(&q, 2).im.abs() < 1e-14);
        }
    }

    #[test]
    fn quadratic_matrix_matches_weyl() {
        let q = QuadraticHamiltonian::new(c64(0.3, 0.1), c64(-0.2, 0.5), c64(1.5, -0.2));
        let a = quadratic_fock_matrix(&q, c64(0.8, 0.0), 10).unwrap();
        let b = q.to_weyl().to_ladder(0.8).unwrap().fock_matrix(10).unwrap();
        assert!(a.matrix().sub(b.matrix()).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn phase_probe() {
        let below =
            broken_phase_indicator(&QuadraticHamiltonian::shifted_momentum(0.5, 0.75), 40, 8)
                .unwrap();
        assert!(below.max_imag < 1e-10, "{below:?}");
        let above = broken_phase_indicator(
            &QuadraticHamiltonian::shifted_momentum(1.2, 1.0 - 1.44),
            40,
            8,
        )
        .unwrap();
        assert!(above.max_imag > 0.1, "{above:?}");
    }
}
