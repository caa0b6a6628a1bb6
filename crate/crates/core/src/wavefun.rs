//! Position-space wavefunctions on a real grid.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::EigenPair;
use crate::weyl::WeylPoly;

/// Default grid half-width in units of `1/sqrt(omega)`.
pub const DEFAULT_HALF_WIDTH: f64 = 12.0;
pub const DEFAULT_POINTS: usize = 4001;

/// Entries with `|v| < NODE_FLOOR * max|v|` are ignored when counting nodes.
const NODE_FLOOR: f64 = 1e-9;
/// Imaginary parts below this fraction of `max|v|` count as real.
const REAL_TOL: f64 = 1e-10;
/// A phase step between neighbours with `|sin| > LOCAL_PHASE` is neither a
/// continuation nor a sign flip.
const LOCAL_PHASE: f64 = 0.5;

/// Rescaling step in the Hermite recurrence, `2^600`.
const RESCALE_EXP: i32 = 600;

/// Strictly increasing sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    /// Set when the points are equally spaced.
    spacing: Option<f64>,
}

impl Grid {
    pub fn uniform(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count < 2 || !(start < stop) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "uniform grid needs start < stop and >= 2 points, got [{start}, {stop}] with {count}"
            )));
        }
        let h = (stop - start) / (count - 1) as f64;
        let points = (0..count)
            .map(|i| {
                if i + 1 == count {
                    stop
                } else {
                    start + h * i as f64
                }
            })
            .collect();
        Ok(Self {
            points,
            spacing: Some(h),
        })
    }

    /// `[-12/sqrt(w), 12/sqrt(w)]` with 4001 points.
    pub fn for_frequency(omega: f64) -> Result<Self> {
        check_frequency(omega)?;
        let half = DEFAULT_HALF_WIDTH / omega.sqrt();
        Self::uniform(-half, half, DEFAULT_POINTS)
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "grid needs at least 2 points".into(),
            ));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) || points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "grid points must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self {
            points,
            spacing: None,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> Option<f64> {
        self.spacing
    }

    /// Composite Simpson on uniform grids (3/8 rule on the last panel when
    /// the interval count is odd), trapezoid otherwise.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values on a {}-point grid",
                f.len(),
                self.len()
            )));
        }
        let n = f.len();
        let Some(h) = self.spacing else {
            return Ok(self
                .points
                .windows(2)
                .zip(f.windows(2))
                .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
                .sum());
        };
        let intervals = n - 1;
        if intervals == 1 {
            return Ok(0.5 * h * (f[0] + f[1]));
        }
        let (simpson_end, tail) = if intervals.is_multiple_of(2) {
            (n - 1, 0.0)
        } else if intervals >= 3 {
            let k = n - 4;
            (
                k,
                3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]),
            )
        } else {
            unreachable!()
        };
        let mut s = 0.0;
        if simpson_end > 0 {
            s = f[0] + f[simpson_end];
            for (i, v) in f.iter().enumerate().take(simpson_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            s *= h / 3.0;
        }
        Ok(s + tail)
    }
}

/// Complex samples of a wavefunction on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionSample {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub omega: f64,
    /// Where the values came from, e.g. `hermite n=3`.
    pub provenance: String,
}

impl WavefunctionSample {
    pub fn new(
        grid: Grid,
        values: Vec<Complex64>,
        omega: f64,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values on a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            omega,
            provenance: provenance.into(),
        })
    }

    /// Oscillator eigenfunction `n` sampled on `grid`.
    pub fn hermite(n: usize, omega: f64, grid: &Grid) -> Result<Self> {
        check_frequency(omega)?;
        let values = grid
            .points()
            .iter()
            .map(|&x| hermite_function(n, omega, x).map(|v| Complex64::new(v, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid.clone(), values, omega, format!("hermite n={n}"))
    }

    /// `sqrt(int |psi|^2 dx)`.
    pub fn norm(&self) -> Result<f64> {
        let dens: Vec<f64> = self.values.iter().map(|z| z.norm_sqr()).collect();
        Ok(self.grid.integrate(&dens)?.sqrt())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Multiplies pointwise by `exp(u(x))` for a position-only `u`.
    pub fn gauge(&self, u: &WeylPoly) -> Result<Self> {
        let values = self
            .grid
            .points()
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| u.eval_x(x).map(|e| v * e.exp()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: self.grid.clone(),
            values,
            omega: self.omega,
            provenance: format!("exp({u}) * [{}]", self.provenance),
        })
    }

    /// `max |psi(x) - (-1)^s psi(-x)|` on a grid symmetric about 0.
    pub fn parity_defect(&self, s: usize) -> Result<f64> {
        let pts = self.grid.points();
        let n = pts.len();
        let sign = if s.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut worst = 0.0f64;
        for i in 0..n {
            let j = n - 1 - i;
            if (pts[i] + pts[j]).abs() > 1e-12 * pts[j].abs().max(1.0) {
                return Err(Error::InvalidArgument(
                    "grid is not symmetric about 0".into(),
                ));
            }
            worst = worst.max((self.values[i] - self.values[j] * sign).norm());
        }
        Ok(worst)
    }
}

fn check_frequency(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidFrequency {
            value: omega,
            expected: "finite and > 0",
        })
    }
}

/// `psi_0 .. psi_n` at frequency `omega` and position `x`.
///
/// Uses `psi_{k+1} = sqrt(2/(k+1)) xi psi_k - sqrt(k/(k+1)) psi_{k-1}` on the
/// polynomial parts with a shared power-of-two exponent, and applies the
/// Gaussian `(w/pi)^{1/4} exp(-xi^2/2)` at the end in log space.
pub fn hermite_sequence(n: usize, omega: f64, x: f64) -> Result<Vec<f64>> {
    check_frequency(omega)?;
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "position must be finite, got {x}"
        )));
    }
    let xi = omega.sqrt() * x;
    let log_gauss = 0.25 * (omega / PI).ln() - 0.5 * xi * xi;
    let big = 2f64.powi(RESCALE_EXP);
    let small = 2f64.powi(-RESCALE_EXP);

    let mut out = Vec::with_capacity(n + 1);
    let emit = |v: f64, e: i32| -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let lg = log_gauss + f64::from(e) * f64::from(RESCALE_EXP) * LN_2 + v.abs().ln();
        v.signum() * lg.exp()
    };
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut exp = 0i32;
    out.push(emit(cur, exp));
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > big {
            cur *= small;
            prev *= small;
            exp += 1;
        }
        out.push(emit(cur, exp));
    }
    Ok(out)
}

/// Normalized oscillator eigenfunction `n` at frequency `omega`.
pub fn hermite_function(n: usize, omega: f64, x: f64) -> Result<f64> {
    Ok(hermite_sequence(n, omega, x)?[n])
}

/// `[(1 - b)/(pi (1 + a))]^{1/4} exp(-(1 - b) x^2 / (2 (1 + a)))`, the
/// ground state of the transformed oscillator. Needs `b < 1` and `a > -1`.
pub fn rm_ground_state(alpha: f64, beta: f64, x: f64) -> Result<f64> {
    let margin = (1.0 - beta) / (1.0 + alpha);
    if !(beta < 1.0 && alpha > -1.0) {
        return Err(Error::NonNormalizable {
            reason: format!(
                "ground state needs beta < 1 and alpha > -1 (alpha = {alpha}, beta = {beta})"
            ),
            margin,
        });
    }
    Ok((margin / PI).powf(0.25) * (-0.5 * margin * x * x).exp())
}

/// `sum_n d_n psi_n(x)` for the coefficients of `e`.
pub fn synthesize(e: &EigenPair, omega: f64, grid: &Grid) -> Result<WavefunctionSample> {
    check_frequency(omega)?;
    let top = e.coefficients.len().saturating_sub(1);
    let mut values = Vec::with_capacity(grid.len());
    for &x in grid.points() {
        let h = hermite_sequence(top, omega, x)?;
        values.push(e.coefficients.iter().zip(&h).map(|(d, v)| d * v).sum());
    }
    WavefunctionSample::new(
        grid.clone(),
        values,
        omega,
        format!("eigenpair k={} s={}", e.excitation, e.parity),
    )
}

/// Number of sign changes, skipping points below `1e-9 max|psi|`.
///
/// Real samples are counted directly. A complex sample is accepted when it
/// is locally real, i.e. neighbouring values differ in phase by close to
/// `0` or `pi`; a flip by about `pi` counts as a node. Samples whose phase
/// jumps by anything else are rejected.
pub fn count_nodes(w: &WavefunctionSample) -> Result<usize> {
    let max = w.max_abs();
    if max == 0.0 {
        return Ok(0);
    }
    let sig: Vec<Complex64> = w
        .values
        .iter()
        .copied()
        .filter(|z| z.norm() >= NODE_FLOOR * max)
        .collect();
    let real = w.values.iter().all(|z| z.im.abs() <= REAL_TOL * max);
    let mut nodes = 0;
    for pair in sig.windows(2) {
        if real {
            if pair[0].re * pair[1].re < 0.0 {
                nodes += 1;
            }
            continue;
        }
        let rho = pair[1] * pair[0].conj();
        if rho.im.abs() > LOCAL_PHASE * rho.norm() {
            return Err(Error::ComplexSample);
        }
        if rho.re < 0.0 {
            nodes += 1;
        }
    }
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::spectra::{eigenvector_coefficients, Branch, ThreeParamOscillator};

    #[test]
    fn ground_state_closed_form() {
        for (w, x) in [(1.0, 0.0), (2.5, 0.7), (0.3, -3.0)] {
            let expect = (w / PI).powf(0.25) * (-w * x * x / 2.0).exp();
            assert!((hermite_function(0, w, x).unwrap() - expect).abs() < 1e-15);
        }
        assert_eq!(hermite_function(1, 1.0, 0.0).unwrap(), 0.0);
        assert!(hermite_function(2, 0.0, 1.0).is_err());
        assert!(hermite_function(2, -1.0, 1.0).is_err());
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn extended_precision_references() {
        // 30-digit values of the normalized Hermite function, omega = 1, n = 20.
        let refs = [
            (0.0, 0.315_291_200_941_802_833_171_512_258_12),
            (1.0, 0.315_816_475_077_235_169_487_476_643_122),
            (5.0, -0.395_580_603_296_076_457_574_645_272_424),
        ];
        for (x, r) in refs {
            let v = hermite_function(20, 1.0, x).unwrap();
            assert!(((v - r) / r).abs() < 1e-10, "x = {x}: {v} vs {r}");
        }
        let v = hermite_function(7, 2.5, 0.3).unwrap();
        let r = -0.493_742_876_510_339_500_916_385_483_118;
        assert!(((v - r) / r).abs() < 1e-10);
    }

    #[test]
    fn finite_far_out() {
        for n in [0, 1, 10, 200, 1000] {
            for xi in [-40.0, 25.0, 40.0] {
                let v = hermite_function(n, 1.0, xi).unwrap();
                assert!(v.is_finite());
            }
        }
        assert!(hermite_function(1000, 1.0, 30.0).unwrap().abs() > 0.0);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        for count in [5, 6, 11] {
            let g = Grid::uniform(-1.0, 2.0, count).unwrap();
            let f: Vec<f64> = g
                .points()
                .iter()
                .map(|x| x * x * x - 2.0 * x + 1.0)
                .collect();
            let exact = (16.0 - 1.0) / 4.0 - (4.0 - 1.0) + 3.0;
            assert!((g.integrate(&f).unwrap() - exact).abs() < 1e-13, "{count}");
        }
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::uniform(1.0, 1.0, 10).is_err());
        assert!(Grid::uniform(0.0, 1.0, 1).is_err());
        assert!(Grid::from_points(vec![0.0, 0.0, 1.0]).is_err());
        let g = Grid::from_points(vec![0.0, 0.5, 2.0]).unwrap();
        assert!((g.integrate(&[1.0, 1.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rm_ground_state_examples() {
        for x in [-1.0, 0.0, 0.4] {
            let a = rm_ground_state(0.0, 0.0, x).unwrap();
            assert!((a - hermite_function(0, 1.0, x).unwrap()).abs() < 1e-15);
        }
        let w = 8.0 / 13.0;
        let v = rm_ground_state(0.3, 0.2, 1.0).unwrap();
        assert!((v - (w / PI).powf(0.25) * (-w / 2.0).exp()).abs() < 1e-15);
        match rm_ground_state(0.3, 1.0, 0.0) {
            Err(Error::NonNormalizable { margin, .. }) => assert_eq!(margin, 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn synthesized_norm_and_parity() {
        let h = ThreeParamOscillator::new(0.4, 0.3, 0.6).unwrap();
        for s in 0..2 {
            let e = eigenvector_coefficients(&h, Branch::Plus, 3, s).unwrap();
            let g = Grid::for_frequency(e.omega).unwrap();
            let w = synthesize(&e, e.omega, &g).unwrap();
            assert!((w.norm().unwrap() - 1.0).abs() < 1e-8);
            assert!(w.parity_defect(s).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn nodes_of_hermite_functions() {
        let g = Grid::for_frequency(1.0).unwrap();
        for n in 0..=10 {
            let w = WavefunctionSample::hermite(n, 1.0, &g).unwrap();
            assert_eq!(count_nodes(&w).unwrap(), n);
        }
        let g = Grid::for_frequency(3.7).unwrap();
        assert_eq!(
            count_nodes(&WavefunctionSample::hermite(0, 3.7, &g).unwrap()).unwrap(),
            0
        );
    }

    #[test]
    fn gauged_sample_keeps_nodes() {
        let g = Grid::for_frequency(1.0).unwrap();
        let u = WeylPoly::monomial(2, 0, c64(0.0, 0.3));
        for n in 0..4 {
            let w = WavefunctionSample::hermite(n, 1.0, &g)
                .unwrap()
                .gauge(&u)
                .unwrap();
            assert_eq!(count_nodes(&w).unwrap(), n);
        }
    }

    #[test]
    fn rejects_winding_sample() {
        let g = Grid::uniform(-3.0, 3.0, 61).unwrap();
        let values = g
            .points()
            .iter()
            .map(|&x| Complex64::from_polar(1.0, 10.0 * x))
            .collect();
        let w = WavefunctionSample::new(g, values, 1.0, "winding").unwrap();
        assert_eq!(count_nodes(&w), Err(Error::ComplexSample));
    }
}
