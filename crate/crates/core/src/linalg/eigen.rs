use num_complex::Complex64;

use super::lu::Lu;
use super::{sort_by_real, vec_norm, CMatrix};
use crate::error::{Error, Result};

/// QR sweeps allowed per eigenvalue before giving up.
pub const DEFAULT_MAX_ITER: usize = 30;
/// Default tolerance for [`eigenvalues`] and [`eigenvector`].
pub const DEFAULT_TOL: f64 = 1e-12;

/// Subdiagonal entries below this fraction of the neighbouring diagonal are
/// set to zero.
const DEFLATION: f64 = 1e-14;
const EXCEPTIONAL_EVERY: usize = 10;
const RADIX: f64 = 2.0;

#[derive(Debug, Clone, Copy)]
pub struct EigenSettings {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for EigenSettings {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }
}

/// Diagonal similarity scaling `D^-1 M D` with powers of two, so that row and
/// column norms are comparable. Returns the balanced matrix and `diag(D)`.
pub fn balance(m: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let n = m.require_square()?;
    let mut a = m.clone();
    let mut scale = vec![1.0; n];
    let sqrdx = RADIX * RADIX;
    for _sweep in 0..200 {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].l1_norm();
                    r += a[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                scale[i] *= f;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
    Ok((a, scale))
}

/// Householder reduction `M = Q H Q^†` with `H` upper Hessenberg and `Q` unitary.
pub fn hessenberg(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = m.require_square()?;
    let mut h = m.clone();
    let mut q = CMatrix::identity(n);
    reduce_to_hessenberg(&mut h, Some(&mut q));
    Ok((h, q))
}

fn reduce_to_hessenberg(h: &mut CMatrix, mut q: Option<&mut CMatrix>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let alpha = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let tail = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>();
        if alpha == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        for (i, vi) in v.iter_mut().take(len).enumerate() {
            *vi = h[(k + 1 + i, k)];
        }
        v[0] += phase * alpha;
        let vnorm2: f64 = v[..len].iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // Left: rows k+1.. of every column from k on.
        for j in k..n {
            let s: Complex64 = (0..len).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            let s = s * tau;
            for i in 0..len {
                h[(k + 1 + i, j)] -= v[i] * s;
            }
        }
        // Right: columns k+1.. of every row.
        for i in 0..n {
            let s: Complex64 = (0..len).map(|j| h[(i, k + 1 + j)] * v[j]).sum();
            let s = s * tau;
            for j in 0..len {
                h[(i, k + 1 + j)] -= s * v[j].conj();
            }
        }
        if let Some(q) = q.as_deref_mut() {
            for i in 0..n {
                let s: Complex64 = (0..len).map(|j| q[(i, k + 1 + j)] * v[j]).sum();
                let s = s * tau;
                for j in 0..len {
                    q[(i, k + 1 + j)] -= s * v[j].conj();
                }
            }
        }
        h[(k + 1, k)] = -phase * alpha;
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Eigenvalues with the default settings.
pub fn eigenvalues_default(m: &CMatrix) -> Result<Vec<Complex64>> {
    eigenvalues(m, EigenSettings::default())
}

/// All eigenvalues of a general complex matrix, sorted by real part then
/// imaginary part.
///
/// Triangular input returns its diagonal without iterating.
pub fn eigenvalues(m: &CMatrix, settings: EigenSettings) -> Result<Vec<Complex64>> {
    let n = m.require_square()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("eigenvalue input".into()));
    }
    if m.is_upper_triangular() || m.is_lower_triangular() {
        let mut d = m.diagonal();
        sort_by_real(&mut d);
        return Ok(d);
    }
    let (mut h, _) = balance(m)?;
    reduce_to_hessenberg(&mut h, None);
    let mut eig = hessenberg_qr(&mut h, settings)?;
    sort_by_real(&mut eig);
    Ok(eig)
}

/// Eigenvalues of the 2x2 block `[[a, b], [c, d]]`, larger magnitude first.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let (p, q) = (half_tr + root, half_tr - root);
    let big = if p.norm() >= q.norm() { p } else { q };
    let det = a * d - b * c;
    let small = if big.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        det / big
    };
    (big, small)
}

fn hessenberg_qr(h: &mut CMatrix, settings: EigenSettings) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let hnorm = h.norm().max(f64::MIN_POSITIVE);
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let mut rot = vec![(0.0, Complex64::new(0.0, 0.0)); n];
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    let mut found = 0usize;

    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // Locate the top of the unreduced block ending at `hi`.
        let mut l = hi;
        while l > 0 {
            let local = h[(l - 1, l - 1)].l1_norm() + h[(l, l)].l1_norm();
            let scale = if local > settings.tol * hnorm {
                local
            } else {
                hnorm
            };
            if h[(l, l - 1)].l1_norm() <= DEFLATION * scale {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            found += 1;
            hi -= 1;
            its = 0;
            continue;
        }
        if l + 1 == hi {
            let (e1, e2) = eig2(h[(l, l)], h[(l, hi)], h[(hi, l)], h[(hi, hi)]);
            eig[l] = e1;
            eig[hi] = e2;
            found += 2;
            if l == 0 {
                break;
            }
            hi = l - 1;
            its = 0;
            continue;
        }
        if its >= settings.max_iter {
            return Err(Error::NoConvergence {
                found,
                total: n,
                iterations: total,
            });
        }
        its += 1;
        total += 1;

        let shift = if its.is_multiple_of(EXCEPTIONAL_EVERY) {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].re.abs()
        } else {
            let d = h[(hi, hi)];
            let (e1, e2) = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], d);
            if (e1 - d).norm() <= (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };

        // Explicit shifted QR on the active block: H - mu = QR, H <- RQ + mu.
        for k in l..=hi {
            h[(k, k)] -= shift;
        }
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rot[k] = (c, s);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
        }
        for k in l..hi {
            let (c, s) = rot[k];
            let top = (k + 2).min(hi);
            for i in l..=top {
                let u = h[(i, k)];
                let v = h[(i, k + 1)];
                h[(i, k)] = u * c + s.conj() * v;
                h[(i, k + 1)] = -s * u + v * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(eig)
}

/// Rotation `[[c, s], [-conj(s), c]]` with real `c` mapping `(f, g)` to `(r, 0)`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let fn_ = f.norm();
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn);
    }
    let nrm = fn_.hypot(gn);
    let alpha = f / fn_;
    (fn_ / nrm, alpha * g.conj() / nrm)
}

/// Unit eigenvector for an approximate eigenvalue `lambda`, by inverse
/// iteration. The phase is fixed so the largest component is real positive.
pub fn eigenvector(m: &CMatrix, lambda: Complex64, tol: f64) -> Result<Vec<Complex64>> {
    let n = m.require_square()?;
    if !m.is_finite() || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::NonFinite("eigenvector input".into()));
    }
    let norm = m.norm().max(f64::MIN_POSITIVE);
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] -= lambda;
    }
    let lu = Lu::with_pivot_floor(&shifted, f64::EPSILON * norm)?;
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64 * 0.618_033_988_749_895).fract(), 0.0))
        .collect();
    normalize(&mut v);
    let mut residual = f64::INFINITY;
    for _ in 0..8 {
        let mut w = lu.solve(&v)?;
        if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            break;
        }
        normalize(&mut w);
        let mw = m.mul_vec(&w)?;
        residual = vec_norm(
            &mw.iter()
                .zip(&w)
                .map(|(a, b)| a - lambda * b)
                .collect::<Vec<_>>(),
        );
        v = w;
        if residual <= tol * norm {
            fix_phase(&mut v);
            return Ok(v);
        }
    }
    Err(Error::InverseIteration { lambda, residual })
}

fn normalize(v: &mut [Complex64]) {
    let nrm = vec_norm(v);
    if nrm > 0.0 {
        for z in v.iter_mut() {
            *z /= nrm;
        }
    }
}

fn fix_phase(v: &mut [Complex64]) {
    if let Some(big) = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
    {
        if big.norm() > 0.0 {
            let ph = big.conj() / big.norm();
            for z in v.iter_mut() {
                *z *= ph;
            }
        }
    }
}
