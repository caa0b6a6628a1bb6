use num_complex::Complex64;

use super::CMatrix;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`.
///
/// Exactly-zero pivots are replaced by `floor` so that inverse iteration at an
/// exact eigenvalue still produces a (huge) solution in the null direction.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Result<Self> {
        Self::with_pivot_floor(a, 0.0)
    }

    pub(crate) fn with_pivot_floor(a: &CMatrix, floor: f64) -> Result<Self> {
        let n = a.require_square()?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
            }
            if pmax == 0.0 {
                if floor > 0.0 {
                    lu[(k, k)] = Complex64::new(floor, 0.0);
                } else {
                    return Err(Error::SingularParameters(format!(
                        "zero pivot in column {k}"
                    )));
                }
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.norm_sqr() == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "rhs length {} for {}x{} system",
                b.len(),
                self.n,
                self.n
            )));
        }
        let n = self.n;
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * y[j];
            }
            y[i] = s / self.lu[(i, i)];
        }
        Ok(y)
    }
}

/// Solves `A x = b`.
pub fn solve(a: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    Lu::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn solves_small_system() {
        let a = CMatrix::from_rows(&[
            vec![c64(0.0, 0.0), c64(2.0, 1.0), c64(1.0, 0.0)],
            vec![c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, -1.0)],
            vec![c64(3.0, 0.0), c64(0.0, 0.0), c64(1.0, 1.0)],
        ])
        .unwrap();
        let x = vec![c64(1.0, 2.0), c64(-0.5, 0.0), c64(0.0, 3.0)];
        let b = a.mul_vec(&x).unwrap();
        let got = solve(&a, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-13);
        }
    }

    #[test]
    fn singular_without_floor() {
        let a = CMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(1.0, 0.0)],
            vec![c64(1.0, 0.0), c64(1.0, 0.0)],
        ])
        .unwrap();
        assert!(solve(&a, &[c64(1.0, 0.0), c64(0.0, 0.0)]).is_err());
        assert!(Lu::with_pivot_floor(&a, 1e-300).is_ok());
    }
}
