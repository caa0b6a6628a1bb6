//! Normal-ordered term maps shared by the (x, p) and (a†, a) algebras.
//!
//! A key `(m, n)` stands for `L^m R^n` where the left generator `L` sits to
//! the left of the right generator `R`, and `R L = L R + kappa`.

use std::collections::BTreeMap;

use num_complex::Complex64;

/// Coefficients at or below this fraction of the largest contributing
/// magnitude are dropped.
pub(crate) const PRUNE_RELATIVE: f64 = 1e-14;

pub(crate) type Key = (u32, u32);
pub(crate) type TermMap = BTreeMap<Key, Complex64>;

/// Collects contributions per key together with their gross magnitude, so the
/// pruning threshold reflects the size of what was summed rather than what
/// survived cancellation.
#[derive(Default)]
pub(crate) struct Accumulator {
    map: BTreeMap<Key, (Complex64, f64)>,
}

impl Accumulator {
    pub(crate) fn push(&mut self, key: Key, c: Complex64) {
        if c.re == 0.0 && c.im == 0.0 {
            return;
        }
        let e = self
            .map
            .entry(key)
            .or_insert((Complex64::new(0.0, 0.0), 0.0));
        e.0 += c;
        e.1 += c.norm();
    }

    pub(crate) fn finish(self) -> TermMap {
        let scale = self.map.values().map(|v| v.1).fold(0.0, f64::max);
        let cut = PRUNE_RELATIVE * scale;
        self.map
            .into_iter()
            .filter(|(_, (c, _))| c.norm() > cut)
            .map(|(k, (c, _))| (k, c))
            .collect()
    }
}

/// `n choose k` as a float; exact for the small degrees used here.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * f64::from(i))
}

/// Product of two normal-ordered term maps given `R L = L R + kappa`.
///
/// Uses `R^b L^c = sum_k C(b,k) C(c,k) k! kappa^k L^(c-k) R^(b-k)`.
pub(crate) fn product(lhs: &TermMap, rhs: &TermMap, kappa: Complex64) -> TermMap {
    let mut acc = Accumulator::default();
    for (&(a, b), &cl) in lhs {
        for (&(c, d), &cr) in rhs {
            let base = cl * cr;
            let mut kpow = Complex64::new(1.0, 0.0);
            for k in 0..=b.min(c) {
                let w = binomial(b, k) * binomial(c, k) * factorial(k);
                acc.push((a + c - k, b - k + d), base * kpow * w);
                kpow *= kappa;
            }
        }
    }
    acc.finish()
}

pub(crate) fn sum(lhs: &TermMap, rhs: &TermMap, sign: f64) -> TermMap {
    let mut acc = Accumulator::default();
    for (&k, &c) in lhs {
        acc.push(k, c);
    }
    for (&k, &c) in rhs {
        acc.push(k, c * sign);
    }
    acc.finish()
}

pub(crate) fn scaled(terms: &TermMap, s: Complex64) -> TermMap {
    let mut acc = Accumulator::default();
    for (&k, &c) in terms {
        acc.push(k, c * s);
    }
    acc.finish()
}

/// `k`-th power by repeated squaring.
pub(crate) fn power(base: &TermMap, mut k: u32, kappa: Complex64) -> TermMap {
    let mut result: TermMap = [((0, 0), Complex64::new(1.0, 0.0))].into_iter().collect();
    let mut b = base.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = product(&result, &b, kappa);
        }
        k >>= 1;
        if k > 0 {
            b = product(&b, &b, kappa);
        }
    }
    result
}

/// Image of a term map under `L -> l_img`, `R -> r_img`, computed by
/// multiplying images in the target algebra.
pub(crate) fn substitute(
    terms: &TermMap,
    l_img: &TermMap,
    r_img: &TermMap,
    kappa: Complex64,
) -> TermMap {
    let max_l = terms.keys().map(|k| k.0).max().unwrap_or(0);
    let max_r = terms.keys().map(|k| k.1).max().unwrap_or(0);
    let one: TermMap = [((0, 0), Complex64::new(1.0, 0.0))].into_iter().collect();
    let mut l_pows = vec![one.clone()];
    for i in 1..=max_l as usize {
        let next = product(&l_pows[i - 1], l_img, kappa);
        l_pows.push(next);
    }
    let mut r_pows = vec![one];
    for i in 1..=max_r as usize {
        let next = product(&r_pows[i - 1], r_img, kappa);
        r_pows.push(next);
    }
    let mut acc = Accumulator::default();
    for (&(m, n), &c) in terms {
        let img = product(&l_pows[m as usize], &r_pows[n as usize], kappa);
        for (k, v) in img {
            acc.push(k, c * v);
        }
    }
    acc.finish()
}
