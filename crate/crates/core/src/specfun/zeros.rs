use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

use super::bessel::{bessel_j, bessel_j_prime, BesselOrder};

const NEWTON_MAX_ITER: usize = 50;
/// Scan step for sign changes. Consecutive zeros of J_nu are more than 3 apart.
const SCAN_STEP: f64 = 0.5;

/// Positive zeros j_{nu,1} < j_{nu,2} < ... of J_nu.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroTable {
    pub nu: f64,
    pub zeros: Vec<f64>,
}

impl ZeroTable {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// The k-th zero, 1-based.
    pub fn get(&self, k: usize) -> f64 {
        self.zeros[k - 1]
    }

    /// A table with at least `count` zeros, reusing the ones already found.
    pub fn extended(&self, count: usize) -> Result<ZeroTable> {
        if count <= self.zeros.len() {
            return Ok(self.clone());
        }
        let nu = BesselOrder::new(self.nu)?;
        let mut zeros = self.zeros.clone();
        while zeros.len() < count {
            let z = next_zero(nu, &zeros)?;
            zeros.push(z);
        }
        Ok(ZeroTable { nu: self.nu, zeros })
    }
}

/// McMahon's large-k expansion of j_{nu,k}.
pub fn mcmahon_zero(nu: f64, k: usize) -> f64 {
    let m = 4.0 * nu * nu;
    let b = (k as f64 + 0.5 * nu - 0.25) * PI;
    let e = 8.0 * b;
    b - (m - 1.0) / e - 4.0 * (m - 1.0) * (7.0 * m - 31.0) / (3.0 * e.powi(3))
        - 32.0 * (m - 1.0) * (83.0 * m * m - 982.0 * m + 3779.0) / (15.0 * e.powi(5))
}

/// The first `count` positive zeros of J_nu.
pub fn bessel_zeros(nu: BesselOrder, count: usize) -> Result<ZeroTable> {
    let mut zeros = Vec::with_capacity(count);
    while zeros.len() < count {
        let z = next_zero(nu, &zeros)?;
        zeros.push(z);
    }
    Ok(ZeroTable { nu: nu.value(), zeros })
}

fn sign_change(nu: BesselOrder, a: f64, b: f64) -> Result<bool> {
    let fa = bessel_j(nu, a)?;
    let fb = bessel_j(nu, b)?;
    Ok(fa * fb < 0.0)
}

/// Brackets the zero after the ones in `found`, then refines it.
fn next_zero(nu: BesselOrder, found: &[f64]) -> Result<f64> {
    let k = found.len() + 1;
    let n = nu.value();
    let bracket = match found.len() {
        0 => {
            // J_nu > 0 on (0, j_1) and j_1 exceeds both sqrt(nu(nu+2)) and j_{0,1}.
            let start = (n * (n + 2.0)).sqrt().max(2.4);
            scan(nu, start, k)?
        }
        1 => scan(nu, found[0] + 1.0, k)?,
        _ => {
            let last = found[found.len() - 1];
            let gap = last - found[found.len() - 2];
            let slack = 1e-9 * last;
            // Gaps shrink toward pi from above when nu > 1/2 and grow toward
            // pi from below when nu < 1/2.
            let (lo, hi) = if n > 0.5 {
                (last + PI - slack, last + gap + slack)
            } else if n < 0.5 {
                (last + gap - slack, last + PI + slack)
            } else {
                (last + PI - 1e-6, last + PI + 1e-6)
            };
            if lo > last + 1.0 && sign_change(nu, lo, hi)? {
                (lo, hi)
            } else {
                scan(nu, last + 1.0, k)?
            }
        }
    };
    refine(nu, bracket, k)
}

fn scan(nu: BesselOrder, start: f64, k: usize) -> Result<(f64, f64)> {
    let mut a = start;
    let mut fa = bessel_j(nu, a)?;
    for _ in 0..100_000 {
        let b = a + SCAN_STEP;
        let fb = bessel_j(nu, b)?;
        if fa == 0.0 {
            return Ok((a, a));
        }
        if fa * fb <= 0.0 {
            return Ok((a, b));
        }
        a = b;
        fa = fb;
    }
    Err(Error::Convergence { k })
}

/// Safeguarded Newton inside a sign-change bracket, bisection as fallback.
fn refine(nu: BesselOrder, (mut lo, mut hi): (f64, f64), k: usize) -> Result<f64> {
    if lo == hi {
        return Ok(lo);
    }
    let mut flo = bessel_j(nu, lo)?;
    let guess = mcmahon_zero(nu.value(), k);
    let mut x = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for _ in 0..NEWTON_MAX_ITER {
        let f = bessel_j(nu, x)?;
        if f == 0.0 {
            return Ok(x);
        }
        if f * flo < 0.0 {
            hi = x;
        } else {
            lo = x;
            flo = f;
        }
        let d = bessel_j_prime(nu, x)?;
        let mut next = x - f / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x {
            return Ok(next);
        }
        x = next;
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(0.5 * (lo + hi));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(mid);
        }
        let f = bessel_j(nu, mid)?;
        if f * flo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = f;
        }
    }
    Err(Error::Convergence { k })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_order_zeros_are_multiples_of_pi() {
        let t = bessel_zeros(BesselOrder::new(0.5).unwrap(), 40).unwrap();
        for (i, z) in t.zeros.iter().enumerate() {
            let exact = (i + 1) as f64 * PI;
            assert!((z - exact).abs() < 1e-12 * exact, "k={} z={z}", i + 1);
        }
    }

    #[test]
    fn extension_matches_direct() {
        let nu = BesselOrder::new(1.7).unwrap();
        let a = bessel_zeros(nu, 5).unwrap().extended(12).unwrap();
        let b = bessel_zeros(nu, 12).unwrap();
        assert_eq!(a.zeros, b.zeros);
    }
}
