//! The Weierstrass product Lambda(z) = prod_m (1 + i z / lambda_m^2) with
//! lambda_m^2 = kappa^4 j_{nu,m}^4.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{bessel_j_prime, ln_bessel_i, ln_gamma, mcmahon_zero, BesselOrder, ZeroTable};

/// Terms of the tail power series; the series argument is at most 1/2.
const TAIL_TERMS: usize = 64;
/// Exact zeros beyond the ones factored individually before switching to
/// McMahon's expansion inside the tail sums.
const EXACT_TAIL: usize = 64;
/// Last index summed with McMahon zeros; beyond it the sum is an integral.
const MCMAHON_LIMIT: usize = 20_000;

/// log Lambda evaluated with the first `n_exact` factors taken one by one
/// and the rest through the series
/// sum_{m > N} log(1 + w/lambda_m^2) = sum_p (-1)^{p+1} (w/L)^p Q_p / p,
/// where L = lambda_{N+1}^2 and Q_p = sum_{m > N} (L / lambda_m^2)^p.
#[derive(Debug, Clone)]
pub struct LambdaProduct {
    pub kappa: f64,
    pub nu: f64,
    /// lambda_m^2 for m = 1..=n_exact.
    lambda_sq: Vec<f64>,
    /// lambda_{N+1}^2
    tail_scale: f64,
    tail_sums: Vec<f64>,
    pub z_max: f64,
}

impl LambdaProduct {
    /// A product accurate for |z| <= z_max, with at least `min_exact` factors
    /// handled exactly (so those indices can be skipped).
    pub fn new(kappa: f64, zeros: &ZeroTable, z_max: f64, min_exact: usize) -> Result<LambdaProduct> {
        if !(z_max >= 0.0 && z_max.is_finite()) {
            return Err(Error::domain(format!("z_max must be finite and nonnegative, got {z_max}")));
        }
        let k4 = kappa.powi(4);
        let mut table = zeros.extended(min_exact.max(1) + 1)?;
        let mut n = min_exact.max(1);
        loop {
            if n + 1 > table.len() {
                table = table.extended(2 * (n + 1))?;
            }
            if k4 * table.get(n + 1).powi(4) >= 2.0 * z_max {
                break;
            }
            n += 1;
        }
        let n_ex = n + EXACT_TAIL + (2.0 * table.nu).ceil() as usize;
        let table = table.extended(n_ex)?;
        let lambda_sq: Vec<f64> = (1..=n).map(|m| k4 * table.get(m).powi(4)).collect();
        let j_next = table.get(n + 1);
        let tail_scale = k4 * j_next.powi(4);

        let mut tail_sums = vec![0.0; TAIL_TERMS];
        let add_ratio = |r: f64, sums: &mut Vec<f64>| {
            let mut rp = r;
            for s in sums.iter_mut() {
                *s += rp;
                rp *= r;
                if rp < 1e-40 {
                    break;
                }
            }
        };
        // Summed from the smallest ratio up.
        for m in (n + 1..=n_ex).rev() {
            let r = (j_next / table.get(m)).powi(4);
            add_ratio(r, &mut tail_sums);
        }
        let mut mcmahon = vec![0.0; TAIL_TERMS];
        let limit = MCMAHON_LIMIT.max(n_ex + 1);
        for m in (n_ex + 1..=limit).rev() {
            let r = (j_next / mcmahon_zero(table.nu, m)).powi(4);
            add_ratio(r, &mut mcmahon);
        }
        let shift = limit as f64 + 0.5 + 0.5 * table.nu - 0.25;
        for (p, s) in tail_sums.iter_mut().enumerate() {
            let q = 4.0 * (p + 1) as f64;
            let ln_int = q * (j_next / PI).ln() + (1.0 - q) * shift.ln() - (q - 1.0).ln();
            *s += mcmahon[p] + ln_int.exp();
        }
        Ok(LambdaProduct { kappa, nu: table.nu, lambda_sq, tail_scale, tail_sums, z_max })
    }

    /// Number of factors handled individually.
    pub fn n_exact(&self) -> usize {
        self.lambda_sq.len()
    }

    pub fn lambda_sq(&self, m: usize) -> f64 {
        self.lambda_sq[m - 1]
    }

    /// log Lambda(z), or log of Lambda(z) / (1 + i z / lambda_k^2) when
    /// `skip = Some(k)`. A zero factor gives a real part of -inf.
    pub fn log_eval(&self, z: Complex64, skip: Option<usize>) -> Result<Complex64> {
        if z.norm() > self.z_max * (1.0 + 1e-12) {
            return Err(Error::Precision(format!(
                "|z| = {} exceeds the product's accuracy radius {}",
                z.norm(),
                self.z_max
            )));
        }
        if let Some(k) = skip {
            if k == 0 || k > self.lambda_sq.len() {
                return Err(Error::Dimension(format!("cannot skip factor {k} of {}", self.lambda_sq.len())));
            }
        }
        let w = Complex64::i() * z;
        let one = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, l2) in self.lambda_sq.iter().enumerate() {
            if Some(i + 1) == skip {
                continue;
            }
            let f = one + w / *l2;
            if f.re == 0.0 && f.im == 0.0 {
                return Ok(Complex64::new(f64::NEG_INFINITY, 0.0));
            }
            acc += f.ln();
        }
        Ok(acc + self.tail(w))
    }

    fn tail(&self, w: Complex64) -> Complex64 {
        let v = w / self.tail_scale;
        let mut vp = v;
        let mut s = Complex64::new(0.0, 0.0);
        for (p, q) in self.tail_sums.iter().enumerate() {
            let term = vp * (*q / (p + 1) as f64);
            if p % 2 == 0 {
                s += term;
            } else {
                s -= term;
            }
            if term.norm() < 1e-18 * s.norm().max(1e-300) {
                break;
            }
            vp *= v;
        }
        s
    }

    /// ln |Lambda'(i lambda_k^2)| through the product:
    /// Lambda'(i lambda_k^2) = (i/lambda_k^2) prod_{m != k} (1 - lambda_k^2/lambda_m^2).
    pub fn ln_abs_derivative(&self, k: usize) -> Result<f64> {
        let l2 = self.lambda_sq(k);
        Ok(self.log_eval(Complex64::new(0.0, l2), Some(k))?.re - l2.ln())
    }
}

/// Lambda'(i lambda_k^2) = i * sign * exp(log_magnitude): the derivative is
/// purely imaginary with sign (-1)^{k-1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaPrime {
    pub sign: f64,
    pub log_magnitude: f64,
}

/// Closed form through J_nu(x) I_nu(x) = ((x/2)^nu / Gamma(nu+1))^2 prod (1 - x^4/j_m^4):
/// |Lambda'(i lambda_k^2)| = Gamma(nu+1)^2 4^{nu-1} |J'_nu(j_k)| I_nu(j_k) / (kappa^4 j_k^{2nu+3}).
pub fn lambda_prime_log(kappa: f64, nu: f64, zero: f64, k: usize) -> Result<LambdaPrime> {
    let order = BesselOrder::new(nu)?;
    let jp = bessel_j_prime(order, zero)?.abs();
    let log_magnitude = 2.0 * ln_gamma(nu + 1.0)? + (nu - 1.0) * 4f64.ln() - 4.0 * kappa.ln()
        - (2.0 * nu + 3.0) * zero.ln()
        + jp.ln()
        + ln_bessel_i(order, zero)?;
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    Ok(LambdaPrime { sign, log_magnitude })
}
