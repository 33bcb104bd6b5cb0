use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::logscale::{LogScaled, Neumaier};

use super::gamma::ln_gamma;

const FPMIN: f64 = 1e-300;
const EPS: f64 = 1e-16;

/// A validated Bessel order nu >= 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::domain(format!("Bessel order must be finite and >= 0, got {nu}")));
        }
        Ok(BesselOrder(nu))
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.0
    }
}

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!("Bessel argument must be finite and >= 0, got {x}")));
    }
    Ok(())
}

#[inline]
fn use_series(nu: f64, x: f64) -> bool {
    x <= 2.0 || x * x <= 2.0 * (nu + 1.0)
}

/// J_nu(x) for real nu >= 0 and x >= 0.
pub fn bessel_j(nu: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x)?;
    let nu = nu.value();
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if use_series(nu, x) {
        jv_series(nu, x)
    } else {
        Ok(jv_steed(nu, x)?.0)
    }
}

/// J'_nu(x) from (nu/x) J_nu(x) - J_{nu+1}(x).
pub fn bessel_j_prime(nu: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x)?;
    let n = nu.value();
    if x == 0.0 {
        return Ok(if n == 1.0 {
            0.5
        } else if n == 0.0 || n > 1.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    let j = bessel_j(nu, x)?;
    let j1 = bessel_j(BesselOrder(n + 1.0), x)?;
    Ok(n / x * j - j1)
}

/// Power series sum_m (-1)^m (x/2)^(2m+nu) / (m! Gamma(m+nu+1)).
fn jv_series(nu: f64, x: f64) -> Result<f64> {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut acc = Neumaier::default();
    acc.add(1.0);
    let mut m = 1.0;
    loop {
        term *= -q / (m * (m + nu));
        acc.add(term);
        if term.abs() < 1e-17 * acc.value().abs() && m > q {
            break;
        }
        m += 1.0;
        if m > 10_000.0 {
            return Err(Error::Precision(format!("J series did not converge at nu={nu}, x={x}")));
        }
    }
    let log_pref = if nu == 0.0 { 0.0 } else { nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)? };
    Ok(acc.value() * log_pref.exp())
}

/// Steed's method: CF1 for J'/J, downward recurrence to order mu, CF2 for
/// (J' + iY')/(J + iY) at order mu, then the Wronskian fixes the scale.
/// Valid for x >= 2. Returns (J_nu, J'_nu).
fn jv_steed(nu: f64, x: f64) -> Result<(f64, f64)> {
    let max_iter = 100_000 + 4 * x as usize;
    let nl = ((nu - x + 1.5).floor()).max(0.0) as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..max_iter {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Precision(format!("J continued fraction did not converge at nu={nu}, x={x}")));
    }

    let mut rjl = isign * FPMIN * 1e100;
    let mut rjpl = h * rjl;
    let mut rjl1 = rjl;
    let mut rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if rjl.abs() > 1e250 {
            rjl *= 1e-250;
            rjpl *= 1e-250;
            rjl1 *= 1e-250;
            rjp1 *= 1e-250;
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let mut a = 0.25 - xmu2;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fct = a * xi / (p * p + q * q);
    let mut cr = br + q * fct;
    let mut ci = bi + p * fct;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    converged = false;
    for i in 2..max_iter {
        a += 2.0 * (i as f64 - 1.0);
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fct = a / (cr * cr + ci * ci);
        cr = br + cr * fct;
        ci = bi - ci * fct;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di = -di / den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Precision(format!("J second continued fraction did not converge at nu={nu}, x={x}")));
    }
    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    let scale = rjmu / rjl;
    Ok((rjl1 * scale, rjp1 * scale))
}

#[inline]
fn use_i_asymptotic(nu: f64, x: f64) -> bool {
    x >= 30.0 && x >= 2.0 * nu * nu
}

/// I_nu(x) as (mantissa, log_scale) so that large arguments do not overflow.
pub fn bessel_i_scaled(nu: BesselOrder, x: f64) -> Result<LogScaled> {
    check_arg(x)?;
    let nu = nu.value();
    if x == 0.0 {
        return Ok(if nu == 0.0 { LogScaled::from_f64(1.0) } else { LogScaled::ZERO });
    }
    if use_i_asymptotic(nu, x) {
        iv_asymptotic(nu, x)
    } else {
        iv_series(nu, x)
    }
}

/// ln I_nu(x).
pub fn ln_bessel_i(nu: BesselOrder, x: f64) -> Result<f64> {
    Ok(bessel_i_scaled(nu, x)?.ln_abs())
}

fn iv_series(nu: f64, x: f64) -> Result<LogScaled> {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut acc = Neumaier::default();
    acc.add(1.0);
    let mut shift = 0.0;
    let mut m = 1.0;
    loop {
        term *= q / (m * (m + nu));
        acc.add(term);
        if term < 1e-17 * acc.value() && m > q.sqrt() {
            break;
        }
        if acc.value() > 1e280 {
            let s = acc.value();
            term /= s;
            acc = Neumaier::default();
            acc.add(1.0);
            shift += s.ln();
        }
        m += 1.0;
        if m > 1e7 {
            return Err(Error::Precision(format!("I series did not converge at nu={nu}, x={x}")));
        }
    }
    let log_pref = if nu == 0.0 { 0.0 } else { nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)? };
    Ok(LogScaled::new(acc.value(), log_pref + shift))
}

/// e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k.
fn iv_asymptotic(nu: f64, x: f64) -> Result<LogScaled> {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut acc = Neumaier::default();
    acc.add(1.0);
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (kf * 8.0 * x);
        if term.abs() > prev {
            break;
        }
        acc.add(term);
        prev = term.abs();
        if term.abs() < 1e-17 * acc.value().abs() {
            break;
        }
    }
    Ok(LogScaled::new(acc.value(), x - 0.5 * (2.0 * PI * x).ln()))
}
