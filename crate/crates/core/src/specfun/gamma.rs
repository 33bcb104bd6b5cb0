use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest argument for which Gamma(x) is finite in f64.
pub const GAMMA_MAX_ARG: f64 = 171.62;

fn lanczos_sum(x: f64) -> f64 {
    // x >= 1 here; the series is in terms of z = x - 1.
    let z = x - 1.0;
    let mut s = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        s += c / (z + i as f64);
    }
    s
}

/// Gamma function for 0 < x <= 171.62.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("gamma argument must be positive and finite, got {x}")));
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::domain(format!("gamma({x}) overflows f64; use ln_gamma")));
    }
    let mut x = x;
    let mut scale = 1.0;
    while x < 1.0 {
        scale /= x;
        x += 1.0;
    }
    if x == x.floor() && x <= 30.0 {
        let mut f = 1.0;
        let mut i = 2.0;
        while i < x {
            f *= i;
            i += 1.0;
        }
        return Ok(scale * f);
    }
    let w = x - 1.0 + LANCZOS_G + 0.5;
    let half = w.powf(0.5 * (x - 0.5));
    Ok(scale * (2.0 * PI).sqrt() * half * (-w).exp() * half * lanczos_sum(x))
}

/// Natural log of Gamma for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("ln_gamma argument must be positive and finite, got {x}")));
    }
    if x < 0.5 {
        // Reflection keeps precision for tiny arguments.
        return Ok((PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    if x < 1.0 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    if (x - 1.0).abs() < 1e-300 || (x - 2.0).abs() < 1e-300 {
        return Ok(0.0);
    }
    let w = x - 1.0 + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (x - 0.5) * w.ln() - w + lanczos_sum(x).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_and_half_integers() {
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 4e-15);
        assert!((gamma(1.5).unwrap() - 0.5 * PI.sqrt()).abs() < 4e-15);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
        assert!(ln_gamma(f64::NAN).is_err());
        assert!(gamma(200.0).is_err());
    }

    #[test]
    fn ln_gamma_large() {
        // Stirling with two correction terms.
        let x: f64 = 1e6;
        let st = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3));
        assert!((ln_gamma(x).unwrap() - st).abs() / st < 1e-14);
    }
}
