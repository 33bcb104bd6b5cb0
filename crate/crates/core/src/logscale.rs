//! Numbers stored as `mantissa * exp(log_scale)`.
//!
//! Eigenvalues, trace constants, biorthogonal functions and cost bounds all
//! span hundreds of orders of magnitude, so they travel in this form and are
//! exponentiated only at the edges.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScaled {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl LogScaled {
    pub const ZERO: LogScaled = LogScaled { mantissa: 0.0, log_scale: 0.0 };

    pub fn new(mantissa: f64, log_scale: f64) -> Self {
        LogScaled { mantissa, log_scale }.normalized()
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return LogScaled::ZERO;
        }
        LogScaled { mantissa: x, log_scale: 0.0 }
    }

    /// Positive number with the given natural log.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            return LogScaled::ZERO;
        }
        LogScaled { mantissa: 1.0, log_scale: ln }
    }

    pub fn signed_from_ln(sign: f64, ln: f64) -> Self {
        let mut v = LogScaled::from_ln(ln);
        v.mantissa *= sign.signum();
        v
    }

    /// Moves the magnitude of the mantissa into the scale when it drifts far
    /// from 1, so repeated products cannot overflow.
    pub fn normalized(self) -> Self {
        if self.mantissa == 0.0 {
            return LogScaled::ZERO;
        }
        if !self.mantissa.is_finite() || !self.log_scale.is_finite() {
            return self;
        }
        let m = self.mantissa.abs();
        if (1e-100..=1e100).contains(&m) {
            return self;
        }
        LogScaled { mantissa: self.mantissa.signum(), log_scale: self.log_scale + m.ln() }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    /// ln |value|, `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.log_scale + self.mantissa.abs().ln()
        }
    }

    pub fn signum(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa.signum()
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.log_scale.exp()
        }
    }

    pub fn mul(&self, other: &LogScaled) -> LogScaled {
        if self.is_zero() || other.is_zero() {
            return LogScaled::ZERO;
        }
        LogScaled::new(self.mantissa * other.mantissa, self.log_scale + other.log_scale)
    }

    pub fn scale_ln(&self, ln_factor: f64) -> LogScaled {
        if self.is_zero() {
            return LogScaled::ZERO;
        }
        LogScaled { mantissa: self.mantissa, log_scale: self.log_scale + ln_factor }
    }

    pub fn scale(&self, factor: f64) -> LogScaled {
        LogScaled::new(self.mantissa * factor, self.log_scale)
    }
}

/// Signed sum of log-scaled terms, shifting by the largest scale.
pub fn sum(terms: &[LogScaled]) -> LogScaled {
    let max = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| t.ln_abs())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogScaled::ZERO;
    }
    let mut acc = Neumaier::default();
    for t in terms {
        if !t.is_zero() {
            acc.add(t.mantissa * (t.log_scale - max).exp());
        }
    }
    LogScaled::new(acc.value(), max)
}

/// ln(sum exp(x_i)) with the usual max shift.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Complex value `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl LogComplex {
    pub fn from_log(log: Complex64) -> Self {
        if log.re == f64::NEG_INFINITY {
            return LogComplex { mantissa: Complex64::new(0.0, 0.0), log_scale: 0.0 };
        }
        LogComplex { mantissa: Complex64::from_polar(1.0, log.im), log_scale: log.re }
    }

    pub fn ln_abs(&self) -> f64 {
        let n = self.mantissa.norm();
        if n == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.log_scale + n.ln()
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }
}
