//! Upper and lower bounds for the cost of null controllability, in log
//! form, and their comparison with an achieved control norm.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logscale::LogScaled;
use crate::specfun::{bessel_j_prime, bessel_zeros, ln_gamma, BesselOrder};
use crate::spectral::{DerivedParams, ProblemParams};

/// The parameters a bound was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostInputs {
    #[serde(rename = "T")]
    pub t_final: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub r: u8,
    pub delta: Option<f64>,
    pub j1: f64,
    pub j2: f64,
    pub nu: f64,
    pub kappa: f64,
    pub ell: u8,
    /// [(sqrt(mu(a+b)) + sqrt(mu(a+b) - mu))(1 - l) + l], or sqrt(-mu) when a + b = 1.
    pub bracket: f64,
}

impl CostInputs {
    fn new(p: &ProblemParams, dp: &DerivedParams, delta: Option<f64>) -> Result<CostInputs> {
        if p.alpha != dp.alpha || p.beta != dp.beta || p.mu != dp.mu {
            return Err(Error::Config("derived parameters do not belong to the problem parameters".into()));
        }
        if !(p.t_final.is_finite() && p.t_final > 0.0) {
            return Err(Error::param(format!("T must be positive, got {}", p.t_final)));
        }
        if p.r > 1 {
            return Err(Error::param(format!("r must be 0 or 1, got {}", p.r)));
        }
        let z = bessel_zeros(BesselOrder::new(dp.nu)?, 2)?;
        Ok(CostInputs {
            t_final: p.t_final,
            alpha: p.alpha,
            beta: p.beta,
            mu: p.mu,
            r: p.r,
            delta,
            j1: z.get(1),
            j2: z.get(2),
            nu: dp.nu,
            kappa: dp.kappa,
            ell: dp.ell,
            bracket: dp.trace_bracket(),
        })
    }

    fn same_problem(&self, other: &CostInputs) -> bool {
        self.t_final == other.t_final
            && self.alpha == other.alpha
            && self.beta == other.beta
            && self.mu == other.mu
            && self.r == other.r
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Bound {
    pub value: LogScaled,
    pub c: f64,
    pub inputs: CostInputs,
}

impl Bound {
    pub fn ln(&self) -> f64 {
        self.value.ln_abs()
    }
}

const SQRT2_PLUS: f64 = 1.847_759_065_022_573_5; // sqrt(2 + sqrt 2)

/// ln M(T, alpha, nu, delta) =
/// ln(1 + 1/((1-delta) kappa^2 T))
/// + ln[exp(sqrt(2+sqrt 2)/(sqrt 2 kappa)) + delta^{-3} exp(3 sqrt(2+sqrt 2)/((1-delta) kappa^2 T))]
/// - (1-delta)^{3/2} T^{3/2} kappa^5 j1^4 / (8 sqrt(2+sqrt 2) (1+T)^{1/2}).
pub fn ln_m_factor(t: f64, kappa: f64, j1: f64, delta: f64) -> f64 {
    let q = (1.0 - delta) * kappa * kappa * t;
    let e1 = SQRT2_PLUS / (std::f64::consts::SQRT_2 * kappa);
    let e2 = 3.0 * SQRT2_PLUS / q - 3.0 * delta.ln();
    let m = e1.max(e2);
    let bracket = m + ((e1 - m).exp() + (e2 - m).exp()).ln();
    (1.0 / q).ln_1p() + bracket
        - (1.0 - delta).powf(1.5) * t.powf(1.5) * kappa.powi(5) * j1.powi(4) / (8.0 * SQRT2_PLUS * (1.0 + t).sqrt())
}

/// c M T^{1/2} exp(-(T/2) kappa^4 j1^4) / (kappa^{9/2-2r} bracket).
pub fn upper_bound(p: &ProblemParams, dp: &DerivedParams, delta: f64, c: f64) -> Result<Bound> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("the bound constant must be positive, got {c}")));
    }
    let inp = CostInputs::new(p, dp, Some(delta))?;
    let (t, k) = (inp.t_final, inp.kappa);
    let ln = c.ln() + ln_m_factor(t, k, inp.j1, delta) + 0.5 * t.ln()
        - (4.5 - 2.0 * inp.r as f64) * k.ln()
        - inp.bracket.ln()
        - 0.5 * t * k.powi(4) * inp.j1.powi(4);
    Ok(Bound { value: LogScaled::from_ln(ln), c, inputs: inp })
}

/// 2(1 - ln 5/pi - atan(2)/pi)
fn lower_rate() -> f64 {
    2.0 * (1.0 - 5f64.ln() / PI - 2f64.atan() / PI)
}

/// c 2^nu Gamma(nu+1) |J_nu'(j1)| exp(2(1 - ln5/pi - atan2/pi) j2) exp(-(j1^4 + 2 j2^4) kappa^4 T)
/// / ((2 T kappa^{5-4r})^{1/2} bracket j1^{nu+2-2r}).
pub fn lower_bound(p: &ProblemParams, dp: &DerivedParams, c: f64) -> Result<Bound> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("the bound constant must be positive, got {c}")));
    }
    let inp = CostInputs::new(p, dp, None)?;
    let (t, k, nu) = (inp.t_final, inp.kappa, inp.nu);
    let r = inp.r as f64;
    let jp = bessel_j_prime(BesselOrder::new(nu)?, inp.j1)?.abs();
    let ln = c.ln() + nu * LN_2 + ln_gamma(nu + 1.0)? + jp.ln() + lower_rate() * inp.j2
        - 0.5 * (2.0 * t).ln()
        - 0.5 * (5.0 - 4.0 * r) * k.ln()
        - inp.bracket.ln()
        - (nu + 2.0 - 2.0 * r) * inp.j1.ln()
        - (inp.j1.powi(4) + 2.0 * inp.j2.powi(4)) * k.powi(4) * t;
    Ok(Bound { value: LogScaled::from_ln(ln), c, inputs: inp })
}

/// sum_k j_{nu,k}^{-2} = 1/(4(nu+1)) and
/// sum_k j_{nu,k}^{-6} = 1/(32 (nu+1)^3 (nu+2)(nu+3)).
pub fn zero_power_sum(nu: f64, r: u8) -> f64 {
    if r == 1 {
        1.0 / (4.0 * (nu + 1.0))
    } else {
        1.0 / (32.0 * (nu + 1.0).powi(3) * (nu + 2.0) * (nu + 3.0))
    }
}

/// ln of the factor turning the unit-constant upper bound into a bound for
/// the constructed control, given ln of the measured constant of the psi_k
/// sup bound: the series estimate loses 2^{3/2} (from the lower bound on
/// I_nu) and (sum_k j_k^{-(6-4r)})^{1/2} (Cauchy-Schwarz), both absorbed in c.
pub fn ln_construction_constant(nu: f64, r: u8, ln_measured: f64) -> f64 {
    ln_measured + 1.5 * LN_2 + 0.5 * zero_power_sum(nu, r).ln()
}

#[derive(Debug, Clone, Serialize)]
pub struct CostReport {
    pub upper: LogScaled,
    pub lower: LogScaled,
    pub log_upper: f64,
    pub log_lower: f64,
    pub achieved_norm: f64,
    pub log_achieved: f64,
    pub u0_norm: f64,
    /// ln(achieved / (upper ||u0||))
    pub log_ratio: f64,
    /// achieved > safety * upper * ||u0||
    pub flagged: bool,
    pub safety_factor: f64,
    pub inputs: CostInputs,
    pub c_upper: f64,
    pub c_lower: f64,
}

/// Collects both bounds and the achieved norm (given by its log so
/// underflowing controls compare correctly).
pub fn cost_compare(upper: &Bound, lower: &Bound, ln_achieved: f64, u0_norm: f64, safety: f64) -> Result<CostReport> {
    if !upper.inputs.same_problem(&lower.inputs) {
        return Err(Error::Config("upper and lower bounds were evaluated for different parameters".into()));
    }
    let log_ratio = if u0_norm > 0.0 { ln_achieved - upper.ln() - u0_norm.ln() } else { f64::NEG_INFINITY };
    let flagged = log_ratio > safety.ln();
    Ok(CostReport {
        upper: upper.value,
        lower: lower.value,
        log_upper: upper.ln(),
        log_lower: lower.ln(),
        achieved_norm: ln_achieved.exp(),
        log_achieved: ln_achieved,
        u0_norm,
        log_ratio,
        flagged,
        safety_factor: safety,
        inputs: upper.inputs,
        c_upper: upper.c,
        c_lower: lower.c,
    })
}
