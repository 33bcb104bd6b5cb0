use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// User inputs of the control problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    /// Boundary condition selector, 0 or 1.
    pub r: u8,
    #[serde(rename = "T")]
    pub t_final: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// alpha + beta < 1
    SubOne,
    /// alpha + beta > 1
    SuperOne,
    /// alpha + beta = 1
    EqualOne,
}

/// Constants derived from (alpha, beta, mu).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub ell: u8,
    pub gamma: f64,
    pub kappa: f64,
    pub nu: f64,
    /// mu(alpha + beta) = (1 - alpha - beta)^2 / 4
    pub mu_crit: f64,
    pub regime: Regime,
}

/// Coefficients of A^2 u = x^{2a} u'''' + rho1 x^{2a-1} u''' + rho2 x^{2a-2} u''
/// + rho3 x^{2a-3} u' + rho4 x^{2a-4} u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoConstants {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho4: f64,
}

/// Largest admissible potential strength (1 - s)^2 / 4 for s = alpha + beta.
pub fn mu_critical(s: f64) -> f64 {
    0.25 * (1.0 - s) * (1.0 - s)
}

/// Tolerance within which alpha + beta counts as 1.
const EQUAL_ONE_TOL: f64 = 1e-12;

fn regime_of(s: f64) -> Regime {
    if (s - 1.0).abs() <= EQUAL_ONE_TOL {
        Regime::EqualOne
    } else if s < 1.0 {
        Regime::SubOne
    } else {
        Regime::SuperOne
    }
}

fn check_alpha(alpha: f64, beta: f64, mu: f64) -> Result<()> {
    if !(alpha.is_finite() && beta.is_finite() && mu.is_finite()) {
        return Err(Error::param("alpha, beta and mu must be finite"));
    }
    if !(0.0..2.0).contains(&alpha) {
        return Err(Error::param(format!("alpha must lie in [0, 2), got {alpha}")));
    }
    Ok(())
}

/// Validated derivation for the control problem.
pub fn derive_params(p: &ProblemParams) -> Result<DerivedParams> {
    check_alpha(p.alpha, p.beta, p.mu)?;
    if !(p.t_final.is_finite() && p.t_final > 0.0) {
        return Err(Error::param(format!("T must be positive, got {}", p.t_final)));
    }
    if p.r > 1 {
        return Err(Error::param(format!("r must be 0 or 1, got {}", p.r)));
    }
    let s = p.alpha + p.beta;
    let crit = mu_critical(s);
    match regime_of(s) {
        Regime::EqualOne => {
            if p.mu >= 0.0 {
                return Err(Error::param(format!(
                    "alpha + beta = 1 requires mu < 0 (the critical potential mu(1) = 0 gives no controllability information), got mu = {}",
                    p.mu
                )));
            }
        }
        _ => {
            if p.mu >= crit {
                return Err(Error::param(format!(
                    "mu must satisfy mu < mu(alpha+beta) = (1-alpha-beta)^2/4 = {crit}, got mu = {}",
                    p.mu
                )));
            }
        }
    }
    DerivedParams::spectral(p.alpha, p.beta, p.mu)
}

impl DerivedParams {
    /// Spectral constants for any mu <= mu(alpha+beta). Unlike
    /// [`derive_params`] this accepts the critical potential and
    /// alpha + beta = 1 with mu = 0, where the eigenbasis still exists.
    pub fn spectral(alpha: f64, beta: f64, mu: f64) -> Result<DerivedParams> {
        check_alpha(alpha, beta, mu)?;
        let s = alpha + beta;
        let regime = regime_of(s);
        let crit = if regime == Regime::EqualOne { 0.0 } else { mu_critical(s) };
        if mu > crit {
            return Err(Error::param(format!("mu = {mu} exceeds mu(alpha+beta) = {crit}")));
        }
        let kappa = 0.5 * (2.0 - alpha);
        let root = (crit - mu).max(0.0).sqrt();
        let ell = if regime == Regime::SuperOne { 1 } else { 0 };
        Ok(DerivedParams {
            alpha,
            beta,
            mu,
            ell,
            gamma: 0.5 * (1.0 - s) - root,
            kappa,
            nu: root / kappa,
            mu_crit: crit,
            regime,
        })
    }

    /// The bracket [(sqrt(mu(a+b)) + sqrt(mu(a+b) - mu))(1-l) + l] of the
    /// trace constant and the cost bounds; sqrt(-mu) when alpha + beta = 1.
    pub fn trace_bracket(&self) -> f64 {
        if self.ell == 1 {
            1.0
        } else {
            self.mu_crit.sqrt() + (self.mu_crit - self.mu).max(0.0).sqrt()
        }
    }

    /// Exponent (1 - alpha - beta)/2 of the power factor of Phi_k.
    pub fn power(&self) -> f64 {
        0.5 * (1.0 - self.alpha - self.beta)
    }
}

pub fn rho_constants(alpha: f64, beta: f64, mu: f64) -> RhoConstants {
    let a = alpha;
    let b = beta;
    let s = 2.0 * a + b;
    let c = (a + b) * (a - 1.0) + 2.0 * mu;
    RhoConstants {
        rho1: 4.0 * a + 2.0 * b,
        rho2: s * (s - 1.0) + (a + b) * (a - 1.0) + 2.0 * mu,
        rho3: c * (s - 2.0),
        rho4: mu * ((a - 2.0) * (s - 3.0) + mu),
    }
}
