use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logscale::LogScaled;
use crate::quadrature::gauss_legendre;
use crate::specfun::{bessel_j, bessel_j_prime, bessel_zeros, ln_gamma, BesselOrder, ZeroTable};

use super::params::DerivedParams;

/// One eigenpair of A: Phi_k with A Phi_k = lambda_k Phi_k.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Mode {
    pub k: usize,
    pub zero: f64,
    pub lambda: f64,
    pub lambda_sq: f64,
    pub jprime_abs: f64,
    /// Weighted boundary trace of Phi_k at x = 0; may be +inf when only
    /// `trace_log` is representable.
    pub trace_const: f64,
    pub trace_log: f64,
}

impl Mode {
    pub fn trace(&self) -> LogScaled {
        LogScaled::from_ln(self.trace_log)
    }

    /// ln of the normalisation (2 kappa)^{1/2} / |J'_nu(j)|.
    fn ln_norm(&self, kappa: f64) -> f64 {
        0.5 * (2.0 * kappa).ln() - self.jprime_abs.ln()
    }
}

/// Nodes and weights for integrals over (0,1) built in the variable
/// xi = x^kappa, where products of eigenfunctions become smooth. Panels are
/// refined geometrically toward xi = 0 (ratio 1/2) and split further so each
/// one covers a bounded phase of the fastest Bessel oscillation.
#[derive(Debug, Clone)]
pub struct WeightedQuadrature {
    pub kappa: f64,
    pub x: Vec<f64>,
    pub ln_x: Vec<f64>,
    /// Weights for dx.
    pub w: Vec<f64>,
    /// Index ranges of the dyadic panels, innermost first.
    pub dyadic: Vec<(usize, usize)>,
    pub tol: f64,
}

pub const DYADIC_PANELS: usize = 40;
pub const PANEL_ORDER: usize = 16;

impl WeightedQuadrature {
    pub fn new(kappa: f64, max_frequency: f64, tol: f64) -> WeightedQuadrature {
        let (gx, gw) = gauss_legendre(PANEL_ORDER);
        let mut breaks = vec![0.0];
        for i in (1..=DYADIC_PANELS).rev() {
            breaks.push(0.5f64.powi(i as i32));
        }
        breaks.push(1.0);
        let mut x = Vec::new();
        let mut ln_x = Vec::new();
        let mut w = Vec::new();
        let mut dyadic = Vec::new();
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let start = x.len();
            let pieces = ((max_frequency * (b - a) / 2.0).ceil() as usize).max(1);
            for p in 0..pieces {
                let pa = a + (b - a) * p as f64 / pieces as f64;
                let pb = a + (b - a) * (p + 1) as f64 / pieces as f64;
                let half = 0.5 * (pb - pa);
                let mid = 0.5 * (pa + pb);
                for (g, gwt) in gx.iter().zip(&gw) {
                    let xi: f64 = mid + half * g;
                    let lx = xi.ln() / kappa;
                    // dx = (1/kappa) xi^(1/kappa - 1) dxi
                    let lw = (half * gwt).ln() - kappa.ln() + (1.0 / kappa - 1.0) * xi.ln();
                    let xv = lx.exp();
                    if xv == 0.0 {
                        continue;
                    }
                    x.push(xv);
                    ln_x.push(lx);
                    w.push(lw.exp());
                }
            }
            dyadic.push((start, x.len()));
        }
        WeightedQuadrature { kappa, x, ln_x, w, dyadic, tol }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Integral of `values[i] * x_i^beta` with an endpoint convergence check.
    pub fn integrate_sampled(&self, values: &[f64], beta: f64) -> Result<f64> {
        if values.len() != self.x.len() {
            return Err(Error::Dimension(format!("{} samples for {} nodes", values.len(), self.x.len())));
        }
        let mut panel_sums = Vec::with_capacity(self.dyadic.len());
        for &(s, e) in &self.dyadic {
            let mut acc = 0.0;
            for i in s..e {
                let v = values[i];
                if v != 0.0 {
                    acc += self.w[i] * v * (beta * self.ln_x[i]).exp();
                }
            }
            panel_sums.push(acc);
        }
        let total: f64 = panel_sums.iter().sum();
        let abs_total: f64 = panel_sums.iter().map(|v| v.abs()).sum();
        if !total.is_finite() {
            return Err(Error::Integration("non-finite weighted integral".into()));
        }
        if abs_total > 0.0 {
            // Contributions of the dyadic panels must die out toward x = 0;
            // the innermost one bounds what the rule misses.
            let (c0, c1, c2) = (panel_sums[0].abs(), panel_sums[1].abs(), panel_sums[2].abs());
            if c0 > self.tol * abs_total {
                if c0 >= c1 && c1 >= c2 {
                    return Err(Error::Integration(
                        "integrand is not integrable at x = 0 (dyadic contributions do not decay)".into(),
                    ));
                }
                return Err(Error::Integration(format!(
                    "weighted integral not converged at x = 0 (innermost panel carries {:e} of the total)",
                    c0 / abs_total
                )));
            }
        }
        Ok(total)
    }
}

/// The first K eigenpairs with their quadrature rule.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    pub derived: DerivedParams,
    pub zeros: ZeroTable,
    pub modes: Vec<Mode>,
    pub quad: WeightedQuadrature,
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

impl ModalBasis {
    pub fn new(derived: DerivedParams, k_modes: usize) -> Result<ModalBasis> {
        ModalBasis::with_tolerance(derived, k_modes, DEFAULT_QUAD_TOL)
    }

    pub fn with_tolerance(derived: DerivedParams, k_modes: usize, quad_tol: f64) -> Result<ModalBasis> {
        if k_modes == 0 {
            return Err(Error::Config("K_modes must be at least 1".into()));
        }
        let nu = BesselOrder::new(derived.nu)?;
        let zeros = bessel_zeros(nu, k_modes)?;
        let modes = zeros
            .zeros
            .par_iter()
            .enumerate()
            .map(|(i, &j)| build_mode(&derived, i + 1, j))
            .collect::<Result<Vec<_>>>()?;
        let quad = WeightedQuadrature::new(derived.kappa, zeros.get(k_modes), quad_tol);
        Ok(ModalBasis { derived, zeros, modes, quad })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mode(&self, k: usize) -> &Mode {
        &self.modes[k - 1]
    }

    /// Phi_k sampled at the quadrature nodes.
    pub fn sample_mode(&self, k: usize) -> Result<Vec<f64>> {
        let m = self.mode(k);
        self.quad.x.iter().map(|&x| eigenfunction(m, &self.derived, x)).collect()
    }
}

pub(crate) fn build_mode(d: &DerivedParams, k: usize, j: f64) -> Result<Mode> {
    let nu = BesselOrder::new(d.nu)?;
    let jprime_abs = bessel_j_prime(nu, j)?.abs();
    let lambda = d.kappa * d.kappa * j * j;
    let trace_log = ln_trace(d, j, jprime_abs)?;
    Ok(Mode {
        k,
        zero: j,
        lambda,
        lambda_sq: lambda * lambda,
        jprime_abs,
        trace_const: trace_log.exp(),
        trace_log,
    })
}

/// ln of (2 kappa)^{1/2} [(sqrt(mu(a+b)) + kappa nu)(1-l) + l] j^nu / (2^nu Gamma(nu+1) |J'_nu(j)|).
fn ln_trace(d: &DerivedParams, j: f64, jprime_abs: f64) -> Result<f64> {
    let bracket = d.trace_bracket();
    Ok(0.5 * (2.0 * d.kappa).ln() + bracket.ln() + d.nu * j.ln()
        - d.nu * std::f64::consts::LN_2
        - ln_gamma(d.nu + 1.0)?
        - jprime_abs.ln())
}

/// Phi_k(x) = (2 kappa)^{1/2} / |J'_nu(j_k)| x^{(1-alpha-beta)/2} J_nu(j_k x^kappa).
pub fn eigenfunction(m: &Mode, d: &DerivedParams, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::domain(format!("eigenfunction argument must lie in (0, 1], got {x}")));
    }
    let nu = BesselOrder::new(d.nu)?;
    let ln_x = x.ln();
    let xi = (d.kappa * ln_x).exp();
    let j = bessel_j(nu, m.zero * xi)?;
    Ok(j * (m.ln_norm(d.kappa) + d.power() * ln_x).exp())
}

/// Phi_k'(x), differentiating the Bessel factor with J' = (nu/z) J - J_{nu+1}.
pub fn eigenfunction_derivative(m: &Mode, d: &DerivedParams, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::domain(format!("eigenfunction argument must lie in (0, 1], got {x}")));
    }
    let nu = BesselOrder::new(d.nu)?;
    let p = d.power();
    let xi = x.powf(d.kappa);
    let z = m.zero * xi;
    let j = bessel_j(nu, z)?;
    let jp = bessel_j_prime(nu, z)?;
    let c = m.ln_norm(d.kappa).exp();
    Ok(c * (p * x.powf(p - 1.0) * j + x.powf(p) * jp * m.zero * d.kappa * x.powf(d.kappa - 1.0)))
}
