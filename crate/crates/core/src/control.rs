//! The null control
//! f(t) = sum_k (-1)^l a_k e^{-lambda_k^2 T} psi_k(t) / (lambda_k^{1-r} O_k),
//! with O_k the boundary trace of Phi_k, and the modal coefficients of the
//! controlled solution
//! <u(tau), Phi_k> = e^{-lambda_k^2 tau} a_k
//!     + (-1)^{1-l} lambda_k^{1-r} O_k int_0^tau f(t) e^{lambda_k^2 (t - tau)} dt.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logscale::{self, LogScaled};
use crate::moment::BiorthogonalFamily;
use crate::quadrature::simpson_weights;
use crate::spectral::{DerivedParams, ModalBasis, Mode};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ControlOptions {
    /// The series stops at the first K with
    /// e^{-lambda_{K+1}^2 T} ||a_{>K}|| <= tail_tol e^{-lambda_{k0}^2 T} |a_{k0}|,
    /// k0 the first nonzero coefficient.
    pub tail_tol: f64,
    pub k_cap: usize,
}

impl Default for ControlOptions {
    fn default() -> Self {
        ControlOptions { tail_tol: 1e-9, k_cap: 32 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlSignal {
    pub t_final: f64,
    pub grid: Vec<f64>,
    /// Simpson weights on `grid`.
    pub weights: Vec<f64>,
    pub values: Vec<LogScaled>,
    /// Coefficient of psi_k in f, k = 1..=k_used.
    pub modal_weights: Vec<LogScaled>,
    pub k_used: usize,
    pub l2_norm: f64,
    pub ln_l2_norm: f64,
    pub ln_l1_norm: f64,
    /// Smallest interval [lo, hi] outside which f vanishes on the grid.
    pub support: (f64, f64),
}

impl ControlSignal {
    /// f = 0 on a uniform grid of `intervals` (even) steps.
    pub fn zero(t_final: f64, intervals: usize) -> ControlSignal {
        let dt = t_final / intervals as f64;
        let grid: Vec<f64> = (0..=intervals).map(|i| i as f64 * dt).collect();
        let weights = simpson_weights(intervals, dt);
        ControlSignal::from_values(t_final, grid, weights, vec![LogScaled::ZERO; intervals + 1], Vec::new())
    }

    /// A signal from plain samples on a uniform grid of `values.len() - 1`
    /// (even) steps.
    pub fn from_samples(t_final: f64, values: &[f64]) -> ControlSignal {
        let n = values.len() - 1;
        let dt = t_final / n as f64;
        let grid: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let weights = simpson_weights(n, dt);
        let values = values.iter().map(|v| LogScaled::from_f64(*v)).collect();
        ControlSignal::from_values(t_final, grid, weights, values, Vec::new())
    }

    fn from_values(
        t_final: f64,
        grid: Vec<f64>,
        weights: Vec<f64>,
        values: Vec<LogScaled>,
        modal_weights: Vec<LogScaled>,
    ) -> ControlSignal {
        let sq: Vec<f64> = values.iter().zip(&weights).map(|(v, w)| 2.0 * v.ln_abs() + w.ln()).collect();
        let ab: Vec<f64> = values.iter().zip(&weights).map(|(v, w)| v.ln_abs() + w.ln()).collect();
        let ln_l2_norm = 0.5 * logscale::log_sum_exp(&sq);
        let ln_l1_norm = logscale::log_sum_exp(&ab);
        let nonzero: Vec<usize> = (0..values.len()).filter(|&i| !values[i].is_zero()).collect();
        let support = match (nonzero.first(), nonzero.last()) {
            (Some(&a), Some(&b)) => (grid[a.saturating_sub(1)], grid[(b + 1).min(grid.len() - 1)]),
            _ => (0.0, 0.0),
        };
        let k_used = modal_weights.len();
        ControlSignal {
            t_final,
            grid,
            weights,
            values,
            modal_weights,
            k_used,
            l2_norm: ln_l2_norm.exp(),
            ln_l2_norm,
            ln_l1_norm,
            support,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// f(t_i) as plain floats (zero where the value underflows).
    pub fn samples(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64()).collect()
    }

    /// f scaled by a constant.
    pub fn scaled(&self, c: f64) -> ControlSignal {
        let values = self.values.iter().map(|v| v.scale(c)).collect();
        let modal = self.modal_weights.iter().map(|v| v.scale(c)).collect();
        ControlSignal::from_values(self.t_final, self.grid.clone(), self.weights.clone(), values, modal)
    }

    /// Pointwise sum of two signals on the same grid.
    pub fn add(&self, other: &ControlSignal) -> Result<ControlSignal> {
        if self.grid.len() != other.grid.len() || (self.t_final - other.t_final).abs() > 1e-14 * self.t_final {
            return Err(Error::Config("control signals live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| logscale::sum(&[*a, *b])).collect();
        let n = self.modal_weights.len().max(other.modal_weights.len());
        let modal = (0..n)
            .map(|i| {
                let a = self.modal_weights.get(i).copied().unwrap_or(LogScaled::ZERO);
                let b = other.modal_weights.get(i).copied().unwrap_or(LogScaled::ZERO);
                logscale::sum(&[a, b])
            })
            .collect();
        Ok(ControlSignal::from_values(self.t_final, self.grid.clone(), self.weights.clone(), values, modal))
    }
}

/// ||f||_{L^2(0,T)} by the signal's Simpson rule.
pub fn control_l2_norm(f: &ControlSignal) -> f64 {
    f.l2_norm
}

fn sign_pow(e: u8) -> f64 {
    if e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// ln(lambda_k^{1-r} O_k).
fn ln_gain(m: &Mode, r: u8) -> f64 {
    (1.0 - r as f64) * m.lambda.ln() + m.trace_log
}

/// Number of series terms needed for the given coefficients.
pub fn series_length(a: &[f64], basis: &ModalBasis, t_final: f64, tail_tol: f64) -> usize {
    let n = a.len().min(basis.len());
    let Some(k0) = a[..n].iter().position(|v| *v != 0.0) else {
        return 0;
    };
    let ln_lead = -basis.mode(k0 + 1).lambda_sq * t_final + a[k0].abs().ln();
    // tail[i] = ||a_{>i}||^2
    let mut tail = vec![0.0; n + 1];
    for i in (0..n).rev() {
        tail[i] = tail[i + 1] + a[i] * a[i];
    }
    for k in (k0 + 1)..n {
        let ln_rest = -basis.mode(k + 1).lambda_sq * t_final + 0.5 * tail[k].ln();
        if tail[k] == 0.0 || ln_rest <= ln_lead + tail_tol.ln() {
            return k;
        }
    }
    n
}

pub fn synthesize_control(
    a: &[f64],
    basis: &ModalBasis,
    family: &BiorthogonalFamily,
    dp: &DerivedParams,
    r: u8,
) -> Result<ControlSignal> {
    synthesize_control_with(a, basis, family, dp, r, &ControlOptions::default())
}

pub fn synthesize_control_with(
    a: &[f64],
    basis: &ModalBasis,
    family: &BiorthogonalFamily,
    dp: &DerivedParams,
    r: u8,
    opts: &ControlOptions,
) -> Result<ControlSignal> {
    if r > 1 {
        return Err(Error::Config(format!("r must be 0 or 1, got {r}")));
    }
    if a.len() > basis.len() {
        return Err(Error::Dimension(format!("{} coefficients for {} modes", a.len(), basis.len())));
    }
    let t = family.t_final;
    let k_used = series_length(a, basis, t, opts.tail_tol);
    if k_used > opts.k_cap {
        return Err(Error::Config(format!("the series needs {k_used} modes, above the cap {}", opts.k_cap)));
    }
    if k_used > family.len() {
        return Err(Error::Config(format!(
            "the series needs psi_1..psi_{k_used} but the family has {} functions",
            family.len()
        )));
    }
    let sign = sign_pow(dp.ell);
    let modal: Vec<LogScaled> = (1..=k_used)
        .map(|k| {
            let m = basis.mode(k);
            assert!(m.trace_log.is_finite(), "boundary trace of mode {k} is not finite");
            if a[k - 1] == 0.0 {
                return LogScaled::ZERO;
            }
            let ln = a[k - 1].abs().ln() - m.lambda_sq * t - ln_gain(m, r);
            LogScaled::signed_from_ln(sign * a[k - 1].signum(), ln)
        })
        .collect();
    let values: Vec<LogScaled> = (0..family.grid.len())
        .into_par_iter()
        .map(|i| {
            let terms: Vec<LogScaled> =
                modal.iter().enumerate().map(|(j, w)| w.mul(&family.psi(j + 1).samples[i])).collect();
            logscale::sum(&terms)
        })
        .collect();
    Ok(ControlSignal::from_values(t, family.grid.clone(), family.weights.clone(), values, modal))
}

/// Modal coefficients of the controlled solution at one time.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryReport {
    pub tau: f64,
    /// <u(tau), Phi_k>, k = 1..=len
    pub coeffs: Vec<LogScaled>,
    /// e^{-lambda_k^2 tau} a_k
    pub free_coeffs: Vec<LogScaled>,
    /// |<u(tau), Phi_k>| / |e^{-lambda_k^2 tau} a_k| (NaN where a_k = 0).
    pub cancellation: Vec<f64>,
    pub residual_norm: f64,
    pub ln_residual_norm: f64,
    pub max_abs: f64,
    pub k_used: usize,
    /// Certified bounds on |<u(tau), Phi_k>| for k_used < k <= len.
    pub tail_bounds: Vec<f64>,
    pub tail_bound: f64,
}

/// Quadrature weights for int_0^tau on the signal's grid: Simpson (with a
/// 3/8 panel for an odd count) up to the last node before tau, then a
/// trapezoid on linearly interpolated values.
fn weights_up_to(f: &ControlSignal, tau: f64) -> Vec<f64> {
    let n = f.grid.len() - 1;
    let dt = f.t_final / n as f64;
    let x = tau / dt;
    let m = if (x - x.round()).abs() < 1e-9 { x.round() as usize } else { x.floor() as usize };
    if m >= n {
        return f.weights.clone();
    }
    let mut w = vec![0.0; n + 1];
    if m == 1 {
        w[0] += 0.5 * dt;
        w[1] += 0.5 * dt;
    } else if m >= 2 {
        let even = if m % 2 == 0 { m } else { m - 3 };
        if even > 0 {
            for (i, v) in simpson_weights(even, dt).iter().enumerate() {
                w[i] += v;
            }
        }
        if m % 2 == 1 {
            for (i, c) in [3.0, 9.0, 9.0, 3.0].iter().enumerate() {
                w[even + i] += c * dt / 8.0;
            }
        }
    }
    let rest = tau - m as f64 * dt;
    if rest > 1e-9 * dt {
        // trapezoid on [t_m, tau] with f(tau) = (1-s) f_m + s f_{m+1}
        let s = rest / dt;
        w[m] += 0.5 * rest * (2.0 - s);
        w[m + 1] += 0.5 * rest * s;
    }
    w
}

/// int_0^tau f(t) e^{lambda^2 (t - tau)} dt in log form.
fn damped_integral(f: &ControlSignal, w: &[f64], lambda_sq: f64, tau: f64) -> LogScaled {
    let terms: Vec<LogScaled> = f
        .values
        .iter()
        .zip(w)
        .zip(&f.grid)
        .filter(|((v, w), _)| !v.is_zero() && **w != 0.0)
        .map(|((v, w), t)| LogScaled::new(v.mantissa * w, v.log_scale + lambda_sq * (t - tau)))
        .collect();
    logscale::sum(&terms)
}

/// <u(tau), Phi_k> for k = 1..=a.len().
pub fn trajectory_coeffs(
    a: &[f64],
    f: &ControlSignal,
    basis: &ModalBasis,
    dp: &DerivedParams,
    r: u8,
    tau: f64,
) -> Result<TrajectoryReport> {
    if !(tau > 0.0 && tau <= f.t_final * (1.0 + 1e-12)) {
        return Err(Error::domain(format!("tau must lie in (0, {}], got {tau}", f.t_final)));
    }
    if a.len() > basis.len() {
        return Err(Error::Dimension(format!("{} coefficients for {} modes", a.len(), basis.len())));
    }
    let w = weights_up_to(f, tau);
    let sign = sign_pow(1 + dp.ell);
    let rows: Vec<(LogScaled, LogScaled)> = (1..=a.len())
        .into_par_iter()
        .map(|k| {
            let m = basis.mode(k);
            let free = if a[k - 1] == 0.0 {
                LogScaled::ZERO
            } else {
                LogScaled::signed_from_ln(a[k - 1].signum(), a[k - 1].abs().ln() - m.lambda_sq * tau)
            };
            let forced = damped_integral(f, &w, m.lambda_sq, tau).scale_ln(ln_gain(m, r)).scale(sign);
            (logscale::sum(&[free, forced]), free)
        })
        .collect();
    let coeffs: Vec<LogScaled> = rows.iter().map(|r| r.0).collect();
    let free_coeffs: Vec<LogScaled> = rows.iter().map(|r| r.1).collect();
    let cancellation = coeffs
        .iter()
        .zip(&free_coeffs)
        .map(|(c, f)| if f.is_zero() { f64::NAN } else { (c.ln_abs() - f.ln_abs()).exp() })
        .collect();
    let sq: Vec<f64> = coeffs.iter().map(|c| 2.0 * c.ln_abs()).collect();
    let ln_residual_norm = 0.5 * logscale::log_sum_exp(&sq);
    let max_abs = coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max);

    // Beyond k_used the control only enters through
    // |int f e^{lambda^2 (t - tau)}| <= e^{lambda^2 (hi - tau)} ||f||_1,
    // with [lo, hi] the support of f.
    let hi = f.support.1.min(tau);
    let ln_a = 0.5 * a.iter().map(|v| v * v).sum::<f64>().ln();
    let tail_bounds: Vec<f64> = ((f.k_used + 1)..=a.len())
        .map(|k| {
            let m = basis.mode(k);
            let forced = if f.ln_l1_norm == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                ln_gain(m, r) + m.lambda_sq * (hi - tau) + f.ln_l1_norm
            };
            logscale::log_sum_exp(&[-m.lambda_sq * tau + a[k - 1].abs().ln(), forced]).exp()
        })
        .collect();
    // Modes past the coefficient list: |a_k| <= ||a|| and the same control bound.
    let next = a.len() + 1;
    let beyond = if next <= basis.len() {
        let m = basis.mode(next);
        let forced = ln_gain(m, r) + m.lambda_sq * (hi - tau) + f.ln_l1_norm;
        logscale::log_sum_exp(&[-m.lambda_sq * tau + ln_a, forced]).exp()
    } else {
        0.0
    };
    let tail_bound = tail_bounds.iter().cloned().fold(beyond, f64::max);
    Ok(TrajectoryReport {
        tau,
        coeffs,
        free_coeffs,
        cancellation,
        residual_norm: ln_residual_norm.exp(),
        ln_residual_norm,
        max_abs,
        k_used: f.k_used,
        tail_bounds,
        tail_bound,
    })
}

/// <u(T), Phi_k> for k = 1..=a.len().
pub fn final_state(
    a: &[f64],
    f: &ControlSignal,
    basis: &ModalBasis,
    dp: &DerivedParams,
    r: u8,
) -> Result<TrajectoryReport> {
    let last = *f.grid.last().unwrap_or(&0.0);
    if (last - f.t_final).abs() > 1e-12 * f.t_final || f.weights.len() != f.grid.len() {
        return Err(Error::Config("control grid does not cover [0, T] consistently".into()));
    }
    trajectory_coeffs(a, f, basis, dp, r, f.t_final)
}
