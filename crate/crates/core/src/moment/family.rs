//! The interpolants F_k and the biorthogonal family
//! psi_k(t) = e^{lambda_k^2 T/2} (1/2pi) int e^{i(t - T/2) tau} F_k(tau) d tau.
//!
//! The inverse transform is taken along horizontal lines tau + i y, where
//! psi_k(t) = e^{lambda_k^2 T/2 - s y} (1/2pi) int e^{i s tau} F_k(tau + i y) d tau
//! with s = t - T/2. F_k has exponential type a < T/2, so the integrand is
//! band-limited and the trapezoid rule with step pi/T is exact up to the
//! truncation of the tau range. Each time sample takes the line with the
//! smallest rounding bound; lines near y = lambda_k^2 keep the integrand of
//! order one where psi_k carries its weight e^{lambda_k^2 (T - t)}.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logscale::{self, LogScaled};
use crate::quadrature::simpson_weights;
use crate::spectral::ModalBasis;

use super::multiplier::{Multiplier, MultiplierParams};
use super::product::{lambda_prime_log, LambdaPrime, LambdaProduct};

/// Relative accuracy assumed for each sample of F_k on a line.
const SAMPLE_NOISE: f64 = 1e-13;
/// A time sample is kept only if it exceeds its rounding bound by this factor.
const RESOLVE_MARGIN: f64 = 1e3;
/// Samples used by the contour check must beat both bounds by this factor.
const CHECK_MARGIN: f64 = 1e9;

/// F_k(z) = Lambda(z) H(z) / (Lambda'(i lambda_k^2) (z - i lambda_k^2) H(i lambda_k^2)).
#[derive(Debug, Clone)]
pub struct Interpolants {
    pub product: LambdaProduct,
    pub multiplier: Multiplier,
    lambda_sq: Vec<f64>,
    prime: Vec<LambdaPrime>,
    /// ln H(i lambda_k^2)
    ln_h_node: Vec<f64>,
}

impl Interpolants {
    /// Interpolants for k = 1..=k_max, accurate for |z| <= z_max.
    pub fn new(basis: &ModalBasis, params: MultiplierParams, k_max: usize, z_max: f64) -> Result<Interpolants> {
        if k_max == 0 || k_max > basis.len() {
            return Err(Error::Dimension(format!("k_max = {k_max} but the basis has {} modes", basis.len())));
        }
        let d = &basis.derived;
        let lambda_sq: Vec<f64> = (1..=k_max).map(|k| basis.mode(k).lambda_sq).collect();
        let z_max = z_max.max(2.0 * lambda_sq[k_max - 1]);
        let product = LambdaProduct::new(d.kappa, &basis.zeros, z_max, k_max + 1)?;
        let multiplier = Multiplier::new(params);
        let prime = (1..=k_max)
            .map(|k| lambda_prime_log(d.kappa, d.nu, basis.mode(k).zero, k))
            .collect::<Result<Vec<_>>>()?;
        let ln_h_node = lambda_sq.iter().map(|l2| multiplier.ln_h_imag(*l2)).collect();
        Ok(Interpolants { product, multiplier, lambda_sq, prime, ln_h_node })
    }

    pub fn k_max(&self) -> usize {
        self.lambda_sq.len()
    }

    pub fn lambda_sq(&self, k: usize) -> f64 {
        self.lambda_sq[k - 1]
    }

    pub fn lambda_prime(&self, k: usize) -> LambdaPrime {
        self.prime[k - 1]
    }

    pub fn ln_h_node(&self, k: usize) -> f64 {
        self.ln_h_node[k - 1]
    }

    /// log of Lambda(z) / (Lambda'(i lambda_k^2)(z - i lambda_k^2)), using
    /// Lambda(z)/(z - i lambda_k^2) = (i/lambda_k^2) prod_{m != k}(1 + i z/lambda_m^2).
    pub fn log_lambda_ratio(&self, k: usize, z: Complex64) -> Result<Complex64> {
        self.check_k(k)?;
        let lp = self.prime[k - 1];
        let mut v = self.product.log_eval(z, Some(k))?;
        v.re -= self.lambda_sq[k - 1].ln() + lp.log_magnitude;
        if lp.sign < 0.0 {
            v.im += PI;
        }
        Ok(v)
    }

    /// ln F_k(z) with H evaluated by the saddle-point contour.
    pub fn log_f(&self, k: usize, z: Complex64) -> Result<Complex64> {
        let l = self.log_lambda_ratio(k, z)?;
        Ok(l + self.multiplier.log_h(z) - self.ln_h_node[k - 1])
    }

    pub fn f(&self, k: usize, z: Complex64) -> Result<Complex64> {
        let l = self.log_f(k, z)?;
        if l.re == f64::NEG_INFINITY {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if l.re > 700.0 {
            return Err(Error::Precision(format!("|F_{k}({z})| overflows: ln = {}", l.re)));
        }
        Ok(l.exp())
    }

    /// ln of C(T, alpha, delta) exp(-a lambda_k^2 / (2 sqrt(theta+1))) / (lambda_k^2 |Lambda'(i lambda_k^2)|),
    /// the bound on ||F_k||_{L^1(R)}.
    pub fn ln_l1_bound(&self, k: usize, c: f64) -> f64 {
        let p = self.multiplier.params;
        let l2 = self.lambda_sq[k - 1];
        p.ln_interpolant_constant(self.product.kappa, c)
            - l2.ln()
            - self.prime[k - 1].log_magnitude
            - p.a * l2 / (2.0 * (p.theta + 1.0).sqrt())
    }

    /// ln of the bound on ||psi_k||_inf: the L^1 bound times e^{lambda_k^2 T/2}.
    pub fn ln_sup_bound(&self, k: usize, t_final: f64, c: f64) -> f64 {
        self.ln_l1_bound(k, c) + 0.5 * self.lambda_sq[k - 1] * t_final
    }

    /// ln ||F_k||_{L^1(R)} by the trapezoid rule with step pi/(4T) out to the
    /// radius where |F_k| falls below `tol` times its largest value.
    pub fn ln_real_axis_l1(&self, k: usize, t_final: f64, tol: f64) -> Result<f64> {
        self.check_k(k)?;
        let hs = PI / (4.0 * t_final);
        let (tau, _) = radius(self, k, 0.0, hs, tol.ln(), self.product.z_max)?;
        let n_max = (tau / hs).ceil() as usize;
        let hr = h_on_line(&self.multiplier, 0.0, hs, n_max);
        let mut logs = Vec::with_capacity(hr.len());
        for (i, hv) in hr.iter().enumerate() {
            let x = (i as f64 - n_max as f64) * hs;
            let l = self.log_lambda_ratio(k, Complex64::new(x, 0.0))?;
            logs.push(l.re + hv.norm().ln());
        }
        Ok(logscale::log_sum_exp(&logs) + hs.ln() - self.ln_h_node[k - 1])
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.lambda_sq.len() {
            return Err(Error::Dimension(format!("mode {k} outside 1..={}", self.lambda_sq.len())));
        }
        Ok(())
    }
}

/// Numerical settings of the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyConfig {
    pub delta: f64,
    /// Number of time intervals on [0, T] (even).
    pub time_samples: usize,
    /// Relative size of F_k at the truncation radius.
    pub fourier_tol: f64,
    /// Largest truncation radius tried before giving up.
    pub r_max: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig { delta: 0.5, time_samples: 4096, fourier_tol: 1e-13, r_max: 1e8 }
    }
}

/// One line tau + i y of the inverse transform.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineInfo {
    pub y: f64,
    pub tau_max: f64,
    pub nodes: usize,
    /// ln of (1/2pi) h sum |F_k| along the line, including the normalisation.
    pub ln_l1: f64,
    /// |F| at the radius over the largest value seen inside it.
    pub tail: f64,
}

/// Sampled psi_k with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct PsiMode {
    pub k: usize,
    pub lambda_sq: f64,
    /// psi_k(t_i); samples below their rounding bound or outside the
    /// support |t - T/2| <= a are exactly zero.
    pub samples: Vec<LogScaled>,
    pub lines: Vec<LineInfo>,
    /// Fraction of the support samples that are resolved.
    pub resolved: f64,
    /// max |Im psi_k| / max |Re psi_k| over resolved samples.
    pub realness: f64,
    /// Largest relative difference to a reconstruction on a shifted line.
    pub contour_defect: f64,
    /// ln max |psi_k| over resolved samples.
    pub ln_sup: f64,
    /// ln of the sup-norm bound with unit constant.
    pub ln_sup_bound: f64,
    /// Largest |F_k(tau + i lambda_k^2)| beyond the time grid's Nyquist
    /// frequency relative to the peak; the Simpson rule on the grid is
    /// accurate for the diagonal integral only when this is small.
    pub aliasing: f64,
}

impl PsiMode {
    pub fn value(&self, i: usize) -> LogScaled {
        self.samples[i]
    }
}

/// psi_1, ..., psi_K on a uniform grid of [0, T] with Simpson weights.
#[derive(Debug, Clone, Serialize)]
pub struct BiorthogonalFamily {
    pub t_final: f64,
    pub params: MultiplierParams,
    pub config: FamilyConfig,
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
    /// Trapezoid step of the inverse transform.
    pub h: f64,
    pub modes: Vec<PsiMode>,
}

struct LineResult {
    info: LineInfo,
    /// (1/2pi) h sum_n e^{i s_j tau_n} F_n, indexed by j mod M.
    q: Vec<Complex64>,
    /// ln normalisation: psi = exp(lambda^2 T/2 - s y + ln_norm) q(s).
    ln_norm: f64,
    aliasing: f64,
}

impl BiorthogonalFamily {
    pub fn build(basis: &ModalBasis, t_final: f64, k_max: usize, config: &FamilyConfig) -> Result<BiorthogonalFamily> {
        let n_t = config.time_samples;
        if n_t < 2 || n_t % 2 == 1 {
            return Err(Error::Config(format!("time_samples must be even and >= 2, got {n_t}")));
        }
        if !(config.fourier_tol > 0.0 && config.fourier_tol < 1.0) {
            return Err(Error::Config(format!("fourier_tol must lie in (0,1), got {}", config.fourier_tol)));
        }
        if k_max == 0 || k_max > basis.len() {
            return Err(Error::Dimension(format!("k_max = {k_max} but the basis has {} modes", basis.len())));
        }
        let d = &basis.derived;
        let params = MultiplierParams::new(t_final, config.delta, d.kappa)?;
        let h = PI / t_final;
        let ln_tol = config.fourier_tol.ln();

        // Lines and truncation radii, found from the decay of |F_k| with a
        // product valid up to r_max.
        let search = Interpolants::new(basis, params, k_max, 2.0 * config.r_max)?;
        let mut plans = Vec::with_capacity(k_max);
        let mut z_max: f64 = 0.0;
        for k in 1..=k_max {
            let l2 = basis.mode(k).lambda_sq;
            let mut ys = line_ladder(l2, &params);
            ys.push(l2 + 1.0 / (params.a + 0.5 * t_final));
            let mut lines = Vec::with_capacity(ys.len());
            for y in ys {
                let (tau, tail) = radius(&search, k, y, h, ln_tol, config.r_max)?;
                z_max = z_max.max(tau.hypot(y));
                lines.push((y, tau, tail));
            }
            plans.push(lines);
        }
        let interp = Interpolants::new(basis, params, k_max, z_max * 1.01)?;

        let dt = t_final / n_t as f64;
        let grid: Vec<f64> = (0..=n_t).map(|i| i as f64 * dt).collect();
        let weights = simpson_weights(n_t, dt);
        let modes = plans
            .par_iter()
            .enumerate()
            .map(|(i, lines)| build_mode(&interp, i + 1, lines, t_final, h, config))
            .collect::<Result<Vec<_>>>()?;
        Ok(BiorthogonalFamily { t_final, params, config: *config, grid, weights, h, modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn psi(&self, k: usize) -> &PsiMode {
        &self.modes[k - 1]
    }

    /// ln of max_k ||psi_k||_inf over the unit-constant sup bound: the
    /// constant the sup-norm bound needs for this family. Kept in log form
    /// since the bound can exceed the samples by hundreds of e-folds.
    pub fn ln_measured_constant(&self) -> f64 {
        self.modes.iter().map(|m| m.ln_sup - m.ln_sup_bound).fold(f64::NEG_INFINITY, f64::max)
    }

    /// int_0^T psi_k(t) e^{-lambda^2 (T - t)} dt by the Simpson rule, with
    /// every term assembled in log form. Also returns ln of the integral of
    /// the absolute value.
    pub fn moment(&self, k: usize, lambda_sq: f64) -> (LogScaled, f64) {
        let psi = self.psi(k);
        let mut terms = Vec::with_capacity(self.grid.len());
        let mut abs = Vec::with_capacity(self.grid.len());
        for (i, (t, w)) in self.grid.iter().zip(&self.weights).enumerate() {
            let v = psi.samples[i];
            if v.is_zero() {
                continue;
            }
            let term = LogScaled::new(v.mantissa * w, v.log_scale - lambda_sq * (self.t_final - t));
            abs.push(term.ln_abs());
            terms.push(term);
        }
        (logscale::sum(&terms), logscale::log_sum_exp(&abs))
    }

    /// The matrix int psi_k e^{-lambda_l^2 (T - t)} dt over the stored modes.
    pub fn defect_matrix(&self) -> DefectMatrix {
        let n = self.len();
        let mut value = vec![vec![LogScaled::ZERO; n]; n];
        let mut ln_defect = vec![vec![0.0; n]; n];
        let mut ln_abs = vec![vec![0.0; n]; n];
        let rows: Vec<Vec<(LogScaled, f64)>> = (1..=n)
            .into_par_iter()
            .map(|k| (1..=n).map(|l| self.moment(k, self.psi(l).lambda_sq)).collect())
            .collect();
        for k in 0..n {
            for l in 0..n {
                let (v, a) = rows[k][l];
                value[k][l] = v;
                ln_abs[k][l] = a;
                let d = if k == l { logscale::sum(&[v, LogScaled::new(-1.0, 0.0)]) } else { v };
                ln_defect[k][l] = if d.is_zero() { f64::NEG_INFINITY } else { d.ln_abs() };
            }
        }
        DefectMatrix { value, ln_defect, ln_abs }
    }
}

/// Entries of int psi_k e^{-lambda_l^2 (T - t)} dt and their distance from
/// the identity. Entries below the diagonal sit on top of cancellation by a
/// factor ~ exp(ln_abs), which bounds their attainable accuracy.
#[derive(Debug, Clone, Serialize)]
pub struct DefectMatrix {
    pub value: Vec<Vec<LogScaled>>,
    /// ln |M_kl - delta_kl|
    pub ln_defect: Vec<Vec<f64>>,
    /// ln int |psi_k| e^{-lambda_l^2 (T - t)} dt
    pub ln_abs: Vec<Vec<f64>>,
}

impl DefectMatrix {
    /// max |M_kl - delta_kl| (may be +inf when it is not representable).
    pub fn max_defect(&self) -> f64 {
        self.ln_defect.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max).exp()
    }

    /// max |M_kl - delta_kl| over l >= k.
    pub fn max_defect_upper(&self) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for (k, row) in self.ln_defect.iter().enumerate() {
            for v in &row[k..] {
                m = m.max(*v);
            }
        }
        m.exp()
    }

    /// max |M_kl - delta_kl| / max(1, int |psi_k| e^{-lambda_l^2 (T - t)}).
    pub fn max_conditioned(&self) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for (dr, ar) in self.ln_defect.iter().zip(&self.ln_abs) {
            for (d, a) in dr.iter().zip(ar) {
                m = m.max(d - a.max(0.0));
            }
        }
        m.exp()
    }
}

/// Lines y = lambda^2, lambda^2/2, ... down to the optimum for the left end
/// of the support, y = theta / (8 a).
fn line_ladder(lambda_sq: f64, p: &MultiplierParams) -> Vec<f64> {
    let y_min = p.theta / (8.0 * p.a);
    let mut ys = vec![lambda_sq];
    let mut y = 0.5 * lambda_sq;
    while y >= y_min {
        ys.push(y);
        y *= 0.5;
    }
    if *ys.last().unwrap() > 1.5 * y_min {
        ys.push(y_min);
    }
    ys
}

/// Smallest tried radius (doubling from 32 h) at which |F_k(tau + i y)|
/// stays below e^{ln_tol - 4} times the largest value seen closer in.
fn radius(f: &Interpolants, k: usize, y: f64, h: f64, ln_tol: f64, r_max: f64) -> Result<(f64, f64)> {
    let ln_f = |tau: f64| -> Result<f64> { Ok(f.log_f(k, Complex64::new(tau, y))?.re) };
    let mut peak = f64::NEG_INFINITY;
    for j in 0..5 {
        peak = peak.max(ln_f(j as f64 * 8.0 * h)?);
    }
    let mut tau = 32.0 * h;
    loop {
        let v1 = ln_f(tau)?;
        let v2 = ln_f(1.5 * tau)?;
        let target = peak + ln_tol - 4.0;
        if v1 < target && v2 < target {
            return Ok((tau, (v1.max(v2) - peak).exp()));
        }
        peak = peak.max(v1).max(v2);
        if 2.0 * tau > r_max {
            return Err(Error::Truncation { k, achieved: (v1.max(v2) - peak).exp() });
        }
        tau *= 2.0;
    }
}

/// H(n h + i y)/H(i y) for |n| <= n_max from one FFT of the tilted bump
/// sigma(t) e^{a y t}, sampled over one period 2pi/(a h) of the frequency grid.
fn h_on_line(m: &Multiplier, y: f64, h: f64, n_max: usize) -> Vec<Complex64> {
    let p = m.params;
    let n = (4 * n_max).next_power_of_two().max(64);
    let period = 2.0 * PI / (p.a * h);
    let dt = period / n as f64;
    let expo = |t: f64| -> f64 {
        if t.abs() >= 1.0 {
            f64::NEG_INFINITY
        } else {
            -p.theta / (1.0 - t * t) + p.a * y * t
        }
    };
    let signed = |j: usize| -> f64 {
        if j < n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        }
    };
    let peak = (0..n).map(|j| expo(signed(j) * dt)).fold(f64::NEG_INFINITY, f64::max);
    let mut buf: Vec<Complex64> = (0..n).map(|j| Complex64::new((expo(signed(j) * dt) - peak).exp(), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dc = buf[0].re;
    (0..=2 * n_max)
        .map(|i| {
            let idx = (i as i64 - n_max as i64).rem_euclid(n as i64) as usize;
            buf[idx] / dc
        })
        .collect()
}

fn sweep_line(
    interp: &Interpolants,
    k: usize,
    y: f64,
    tau_max: f64,
    tail: f64,
    h: f64,
    config: &FamilyConfig,
) -> Result<LineResult> {
    let n_max = (tau_max / h).ceil() as usize;
    let hr = h_on_line(&interp.multiplier, y, h, n_max);
    let mut logs = Vec::with_capacity(hr.len());
    let mut shift = f64::NEG_INFINITY;
    for (i, hv) in hr.iter().enumerate() {
        let tau = (i as f64 - n_max as f64) * h;
        let l = interp.log_lambda_ratio(k, Complex64::new(tau, y))?;
        let mag = l.re + hv.norm().ln();
        if mag.is_finite() {
            shift = shift.max(mag);
        }
        logs.push(l);
    }
    let f: Vec<Complex64> = logs
        .iter()
        .zip(&hr)
        .map(|(l, hv)| {
            if l.re == f64::NEG_INFINITY {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar((l.re - shift).exp(), l.im) * hv
            }
        })
        .collect();
    let peak = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut aliasing: f64 = 0.0;
    let mut l1 = 0.0;
    let nyquist = config.time_samples;
    for (i, v) in f.iter().enumerate() {
        let n = (i as i64 - n_max as i64).unsigned_abs() as usize;
        let a = v.norm();
        l1 += a;
        if n >= nyquist {
            aliasing = aliasing.max(a / peak);
        }
    }

    let m = 2 * config.time_samples;
    let mut bins = vec![Complex64::new(0.0, 0.0); m];
    for (i, v) in f.iter().enumerate() {
        let idx = (i as i64 - n_max as i64).rem_euclid(m as i64) as usize;
        bins[idx] += v;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut bins);
    let c = h / (2.0 * PI);
    for b in bins.iter_mut() {
        *b *= c;
    }
    let ln_norm = shift + interp.multiplier.ln_h_imag(y) - interp.ln_h_node(k);
    Ok(LineResult {
        info: LineInfo { y, tau_max: n_max as f64 * h, nodes: f.len(), ln_l1: (c * l1).ln() + ln_norm, tail },
        q: bins,
        ln_norm,
        aliasing,
    })
}

fn build_mode(
    interp: &Interpolants,
    k: usize,
    lines: &[(f64, f64, f64)],
    t_final: f64,
    h: f64,
    config: &FamilyConfig,
) -> Result<PsiMode> {
    let n_t = config.time_samples;
    let m = 2 * n_t;
    let l2 = interp.lambda_sq(k);
    let a = interp.multiplier.params.a;
    let ds = t_final / n_t as f64;
    let half = n_t / 2;
    let s_of = |i: usize| (i as f64 - half as f64) * ds;
    let idx_of = |i: usize| (i as i64 - half as i64).rem_euclid(m as i64) as usize;

    // Best line per sample: (bound, ln prefactor, q).
    let mut best: Vec<(f64, f64, Complex64)> = vec![(f64::INFINITY, 0.0, Complex64::new(0.0, 0.0)); n_t + 1];
    let (main, check) = lines.split_at(lines.len() - 1);
    let mut infos = Vec::with_capacity(lines.len());
    let mut aliasing = 0.0;
    for (j, (y, tau, tail)) in main.iter().enumerate() {
        let r = sweep_line(interp, k, *y, *tau, *tail, h, config)?;
        if j == 0 {
            aliasing = r.aliasing;
        }
        let ln_noise = (SAMPLE_NOISE * (r.info.ln_l1 - r.ln_norm).exp()).ln();
        for (i, b) in best.iter_mut().enumerate() {
            let s = s_of(i);
            let pref = 0.5 * l2 * t_final - s * y + r.ln_norm;
            let bound = pref + ln_noise;
            if bound < b.0 {
                *b = (bound, pref, r.q[idx_of(i)]);
            }
        }
        infos.push(r.info);
    }

    let mut samples = vec![LogScaled::ZERO; n_t + 1];
    let mut in_support = 0usize;
    let mut kept = 0usize;
    let mut ln_re_max = f64::NEG_INFINITY;
    let mut ln_im_max = f64::NEG_INFINITY;
    for (i, (bound, pref, q)) in best.iter().enumerate() {
        let s = s_of(i);
        if s.abs() > a * (1.0 + 1e-12) {
            continue;
        }
        in_support += 1;
        let ln_re = q.re.abs().ln() + pref;
        if ln_re < bound + RESOLVE_MARGIN.ln() {
            continue;
        }
        kept += 1;
        ln_re_max = ln_re_max.max(ln_re);
        ln_im_max = ln_im_max.max(q.im.abs().ln() + pref);
        samples[i] = LogScaled::new(q.re, *pref).normalized();
    }

    // Contour independence: the same samples from a slightly shifted line.
    let (yc, tc, tailc) = check[0];
    let rc = sweep_line(interp, k, yc, tc, tailc, h, config)?;
    let ln_noise_c = (SAMPLE_NOISE * (rc.info.ln_l1 - rc.ln_norm).exp()).ln();
    let mut contour_defect: f64 = 0.0;
    for (i, (bound, pref, q)) in best.iter().enumerate() {
        if samples[i].is_zero() {
            continue;
        }
        let s = s_of(i);
        let pref_c = 0.5 * l2 * t_final - s * yc + rc.ln_norm;
        let ln_v = samples[i].ln_abs();
        if ln_v < bound + CHECK_MARGIN.ln() || ln_v < pref_c + ln_noise_c + CHECK_MARGIN.ln() {
            continue;
        }
        let qc = rc.q[idx_of(i)].re;
        let rel = (qc * (pref_c - pref).exp()) / q.re - 1.0;
        contour_defect = contour_defect.max(rel.abs());
    }
    infos.push(rc.info);

    Ok(PsiMode {
        k,
        lambda_sq: l2,
        samples,
        lines: infos,
        resolved: if in_support == 0 { 0.0 } else { kept as f64 / in_support as f64 },
        realness: if kept == 0 { 0.0 } else { (ln_im_max - ln_re_max).exp() },
        contour_defect,
        ln_sup: ln_re_max,
        ln_sup_bound: interp.ln_sup_bound(k, t_final, 1.0),
        aliasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_ends_at_left_optimum() {
        let p = MultiplierParams::new(1.0, 0.5, 1.0).unwrap();
        let ys = line_ladder(1000.0, &p);
        assert_eq!(ys[0], 1000.0);
        let y_min = p.theta / (8.0 * p.a);
        assert!((ys.last().unwrap() - y_min).abs() < 1e-12 || *ys.last().unwrap() < 1.5 * y_min);
        assert!(ys.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn fft_line_matches_saddle_route() {
        let m = Multiplier::new(MultiplierParams::new(1.0, 0.5, 1.0).unwrap());
        let h = PI;
        let y = 500.0;
        let hr = h_on_line(&m, y, h, 200);
        let base = m.ln_h_imag(y);
        for n in [0usize, 3, 40, 150] {
            let z = Complex64::new(n as f64 * h, y);
            let direct = (m.log_h(z) - base).exp();
            let fft = hr[200 + n];
            assert!((direct - fft).norm() < 1e-13, "n={n} {direct} {fft}");
        }
    }
}
