//! Invariant checks for the configured problem.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use super::config::RunConfig;
use super::output::{csv, json, num, Artifacts};
use super::pipeline::run_synthesis;
use super::{Stage, StageError, EXIT_OK, EXIT_TOLERANCE};
use crate::moment::{BiorthogonalFamily, Multiplier, MultiplierParams};
use crate::spectral::{apply_a2_residual, rho_constants, ModalBasis};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    /// value < tol
    fn below(name: &'static str, value: f64, tol: f64) -> Check {
        Check { name, value, tol, passed: value < tol }
    }
}

pub fn cmd_verify(cfg: &RunConfig, base: &Path) -> Staged<i32> {
    let checks = run_checks(cfg, base)?;
    for c in &checks {
        println!("{} {:<28} value={:e} tol={:e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.tol);
    }
    let mut out = Artifacts::default();
    if cfg.outputs.wants("json") {
        out.add("verify.json", json(&checks).at("write")?);
    }
    if cfg.outputs.wants("csv") {
        let rows = checks
            .iter()
            .map(|c| vec![c.name.to_string(), num(c.value), num(c.tol), c.passed.to_string()]);
        out.add("verify.csv", csv(&["check", "value", "tol", "passed"], rows));
    }
    out.write(&cfg.outputs.directory).at("write")?;
    Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_TOLERANCE })
}

type Staged<T> = std::result::Result<T, StageError>;

fn run_checks(cfg: &RunConfig, base: &Path) -> Staged<Vec<Check>> {
    let d = cfg.validate().at("params")?;
    let n = &cfg.numerics;
    let t = cfg.problem.t_final;
    let basis = ModalBasis::with_tolerance(d, n.k_modes, n.quad_tol).at("basis")?;
    let mut checks = Vec::new();

    // Zero bounds and gap monotonicity; the count of violations is the value.
    let nu = d.nu;
    let z = &basis.zeros;
    let mut bad = 0usize;
    let j1 = z.get(1);
    if !(j1 > (nu * (nu + 2.0)).sqrt() && j1 < (2.0 * (nu + 1.0) * (nu + 3.0)).sqrt()) {
        bad += 1;
    }
    for k in 1..=z.len() {
        let lower = if nu <= 0.5 { (k as f64 - 0.25) * PI } else { (k as f64 - 0.125) * PI };
        if z.get(k) < lower - 1e-12 {
            bad += 1;
        }
    }
    let gaps: Vec<f64> = (2..=z.len()).map(|k| z.get(k) - z.get(k - 1)).collect();
    for g in gaps.windows(2) {
        let ok = if nu > 0.5 {
            g[1] < g[0] && g[1] > PI
        } else if nu < 0.5 {
            g[1] > g[0] && g[1] < PI
        } else {
            (g[1] - PI).abs() < 1e-9
        };
        if !ok {
            bad += 1;
        }
    }
    checks.push(Check::below("zero_bounds_violations", bad as f64, 0.5));

    let phis: Vec<Vec<f64>> = (1..=basis.len()).map(|k| basis.sample_mode(k)).collect::<Result<_, _>>().at("basis")?;
    let mut gram: f64 = 0.0;
    for j in 0..phis.len() {
        for k in 0..=j {
            let prod: Vec<f64> = phis[j].iter().zip(&phis[k]).map(|(u, v)| u * v).collect();
            let g = basis.quad.integrate_sampled(&prod, d.beta).at("basis")?;
            gram = gram.max((g - if j == k { 1.0 } else { 0.0 }).abs());
        }
    }
    checks.push(Check::below("gram_deviation", gram, 1e-8));

    let rho = rho_constants(d.alpha, d.beta, d.mu);
    let grid: Vec<f64> = (0..=90).map(|i| 0.05 + 0.01 * i as f64).collect();
    let mut res: f64 = 0.0;
    for m in basis.modes.iter().take(10) {
        res = res.max(apply_a2_residual(m, &d, &rho, &grid).at("basis")?);
    }
    checks.push(Check::below("eigen_residual", res, 1e-5));

    let mp = MultiplierParams::new(t, n.delta, d.kappa).at("multiplier")?;
    let h = Multiplier::new(mp);
    let mut worst1 = f64::NEG_INFINITY;
    for i in 0..1000 {
        let x = -2000.0 + 4000.0 * i as f64 / 999.0;
        worst1 = worst1.max(mp.ln_lower_imag(x) - h.ln_h_imag(x.abs()));
    }
    checks.push(Check { name: "multiplier_lower_bound", value: worst1, tol: 0.0, passed: worst1 <= 0.0 });
    let mut worst2 = f64::NEG_INFINITY;
    for i in 0..20 {
        for j in 0..5 {
            let z = Complex64::new(-2000.0 + 200.0 * i as f64, -300.0 + 150.0 * j as f64);
            worst2 = worst2.max(h.log_h(z).re - mp.ln_upper(z));
        }
    }
    checks.push(Check { name: "multiplier_upper_bound", value: worst2, tol: 1e-12, passed: worst2 <= 1e-12 });

    let k_fam = basis.len().min(3);
    let fam = BiorthogonalFamily::build(&basis, t, k_fam, &n.family()).at("family")?;
    let m = fam.defect_matrix();
    checks.push(Check::below("biorthogonality_upper", m.max_defect_upper(), n.defect_tol));
    let real = fam.modes.iter().map(|p| p.realness).fold(0.0, f64::max);
    checks.push(Check::below("psi_realness", real, 1e-8));
    let cont = fam.modes.iter().map(|p| p.contour_defect).fold(0.0, f64::max);
    checks.push(Check::below("contour_independence", cont, 1e-6));
    let sup = fam.modes.iter().map(|p| p.ln_sup - p.ln_sup_bound).fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check { name: "psi_sup_within_bound", value: sup, tol: 0.0, passed: sup <= 0.0 });

    let s = run_synthesis(cfg, base)?;
    let tol = n.certificate_tol * s.u0_norm;
    checks.push(Check { name: "null_control_certificate", value: s.report.max_abs, tol, passed: s.certificate_passed });
    Ok(checks)
}
