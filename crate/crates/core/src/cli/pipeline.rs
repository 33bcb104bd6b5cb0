use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{RunConfig, SweepAxis, U0};
use super::output::{self, csv, json, num, pair, Artifacts};
use super::{Stage, StageError, EXIT_OK, EXIT_TOLERANCE};
use crate::control::{
    final_state, series_length, synthesize_control_with, ControlOptions, ControlSignal, TrajectoryReport,
};
use crate::cost::{cost_compare, ln_construction_constant, lower_bound, upper_bound, CostReport};
use crate::error::{Error, Result};
use crate::logscale::LogScaled;
use crate::moment::{BiorthogonalFamily, DefectMatrix, LineInfo};
use crate::spectral::{
    derive_params, project_initial_data, rho_constants, weighted_norm_sq, DerivedParams, ModalBasis, ProblemParams,
    RhoConstants,
};

type Staged<T> = std::result::Result<T, StageError>;

#[derive(Serialize)]
struct ParamsReport {
    problem: ProblemParams,
    derived: DerivedParams,
    rho: RhoConstants,
}

pub fn cmd_params(cfg: &RunConfig) -> Staged<i32> {
    let d = cfg.validate().at("params")?;
    let rho = rho_constants(d.alpha, d.beta, d.mu);
    println!(
        "{}",
        output::summary(&[
            ("ell", d.ell.to_string()),
            ("gamma", num(d.gamma)),
            ("nu", num(d.nu)),
            ("kappa", num(d.kappa)),
            ("regime", format!("{:?}", d.regime)),
            ("rho1", num(rho.rho1)),
            ("rho2", num(rho.rho2)),
            ("rho3", num(rho.rho3)),
            ("rho4", num(rho.rho4)),
            ("mu_critical", num(d.mu_crit)),
        ])
    );
    let mut out = Artifacts::default();
    if cfg.outputs.wants("json") {
        out.add("params.json", json(&ParamsReport { problem: cfg.problem.params(), derived: d, rho }).at("write")?);
    }
    out.write(&cfg.outputs.directory).at("write")?;
    Ok(EXIT_OK)
}

pub fn cmd_modes(cfg: &RunConfig) -> Staged<i32> {
    let d = cfg.validate().at("params")?;
    let basis = ModalBasis::with_tolerance(d, cfg.numerics.k_modes, cfg.numerics.quad_tol).at("basis")?;
    let rows: Vec<Vec<String>> = basis
        .modes
        .iter()
        .map(|m| {
            let [tm, ts] = pair(&m.trace());
            vec![m.k.to_string(), num(m.zero), num(m.lambda), num(m.lambda_sq), tm, ts, num(m.jprime_abs)]
        })
        .collect();
    for r in &rows {
        println!("k={:<3} j={}  lambda^2={}", r[0], r[1], r[3]);
    }
    let mut out = Artifacts::default();
    if cfg.outputs.wants("csv") {
        out.add(
            "modes.csv",
            csv(&["k", "j_nu_k", "lambda_k", "lambda_k_sq", "trace_mantissa", "trace_log_scale", "jprime_abs"], rows),
        );
    }
    out.write(&cfg.outputs.directory).at("write")?;
    Ok(EXIT_OK)
}

/// Everything one synthesis run produces.
pub struct Synthesis {
    pub params: ProblemParams,
    pub derived: DerivedParams,
    pub basis: ModalBasis,
    /// <u0, Phi_k>, k = 1..=K_modes
    pub coeffs: Vec<f64>,
    pub u0_norm: f64,
    pub family: Option<BiorthogonalFamily>,
    pub defect: Option<DefectMatrix>,
    pub control: ControlSignal,
    pub report: TrajectoryReport,
    pub cost: CostReport,
    /// ln of the sup-bound constant measured on the family (-inf without one).
    pub ln_measured_constant: f64,
    /// ln(||f|| / (unit-constant upper bound x construction constant x ||u0||)).
    pub log_ratio_measured: f64,
    pub certificate_passed: bool,
    pub defect_passed: bool,
}

impl Synthesis {
    pub fn passed(&self) -> bool {
        self.certificate_passed && self.defect_passed
    }
}

fn initial_data(cfg: &RunConfig, base: &Path, basis: &ModalBasis) -> Result<(Vec<f64>, f64)> {
    let n = basis.len();
    match U0::parse(&cfg.initial_data.u0, base)? {
        U0::Zero => Ok((vec![0.0; n], 0.0)),
        U0::Mode(k) => {
            if k > n {
                return Err(Error::Config(format!("initial data mode:{k} but K_modes = {n}")));
            }
            let mut a = vec![0.0; n];
            a[k - 1] = 1.0;
            Ok((a, 1.0))
        }
        u => {
            let a = project_initial_data(|x| u.eval(x), basis)?;
            let norm = weighted_norm_sq(|x| u.eval(x), basis)?.sqrt();
            Ok((a, norm))
        }
    }
}

pub fn run_synthesis(cfg: &RunConfig, base: &Path) -> Staged<Synthesis> {
    let d = cfg.validate().at("params")?;
    let p = cfg.problem.params();
    let n = &cfg.numerics;
    let basis = ModalBasis::with_tolerance(d, n.k_modes, n.quad_tol).at("basis")?;
    let (a, u0_norm) = initial_data(cfg, base, &basis).at("initial_data")?;
    let opts = ControlOptions { tail_tol: n.tail_tol, ..ControlOptions::default() };
    let k_used = series_length(&a, &basis, p.t_final, opts.tail_tol);
    if k_used > opts.k_cap {
        return Err(Error::Config(format!("the series needs {k_used} modes, above the cap {}", opts.k_cap)))
            .at("control");
    }

    let (family, defect, control) = if k_used == 0 {
        (None, None, ControlSignal::zero(p.t_final, n.time_samples))
    } else {
        let fam = BiorthogonalFamily::build(&basis, p.t_final, k_used, &n.family()).at("family")?;
        let defect = fam.defect_matrix();
        let f = synthesize_control_with(&a, &basis, &fam, &d, p.r, &opts).at("control")?;
        (Some(fam), Some(defect), f)
    };
    let report = final_state(&a, &control, &basis, &d, p.r).at("certificate")?;

    let upper = upper_bound(&p, &d, n.delta, cfg.bounds.c_upper).at("cost")?;
    let lower = lower_bound(&p, &d, cfg.bounds.c_lower).at("cost")?;
    let cost = cost_compare(&upper, &lower, control.ln_l2_norm, u0_norm, n.safety_factor).at("cost")?;
    let ln_measured_constant = family.as_ref().map_or(f64::NEG_INFINITY, |f| f.ln_measured_constant());
    let log_ratio_measured = if u0_norm > 0.0 && family.is_some() {
        let unit = upper_bound(&p, &d, n.delta, 1.0).at("cost")?;
        control.ln_l2_norm - unit.ln() - ln_construction_constant(d.nu, p.r, ln_measured_constant) - u0_norm.ln()
    } else {
        f64::NEG_INFINITY
    };

    let certificate_passed = report.max_abs <= n.certificate_tol * u0_norm && report.tail_bound.is_finite();
    let defect_passed = defect
        .as_ref()
        .is_none_or(|m| m.max_defect_upper() < n.defect_tol && m.max_conditioned() < n.defect_tol);
    Ok(Synthesis {
        params: p,
        derived: d,
        basis,
        coeffs: a,
        u0_norm,
        family,
        defect,
        control,
        report,
        cost,
        ln_measured_constant,
        log_ratio_measured,
        certificate_passed,
        defect_passed,
    })
}

#[derive(Serialize)]
struct ModeRow {
    k: usize,
    lambda_sq: f64,
    a_k: f64,
    coeff: LogScaled,
    free: LogScaled,
    cancellation: f64,
}

#[derive(Serialize)]
struct ControlSummary<'a> {
    k_used: usize,
    l2_norm: f64,
    ln_l2_norm: f64,
    ln_l1_norm: f64,
    support: (f64, f64),
    modal_weights: &'a [LogScaled],
}

#[derive(Serialize)]
struct TrajectoryOut<'a> {
    problem: ProblemParams,
    u0: &'a str,
    u0_norm: f64,
    certificate_tol: f64,
    certificate_passed: bool,
    max_abs: f64,
    residual_norm: f64,
    ln_residual_norm: f64,
    tail_bound: f64,
    tail_bounds: &'a [f64],
    modes: Vec<ModeRow>,
    control: ControlSummary<'a>,
}

#[derive(Serialize)]
struct CostOut<'a> {
    #[serde(flatten)]
    report: &'a CostReport,
    delta: f64,
    /// ln of the measured sup-bound constant of the family.
    ln_measured_constant: f64,
    /// ln(||f|| / (upper bound with c = 1, scaled by the measured constants, x ||u0||)).
    log_ratio_measured: f64,
}

#[derive(Serialize)]
struct ModeDiag<'a> {
    k: usize,
    lambda_sq: f64,
    resolved: f64,
    realness: f64,
    contour_defect: f64,
    ln_sup: f64,
    ln_sup_bound: f64,
    aliasing: f64,
    lines: &'a [LineInfo],
}

#[derive(Serialize)]
struct DefectOut<'a> {
    t_final: f64,
    time_samples: usize,
    delta: f64,
    a: f64,
    theta: f64,
    defect_tol: f64,
    defect_passed: bool,
    max_defect: f64,
    max_defect_upper: f64,
    max_conditioned: f64,
    matrix: Option<&'a DefectMatrix>,
    modes: Vec<ModeDiag<'a>>,
}

fn artifacts(cfg: &RunConfig, s: &Synthesis) -> Result<Artifacts> {
    let mut out = Artifacts::default();
    let o = &cfg.outputs;
    if o.wants("csv") {
        let rows = s.control.grid.iter().zip(&s.control.values).map(|(t, v)| {
            let [m, l] = pair(v);
            vec![num(*t), num(v.to_f64()), m, l]
        });
        out.add("control.csv", csv(&["t", "f", "f_mantissa", "f_log_scale"], rows));
    }
    if o.wants("psi") {
        if let Some(fam) = &s.family {
            for m in &fam.modes {
                let rows = fam.grid.iter().zip(&m.samples).map(|(t, v)| {
                    let [a, b] = pair(v);
                    vec![num(*t), a, b]
                });
                out.add(format!("psi_{}.csv", m.k), csv(&["t", "psi_k_mantissa", "psi_k_log_scale"], rows));
            }
        }
    }
    if o.wants("json") {
        let r = &s.report;
        let modes = (0..r.coeffs.len())
            .map(|i| ModeRow {
                k: i + 1,
                lambda_sq: s.basis.mode(i + 1).lambda_sq,
                a_k: s.coeffs[i],
                coeff: r.coeffs[i],
                free: r.free_coeffs[i],
                cancellation: r.cancellation[i],
            })
            .collect();
        let c = &s.control;
        out.add(
            "trajectory.json",
            json(&TrajectoryOut {
                problem: s.params,
                u0: &cfg.initial_data.u0,
                u0_norm: s.u0_norm,
                certificate_tol: cfg.numerics.certificate_tol,
                certificate_passed: s.certificate_passed,
                max_abs: r.max_abs,
                residual_norm: r.residual_norm,
                ln_residual_norm: r.ln_residual_norm,
                tail_bound: r.tail_bound,
                tail_bounds: &r.tail_bounds,
                modes,
                control: ControlSummary {
                    k_used: c.k_used,
                    l2_norm: c.l2_norm,
                    ln_l2_norm: c.ln_l2_norm,
                    ln_l1_norm: c.ln_l1_norm,
                    support: c.support,
                    modal_weights: &c.modal_weights,
                },
            })?,
        );
        out.add(
            "cost.json",
            json(&CostOut {
                report: &s.cost,
                delta: cfg.numerics.delta,
                ln_measured_constant: s.ln_measured_constant,
                log_ratio_measured: s.log_ratio_measured,
            })?,
        );
        let fam = s.family.as_ref();
        let m = s.defect.as_ref();
        out.add(
            "biorth_defect.json",
            json(&DefectOut {
                t_final: s.params.t_final,
                time_samples: cfg.numerics.time_samples,
                delta: cfg.numerics.delta,
                a: fam.map_or(f64::NAN, |f| f.params.a),
                theta: fam.map_or(f64::NAN, |f| f.params.theta),
                defect_tol: cfg.numerics.defect_tol,
                defect_passed: s.defect_passed,
                max_defect: m.map_or(0.0, |m| m.max_defect()),
                max_defect_upper: m.map_or(0.0, |m| m.max_defect_upper()),
                max_conditioned: m.map_or(0.0, |m| m.max_conditioned()),
                matrix: m,
                modes: fam
                    .map(|f| {
                        f.modes
                            .iter()
                            .map(|p| ModeDiag {
                                k: p.k,
                                lambda_sq: p.lambda_sq,
                                resolved: p.resolved,
                                realness: p.realness,
                                contour_defect: p.contour_defect,
                                ln_sup: p.ln_sup,
                                ln_sup_bound: p.ln_sup_bound,
                                aliasing: p.aliasing,
                                lines: &p.lines,
                            })
                            .collect()
                    })
                    .unwrap_or_default(),
            })?,
        );
    }
    Ok(out)
}

pub fn cmd_synthesize(cfg: &RunConfig, base: &Path) -> Staged<i32> {
    let s = run_synthesis(cfg, base)?;
    let out = artifacts(cfg, &s).at("write")?;
    out.write(&cfg.outputs.directory).at("write")?;
    let r = &s.report;
    println!(
        "{}",
        output::summary(&[
            ("K_used", r.k_used.to_string()),
            ("||f||", num(s.control.l2_norm)),
            ("ln ||f||", num(s.control.ln_l2_norm)),
            ("||u0||", num(s.u0_norm)),
            ("max |<u(T),Phi_k>|", num(r.max_abs)),
            ("tail bound", num(r.tail_bound)),
            ("ln upper", num(s.cost.log_upper)),
            ("ln lower", num(s.cost.log_lower)),
            ("ln ratio (measured constants)", num(s.log_ratio_measured)),
            ("certificate", if s.certificate_passed { "pass" } else { "FAIL" }.into()),
            ("biorthogonality", if s.defect_passed { "pass" } else { "FAIL" }.into()),
            ("files", out.names().join(" ")),
        ])
    );
    if s.passed() {
        return Ok(EXIT_OK);
    }
    let stage = if s.defect_passed { "certificate" } else { "biorthogonality" };
    let e = Error::Precision(format!(
        "max |<u(T),Phi_k>| = {:e} (tolerance {:e} x {:e}), biorthogonality defect on and above the diagonal {:e} (tolerance {:e})",
        r.max_abs,
        cfg.numerics.certificate_tol,
        s.u0_norm,
        s.defect.as_ref().map_or(0.0, |m| m.max_defect_upper()),
        cfg.numerics.defect_tol
    ));
    eprintln!("tolerance failure: {e}");
    output::write_failure(&cfg.outputs.directory, stage, &e, EXIT_TOLERANCE).at("write")?;
    Ok(EXIT_TOLERANCE)
}

struct SweepRow {
    p: ProblemParams,
    log_upper: f64,
    log_lower: f64,
    log_achieved: Option<f64>,
    status: &'static str,
    message: Option<String>,
}

fn sweep_point(cfg: &RunConfig, base: &Path, p: ProblemParams, with_control: bool) -> SweepRow {
    let mut row = SweepRow {
        p,
        log_upper: f64::NAN,
        log_lower: f64::NAN,
        log_achieved: None,
        status: "ok",
        message: None,
    };
    let d = match derive_params(&p) {
        Ok(d) => d,
        Err(e) => {
            row.status = "invalid";
            row.message = Some(e.to_string());
            return row;
        }
    };
    let bounds = upper_bound(&p, &d, cfg.numerics.delta, cfg.bounds.c_upper)
        .and_then(|u| Ok((u, lower_bound(&p, &d, cfg.bounds.c_lower)?)));
    match bounds {
        Ok((u, l)) => {
            row.log_upper = u.ln();
            row.log_lower = l.ln();
        }
        Err(e) => {
            row.status = "invalid";
            row.message = Some(e.to_string());
            return row;
        }
    }
    if with_control {
        let mut c = cfg.clone();
        c.problem.alpha = p.alpha;
        c.problem.t_final = p.t_final;
        match run_synthesis(&c, base) {
            Ok(s) => {
                row.log_achieved = Some(s.control.ln_l2_norm);
                if !s.passed() {
                    row.status = "certificate_failed";
                }
            }
            Err(e) => {
                row.status = "error";
                row.message = Some(format!("{}: {}", e.stage, e.error));
            }
        }
    }
    row
}

pub fn cmd_sweep(cfg: &RunConfig, base: &Path, with_control: bool) -> Staged<i32> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| Error::Config("missing [sweep] section".into())).at("sweep")?;
    let grid = spec.grid().at("sweep")?;
    let proto = cfg.problem.params();
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&v| {
            let mut p = proto;
            match spec.axis {
                SweepAxis::T => p.t_final = v,
                SweepAxis::Alpha => p.alpha = v,
            }
            sweep_point(cfg, base, p, with_control)
        })
        .collect();
    let mut out = Artifacts::default();
    for r in &rows {
        if let Some(m) = &r.message {
            eprintln!("T={} alpha={}: {} ({m})", r.p.t_final, r.p.alpha, r.status);
        }
    }
    let body = csv(
        &["T", "alpha", "beta", "mu", "r", "delta", "log_upper", "log_lower", "log_achieved", "status"],
        rows.iter().map(|r| {
            vec![
                num(r.p.t_final),
                num(r.p.alpha),
                num(r.p.beta),
                num(r.p.mu),
                r.p.r.to_string(),
                num(cfg.numerics.delta),
                num(r.log_upper),
                num(r.log_lower),
                r.log_achieved.map(num).unwrap_or_default(),
                r.status.to_string(),
            ]
        }),
    );
    print!("{body}");
    out.add("sweep.csv", body);
    out.write(&cfg.outputs.directory).at("write")?;
    Ok(EXIT_OK)
}
