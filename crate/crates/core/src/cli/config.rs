//! Run configuration, read from a TOML file:
//!
//! ```toml
//! [problem]
//! alpha = 0.0
//! beta = 0.0
//! mu = 0.0
//! r = 0
//! T = 1.0
//!
//! [numerics]
//! K_modes = 32
//! delta = 0.5
//! time_samples = 4096
//! fourier_tol = 1e-13
//! quad_tol = 1e-12
//!
//! [initial_data]
//! u0 = "mode:1"        # "mode:<k>", "poly:x(1-x)", "file:<path>" or "zero"
//!
//! [outputs]
//! directory = "out"
//! formats = ["csv", "json"]  # add "psi" for one CSV per psi_k
//!
//! [sweep]
//! axis = "T"               # or "alpha"
//! values = [0.1, 0.5, 1.0] # or start/stop/points
//! ```
//!
//! Every section and key is optional; missing values take the defaults above.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moment::FamilyConfig;
use crate::spectral::{derive_params, DerivedParams, ProblemParams, DEFAULT_QUAD_TOL};

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub numerics: Numerics,
    pub initial_data: InitialData,
    pub outputs: Outputs,
    pub bounds: BoundConstants,
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub r: u8,
    #[serde(rename = "T")]
    pub t_final: f64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection { alpha: 0.0, beta: 0.0, mu: 0.0, r: 0, t_final: 1.0 }
    }
}

impl ProblemSection {
    pub fn params(&self) -> ProblemParams {
        ProblemParams { alpha: self.alpha, beta: self.beta, mu: self.mu, r: self.r, t_final: self.t_final }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    #[serde(rename = "K_modes")]
    pub k_modes: usize,
    pub delta: f64,
    pub time_samples: usize,
    pub fourier_tol: f64,
    pub quad_tol: f64,
    /// Required max |<u(T), Phi_k>| / ||u0||.
    pub certificate_tol: f64,
    /// Required max |int psi_k e^{-lambda_l^2 (T-t)} dt - delta_kl|.
    pub defect_tol: f64,
    /// Relative size of the series tail at which synthesis stops.
    pub tail_tol: f64,
    /// cost.json flags achieved norms above safety_factor x upper x ||u0||.
    pub safety_factor: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            k_modes: 32,
            delta: 0.5,
            time_samples: 4096,
            fourier_tol: 1e-13,
            quad_tol: DEFAULT_QUAD_TOL,
            certificate_tol: 1e-6,
            defect_tol: 1e-6,
            tail_tol: 1e-9,
            safety_factor: 10.0,
        }
    }
}

impl Numerics {
    pub fn family(&self) -> FamilyConfig {
        FamilyConfig {
            delta: self.delta,
            time_samples: self.time_samples,
            fourier_tol: self.fourier_tol,
            ..FamilyConfig::default()
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialData {
    pub u0: String,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData { u0: "mode:1".into() }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub directory: PathBuf,
    pub formats: Vec<String>,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { directory: PathBuf::from("out"), formats: vec!["csv".into(), "json".into()] }
    }
}

impl Outputs {
    pub fn wants(&self, format: &str) -> bool {
        self.formats.iter().any(|f| f == format)
    }
}

/// The unspecified constants of the two cost bounds.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundConstants {
    pub c_upper: f64,
    pub c_lower: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants { c_upper: 1.0, c_lower: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
pub enum SweepAxis {
    #[serde(rename = "T")]
    T,
    #[serde(rename = "alpha")]
    Alpha,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
}

impl SweepSpec {
    /// The grid: explicit values, or `points` equally spaced values from
    /// `start` to `stop` inclusive.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let g = match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            },
            _ => {
                return Err(Error::Config("sweep needs either `values` or all of `start`, `stop`, `points`".into()))
            }
        };
        if g.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep grid has a non-finite value".into()));
        }
        Ok(g)
    }
}

/// Initial datum.
#[derive(Debug, Clone, PartialEq)]
pub enum U0 {
    Zero,
    Mode(usize),
    /// x(1-x)
    Poly,
    /// Pairs (x, u(x)) read from a file, linearly interpolated.
    Samples(Vec<(f64, f64)>),
}

impl U0 {
    pub fn parse(spec: &str, base: &Path) -> Result<U0> {
        let spec = spec.trim();
        if spec == "zero" {
            return Ok(U0::Zero);
        }
        if let Some(k) = spec.strip_prefix("mode:") {
            let k: usize =
                k.trim().parse().map_err(|_| Error::Config(format!("bad mode index in initial data `{spec}`")))?;
            if k == 0 {
                return Err(Error::Config("mode indices start at 1".into()));
            }
            return Ok(U0::Mode(k));
        }
        if let Some(p) = spec.strip_prefix("poly:") {
            let p: String = p.chars().filter(|c| !c.is_whitespace()).collect();
            if p == "x(1-x)" {
                return Ok(U0::Poly);
            }
            return Err(Error::Config(format!("unknown polynomial `{p}`; only x(1-x) is available")));
        }
        if let Some(p) = spec.strip_prefix("file:") {
            let path = base.join(p.trim());
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read initial data {}: {e}", path.display())))?;
            return Ok(U0::Samples(parse_samples(&text)?));
        }
        Err(Error::Config(format!("unknown initial data `{spec}`")))
    }

    /// u0(x).
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            U0::Zero | U0::Mode(_) => 0.0,
            U0::Poly => x * (1.0 - x),
            U0::Samples(s) => interpolate(s, x),
        }
    }
}

/// Lines of `x u` or `x,u`; `#` starts a comment.
fn parse_samples(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let bad = || Error::Config(format!("initial data line {}: expected `x u`", n + 1));
        if parts.len() != 2 {
            return Err(bad());
        }
        let x: f64 = parts[0].parse().map_err(|_| bad())?;
        let u: f64 = parts[1].parse().map_err(|_| bad())?;
        if !(x.is_finite() && u.is_finite()) || !(0.0..=1.0).contains(&x) {
            return Err(bad());
        }
        out.push((x, u));
    }
    if out.len() < 2 {
        return Err(Error::Config("initial data file needs at least two samples".into()));
    }
    if out.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Config("initial data abscissae must increase".into()));
    }
    Ok(out)
}

/// Piecewise linear through the samples, constant beyond the ends.
fn interpolate(s: &[(f64, f64)], x: f64) -> f64 {
    let i = s.partition_point(|p| p.0 <= x);
    if i == 0 {
        return s[0].1;
    }
    if i == s.len() {
        return s[s.len() - 1].1;
    }
    let (x0, u0) = s[i - 1];
    let (x1, u1) = s[i];
    u0 + (u1 - u0) * (x - x0) / (x1 - x0)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    /// Checks everything that does not need a computation.
    pub fn validate(&self) -> Result<DerivedParams> {
        let n = &self.numerics;
        if n.k_modes == 0 {
            return Err(Error::Config("K_modes must be at least 1".into()));
        }
        for (name, v) in [
            ("delta", n.delta),
            ("fourier_tol", n.fourier_tol),
            ("quad_tol", n.quad_tol),
            ("certificate_tol", n.certificate_tol),
            ("defect_tol", n.defect_tol),
            ("tail_tol", n.tail_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0,1), got {v}")));
            }
        }
        if n.time_samples < 2 || n.time_samples % 2 == 1 {
            return Err(Error::Config(format!("time_samples must be even and >= 2, got {}", n.time_samples)));
        }
        if !(n.safety_factor >= 1.0) {
            return Err(Error::Config(format!("safety_factor must be >= 1, got {}", n.safety_factor)));
        }
        for (name, v) in [("c_upper", self.bounds.c_upper), ("c_lower", self.bounds.c_lower)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        derive_params(&self.problem.params())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c.numerics.k_modes, 32);
        assert_eq!(c.problem.t_final, 1.0);
        let c = RunConfig::from_toml("[problem]\nT = 0.5\nalpha = 1.0\n[numerics]\nK_modes = 3").unwrap();
        assert_eq!(c.problem.t_final, 0.5);
        assert_eq!(c.problem.alpha, 1.0);
        assert_eq!(c.numerics.k_modes, 3);
        assert!(RunConfig::from_toml("[problem]\nt = 0.5").is_err());
    }

    #[test]
    fn initial_data_specs() {
        let base = Path::new(".");
        assert_eq!(U0::parse("mode:3", base).unwrap(), U0::Mode(3));
        assert_eq!(U0::parse("poly: x(1 - x)", base).unwrap(), U0::Poly);
        assert_eq!(U0::parse("zero", base).unwrap(), U0::Zero);
        assert!(U0::parse("mode:0", base).is_err());
        assert!(U0::parse("poly:x^2", base).is_err());
        assert!(U0::parse("sin", base).is_err());
        let s = parse_samples("# x u\n0 0\n0.5, 1\n1 0\n").unwrap();
        assert_eq!(interpolate(&s, 0.25), 0.5);
        assert_eq!(interpolate(&s, 1.0), 0.0);
        assert!(parse_samples("0 0\n0 1\n").is_err());
    }

    #[test]
    fn sweep_grids() {
        let s = SweepSpec { axis: SweepAxis::T, values: None, start: Some(0.1), stop: Some(2.0), points: Some(20) };
        let g = s.grid().unwrap();
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 0.1);
        assert!((g[19] - 2.0).abs() < 1e-15);
        let e = SweepSpec { axis: SweepAxis::T, values: Some(vec![]), start: None, stop: None, points: None };
        assert!(e.grid().is_err());
    }
}
