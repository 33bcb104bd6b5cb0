//! Artifact formatting. Floats in CSV carry 17 significant digits; JSON uses
//! the shortest round-trip representation. Files are collected in memory and
//! written together at the end of a run.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logscale::LogScaled;

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Config(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub fn pair(v: &LogScaled) -> [String; 2] {
    if v.is_zero() {
        ["0".into(), "0".into()]
    } else {
        [num(v.mantissa), num(v.log_scale)]
    }
}

#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|f| f.0.as_str()).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let stale = dir.join("failed_at.json");
        if stale.exists() {
            std::fs::remove_file(stale)?;
        }
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Failure<'a> {
    failed_at: &'a str,
    error: String,
    exit_code: i32,
}

pub fn write_failure(dir: &Path, stage: &str, e: &Error, code: i32) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let body = json(&Failure { failed_at: stage, error: e.to_string(), exit_code: code })?;
    std::fs::write(dir.join("failed_at.json"), body)?;
    Ok(())
}

/// Plain-text key/value summary for stdout.
pub fn summary(pairs: &[(&str, String)]) -> String {
    let w = pairs.iter().map(|p| p.0.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k:<w$}  {v}");
    }
    s
}
