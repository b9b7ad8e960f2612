//! Versioned JSON reports.  Report bytes are a pure function of the
//! config and seed: wall-clock timings go to stdout only, never into the
//! file, and records are emitted in suite-id order.

use serde::Serialize;
use skewpow::Val;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = "skewpow-report/1";
pub const REPORT_DIR_ENV: &str = "SKEWPOW_REPORT_DIR";

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRecord {
    pub suite: String,
    pub citation: String,
    pub instance: String,
    pub pass: bool,
    /// Residual valuations; the string "inf" means zero at precision.
    pub residuals: Vec<serde_json::Value>,
    pub counters: BTreeMap<String, u64>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub instance: String,
    pub seed: u64,
    pub pass: bool,
    pub records: Vec<SuiteRecord>,
}

pub fn val_json(v: Val) -> serde_json::Value {
    match v {
        Val::Finite(n) => serde_json::Value::from(n),
        Val::Infinity => serde_json::Value::from("inf"),
    }
}

pub fn report_dir() -> PathBuf {
    std::env::var_os(REPORT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Write `<dir>/<instance>-report.json` and return the path.
pub fn write_report(report: &Report, dir: &Path) -> std::io::Result<PathBuf> {
    let path = dir.join(format!("{}-report.json", report.instance));
    let mut body = serde_json::to_string_pretty(report).expect("report serialization");
    body.push('\n');
    std::fs::write(&path, body)?;
    Ok(path)
}
