// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Tables, JSON documents and metadata sidecars.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tlsloss::{IntegratorConfig, ObservableRecord};
use tlsloss::loss::LossEstimatorConfig;

use crate::config::{resolve, Format, Model, RawConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::run::{classical_loss, InvariantCheck, Results, RunOutput};

/// Column-oriented plot data. Cells are pre-formatted strings so CSV and
/// JSON carry identical text.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub const EVOLVE_COLUMNS: [&str; 10] = [
    "t",
    "n",
    "sigma_pp",
    "re_sigma_minus",
    "im_sigma_minus",
    "re_corr",
    "im_corr",
    "trace",
    "purity",
    "engine",
];

pub const SWEEP_COLUMNS: [&str; 11] = [
    "curve",
    "g",
    "n0",
    "R0",
    "q_inv",
    "q_inv_normalized",
    "coupling",
    "saturation",
    "estimator",
    "knee",
    "failure",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io { path: PathBuf::from("<csv>"), source: e.into() };
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io { path: PathBuf::from("<csv>"), source: e.into_error() })
    }

    /// Rows as objects keyed by column name; numeric cells stay strings of
    /// the same 17-digit text as the CSV.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), if c.is_empty() { Value::Null } else { Value::String(c.clone()) }))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

fn record_row(r: &ObservableRecord, engine: &str) -> Vec<String> {
    vec![
        num(r.t),
        num(r.n),
        num(r.sigma_pp),
        opt(r.sigma_minus.map(|z| z.re)),
        opt(r.sigma_minus.map(|z| z.im)),
        opt(r.corr.map(|z| z.re)),
        opt(r.corr.map(|z| z.im)),
        opt(r.trace),
        opt(r.purity),
        engine.to_string(),
    ]
}

pub fn table(out: &RunOutput) -> Table {
    match &out.results {
        Results::Evolve(series) => Table {
            header: EVOLVE_COLUMNS.to_vec(),
            rows: series
                .iter()
                .flat_map(|s| s.records.iter().map(|r| record_row(r, s.engine.tag())))
                .collect(),
        },
        Results::Sweep { curves, classical } => {
            let mut rows = Vec::new();
            for c in curves {
                let g = c.template.g;
                let name = format!("quantum-g{g}");
                for p in &c.curve.points {
                    rows.push(vec![
                        name.clone(),
                        num(g),
                        num(p.n0),
                        num(p.r0),
                        opt(p.q_inv),
                        opt(p.q_inv_normalized),
                        p.regime.coupling.to_string(),
                        p.regime.saturation.to_string(),
                        p.estimator.map_or_else(String::new, |k| {
                            serde_json::to_value(k).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
                        }),
                        opt(c.knee),
                        p.failure.clone().unwrap_or_default(),
                    ]);
                }
                if *classical {
                    let name = format!("classical-g{g}");
                    for p in &c.curve.points {
                        let q = classical_loss(&c.template, p.r0);
                        rows.push(vec![
                            name.clone(),
                            num(g),
                            num(p.n0),
                            num(p.r0),
                            num(q),
                            num(q / c.curve.normalization),
                            p.regime.coupling.to_string(),
                            p.regime.saturation.to_string(),
                            "closed-form".into(),
                            String::new(),
                            String::new(),
                        ]);
                    }
                }
            }
            Table { header: SWEEP_COLUMNS.to_vec(), rows }
        }
        Results::Regime(r) => Table {
            header: vec!["coupling", "saturation", "R0", "n_crit"],
            rows: vec![vec![r.coupling.to_string(), r.saturation.to_string(), num(r.r0), num(r.n_crit)]],
        },
        Results::Params(p) => Table {
            header: vec!["g", "field_per_photon"],
            rows: vec![vec![num(p.g), num(p.field_per_photon)]],
        },
        Results::NsMin(r) => Table {
            header: vec!["ratio", "knee"],
            rows: r.knees.iter().map(|&(ratio, knee)| vec![num(ratio), num(knee)]).collect(),
        },
    }
}

/// One-line human summary printed to stdout for the scalar modes.
pub fn summary(out: &RunOutput) -> Option<String> {
    match &out.results {
        Results::Regime(r) => Some(r.to_string()),
        Results::Params(p) => Some(format!("g = {}\nfield_per_photon = {}", p.g, p.field_per_photon)),
        Results::NsMin(r) => Some(format!("n_s,min = {} at T1/T2 = {}", r.min_knee, r.argmin_ratio)),
        _ => None,
    }
}

/// Everything needed to reproduce and audit a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub config: RawConfig,
    pub params: Value,
    pub integrator: Option<IntegratorConfig>,
    pub estimator: LossEstimatorConfig,
    pub invariant_checks: Vec<InvariantCheck>,
    pub results: Value,
}

pub fn meta(out: &RunOutput) -> Meta {
    let cfg = &out.config;
    let params = match &cfg.model {
        Model::Dimensionless(p) => json!({
            "g": p.g,
            "T1": p.t1,
            "T2": p.t2(),
            "Tphi": p.tphi.map_or(Value::String("inf".into()), Value::from),
            "omega": p.omega,
            "n0": p.n0,
            "fock_cutoff": p.dims.fock_cutoff(),
        }),
        Model::Physical(ph) => serde_json::to_value(ph).unwrap_or(Value::Null),
    };
    let results = match &out.results {
        Results::Evolve(series) => json!({
            "engines": series.iter().map(|s| s.engine.tag()).collect::<Vec<_>>(),
            "samples": series.first().map_or(0, |s| s.records.len()),
        }),
        Results::Sweep { curves, .. } => Value::Array(
            curves
                .iter()
                .map(|c| {
                    json!({
                        "g": c.template.g,
                        "normalization": c.curve.normalization,
                        "knee": c.knee,
                        "failed_points": c.curve.points.iter().filter(|p| p.failure.is_some()).count(),
                    })
                })
                .collect(),
        ),
        Results::Regime(r) => serde_json::to_value(r).unwrap_or(Value::Null),
        Results::Params(p) => serde_json::to_value(p).unwrap_or(Value::Null),
        Results::NsMin(r) => serde_json::to_value(r).unwrap_or(Value::Null),
    };
    Meta {
        config: cfg.to_raw(),
        params,
        integrator: cfg.integrator.clone(),
        estimator: cfg.estimator.clone(),
        invariant_checks: out.checks.clone(),
        results,
    }
}

/// Re-reads a sidecar (or a JSON output document) into the configuration
/// that produced it.
pub fn from_sidecar(text: &str) -> CliResult<RunConfig> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::config("sidecar", e.to_string()))?;
    let meta_value = v.get("meta").cloned().unwrap_or(v);
    let meta: Meta = serde_json::from_value(meta_value).map_err(|e| CliError::config("sidecar", e.to_string()))?;
    resolve(&meta.config)
}

/// `results.csv` → `results.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.meta.json"))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn json_bytes(v: &impl Serialize) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("serializable");
    b.push(b'\n');
    b
}

/// The main artifact in the configured format.
pub fn render(out: &RunOutput) -> CliResult<Vec<u8>> {
    let t = table(out);
    match out.config.output.format {
        Format::Csv => t.to_csv(),
        Format::Json => Ok(json_bytes(&json!({ "meta": meta(out), "records": t.to_json() }))),
    }
}

/// Writes the artifact (and, for CSV, its sidecar) to `--out`, or the
/// artifact to `stdout` when no path is set. Scalar modes also print their
/// summary to `stdout`.
pub fn emit(out: &RunOutput, stdout: &mut impl Write) -> CliResult<()> {
    let stdio = |source| CliError::Io { path: PathBuf::from("<stdout>"), source };
    if let Some(line) = summary(out) {
        writeln!(stdout, "{line}").map_err(stdio)?;
    }
    match &out.config.output.path {
        Some(path) => {
            write_file(path, &render(out)?)?;
            if out.config.output.format == Format::Csv {
                write_file(&sidecar_path(path), &json_bytes(&meta(out)))?;
            }
        }
        None if summary(out).is_none() => stdout.write_all(&render(out)?).map_err(stdio)?,
        None => {}
    }
    Ok(())
}
