//! Result tables: per-realization CSV, summary CSV and JSON mirrors.

use std::io::Write;

use hqrc::experiment::{ResultRecord, Summary};
use hqrc::tasks::{InputSequence, StateParams};
use serde::Serialize;

/// Version tag written as the first line of every CSV table.
pub const SCHEMA: &str = "hqrc-results/1";

#[derive(Debug, Serialize)]
pub struct ResultRow {
    pub task: String,
    pub tau: usize,
    pub tau_prime: usize,
    #[serde(rename = "N")]
    pub n_modes: usize,
    #[serde(rename = "R")]
    pub reflectivity: f64,
    pub p: f64,
    #[serde(rename = "M")]
    pub ensemble: String,
    #[serde(rename = "N_esn")]
    pub n_esn: usize,
    pub rho: f64,
    pub iota: f64,
    pub baseline: String,
    pub realization: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    pub excluded_count: usize,
}

impl From<&ResultRecord> for ResultRow {
    fn from(r: &ResultRecord) -> Self {
        Self {
            task: r.task.to_string(),
            tau: r.tau,
            tau_prime: r.tau_prime,
            n_modes: r.n_modes,
            reflectivity: r.reflectivity,
            p: r.sparsity,
            ensemble: r.ensemble.to_string(),
            n_esn: r.n_esn,
            rho: r.rho,
            iota: r.iota,
            baseline: r.baseline.to_string(),
            realization: r.realization,
            seed: r.seed,
            metric: r.metric.to_string(),
            value: r.value,
            excluded_count: r.excluded_count,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SummaryRow {
    pub task: String,
    pub tau: usize,
    pub tau_prime: usize,
    #[serde(rename = "N")]
    pub n_modes: usize,
    #[serde(rename = "R")]
    pub reflectivity: f64,
    pub p: f64,
    #[serde(rename = "M")]
    pub ensemble: String,
    #[serde(rename = "N_esn")]
    pub n_esn: usize,
    pub rho: f64,
    pub iota: f64,
    pub baseline: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl From<&Summary> for SummaryRow {
    fn from(s: &Summary) -> Self {
        let r = ResultRow::from(&s.first);
        Self {
            task: r.task,
            tau: r.tau,
            tau_prime: r.tau_prime,
            n_modes: r.n_modes,
            reflectivity: r.reflectivity,
            p: r.p,
            ensemble: r.ensemble,
            n_esn: r.n_esn,
            rho: r.rho,
            iota: r.iota,
            baseline: r.baseline,
            metric: r.metric,
            mean: s.mean,
            stderr: s.stderr,
            n: s.n,
        }
    }
}

pub fn write_csv<W: Write, T: Serialize>(mut out: W, rows: &[T]) -> std::io::Result<()> {
    writeln!(out, "# schema: {SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(std::io::Error::other)?;
    }
    w.flush()
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, rows: &[T]) -> std::io::Result<()> {
    let doc = serde_json::json!({ "schema": SCHEMA, "rows": rows });
    serde_json::to_writer_pretty(&mut out, &doc).map_err(std::io::Error::other)?;
    writeln!(out)
}

/// Input-state parameters of one realization, one row per time step.
pub fn write_inputs<W: Write>(out: W, seq: &InputSequence) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (t, p) in seq.params().iter().enumerate() {
        match *p {
            StateParams::SqueezedThermal { n_th, r, phi } => {
                if t == 0 {
                    w.write_record(["t", "n_th", "r", "phi"])?;
                }
                w.write_record([t.to_string(), n_th.to_string(), r.to_string(), phi.to_string()])?;
            }
            StateParams::TwoModeSqueezedThermal { n_th, s } => {
                if t == 0 {
                    w.write_record(["t", "n_th", "s"])?;
                }
                w.write_record([t.to_string(), n_th.to_string(), s.to_string()])?;
            }
        }
    }
    w.flush()
}
