//! CSV and JSON renderings of a run.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{Algorithm, Resolved, RunConfig};
use super::run::RunResult;
use crate::env::Instance;
use crate::error::{Error, Result};

/// Hex SHA-256 of the run configuration together with the instance document.
pub fn config_hash(cfg: &RunConfig, inst: &Instance) -> String {
    let canonical = serde_json::to_string(&(cfg, inst.doc())).expect("config serializes");
    Sha256::digest(canonical.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn header(hash: &str, seed: u64) -> String {
    format!("# config_hash={hash} seed={seed}\n")
}

/// `round,cum_regret`, rounds numbered from 1.
pub fn rounds_csv(result: &RunResult, hash: &str) -> String {
    let mut out = header(hash, result.seed);
    out.push_str("round,cum_regret\n");
    for (t, r) in result.cumulative_regret.iter().enumerate() {
        let _ = writeln!(out, "{},{}", t + 1, r);
    }
    out
}

/// `phase,len,min_eig_min,min_eig_med,est_error,eps_spent,delta_spent`
pub fn phases_csv(result: &RunResult, hash: &str) -> String {
    let mut out = header(hash, result.seed);
    out.push_str("phase,len,min_eig_min,min_eig_med,est_error,eps_spent,delta_spent\n");
    for p in &result.phase_diag {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.phase,
            p.len,
            p.min_eig_min(),
            p.min_eig_median(),
            p.global_est_error,
            p.eps_spent,
            p.delta_spent
        );
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub config_hash: String,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub m: usize,
    pub t: usize,
    pub d: usize,
    pub final_regret: f64,
    /// Slope of cumulative regret against `log₂ t` over the last four phase ends.
    pub regret_log2t_slope: f64,
    pub final_regret_per_log2t: f64,
    pub lambda0_instance: Option<f64>,
    pub c0_instance: Option<f64>,
    /// `min_i λ_min(V_i) / len` at the last complete phase.
    pub lambda0_achieved: f64,
    pub eps_spent: f64,
    pub delta_spent: f64,
    pub resolved: Resolved,
}

pub fn summarize(cfg: &RunConfig, inst: &Instance, result: &RunResult) -> Summary {
    let last = result.phase_diag.iter().rev().find(|p| p.complete);
    let spent = result.phase_diag.last();
    Summary {
        config_hash: config_hash(cfg, inst),
        seed: result.seed,
        algorithm: result.algorithm,
        m: result.m,
        t: result.t,
        d: result.d,
        final_regret: result.final_regret(),
        regret_log2t_slope: result.regret_log_slope(4),
        final_regret_per_log2t: result.final_regret() / (result.t as f64).log2(),
        lambda0_instance: inst.meta().lambda0,
        c0_instance: inst.meta().c0,
        lambda0_achieved: last.map_or(f64::NAN, |p| p.min_eig_min() / p.len as f64),
        eps_spent: spent.map_or(0.0, |p| p.eps_spent),
        delta_spent: spent.map_or(0.0, |p| p.delta_spent),
        resolved: result.resolved.clone(),
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Writes `rounds.csv`, `phases.csv` and `summary.json` into `dir`.
pub fn write_run_outputs(
    dir: &Path,
    cfg: &RunConfig,
    inst: &Instance,
    result: &RunResult,
) -> Result<Summary> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let summary = summarize(cfg, inst, result);
    write(
        &dir.join("rounds.csv"),
        &rounds_csv(result, &summary.config_hash),
    )?;
    write(
        &dir.join("phases.csv"),
        &phases_csv(result, &summary.config_hash),
    )?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    write(&dir.join("summary.json"), &json)?;
    Ok(summary)
}
