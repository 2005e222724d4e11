use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::run::{run_episode, RunResult};
use crate::env::Instance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Epsilon,
    M,
    T,
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub value: f64,
    pub seed: u64,
    pub config: RunConfig,
    pub result: RunResult,
}

fn as_count(axis: SweepAxis, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e15 {
        Ok(v as usize)
    } else {
        Err(Error::Config(format!(
            "{axis:?} sweep values must be positive integers, got {v}"
        )))
    }
}

/// Full factorial of `values × seeds`, values outermost.
pub fn sweep_configs(
    base: &RunConfig,
    axis: SweepAxis,
    values: &[f64],
    seeds: &[u64],
) -> Result<Vec<(f64, RunConfig)>> {
    if values.is_empty() || seeds.is_empty() {
        return Err(Error::Config(
            "a sweep needs at least one value and one seed".into(),
        ));
    }
    let mut out = Vec::with_capacity(values.len() * seeds.len());
    for &v in values {
        for &seed in seeds {
            let mut cfg = base.clone();
            cfg.seed = seed;
            match axis {
                SweepAxis::Epsilon => cfg.privacy.epsilon = v,
                SweepAxis::M => cfg.m = as_count(axis, v)?,
                SweepAxis::T => cfg.t = as_count(axis, v)?,
            }
            out.push((v, cfg));
        }
    }
    Ok(out)
}

/// Runs every cell on the current rayon pool. Results come back in
/// [`sweep_configs`] order whatever the scheduling.
pub fn sweep(
    base: &RunConfig,
    inst: &Instance,
    axis: SweepAxis,
    values: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepCell>> {
    let cells = sweep_configs(base, axis, values, seeds)?;
    for (_, cfg) in &cells {
        cfg.resolve(inst)?;
    }
    cells
        .into_par_iter()
        .map(|(value, config)| {
            let result = run_episode(&config, inst)?;
            Ok(SweepCell {
                value,
                seed: config.seed,
                config,
                result,
            })
        })
        .collect()
}
