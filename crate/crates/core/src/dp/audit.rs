//! Monte-Carlo check of the ε-DP guarantee on a pair of neighboring inputs.
//!
//! Both datasets are sampled many times, outputs are binned on pooled
//! quantiles, and every bin's log-probability ratio is compared against
//! `ε` plus `z` binomial standard errors.

use rayon::prelude::*;
use serde::Serialize;

use super::winsorized_mean_1d;
use crate::error::{Error, Result};
use crate::numkit::RngStream;

const CHUNK: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMechanism {
    Winsorized1d,
    /// Non-private sample mean, a negative control.
    ExactMean,
}

impl std::str::FromStr for AuditMechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "winsorized1d" | "winsorized_mean_1d" => Ok(Self::Winsorized1d),
            "exact-mean" | "exact_mean" => Ok(Self::ExactMean),
            other => Err(Error::Config(format!("unknown audit mechanism `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditConfig {
    pub mechanism: AuditMechanism,
    pub eps: f64,
    /// Dataset size.
    pub m: usize,
    pub bound: f64,
    pub r: f64,
    /// Samples per side.
    pub samples: usize,
    pub bins: usize,
    /// Standard errors of slack per bin.
    pub z: f64,
    pub seed: u64,
}

impl AuditConfig {
    pub fn new(mechanism: AuditMechanism, eps: f64, samples: usize, seed: u64) -> Self {
        Self {
            mechanism,
            eps,
            m: 8,
            bound: 1.0,
            r: 0.25,
            samples,
            bins: 20,
            z: 3.0,
            seed,
        }
    }

    /// `D` has its first entry at `-B`, `D'` at `+B`; the rest are zero.
    pub fn neighbors(&self) -> (Vec<f64>, Vec<f64>) {
        let mut a = vec![0.0; self.m];
        let mut b = vec![0.0; self.m];
        a[0] = -self.bound;
        b[0] = self.bound;
        (a, b)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BinStat {
    pub lo: f64,
    pub hi: f64,
    pub count_a: usize,
    pub count_b: usize,
    /// `|ln(p_a / p_b)|`, infinite when exactly one side is empty.
    pub log_ratio: f64,
    pub slack: f64,
}

impl BinStat {
    pub fn passes(&self, eps: f64) -> bool {
        self.log_ratio <= eps + self.slack
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub eps: f64,
    pub max_log_ratio: f64,
    pub bins: Vec<BinStat>,
    pub passed: bool,
}

/// Bins both samples on pooled quantiles and tests every bin. Bins empty on
/// both sides are skipped.
pub fn binned_ratio_test(
    a: &[f64],
    b: &[f64],
    eps: f64,
    bins: usize,
    z: f64,
) -> Result<AuditReport> {
    if a.is_empty() || b.is_empty() || bins < 2 {
        return Err(Error::param(
            "audit needs samples on both sides and at least two bins",
        ));
    }
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("binned_ratio_test"));
    }
    pooled.sort_by(f64::total_cmp);
    let edges: Vec<f64> = (1..bins)
        .map(|k| pooled[(k * pooled.len() / bins).min(pooled.len() - 1)])
        .collect();
    let bin_of = |v: f64| edges.partition_point(|&e| e < v);
    let mut ca = vec![0usize; bins];
    let mut cb = vec![0usize; bins];
    a.iter().for_each(|&v| ca[bin_of(v)] += 1);
    b.iter().for_each(|&v| cb[bin_of(v)] += 1);

    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut stats = Vec::with_capacity(bins);
    for k in 0..bins {
        if ca[k] == 0 && cb[k] == 0 {
            continue;
        }
        let lo = if k == 0 {
            f64::NEG_INFINITY
        } else {
            edges[k - 1]
        };
        let hi = if k == bins - 1 {
            f64::INFINITY
        } else {
            edges[k]
        };
        let (log_ratio, slack) = if ca[k] == 0 || cb[k] == 0 {
            (f64::INFINITY, 0.0)
        } else {
            let pa = ca[k] as f64 / na;
            let pb = cb[k] as f64 / nb;
            let se = ((1.0 - pa) / ca[k] as f64 + (1.0 - pb) / cb[k] as f64).sqrt();
            ((pa / pb).ln().abs(), z * se)
        };
        stats.push(BinStat {
            lo,
            hi,
            count_a: ca[k],
            count_b: cb[k],
            log_ratio,
            slack,
        });
    }
    let max_log_ratio = stats.iter().map(|s| s.log_ratio).fold(0.0, f64::max);
    let passed = stats.iter().all(|s| s.passes(eps));
    Ok(AuditReport {
        eps,
        max_log_ratio,
        bins: stats,
        passed,
    })
}

fn sample_side(cfg: &AuditConfig, data: &[f64], stream: &RngStream) -> Result<Vec<f64>> {
    let chunks = cfg.samples.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.derive(&format!("chunk/{c}"));
            let n = CHUNK.min(cfg.samples - c * CHUNK);
            (0..n)
                .map(|_| match cfg.mechanism {
                    AuditMechanism::Winsorized1d => {
                        winsorized_mean_1d(data, cfg.r, cfg.eps, cfg.bound, &mut rng)
                    }
                    AuditMechanism::ExactMean => Ok(data.iter().sum::<f64>() / data.len() as f64),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// Runs the mechanism on both neighbors and applies [`binned_ratio_test`].
pub fn run_dp_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    if !(cfg.eps > 0.0) || cfg.samples == 0 || cfg.m == 0 {
        return Err(Error::param("audit needs eps > 0, samples > 0 and m > 0"));
    }
    let root = RngStream::new(cfg.seed).derive("audit");
    let (da, db) = cfg.neighbors();
    let a = sample_side(cfg, &da, &root.derive("a"))?;
    let b = sample_side(cfg, &db, &root.derive("b"))?;
    binned_ratio_test(&a, &b, cfg.eps, cfg.bins, cfg.z)
}
