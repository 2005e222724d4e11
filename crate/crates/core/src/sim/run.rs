use std::time::Instant;

use serde::Serialize;

use super::config::{Algorithm, Resolved, RunConfig};
use crate::bandit::{Federation, LocalOnly, RobinFederation, Traffic};
use crate::env::{DecisionSet, Instance};
use crate::error::Result;
use crate::numkit::{dist, min_eigenvalue, RngStream};

/// Per-phase diagnostics, computed with knowledge of `θ*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiag {
    pub phase: u32,
    /// Rounds actually played.
    pub len: usize,
    /// False when the horizon cut the phase short.
    pub complete: bool,
    /// `λ_min` of each client's Gram matrix at the end of the phase.
    pub min_eig_per_client: Vec<f64>,
    /// `‖θ̂ - θ*‖` for the estimate broadcast at the end of this phase,
    /// `NaN` when no aggregation took place.
    pub global_est_error: f64,
    pub eps_spent: f64,
    pub delta_spent: f64,
}

impl PhaseDiag {
    pub fn min_eig_min(&self) -> f64 {
        self.min_eig_per_client
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_eig_median(&self) -> f64 {
        median(&self.min_eig_per_client)
    }
}

/// Median; `NaN` for an empty slice.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub m: usize,
    pub t: usize,
    pub d: usize,
    pub resolved: Resolved,
    /// Regret summed over clients, cumulative per round.
    pub cumulative_regret: Vec<f64>,
    pub phase_diag: Vec<PhaseDiag>,
    #[serde(skip)]
    pub wallclock: f64,
}

impl RunResult {
    pub fn final_regret(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }

    /// Cumulative regret at the last round of every complete phase, with
    /// that round number.
    pub fn phase_end_regret(&self) -> Vec<(usize, f64)> {
        let mut t = 0;
        let mut out = Vec::new();
        for p in &self.phase_diag {
            t += p.len;
            if p.complete {
                out.push((t, self.cumulative_regret[t - 1]));
            }
        }
        out
    }

    /// Least-squares slope of cumulative regret against `log₂ t` over the
    /// last `k` complete phase ends.
    pub fn regret_log_slope(&self, k: usize) -> f64 {
        let ends = self.phase_end_regret();
        let pts = &ends[ends.len().saturating_sub(k)..];
        if pts.len() < 2 {
            return f64::NAN;
        }
        let n = pts.len() as f64;
        let xs: Vec<f64> = pts.iter().map(|&(t, _)| (t as f64).log2()).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(pts).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    }
}

/// Output of [`simulate`]: the result plus every message exchanged.
#[derive(Debug, Clone)]
pub struct Trace {
    pub result: RunResult,
    pub traffic: Vec<Traffic>,
}

/// Plays `cfg.t` synchronized rounds of `fed` against the instance. Each
/// client draws contexts and rewards from its own streams
/// `client/<i>/context` and `client/<i>/reward`; the server uses
/// `server/phase/<p>`.
pub fn simulate(
    cfg: &RunConfig,
    resolved: Resolved,
    inst: &Instance,
    fed: &mut dyn Federation,
) -> Result<Trace> {
    let start = Instant::now();
    let m = cfg.m;
    let root = RngStream::new(cfg.seed);
    let mut ctx_rng: Vec<RngStream> = (0..m)
        .map(|i| root.derive(&format!("client/{i}/context")))
        .collect();
    let mut rew_rng: Vec<RngStream> = (0..m)
        .map(|i| root.derive(&format!("client/{i}/reward")))
        .collect();
    let mut sets: Vec<DecisionSet> = (0..m).map(|_| DecisionSet::new(inst.d())).collect();

    let mut cumulative = Vec::with_capacity(cfg.t);
    let mut phase_diag = Vec::new();
    let mut traffic = Vec::new();
    let mut total = 0.0;
    let mut played = 0usize;
    let mut phase = 0u32;
    while played < cfg.t {
        phase += 1;
        let nominal = 1usize << phase.min(62);
        let len = nominal.min(cfg.t - played);
        fed.begin_phase(phase)?;
        for _ in 0..len {
            for i in 0..m {
                inst.sample_context_into(i, &mut ctx_rng[i], &mut sets[i]);
                let a = fed.select(i, &sets[i])?;
                let x = sets[i].arm(a);
                let r = inst.reward(x, &mut rew_rng[i]).value;
                fed.observe(i, x, r);
                total += inst.instantaneous_regret(&sets[i], a);
            }
            cumulative.push(total);
        }
        played += len;

        let min_eig_per_client = (0..m)
            .map(|i| fed.client_gram(i).map_or(Ok(f64::NAN), min_eigenvalue))
            .collect::<Result<Vec<_>>>()?;
        let mut server_rng = root.derive(&format!("server/phase/{phase}"));
        let msgs = fed.end_phase(phase, nominal, len == nominal, &mut server_rng)?;
        let aggregated = msgs.iter().any(|t| matches!(t, Traffic::Broadcast(_)));
        let global_est_error = match fed.global_estimate() {
            Some(theta) if aggregated => dist(theta, inst.theta_star()),
            _ => f64::NAN,
        };
        traffic.extend(msgs);
        let spent = fed.budget_spent();
        phase_diag.push(PhaseDiag {
            phase,
            len,
            complete: len == nominal,
            min_eig_per_client,
            global_est_error,
            eps_spent: spent.epsilon,
            delta_spent: spent.delta,
        });
    }
    Ok(Trace {
        result: RunResult {
            algorithm: cfg.algorithm,
            seed: cfg.seed,
            m,
            t: cfg.t,
            d: inst.d(),
            resolved,
            cumulative_regret: cumulative,
            phase_diag,
            wallclock: start.elapsed().as_secs_f64(),
        },
        traffic,
    })
}

/// Builds the configured algorithm and runs it, keeping the message log.
pub fn run_episode_traced(cfg: &RunConfig, inst: &Instance) -> Result<Trace> {
    let resolved = cfg.resolve(inst)?;
    let mut fed: Box<dyn Federation> = match cfg.algorithm {
        Algorithm::LocalOnly => Box::new(LocalOnly::new(cfg.m, inst.d(), resolved.alpha)),
        Algorithm::Robin | Algorithm::NonPrivateAvg => {
            Box::new(RobinFederation::new(cfg.robin_params(inst, &resolved)?))
        }
    };
    simulate(cfg, resolved, inst, fed.as_mut())
}

pub fn run_episode(cfg: &RunConfig, inst: &Instance) -> Result<RunResult> {
    Ok(run_episode_traced(cfg, inst)?.result)
}
