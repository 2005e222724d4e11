//! Phased federated protocol: LinUCB warm-up, then greedy play against a
//! privately aggregated global estimate that is refreshed once per phase.

use serde::{Deserialize, Serialize};

use super::LinUcbState;
use crate::dp::{winsorized_mean_highd, BudgetSplit, PrivacyParams};
use crate::env::{argmax_first, DecisionSet};
use crate::error::{Error, Result};
use crate::numkit::{dot, padded_dim, project_unit_ball, RngStream};

/// Fixed-point iterations allowed in [`compute_u`].
const MAX_U_ITERATIONS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UploadMsg {
    pub client: usize,
    pub phase: u32,
    pub theta_tilde: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadcastMsg {
    pub phase: u32,
    pub theta_hat: Vec<f64>,
}

/// How the server combines local estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    Winsorized,
    /// Exact average, no privacy.
    ExactMean,
}

/// Result of [`compute_u`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UChoice {
    pub u: u32,
    /// The fixed point was not below `P`; `u` is `P - 1`.
    pub capped: bool,
    pub iterations: u32,
}

/// Length of the warm-up, the least integer fixed point of
/// `U = ⌈max{log₂(64 L / λ₀²), log₂(144 d U² (C₀+λ₀)² L ln 2 / λ₀⁴)}⌉`
/// with `L = ln(2dMP/β)`, iterated from `U = 1` and capped at `P - 1`.
pub fn compute_u(
    d: usize,
    m: usize,
    phases: u32,
    c0: f64,
    lambda0: f64,
    beta: f64,
) -> Result<UChoice> {
    if !(c0 > 0.0 && lambda0 > 0.0 && beta > 0.0) || d == 0 || m == 0 || phases == 0 {
        return Err(Error::param("compute_u needs positive inputs"));
    }
    let df = d as f64;
    let log_term = (2.0 * df * m as f64 * phases as f64 / beta).ln();
    let first = (64.0 * log_term / lambda0.powi(2)).log2();
    let coef =
        144.0 * df * (c0 + lambda0).powi(2) * log_term * std::f64::consts::LN_2 / lambda0.powi(4);
    let step = |u: u32| -> u32 {
        let second = (coef * (u as f64).powi(2)).log2();
        first.max(second).ceil().max(1.0).min(u32::MAX as f64) as u32
    };
    let cap = phases.saturating_sub(1).max(1);
    let mut u = 1;
    let mut iterations = 0;
    loop {
        let next = step(u);
        iterations += 1;
        if next == u {
            break;
        }
        u = next;
        if u > cap || iterations >= MAX_U_ITERATIONS {
            return Ok(UChoice {
                u: cap,
                capped: true,
                iterations,
            });
        }
    }
    Ok(UChoice {
        u: u.min(cap),
        capped: u > cap,
        iterations,
    })
}

/// `c₁ = 4 sqrt(2d ln(16 d (M+1) P / β)) / λ₀`
pub fn robin_c1(d: usize, m: usize, phases: u32, beta: f64, lambda0: f64) -> f64 {
    let df = d as f64;
    4.0 * (2.0 * df * (16.0 * df * (m as f64 + 1.0) * phases as f64 / beta).ln()).sqrt() / lambda0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClientMode {
    Init,
    Greedy,
}

/// One client's view: its own `(V, Y)` accumulator and the last broadcast.
#[derive(Debug, Clone)]
pub struct RobinClient {
    id: usize,
    u: u32,
    phase: u32,
    mode: ClientMode,
    acc: LinUcbState,
    theta_global: Option<Vec<f64>>,
}

impl RobinClient {
    pub fn new(id: usize, d: usize, u: u32, alpha: f64) -> Self {
        Self {
            id,
            u,
            phase: 0,
            mode: ClientMode::Init,
            acc: LinUcbState::new(d, alpha),
            theta_global: None,
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn mode(&self) -> ClientMode {
        self.mode
    }

    pub fn accumulator(&self) -> &LinUcbState {
        &self.acc
    }

    pub fn theta_global(&self) -> Option<&[f64]> {
        self.theta_global.as_deref()
    }

    /// Enters phase `p`. Phases after `U` clear the accumulator and adopt
    /// the latest broadcast; warm-up phases keep accumulating.
    pub fn begin_phase(&mut self, p: u32, broadcast: Option<&BroadcastMsg>) {
        self.phase = p;
        if p <= self.u {
            self.mode = ClientMode::Init;
        } else {
            self.mode = ClientMode::Greedy;
            self.acc.reset();
            self.theta_global = broadcast.map(|b| b.theta_hat.clone());
        }
    }

    pub fn select(&self, ds: &DecisionSet) -> Result<usize> {
        match self.mode {
            ClientMode::Init => self.acc.select(ds),
            ClientMode::Greedy => {
                let theta = self.theta_global.as_ref().ok_or(Error::MissingBroadcast)?;
                if ds.is_empty() {
                    return Err(Error::param("empty decision set"));
                }
                Ok(argmax_first(ds.arms().map(|x| dot(x, theta))))
            }
        }
    }

    pub fn observe(&mut self, x: &[f64], r: f64) {
        self.acc.update(x, r);
    }

    /// `V† Y` projected onto the unit ball.
    pub fn local_estimate(&self) -> Result<UploadMsg> {
        let mut theta_tilde = self.acc.pinv_estimate()?;
        project_unit_ball(&mut theta_tilde);
        Ok(UploadMsg {
            client: self.id,
            phase: self.phase,
            theta_tilde,
        })
    }
}

/// Fixed protocol parameters shared by the server and the clients.
#[derive(Debug, Clone, Serialize)]
pub struct RobinParams {
    pub d: usize,
    pub m: usize,
    /// Total number of phases `P`.
    pub phases: u32,
    pub u: u32,
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub split: BudgetSplit,
    pub aggregator: Aggregator,
}

#[derive(Debug, Clone)]
pub struct RobinServer {
    params: RobinParams,
    theta_history: Vec<Vec<f64>>,
}

impl RobinServer {
    pub fn new(params: RobinParams) -> Self {
        Self {
            params,
            theta_history: Vec::new(),
        }
    }

    pub fn params(&self) -> &RobinParams {
        &self.params
    }

    pub fn theta_history(&self) -> &[Vec<f64>] {
        &self.theta_history
    }

    pub fn aggregations(&self) -> u32 {
        self.theta_history.len() as u32
    }

    /// Budget consumed so far.
    pub fn spent(&self) -> PrivacyParams {
        let k = self.aggregations();
        match self.params.aggregator {
            Aggregator::Winsorized => self.params.split.spent_after(k),
            Aggregator::ExactMean if k > 0 => PrivacyParams {
                epsilon: f64::INFINITY,
                delta: 0.0,
            },
            Aggregator::ExactMean => PrivacyParams {
                epsilon: 0.0,
                delta: 0.0,
            },
        }
    }

    /// Combines one upload per client into the next global estimate:
    /// `WMHD({θ̃ᵢ}, c₁ / sqrt(|T_p|), β / (16P), ε₀, δ₀)`, with inputs
    /// zero-padded to a power-of-two dimension and the output truncated back.
    pub fn aggregate(
        &mut self,
        msgs: &[UploadMsg],
        phase: u32,
        phase_len: usize,
        rng: &mut RngStream,
    ) -> Result<BroadcastMsg> {
        let p = &self.params;
        let got = msgs.iter().filter(|m| m.phase == phase).count();
        if msgs.len() != p.m || got != p.m {
            return Err(Error::IncompleteRound {
                phase,
                expected: p.m,
                got,
            });
        }
        let mut seen = vec![false; p.m];
        for m in msgs {
            if m.client >= p.m || std::mem::replace(&mut seen[m.client], true) {
                return Err(Error::IncompleteRound {
                    phase,
                    expected: p.m,
                    got,
                });
            }
            if m.theta_tilde.len() != p.d {
                return Err(Error::param("upload has the wrong dimension"));
            }
        }
        let theta_hat = match p.aggregator {
            Aggregator::ExactMean => (0..p.d)
                .map(|s| msgs.iter().map(|m| m.theta_tilde[s]).sum::<f64>() / p.m as f64)
                .collect(),
            Aggregator::Winsorized => {
                let dp = padded_dim(p.d);
                let xs: Vec<Vec<f64>> = msgs
                    .iter()
                    .map(|m| {
                        let mut v = m.theta_tilde.clone();
                        v.resize(dp, 0.0);
                        v
                    })
                    .collect();
                let r = p.c1 / (phase_len as f64).sqrt();
                let beta = p.beta / (16.0 * p.phases as f64);
                let mut out = winsorized_mean_highd(
                    &xs,
                    r,
                    beta,
                    p.split.eps_phase,
                    p.split.delta_phase,
                    rng,
                )?;
                out.truncate(p.d);
                out
            }
        };
        self.theta_history.push(theta_hat.clone());
        Ok(BroadcastMsg { phase, theta_hat })
    }
}
