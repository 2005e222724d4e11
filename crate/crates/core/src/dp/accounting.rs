//! (ε, δ) bookkeeping for the phase-wise federated protocol.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when comparing composed budgets against targets.
const BUDGET_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::param(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::param(format!(
                "delta must lie in [0, 1), got {delta}"
            )));
        }
        Ok(Self { epsilon, delta })
    }
}

/// Per-phase budget `(ε₀, δ₀)` derived from a total target over `phases` phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetSplit {
    pub target: PrivacyParams,
    pub phases: u32,
    pub eps_phase: f64,
    pub delta_phase: f64,
}

impl BudgetSplit {
    /// Budget used after `k` aggregations, via advanced composition with
    /// slack `δ/2`.
    pub fn spent_after(&self, k: u32) -> PrivacyParams {
        if k == 0 {
            return PrivacyParams {
                epsilon: 0.0,
                delta: 0.0,
            };
        }
        compose_advanced(self.eps_phase, self.delta_phase, k, self.target.delta / 2.0)
    }
}

/// Advanced composition of `k` runs of an `(ε, δ)`-DP mechanism:
/// `ε' = ε sqrt(2k ln(1/δ')) + k ε (e^ε - 1)`, `δ_total = k δ + δ'`.
pub fn compose_advanced(eps: f64, delta: f64, k: u32, delta_prime: f64) -> PrivacyParams {
    let kf = k as f64;
    let epsilon = eps * (2.0 * kf * (1.0 / delta_prime).ln()).sqrt() + kf * eps * eps.exp_m1();
    PrivacyParams {
        epsilon,
        delta: kf * delta + delta_prime,
    }
}

/// Simplified bound `ε sqrt(6k ln(1/δ'))`, valid when `ε < 1/sqrt(k)` and
/// `ε < ln 2`. Returns `None` outside that regime.
pub fn compose_simplified(eps: f64, k: u32, delta_prime: f64) -> Option<f64> {
    let kf = k as f64;
    if eps < 1.0 / kf.sqrt() && eps < std::f64::consts::LN_2 {
        Some(eps * (6.0 * kf * (1.0 / delta_prime).ln()).sqrt())
    } else {
        None
    }
}

/// `ε₀ = ε / sqrt(6P ln(2/δ))`, `δ₀ = δ / (2P)`.
pub fn robin_budget(target: PrivacyParams, phases: u32) -> Result<BudgetSplit> {
    if phases == 0 {
        return Err(Error::param("need at least one phase"));
    }
    if !(target.delta > 0.0 && target.delta < 1.0) {
        return Err(Error::param("the phase split needs delta in (0, 1)"));
    }
    let p = phases as f64;
    Ok(BudgetSplit {
        target,
        phases,
        eps_phase: target.epsilon / (6.0 * p * (2.0 / target.delta).ln()).sqrt(),
        delta_phase: target.delta / (2.0 * p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetCheck {
    /// `ε₀ < 1/sqrt(P)` and `ε₀ < ln 2`.
    pub simplified_applies: bool,
    /// Exact advanced-composition epsilon over `P` phases.
    pub eps_composed: f64,
    /// Simplified bound, `NaN` when it does not apply.
    pub eps_simplified: f64,
    pub delta_composed: f64,
    pub holds: bool,
}

/// Checks that `P` phases at `(ε₀, δ₀)` compose to within the target.
pub fn verify_robin_budget(split: &BudgetSplit) -> BudgetCheck {
    let slack = split.target.delta / 2.0;
    let composed = compose_advanced(split.eps_phase, split.delta_phase, split.phases, slack);
    let simplified = compose_simplified(split.eps_phase, split.phases, slack);
    let within = |x: f64, bound: f64| x <= bound * (1.0 + BUDGET_RTOL);
    let holds = match simplified {
        Some(s) => {
            within(composed.epsilon, s)
                && within(s, split.target.epsilon)
                && within(composed.delta, split.target.delta)
        }
        None => false,
    };
    BudgetCheck {
        simplified_applies: simplified.is_some(),
        eps_composed: composed.epsilon,
        eps_simplified: simplified.unwrap_or(f64::NAN),
        delta_composed: composed.delta,
        holds,
    }
}
