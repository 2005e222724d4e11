use serde::{Deserialize, Serialize};

use crate::bandit::{compute_alpha, compute_u, robin_c1, Aggregator, RobinParams};
use crate::dp::{robin_budget, PrivacyParams};
use crate::env::Instance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Robin,
    LocalOnly,
    NonPrivateAvg,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Robin => "robin",
            Algorithm::LocalOnly => "local_only",
            Algorithm::NonPrivateAvg => "non_private_avg",
        })
    }
}

/// Replacements for derived protocol constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Number of warm-up phases.
    #[serde(default)]
    pub u: Option<u32>,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Diversity constant used for `c₁` and `U`, in place of the instance's.
    #[serde(default)]
    pub lambda0: Option<f64>,
    /// Margin constant used for `U`, in place of the instance's.
    #[serde(default)]
    pub c0: Option<f64>,
}

/// One simulation run. The first `m` clients of the instance take part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub m: usize,
    pub t: usize,
    pub privacy: PrivacyParams,
    pub beta: f64,
    pub seed: u64,
    #[serde(default)]
    pub overrides: Overrides,
}

/// Constants a run actually used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    /// `P = ⌈log₂(T + 1)⌉`
    pub phases: u32,
    /// Warm-up length; `None` for LocalOnly.
    pub u: Option<u32>,
    /// `U` from the fixed point hit the `P - 1` cap.
    pub u_capped: bool,
    pub alpha: f64,
    pub c1: Option<f64>,
    pub lambda0: Option<f64>,
    pub eps_phase: Option<f64>,
    pub delta_phase: Option<f64>,
}

/// `⌈log₂(T + 1)⌉`
pub fn phase_count(t: usize) -> u32 {
    (usize::BITS - t.leading_zeros()).max(1)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl RunConfig {
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.t < 2 {
            return Err(Error::Config("t must be at least 2".into()));
        }
        if self.m == 0 || self.m > inst.num_clients() {
            return Err(Error::Config(format!(
                "m = {} but the instance has {} clients",
                self.m,
                inst.num_clients()
            )));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        PrivacyParams::new(self.privacy.epsilon, self.privacy.delta)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.algorithm != Algorithm::LocalOnly && !(self.privacy.delta > 0.0) {
            return Err(Error::Config("delta must be positive".into()));
        }
        if let Some(a) = self.overrides.alpha {
            positive("overrides.alpha", a)?;
        }
        if self.overrides.u == Some(0) {
            return Err(Error::Config("overrides.u must be at least 1".into()));
        }
        Ok(())
    }

    /// Derives every protocol constant, failing before any round is played.
    pub fn resolve(&self, inst: &Instance) -> Result<Resolved> {
        self.validate(inst)?;
        let d = inst.d();
        let phases = phase_count(self.t);
        if self.algorithm == Algorithm::LocalOnly {
            let alpha = match self.overrides.alpha {
                Some(a) => a,
                None => compute_alpha(self.m, self.beta, self.t as f64, d),
            };
            return Ok(Resolved {
                phases,
                u: None,
                u_capped: false,
                alpha,
                c1: None,
                lambda0: None,
                eps_phase: None,
                delta_phase: None,
            });
        }
        let lambda0 = self
            .overrides
            .lambda0
            .or(inst.meta().lambda0.filter(|&l| l > 0.0))
            .ok_or_else(|| {
                Error::Config("instance has no positive lambda0; set overrides.lambda0".into())
            })?;
        positive("lambda0", lambda0)?;
        let (u, u_capped) = match self.overrides.u {
            Some(u) => (u, false),
            None => {
                let c0 = self.overrides.c0.or(inst.meta().c0).ok_or_else(|| {
                    Error::Config("instance has no c0; set overrides.c0 or overrides.u".into())
                })?;
                let c = compute_u(d, self.m, phases, positive("c0", c0)?, lambda0, self.beta)?;
                (c.u, c.capped)
            }
        };
        let alpha = match self.overrides.alpha {
            Some(a) => a,
            None => compute_alpha(self.m, self.beta, 2f64.powi(u as i32), d),
        };
        let split = robin_budget(self.privacy, phases)?;
        Ok(Resolved {
            phases,
            u: Some(u),
            u_capped,
            alpha,
            c1: Some(robin_c1(d, self.m, phases, self.beta, lambda0)),
            lambda0: Some(lambda0),
            eps_phase: Some(split.eps_phase),
            delta_phase: Some(split.delta_phase),
        })
    }

    pub(crate) fn robin_params(&self, inst: &Instance, r: &Resolved) -> Result<RobinParams> {
        Ok(RobinParams {
            d: inst.d(),
            m: self.m,
            phases: r.phases,
            u: r.u.unwrap_or(1),
            alpha: r.alpha,
            beta: self.beta,
            c1: r.c1.unwrap_or(1.0),
            split: robin_budget(self.privacy, r.phases)?,
            aggregator: match self.algorithm {
                Algorithm::NonPrivateAvg => Aggregator::ExactMean,
                _ => Aggregator::Winsorized,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_counts() {
        assert_eq!(phase_count(2), 2);
        assert_eq!(phase_count(3), 2);
        assert_eq!(phase_count(4), 3);
        assert_eq!(phase_count(8192), 14);
        assert_eq!(phase_count(8191), 13);
        for t in 2..5000usize {
            assert_eq!(
                phase_count(t),
                ((t + 1) as f64).log2().ceil() as u32,
                "t = {t}"
            );
        }
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        let ok = r#"{"algorithm":"robin","m":2,"t":16,"privacy":{"epsilon":1.0,"delta":1e-5},"beta":0.1,"seed":3}"#;
        let cfg: RunConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.overrides, Overrides::default());
        let bad = r#"{"algorithm":"robin","m":2,"t":16,"privacy":{"epsilon":1.0,"delta":1e-5},"beta":0.1,"seed":3,"x":1}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
    }
}
