//! Bandit environments: context laws, rewards, regret, and the instance
//! generators used by the experiments.
//!
//! Three instance families are provided:
//!
//! - [`InstanceKind::DiverseMargin`]: `K` arms drawn uniformly from the unit
//!   ball and mapped through a per-client anisotropic rotation, so context
//!   laws differ across clients while the optimal-arm Gram matrix stays well
//!   conditioned. This family is this crate's own choice of a test
//!   distribution for the upper-bound experiments.
//! - [`InstanceKind::SphereHard`]: two arms, the second always the zero
//!   vector, the first a truncated Gaussian `z` placed in a random 2-block.
//!   The parameter has every 2-block on the circle of radius `r`, which makes
//!   the margin constant scale like `1/r`.
//! - [`InstanceKind::AxisNecessity`]: fixed two-arm contexts where client 1
//!   only sees the first axis and every other client only the second, so no
//!   single client's optimal-arm Gram matrix has full rank.

mod estimate;
mod generators;

pub use estimate::{estimate_margin_constant, estimate_min_eig_optimal, DEFAULT_EPS_GRID};
pub use generators::{
    make_axis_instance, make_diverse_margin_instance, make_sphere_hard_instance, GeneratorOptions,
};

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{
    dot, norm, sample_truncated_gaussian_ball, sample_uniform_ball, standard_normal, RngStream,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InstanceKind {
    DiverseMargin,
    SphereHard,
    AxisNecessity,
}

/// Estimated or construction-time constants attached to an instance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceMeta {
    /// Smallest eigenvalue of the optimal-arm Gram matrix, minimum over clients.
    #[serde(default)]
    pub lambda0: Option<f64>,
    /// Margin constant `C0`, maximum over clients.
    #[serde(default)]
    pub c0: Option<f64>,
    /// Block radius `r` (SphereHard only).
    #[serde(default)]
    pub sphere_radius: Option<f64>,
    /// Seed of the per-client context transforms (DiverseMargin only).
    #[serde(default)]
    pub context_seed: Option<u64>,
    /// Minimum optimal-vs-runner-up gap enforced by rejection (DiverseMargin only).
    #[serde(default)]
    pub gap_floor: Option<f64>,
}

/// The on-disk form of an [`Instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub d: usize,
    pub num_arms: usize,
    pub num_clients: usize,
    pub kind: InstanceKind,
    pub theta_star: Vec<f64>,
    pub meta: InstanceMeta,
}

/// A fully specified federated bandit problem. Immutable once built.
#[derive(Debug, Clone)]
pub struct Instance {
    doc: InstanceDoc,
    /// Row-major `d x d` maps, one per client (DiverseMargin only).
    transforms: Vec<Vec<f64>>,
}

/// Feature vectors of every arm for one realized context.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionSet {
    dim: usize,
    data: Vec<f64>,
}

impl DecisionSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            data: Vec::new(),
        }
    }

    pub fn from_arms(arms: &[Vec<f64>]) -> Result<Self> {
        let dim = arms.first().map(Vec::len).unwrap_or(0);
        if arms.iter().any(|a| a.len() != dim) {
            return Err(Error::param("all arms must share one dimension"));
        }
        Ok(Self {
            dim,
            data: arms.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn arm(&self, a: usize) -> &[f64] {
        &self.data[a * self.dim..(a + 1) * self.dim]
    }

    pub fn arms(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    fn reset(&mut self, dim: usize, k: usize) {
        self.dim = dim;
        self.data.clear();
        self.data.resize(dim * k, 0.0);
    }

    fn arm_mut(&mut self, a: usize) -> &mut [f64] {
        &mut self.data[a * self.dim..(a + 1) * self.dim]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSample {
    pub value: f64,
}

/// Index of the largest value, lowest index on ties.
pub(crate) fn argmax_first(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

impl Instance {
    /// Validates a document and builds the runtime instance.
    pub fn from_doc(doc: InstanceDoc) -> Result<Self> {
        let InstanceDoc {
            d,
            num_arms,
            num_clients,
            kind,
            ref theta_star,
            ref meta,
        } = doc;
        if d == 0 || num_clients == 0 || num_arms < 2 {
            return Err(Error::param(
                "instance needs d >= 1, num_clients >= 1, num_arms >= 2",
            ));
        }
        if theta_star.len() != d {
            return Err(Error::param("theta_star length must equal d"));
        }
        if theta_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("theta_star"));
        }
        if norm(theta_star) > 1.0 + 1e-9 {
            return Err(Error::param("‖theta_star‖ must be at most 1"));
        }
        let mut transforms = Vec::new();
        match kind {
            InstanceKind::DiverseMargin => {
                let seed = meta.context_seed.ok_or_else(|| {
                    Error::param("DiverseMargin instance needs meta.context_seed")
                })?;
                if let Some(g) = meta.gap_floor {
                    if !(0.0..=0.5).contains(&g) {
                        return Err(Error::param("gap_floor must lie in [0, 0.5]"));
                    }
                }
                transforms = client_transforms(d, num_clients, seed);
            }
            InstanceKind::SphereHard => {
                if d % 2 != 0 || num_arms != 2 {
                    return Err(Error::param("SphereHard needs even d and two arms"));
                }
                let r = meta
                    .sphere_radius
                    .ok_or_else(|| Error::param("SphereHard instance needs meta.sphere_radius"))?;
                if !(r > 0.0 && r <= 1.0 / (d as f64).sqrt() + 1e-12) {
                    return Err(Error::param("sphere radius must lie in (0, 1/sqrt(d)]"));
                }
                for block in theta_star.chunks_exact(2) {
                    if (norm(block) - r).abs() > 1e-9 {
                        return Err(Error::param("every 2-block of theta_star must have norm r"));
                    }
                }
            }
            InstanceKind::AxisNecessity => {
                if d != 2 || num_arms != 2 {
                    return Err(Error::param("AxisNecessity is a d = 2, two-arm instance"));
                }
            }
        }
        Ok(Self { doc, transforms })
    }

    pub fn doc(&self) -> &InstanceDoc {
        &self.doc
    }

    pub fn d(&self) -> usize {
        self.doc.d
    }

    pub fn num_arms(&self) -> usize {
        self.doc.num_arms
    }

    pub fn num_clients(&self) -> usize {
        self.doc.num_clients
    }

    pub fn kind(&self) -> InstanceKind {
        self.doc.kind
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.doc.theta_star
    }

    pub fn meta(&self) -> &InstanceMeta {
        &self.doc.meta
    }

    pub(crate) fn meta_mut(&mut self) -> &mut InstanceMeta {
        &mut self.doc.meta
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("instance document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn sample_context(&self, client: usize, rng: &mut RngStream) -> DecisionSet {
        let mut ds = DecisionSet::new(self.d());
        self.sample_context_into(client, rng, &mut ds);
        ds
    }

    /// Draws client `client`'s next decision set into `ds`, reusing its buffer.
    pub fn sample_context_into(&self, client: usize, rng: &mut RngStream, ds: &mut DecisionSet) {
        assert!(client < self.num_clients(), "client index out of range");
        let d = self.d();
        let k = self.num_arms();
        ds.reset(d, k);
        match self.kind() {
            InstanceKind::DiverseMargin => {
                let map = &self.transforms[client];
                let floor = self.meta().gap_floor.unwrap_or(0.0);
                loop {
                    for a in 0..k {
                        let u = sample_uniform_ball(rng, d, 1.0).expect("valid ball parameters");
                        let x = ds.arm_mut(a);
                        for (i, xi) in x.iter_mut().enumerate() {
                            *xi = dot(&map[i * d..(i + 1) * d], &u);
                        }
                    }
                    if floor <= 0.0 || self.min_gap(ds) >= floor {
                        break;
                    }
                }
            }
            InstanceKind::SphereHard => {
                let s = rng.random_range(0..d / 2);
                let z = sample_truncated_gaussian_ball(rng, 2, 1.0).expect("valid parameters");
                let arm = ds.arm_mut(0);
                arm[2 * s] = z[0];
                arm[2 * s + 1] = z[1];
                // arm 1 stays the zero vector
            }
            InstanceKind::AxisNecessity => {
                let axis = if client == 0 { 0 } else { 1 };
                ds.arm_mut(0)[axis] = 0.5;
                ds.arm_mut(1)[axis] = -0.5;
            }
        }
    }

    pub fn mean_reward(&self, x: &[f64]) -> f64 {
        dot(x, self.theta_star())
    }

    pub fn reward(&self, x: &[f64], rng: &mut RngStream) -> RewardSample {
        RewardSample {
            value: self.mean_reward(x) + standard_normal(rng),
        }
    }

    /// Optimal arm under the true parameter, lowest index on ties.
    pub fn optimal_arm(&self, ds: &DecisionSet) -> usize {
        argmax_first(ds.arms().map(|x| self.mean_reward(x)))
    }

    /// Gap between the best and the runner-up arm's mean reward.
    pub fn min_gap(&self, ds: &DecisionSet) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for x in ds.arms() {
            let m = self.mean_reward(x);
            if m > best {
                second = best;
                best = m;
            } else if m > second {
                second = m;
            }
        }
        best - second
    }

    pub fn instantaneous_regret(&self, ds: &DecisionSet, chosen: usize) -> f64 {
        let best = ds
            .arms()
            .map(|x| self.mean_reward(x))
            .fold(f64::NEG_INFINITY, f64::max);
        (best - self.mean_reward(ds.arm(chosen))).max(0.0)
    }
}

/// Per-client maps `R_i diag(s)` with `R_i` a random rotation and `s`
/// decreasing linearly from 1 to 1/2; all singular values are at most one,
/// so mapped unit-ball draws stay in the unit ball.
fn client_transforms(d: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let root = RngStream::new(seed);
    let scales: Vec<f64> = (0..d)
        .map(|k| {
            if d == 1 {
                1.0
            } else {
                1.0 - 0.5 * k as f64 / (d - 1) as f64
            }
        })
        .collect();
    (0..m)
        .map(|i| {
            let mut rng = root.derive(&format!("client/{i}/transform"));
            let rot = random_rotation(d, &mut rng);
            let mut out = vec![0.0; d * d];
            for r in 0..d {
                for c in 0..d {
                    out[r * d + c] = rot[r * d + c] * scales[c];
                }
            }
            out
        })
        .collect()
}

/// Orthogonal matrix from Gram–Schmidt on a Gaussian matrix (row-major).
fn random_rotation(d: usize, rng: &mut RngStream) -> Vec<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
        for c in &cols {
            let p = dot(&v, c);
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
        }
        let n = norm(&v);
        if n > 1e-8 {
            v.iter_mut().for_each(|a| *a /= n);
            cols.push(v);
        }
    }
    let mut out = vec![0.0; d * d];
    for (c, col) in cols.iter().enumerate() {
        for r in 0..d {
            out[r * d + c] = col[r];
        }
    }
    out
}
