use rand::Rng;

use crate::error::{Error, Result};
use crate::numkit::{norm, sample_uniform_sphere, RngStream};

use super::{
    estimate_margin_constant, estimate_min_eig_optimal, Instance, InstanceDoc, InstanceKind,
    InstanceMeta, DEFAULT_EPS_GRID,
};

/// Monte-Carlo effort spent on the `λ0` / `C0` estimates stored in
/// [`InstanceMeta`].
#[derive(Debug, Clone)]
pub struct GeneratorOptions {
    pub lambda_samples: usize,
    pub margin_samples: usize,
    pub eps_grid: Vec<f64>,
    pub max_attempts: usize,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self {
            lambda_samples: 20_000,
            margin_samples: 20_000,
            eps_grid: DEFAULT_EPS_GRID.to_vec(),
            max_attempts: 50,
        }
    }
}

impl GeneratorOptions {
    /// Low-effort settings for unit tests.
    pub fn fast() -> Self {
        Self {
            lambda_samples: 2_000,
            margin_samples: 2_000,
            ..Self::default()
        }
    }
}

/// `θ*` uniform on the unit sphere; per-client context transforms are
/// redrawn until every client's optimal-arm Gram matrix has
/// `λ_min >= 0.02 / d`.
pub fn make_diverse_margin_instance(
    d: usize,
    num_arms: usize,
    num_clients: usize,
    gap_floor: f64,
    rng: &RngStream,
    opts: &GeneratorOptions,
) -> Result<Instance> {
    if num_arms < 2 {
        return Err(Error::param("DiverseMargin needs at least two arms"));
    }
    let theta_star = sample_uniform_sphere(&mut rng.derive("theta"), d, 1.0)?;
    let floor = 0.02 / d as f64;
    for attempt in 0..opts.max_attempts {
        let context_seed = rng.derive(&format!("context/{attempt}")).seed();
        let mut inst = Instance::from_doc(InstanceDoc {
            d,
            num_arms,
            num_clients,
            kind: InstanceKind::DiverseMargin,
            theta_star: theta_star.clone(),
            meta: InstanceMeta {
                context_seed: Some(context_seed),
                gap_floor: (gap_floor > 0.0).then_some(gap_floor),
                ..Default::default()
            },
        })?;
        let mut lambda0 = f64::INFINITY;
        for client in 0..num_clients {
            let mut s = rng.derive(&format!("lambda/{attempt}/{client}"));
            lambda0 = lambda0.min(estimate_min_eig_optimal(
                &inst,
                client,
                opts.lambda_samples,
                &mut s,
            )?);
            if lambda0 < floor {
                break;
            }
        }
        if lambda0 < floor {
            continue;
        }
        let mut c0: f64 = 0.0;
        for client in 0..num_clients {
            let mut s = rng.derive(&format!("margin/{client}"));
            c0 = c0.max(estimate_margin_constant(
                &inst,
                client,
                &opts.eps_grid,
                opts.margin_samples,
                &mut s,
            )?);
        }
        let meta = inst.meta_mut();
        meta.lambda0 = Some(lambda0);
        meta.c0 = Some(c0);
        return Ok(inst);
    }
    Err(Error::param(format!(
        "no context law with λ0 >= {floor:.4} found in {} attempts",
        opts.max_attempts
    )))
}

/// Every 2-block of `θ*` uniform on the circle of radius `r`.
pub fn make_sphere_hard_instance(
    d: usize,
    num_clients: usize,
    r: f64,
    rng: &RngStream,
    opts: &GeneratorOptions,
) -> Result<Instance> {
    if d == 0 || !d.is_multiple_of(2) {
        return Err(Error::param("SphereHard needs an even dimension"));
    }
    if !(r > 0.0 && r <= 1.0 / (d as f64).sqrt()) {
        return Err(Error::param(format!(
            "sphere radius {r} outside (0, 1/sqrt(d)]"
        )));
    }
    let mut theta_rng = rng.derive("theta");
    let mut theta_star = Vec::with_capacity(d);
    for _ in 0..d / 2 {
        theta_star.extend(sample_uniform_sphere(&mut theta_rng, 2, r)?);
    }
    let mut inst = Instance::from_doc(InstanceDoc {
        d,
        num_arms: 2,
        num_clients,
        kind: InstanceKind::SphereHard,
        theta_star,
        meta: InstanceMeta {
            sphere_radius: Some(r),
            ..Default::default()
        },
    })?;
    // all clients share one context law
    let lambda0 =
        estimate_min_eig_optimal(&inst, 0, opts.lambda_samples, &mut rng.derive("lambda"))?;
    let c0 = estimate_margin_constant(
        &inst,
        0,
        &opts.eps_grid,
        opts.margin_samples,
        &mut rng.derive("margin"),
    )?;
    let meta = inst.meta_mut();
    meta.lambda0 = Some(lambda0);
    meta.c0 = Some(c0);
    Ok(inst)
}

/// Two fixed arms per client; `θ* = (±1, ±1)/√2`.
pub fn make_axis_instance(num_clients: usize, rng: &RngStream) -> Result<Instance> {
    let mut signs = rng.derive("theta");
    let theta_star: Vec<f64> = (0..2)
        .map(|_| if signs.random::<bool>() { 1.0 } else { -1.0 } / 2f64.sqrt())
        .collect();
    debug_assert!((norm(&theta_star) - 1.0).abs() < 1e-12);
    let mut inst = Instance::from_doc(InstanceDoc {
        d: 2,
        num_arms: 2,
        num_clients,
        kind: InstanceKind::AxisNecessity,
        theta_star,
        meta: InstanceMeta::default(),
    })?;
    // contexts are deterministic, so small sample counts are exact
    let clients: Vec<usize> = if num_clients > 1 { vec![0, 1] } else { vec![0] };
    let mut lambda0 = f64::INFINITY;
    let mut c0: f64 = 0.0;
    for &c in &clients {
        lambda0 = lambda0.min(estimate_min_eig_optimal(
            &inst,
            c,
            1000,
            &mut rng.derive("lambda"),
        )?);
        c0 = c0.max(estimate_margin_constant(
            &inst,
            c,
            &DEFAULT_EPS_GRID,
            1000,
            &mut rng.derive("margin"),
        )?);
    }
    let meta = inst.meta_mut();
    meta.lambda0 = Some(lambda0);
    meta.c0 = Some(c0);
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diverse_margin_meets_floor() {
        let inst = make_diverse_margin_instance(
            4,
            8,
            5,
            0.0,
            &RngStream::new(3),
            &GeneratorOptions::fast(),
        )
        .unwrap();
        let l = inst.meta().lambda0.unwrap();
        assert!(l >= 0.02 / 4.0, "{l}");
        assert!((norm(inst.theta_star()) - 1.0).abs() < 1e-12);
        assert!(inst.meta().c0.unwrap().is_finite());
        let mut rng = RngStream::new(1);
        for c in 0..5 {
            for _ in 0..200 {
                let ds = inst.sample_context(c, &mut rng);
                assert!(ds.arms().all(|x| norm(x) <= 1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn gap_floor_is_enforced() {
        let inst = make_diverse_margin_instance(
            3,
            4,
            2,
            0.1,
            &RngStream::new(3),
            &GeneratorOptions::fast(),
        )
        .unwrap();
        let mut rng = RngStream::new(2);
        for _ in 0..500 {
            let ds = inst.sample_context(1, &mut rng);
            assert!(inst.min_gap(&ds) >= 0.1);
        }
    }

    #[test]
    fn sphere_hard_blocks() {
        let d = 8;
        let r = 0.25;
        let inst =
            make_sphere_hard_instance(d, 2, r, &RngStream::new(4), &GeneratorOptions::fast())
                .unwrap();
        for block in inst.theta_star().chunks(2) {
            assert!((norm(block) - r).abs() < 1e-12);
        }
        assert!((norm(inst.theta_star()) - r * (d as f64 / 2.0).sqrt()).abs() < 1e-12);
        assert!(make_sphere_hard_instance(
            4,
            2,
            0.51,
            &RngStream::new(4),
            &GeneratorOptions::fast()
        )
        .is_err());
        assert!(make_sphere_hard_instance(
            5,
            2,
            0.1,
            &RngStream::new(4),
            &GeneratorOptions::fast()
        )
        .is_err());
    }

    #[test]
    fn axis_meta() {
        let inst = make_axis_instance(10, &RngStream::new(8)).unwrap();
        assert_eq!(inst.meta().lambda0, Some(0.0));
        assert!((norm(inst.theta_star()) - 1.0).abs() < 1e-12);
    }
}
