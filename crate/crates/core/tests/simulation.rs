use rand::Rng;

use fedbandit::bandit::{Federation, RobinFederation, Traffic};
use fedbandit::dp::{compose_advanced, robin_budget, PrivacyParams};
use fedbandit::env::{
    make_diverse_margin_instance, make_sphere_hard_instance, DecisionSet, GeneratorOptions,
    Instance,
};
use fedbandit::numkit::{norm, RngStream};
use fedbandit::sim::{
    median, run_episode, run_episode_traced, simulate, sweep, Algorithm, Overrides, RunConfig,
    SweepAxis,
};

fn diverse(m: usize, seed: u64) -> Instance {
    make_diverse_margin_instance(
        4,
        8,
        m,
        0.0,
        &RngStream::new(seed),
        &GeneratorOptions::fast(),
    )
    .unwrap()
}

fn sphere(m: usize) -> Instance {
    make_sphere_hard_instance(4, m, 0.2, &RngStream::new(3), &GeneratorOptions::fast()).unwrap()
}

fn config(algorithm: Algorithm, m: usize, t: usize, seed: u64) -> RunConfig {
    RunConfig {
        algorithm,
        m,
        t,
        privacy: PrivacyParams::new(1.0, 1e-5).unwrap(),
        beta: 0.1,
        seed,
        overrides: Overrides {
            u: Some(3),
            ..Overrides::default()
        },
    }
}

/// Plays `argmax xᵀθ*` with knowledge of the truth.
struct Oracle {
    m: usize,
    theta: Vec<f64>,
}

/// Picks an arm uniformly at random.
struct Uniform {
    m: usize,
    rng: RngStream,
}

impl Federation for Oracle {
    fn num_clients(&self) -> usize {
        self.m
    }
    fn begin_phase(&mut self, _: u32) -> fedbandit::Result<()> {
        Ok(())
    }
    fn select(&mut self, _: usize, ds: &DecisionSet) -> fedbandit::Result<usize> {
        let vals: Vec<f64> = ds
            .arms()
            .map(|x| fedbandit::numkit::dot(x, &self.theta))
            .collect();
        Ok((0..vals.len()).fold(0, |b, i| if vals[i] > vals[b] { i } else { b }))
    }
    fn observe(&mut self, _: usize, _: &[f64], _: f64) {}
    fn end_phase(
        &mut self,
        _: u32,
        _: usize,
        _: bool,
        _: &mut RngStream,
    ) -> fedbandit::Result<Vec<Traffic>> {
        Ok(Vec::new())
    }
}

impl Federation for Uniform {
    fn num_clients(&self) -> usize {
        self.m
    }
    fn begin_phase(&mut self, _: u32) -> fedbandit::Result<()> {
        Ok(())
    }
    fn select(&mut self, _: usize, ds: &DecisionSet) -> fedbandit::Result<usize> {
        Ok(self.rng.random_range(0..ds.len()))
    }
    fn observe(&mut self, _: usize, _: &[f64], _: f64) {}
    fn end_phase(
        &mut self,
        _: u32,
        _: usize,
        _: bool,
        _: &mut RngStream,
    ) -> fedbandit::Result<Vec<Traffic>> {
        Ok(Vec::new())
    }
}

#[test]
fn oracle_policy_has_zero_regret() {
    let inst = diverse(3, 1);
    let cfg = config(Algorithm::LocalOnly, 3, 500, 9);
    let resolved = cfg.resolve(&inst).unwrap();
    let mut oracle = Oracle {
        m: 3,
        theta: inst.theta_star().to_vec(),
    };
    let trace = simulate(&cfg, resolved, &inst, &mut oracle).unwrap();
    assert_eq!(trace.result.cumulative_regret.len(), 500);
    assert!(trace.result.cumulative_regret.iter().all(|&r| r == 0.0));
}

#[test]
fn uniform_policy_matches_gap_oracle() {
    let inst = sphere(1);
    let rounds = 10_000;
    let cfg = config(Algorithm::LocalOnly, 1, rounds, 4);
    let resolved = cfg.resolve(&inst).unwrap();
    let mut uniform = Uniform {
        m: 1,
        rng: RngStream::new(5),
    };
    let res = simulate(&cfg, resolved, &inst, &mut uniform)
        .unwrap()
        .result;
    let per_round: Vec<f64> = std::iter::once(res.cumulative_regret[0])
        .chain(res.cumulative_regret.windows(2).map(|w| w[1] - w[0]))
        .collect();
    let mean = per_round.iter().sum::<f64>() / rounds as f64;
    let var = per_round.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (rounds - 1) as f64;

    // expected regret per round is E[gap] / 2, estimated on independent draws
    let n = 200_000;
    let mut rng = RngStream::new(6);
    let mut ds = DecisionSet::new(4);
    let gaps: Vec<f64> = (0..n)
        .map(|_| {
            inst.sample_context_into(0, &mut rng, &mut ds);
            inst.min_gap(&ds) / 2.0
        })
        .collect();
    let g = gaps.iter().sum::<f64>() / n as f64;
    let gvar = gaps.iter().map(|x| (x - g).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / rounds as f64 + gvar / n as f64).sqrt();
    assert!(
        (mean - g).abs() <= 3.0 * se,
        "empirical {mean} vs oracle {g} (se {se})"
    );
}

#[test]
fn runs_are_reproducible() {
    let inst = diverse(4, 2);
    for algorithm in [
        Algorithm::Robin,
        Algorithm::LocalOnly,
        Algorithm::NonPrivateAvg,
    ] {
        let cfg = config(algorithm, 4, 300, 17);
        let a = serde_json::to_string(&run_episode(&cfg, &inst).unwrap()).unwrap();
        let b = serde_json::to_string(&run_episode(&cfg, &inst).unwrap()).unwrap();
        assert_eq!(a, b, "{algorithm}");
    }
    let other = run_episode(&config(Algorithm::Robin, 4, 300, 18), &inst).unwrap();
    let base = run_episode(&config(Algorithm::Robin, 4, 300, 17), &inst).unwrap();
    assert_ne!(other.cumulative_regret, base.cumulative_regret);
}

#[test]
fn regret_is_conserved_and_monotone() {
    let inst = diverse(3, 3);
    let res = run_episode(&config(Algorithm::Robin, 3, 1000, 1), &inst).unwrap();
    assert!(res.cumulative_regret.windows(2).all(|w| w[1] >= w[0]));
    let played: usize = res.phase_diag.iter().map(|p| p.len).sum();
    assert_eq!(played, 1000);
    // phases 1..8 fill 510 rounds, phase 9 has the remaining 490
    assert_eq!(res.phase_diag.len(), 9);
    assert!(!res.phase_diag[8].complete);
}

#[test]
fn aggregation_count_and_budget() {
    let inst = diverse(5, 4);
    let cfg = config(Algorithm::Robin, 5, 2000, 2);
    let trace = run_episode_traced(&cfg, &inst).unwrap();
    let res = &trace.result;
    let u = res.resolved.u.unwrap();
    let aggregations = res
        .phase_diag
        .iter()
        .filter(|p| p.complete && p.phase >= u)
        .count();
    let broadcasts = trace
        .traffic
        .iter()
        .filter(|t| matches!(t, Traffic::Broadcast(_)))
        .count();
    assert_eq!(broadcasts, aggregations);
    let split = robin_budget(cfg.privacy, res.resolved.phases).unwrap();
    let want = compose_advanced(
        split.eps_phase,
        split.delta_phase,
        aggregations as u32,
        cfg.privacy.delta / 2.0,
    );
    let last = res.phase_diag.last().unwrap();
    assert_eq!(
        (last.eps_spent, last.delta_spent),
        (want.epsilon, want.delta)
    );
    assert!(last.eps_spent <= cfg.privacy.epsilon && last.delta_spent <= cfg.privacy.delta);
    assert!(res
        .phase_diag
        .windows(2)
        .all(|w| w[1].eps_spent >= w[0].eps_spent));
    for p in &res.phase_diag {
        assert_eq!(p.global_est_error.is_nan(), !(p.complete && p.phase >= u));
    }
}

#[test]
fn traffic_carries_only_estimates() {
    let inst = diverse(4, 5);
    let cfg = config(Algorithm::Robin, 4, 1000, 3);
    let trace = run_episode_traced(&cfg, &inst).unwrap();
    let u = trace.result.resolved.u.unwrap();
    let mut uploads = std::collections::BTreeMap::new();
    for t in &trace.traffic {
        match t {
            Traffic::Upload(m) => {
                assert!(m.phase >= u);
                assert!(norm(&m.theta_tilde) <= 1.0 + 1e-12);
                assert_eq!(m.theta_tilde.len(), 4);
                *uploads.entry(m.phase).or_insert(0) += 1;
            }
            Traffic::Broadcast(b) => assert_eq!(b.theta_hat.len(), 4),
        }
    }
    assert!(uploads.values().all(|&n| n == 4));
    // serialized traffic holds message fields only: ids, phases and vectors
    let json = serde_json::to_value(&trace.traffic).unwrap();
    for msg in json.as_array().unwrap() {
        let (_, body) = msg.as_object().unwrap().iter().next().unwrap();
        let mut keys: Vec<&str> = body
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        keys.sort();
        assert!(
            keys == ["client", "phase", "theta_tilde"] || keys == ["phase", "theta_hat"],
            "{keys:?}"
        );
    }
}

#[test]
fn greedy_phase_gram_is_that_phase_only() {
    let inst = diverse(2, 6);
    let cfg = config(Algorithm::NonPrivateAvg, 2, 2000, 7);
    let resolved = cfg.resolve(&inst).unwrap();
    let mut fed = RobinFederation::non_private(fedbandit::bandit::RobinParams {
        d: 4,
        m: 2,
        phases: resolved.phases,
        u: 3,
        alpha: resolved.alpha,
        beta: 0.1,
        c1: resolved.c1.unwrap(),
        split: robin_budget(cfg.privacy, resolved.phases).unwrap(),
        aggregator: fedbandit::bandit::Aggregator::ExactMean,
    });
    let mut rng = RngStream::new(1);
    let mut ds = DecisionSet::new(4);
    for p in 1..=6u32 {
        fed.begin_phase(p).unwrap();
        let mut gram = fedbandit::numkit::SymMat::zeros(4);
        for _ in 0..(1usize << p) {
            for i in 0..2 {
                inst.sample_context_into(i, &mut rng, &mut ds);
                let a = fed.select(i, &ds).unwrap();
                if i == 0 {
                    gram.add_outer(ds.arm(a), 1.0);
                }
                fed.observe(i, ds.arm(a), 0.0);
            }
        }
        if p > 3 {
            let held = fed.client_gram(0).unwrap();
            let diff: f64 = held
                .as_slice()
                .iter()
                .zip(gram.as_slice())
                .map(|(a, b)| (a - b).abs())
                .sum();
            assert!(diff < 1e-12, "phase {p}");
        }
        fed.end_phase(p, 1 << p, true, &mut rng).unwrap();
    }
}

#[test]
fn local_only_scales_with_clients() {
    let inst = sphere(8);
    let run = |m: usize, seed: u64| {
        let mut cfg = config(Algorithm::LocalOnly, m, 2000, seed);
        cfg.overrides.alpha = Some(1.5);
        run_episode(&cfg, &inst).unwrap().final_regret()
    };
    let seeds: Vec<u64> = (1..=10).collect();
    let many: f64 = seeds.iter().map(|&s| run(8, s)).sum();
    let single: f64 = seeds.iter().map(|&s| run(1, s)).sum();
    let ratio = many / single;
    assert!((0.8 * 8.0..=1.2 * 8.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn non_private_single_client_is_phased_greedy() {
    // With one client the exact mean is that client's own estimate.
    let inst = diverse(1, 7);
    let cfg = config(Algorithm::NonPrivateAvg, 1, 600, 8);
    let trace = run_episode_traced(&cfg, &inst).unwrap();
    let mut last_upload = None;
    for t in &trace.traffic {
        match t {
            Traffic::Upload(m) => last_upload = Some(m.theta_tilde.clone()),
            Traffic::Broadcast(b) => assert_eq!(Some(b.theta_hat.clone()), last_upload),
        }
    }
}

#[test]
fn non_private_error_shrinks_with_more_clients() {
    let inst = diverse(32, 8);
    let err = |m: usize| {
        let errs: Vec<f64> = (1..=9u64)
            .map(|seed| {
                let res =
                    run_episode(&config(Algorithm::NonPrivateAvg, m, 1000, seed), &inst).unwrap();
                res.phase_diag
                    .iter()
                    .rev()
                    .find(|p| !p.global_est_error.is_nan())
                    .unwrap()
                    .global_est_error
            })
            .collect();
        median(&errs)
    };
    let (e8, e16, e32) = (err(8), err(16), err(32));
    assert!(e16 < e8 && e32 < e16, "{e8} {e16} {e32}");
}

#[test]
fn robin_recovers_theta_with_huge_budget() {
    // with ε large enough the private aggregate tracks the exact mean
    let inst = diverse(16, 9);
    let mut cfg = config(Algorithm::Robin, 16, 4000, 1);
    cfg.privacy.epsilon = 1e9;
    let res = run_episode(&cfg, &inst).unwrap();
    let exact = run_episode(&config(Algorithm::NonPrivateAvg, 16, 4000, 1), &inst).unwrap();
    let last = |r: &fedbandit::sim::RunResult| {
        r.phase_diag
            .iter()
            .rev()
            .find(|p| !p.global_est_error.is_nan())
            .unwrap()
            .global_est_error
    };
    assert!(last(&res) < 0.2, "{}", last(&res));
    assert!((last(&res) - last(&exact)).abs() < 0.1);
}

#[test]
fn sweep_matches_single_runs_in_any_order() {
    let inst = diverse(4, 10);
    let base = config(Algorithm::Robin, 4, 500, 0);
    let one = sweep(&base, &inst, SweepAxis::Epsilon, &[0.5], &[3]).unwrap();
    let mut cfg = base.clone();
    cfg.seed = 3;
    cfg.privacy.epsilon = 0.5;
    let direct = run_episode(&cfg, &inst).unwrap();
    assert_eq!(one[0].result.cumulative_regret, direct.cumulative_regret);

    let values = [0.5, 1.0, 2.0];
    let seeds = [1, 2, 3];
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = serial
        .install(|| sweep(&base, &inst, SweepAxis::Epsilon, &values, &seeds))
        .unwrap();
    let b = parallel
        .install(|| sweep(&base, &inst, SweepAxis::Epsilon, &values, &seeds))
        .unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.value, x.seed), (y.value, y.seed));
        assert_eq!(x.result.cumulative_regret, y.result.cumulative_regret);
    }
    let m_axis = sweep(&base, &inst, SweepAxis::M, &[2.0, 4.0], &[1]).unwrap();
    assert_eq!(m_axis[0].result.m, 2);
    assert!(sweep(&base, &inst, SweepAxis::T, &[10.5], &[1]).is_err());
    assert!(sweep(&base, &inst, SweepAxis::T, &[], &[1]).is_err());
}

#[test]
fn epsilon_sweep_regret_is_nonincreasing() {
    let inst = diverse(10, 11);
    let base = config(Algorithm::Robin, 10, 1 << 10, 0);
    let values = [0.25, 0.5, 1.0, 2.0];
    let seeds: Vec<u64> = (1..=20).collect();
    let cells = sweep(&base, &inst, SweepAxis::Epsilon, &values, &seeds).unwrap();
    let medians: Vec<f64> = values
        .iter()
        .map(|&v| {
            median(
                &cells
                    .iter()
                    .filter(|c| c.value == v)
                    .map(|c| c.result.final_regret())
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let inversions = medians.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(inversions <= 1, "medians {medians:?}");
}

#[test]
fn bad_configs_fail_before_running() {
    let inst = diverse(2, 12);
    let mut cfg = config(Algorithm::Robin, 3, 100, 1);
    assert!(run_episode(&cfg, &inst).is_err());
    cfg.m = 2;
    cfg.t = 1;
    assert!(run_episode(&cfg, &inst).is_err());
    cfg.t = 100;
    cfg.beta = 1.5;
    assert!(run_episode(&cfg, &inst).is_err());
    let axis = fedbandit::env::make_axis_instance(2, &RngStream::new(1)).unwrap();
    let cfg = config(Algorithm::Robin, 2, 100, 1);
    assert!(matches!(
        run_episode(&cfg, &axis),
        Err(fedbandit::Error::Config(_))
    ));
    let mut ok = cfg.clone();
    ok.overrides.lambda0 = Some(0.25);
    assert!(run_episode(&ok, &axis).is_ok());
}
