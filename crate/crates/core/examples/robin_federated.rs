//! Fifty clients share one linear reward model. Runs the private phased
//! protocol next to independent LinUCB learners and the non-private
//! variant, then prints per-phase diagnostics.
//!
//! cargo run --release --example robin_federated -- [seed]

use fedbandit::dp::PrivacyParams;
use fedbandit::env::{make_diverse_margin_instance, GeneratorOptions};
use fedbandit::numkit::RngStream;
use fedbandit::sim::{run_episode, Algorithm, Overrides, RunConfig};

fn main() -> fedbandit::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let inst = make_diverse_margin_instance(
        4,
        8,
        50,
        0.0,
        &RngStream::new(seed).derive("instance"),
        &GeneratorOptions::default(),
    )?;
    println!(
        "instance: d={} K={} M={} lambda0={:.4} C0={:.3}",
        inst.d(),
        inst.num_arms(),
        inst.num_clients(),
        inst.meta().lambda0.unwrap_or(f64::NAN),
        inst.meta().c0.unwrap_or(f64::NAN)
    );

    let base = RunConfig {
        algorithm: Algorithm::Robin,
        m: 50,
        t: 1 << 13,
        privacy: PrivacyParams::new(1.0, 1e-5)?,
        beta: 0.1,
        seed,
        overrides: Overrides {
            u: Some(6),
            ..Overrides::default()
        },
    };
    for algorithm in [
        Algorithm::Robin,
        Algorithm::NonPrivateAvg,
        Algorithm::LocalOnly,
    ] {
        let cfg = RunConfig {
            algorithm,
            ..base.clone()
        };
        let res = run_episode(&cfg, &inst)?;
        println!(
            "\n{algorithm}: final regret {:.1} ({:.2}s)",
            res.final_regret(),
            res.wallclock
        );
        println!(
            "{:>5} {:>5} {:>12} {:>10} {:>10}",
            "phase", "len", "min_eig/len", "est_err", "eps_spent"
        );
        for p in &res.phase_diag {
            println!(
                "{:>5} {:>5} {:>12.4} {:>10.4} {:>10.4}",
                p.phase,
                p.len,
                p.min_eig_min() / p.len as f64,
                p.global_est_error,
                p.eps_spent
            );
        }
    }
    Ok(())
}
