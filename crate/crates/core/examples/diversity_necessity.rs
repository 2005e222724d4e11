//! Client 0 only ever sees the first axis, every other client only the
//! second. The optimal-arm Gram matrix of each client is singular, and the
//! first coordinate of the shared parameter is known to a single client,
//! so any user-level private broadcast has to hide it. Exact averaging
//! recovers it without trouble.
//!
//! cargo run --release --example diversity_necessity

use fedbandit::dp::PrivacyParams;
use fedbandit::env::{estimate_min_eig_optimal, make_axis_instance};
use fedbandit::numkit::RngStream;
use fedbandit::sim::{run_episode, Algorithm, Overrides, RunConfig};

fn main() -> fedbandit::Result<()> {
    let inst = make_axis_instance(10, &RngStream::new(4))?;
    for client in [0, 1] {
        let lam =
            estimate_min_eig_optimal(&inst, client, 5_000, &mut RngStream::new(client as u64))?;
        println!("client {client}: lambda_min of optimal-arm Gram matrix = {lam:.2e}");
    }
    let t = 1 << 12;
    for algorithm in [
        Algorithm::Robin,
        Algorithm::NonPrivateAvg,
        Algorithm::LocalOnly,
    ] {
        let cfg = RunConfig {
            algorithm,
            m: 10,
            t,
            privacy: PrivacyParams::new(1.0, 1e-5)?,
            beta: 0.1,
            seed: 1,
            overrides: Overrides {
                u: Some(6),
                lambda0: Some(0.25),
                ..Overrides::default()
            },
        };
        let res = run_episode(&cfg, &inst)?;
        println!(
            "{algorithm:>16}: final regret {:>8.1} = {:.3} x M T",
            res.final_regret(),
            res.final_regret() / (10 * t) as f64
        );
    }
    Ok(())
}
