//! Final regret as a function of the privacy budget, several seeds per
//! value, run in parallel through the sweep API.
//!
//! cargo run --release --example epsilon_sweep

use fedbandit::dp::PrivacyParams;
use fedbandit::env::{make_diverse_margin_instance, GeneratorOptions};
use fedbandit::numkit::RngStream;
use fedbandit::sim::{median, sweep, Algorithm, Overrides, RunConfig, SweepAxis};

fn main() -> fedbandit::Result<()> {
    let inst = make_diverse_margin_instance(
        4,
        8,
        20,
        0.0,
        &RngStream::new(9),
        &GeneratorOptions::default(),
    )?;
    let base = RunConfig {
        algorithm: Algorithm::Robin,
        m: 20,
        t: 1 << 11,
        privacy: PrivacyParams::new(1.0, 1e-5)?,
        beta: 0.1,
        seed: 0,
        overrides: Overrides {
            u: Some(5),
            ..Overrides::default()
        },
    };
    let values = [0.5, 2.0, 1e2, 1e4, 1e6, 1e8];
    let seeds: Vec<u64> = (1..=8).collect();
    let cells = sweep(&base, &inst, SweepAxis::Epsilon, &values, &seeds)?;
    println!(
        "{:>8} {:>14} {:>14}",
        "eps", "median regret", "median error"
    );
    for v in values {
        let (regret, err): (Vec<f64>, Vec<f64>) = cells
            .iter()
            .filter(|c| c.value == v)
            .map(|c| {
                let last = c
                    .result
                    .phase_diag
                    .iter()
                    .rev()
                    .find(|p| !p.global_est_error.is_nan());
                (
                    c.result.final_regret(),
                    last.map_or(f64::NAN, |p| p.global_est_error),
                )
            })
            .unzip();
        println!("{v:>8.0e} {:>14.1} {:>14.4}", median(&regret), median(&err));
    }
    Ok(())
}
