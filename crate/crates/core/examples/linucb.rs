//! A single LinUCB learner on one client of a generated instance. Prints
//! cumulative regret at powers of two and the final estimate error.
//!
//! cargo run --release --example linucb

use fedbandit::bandit::{compute_alpha, LinUcbState};
use fedbandit::env::{make_diverse_margin_instance, DecisionSet, GeneratorOptions};
use fedbandit::numkit::{dist, RngStream};

fn main() -> fedbandit::Result<()> {
    let root = RngStream::new(3);
    let inst = make_diverse_margin_instance(
        5,
        10,
        1,
        0.0,
        &root.derive("instance"),
        &GeneratorOptions::fast(),
    )?;
    let horizon: u32 = 1 << 14;
    let alpha = compute_alpha(1, 0.1, horizon as f64, inst.d());
    let mut learner = LinUcbState::new(inst.d(), alpha);

    let mut ctx = root.derive("context");
    let mut noise = root.derive("reward");
    let mut ds = DecisionSet::new(inst.d());
    let mut regret = 0.0;
    println!("alpha = {alpha:.3}");
    for t in 1..=horizon {
        inst.sample_context_into(0, &mut ctx, &mut ds);
        let a = learner.select(&ds)?;
        regret += inst.instantaneous_regret(&ds, a);
        let r = inst.reward(ds.arm(a), &mut noise).value;
        learner.update(ds.arm(a), r);
        if t.is_power_of_two() && t >= 64 {
            println!(
                "t = {t:>6}  regret = {regret:>8.2}  regret/log2(t) = {:>6.2}",
                regret / (t as f64).log2()
            );
        }
    }
    let theta = learner.ridge_estimate()?;
    println!("‖θ̂ - θ*‖ = {:.4}", dist(&theta, inst.theta_star()));
    Ok(())
}
