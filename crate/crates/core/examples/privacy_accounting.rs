//! How a total (ε, δ) budget is split over phases, and what advanced
//! composition gives back.
//!
//! cargo run --example privacy_accounting

use fedbandit::dp::{compose_advanced, robin_budget, verify_robin_budget, PrivacyParams};

fn main() -> fedbandit::Result<()> {
    println!(
        "{:>5} {:>6} {:>4} {:>10} {:>10} {:>10} {:>10} ok",
        "eps", "delta", "P", "eps0", "composed", "simple", "delta_tot"
    );
    for eps in [0.25, 1.0, 4.0] {
        for delta in [1e-5, 1e-6] {
            for p in [4u32, 8, 14, 20] {
                let split = robin_budget(PrivacyParams::new(eps, delta)?, p)?;
                let c = verify_robin_budget(&split);
                println!(
                    "{eps:>5} {delta:>6.0e} {p:>4} {:>10.5} {:>10.5} {:>10.5} {:>10.3e} {}",
                    split.eps_phase, c.eps_composed, c.eps_simplified, c.delta_composed, c.holds
                );
            }
        }
    }

    println!("\nbudget spent after k of 14 phases (eps = 1, delta = 1e-5):");
    let split = robin_budget(PrivacyParams::new(1.0, 1e-5)?, 14)?;
    for k in [1, 2, 4, 8, 14] {
        let s = split.spent_after(k);
        println!("  k = {k:>2}: ({:.4}, {:.2e})", s.epsilon, s.delta);
    }
    let naive = compose_advanced(split.eps_phase, split.delta_phase, 14, 5e-6);
    println!(
        "  same via compose_advanced: ({:.4}, {:.2e})",
        naive.epsilon, naive.delta
    );
    Ok(())
}
