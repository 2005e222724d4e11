//! Margin constants of the sphere construction shrink the block radius `r`
//! and the constant `C0` grows like `1/r`.
//!
//! cargo run --release --example hard_instance_margin

use fedbandit::env::{
    estimate_margin_constant, make_sphere_hard_instance, GeneratorOptions, DEFAULT_EPS_GRID,
};
use fedbandit::numkit::RngStream;

fn main() -> fedbandit::Result<()> {
    println!("{:>6} {:>10} {:>10} {:>10}", "r", "C0", "r * C0", "lambda0");
    for r in [0.025, 0.05, 0.1, 0.2, 0.4] {
        let root = RngStream::new(5).derive(&format!("r/{r}"));
        let inst = make_sphere_hard_instance(4, 1, r, &root, &GeneratorOptions::fast())?;
        let c0 = estimate_margin_constant(
            &inst,
            0,
            &DEFAULT_EPS_GRID,
            100_000,
            &mut root.derive("margin"),
        )?;
        println!(
            "{r:>6} {c0:>10.3} {:>10.3} {:>10.4}",
            r * c0,
            inst.meta().lambda0.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
