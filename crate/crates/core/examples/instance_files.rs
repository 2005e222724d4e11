//! Generate instances, save them as JSON, load them back and re-estimate
//! their constants. The saved files work with `fedbandit check-instance`.
//!
//! cargo run --release --example instance_files -- [dir]

use std::path::PathBuf;

use fedbandit::env::{
    estimate_margin_constant, estimate_min_eig_optimal, make_axis_instance,
    make_diverse_margin_instance, make_sphere_hard_instance, GeneratorOptions, Instance,
    DEFAULT_EPS_GRID,
};
use fedbandit::numkit::RngStream;

fn main() -> fedbandit::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let opts = GeneratorOptions::default();
    let instances = [
        (
            "diverse.json",
            make_diverse_margin_instance(4, 8, 3, 0.0, &RngStream::new(1), &opts)?,
        ),
        (
            "sphere.json",
            make_sphere_hard_instance(4, 3, 0.1, &RngStream::new(2), &opts)?,
        ),
        ("axis.json", make_axis_instance(3, &RngStream::new(3))?),
    ];
    for (name, inst) in instances {
        let path = dir.join(name);
        inst.save(&path)?;
        let loaded = Instance::load(&path)?;
        let mut rng = RngStream::new(0);
        let lam = estimate_min_eig_optimal(&loaded, 0, 20_000, &mut rng)?;
        let c0 = estimate_margin_constant(&loaded, 0, &DEFAULT_EPS_GRID, 20_000, &mut rng)?;
        println!(
            "{} ({:?}): stored lambda0 {:.4}, C0 {:.3}; re-estimated on client 0: {lam:.4}, {c0:.3}",
            path.display(),
            loaded.kind(),
            loaded.meta().lambda0.unwrap_or(f64::NAN),
            loaded.meta().c0.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
