//! Private means of concentrated data: the 1-D winsorized estimator and
//! the rotated high-dimensional one, against the exact sample mean.
//!
//! cargo run --release --example private_mean

use fedbandit::dp::{highd_error_bound, winsorized_mean_1d, winsorized_mean_highd};
use fedbandit::numkit::{dist, sample_uniform_ball, RngStream};

fn main() -> fedbandit::Result<()> {
    let mut rng = RngStream::new(11);

    let xs: Vec<f64> = (0..500)
        .map(|i| 0.4 + 0.02 * ((i % 7) as f64 - 3.0))
        .collect();
    let exact = xs.iter().sum::<f64>() / xs.len() as f64;
    println!("1-D, M = {}, exact mean {exact:.5}", xs.len());
    for eps in [0.1, 0.5, 1.0, 5.0] {
        let est: Vec<f64> = (0..200)
            .map(|_| winsorized_mean_1d(&xs, 0.05, eps, 1.0, &mut rng))
            .collect::<Result<_, _>>()?;
        let rmse = (est.iter().map(|e| (e - exact).powi(2)).sum::<f64>() / est.len() as f64).sqrt();
        println!("  eps = {eps:<4} rmse = {rmse:.5}");
    }

    let (m, d, r, beta, delta) = (1024, 16, 0.05, 0.05, 1e-6);
    let center = sample_uniform_ball(&mut rng, d, 0.6)?;
    let points: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let e = sample_uniform_ball(&mut rng, d, r)?;
            Ok(center.iter().zip(&e).map(|(c, e)| c + e).collect())
        })
        .collect::<fedbandit::Result<_>>()?;
    let mean: Vec<f64> = (0..d)
        .map(|s| points.iter().map(|p| p[s]).sum::<f64>() / m as f64)
        .collect();
    println!("\n{d}-D, M = {m}, radius {r}");
    for eps in [0.5, 1.0, 4.0] {
        let est = winsorized_mean_highd(&points, r, beta, eps, delta, &mut rng)?;
        println!(
            "  eps = {eps:<4} error = {:.4}  (high-probability bound {:.3})",
            dist(&est, &mean),
            highd_error_bound(d, m, r, beta, eps, delta)
        );
    }
    Ok(())
}
