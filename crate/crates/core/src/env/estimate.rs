//! Monte-Carlo checks of the diversity and margin conditions.

use crate::error::{Error, Result};
use crate::numkit::{min_eigenvalue, RngStream, SymMat};

use super::{DecisionSet, Instance};

/// Margin grid used by the generators and `check-instance`.
pub const DEFAULT_EPS_GRID: [f64; 9] = [0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5];

/// `λ_min((1/n) Σ x* x*ᵀ)` over `n` context draws for `client`, where `x*`
/// is the optimal arm's feature under the true parameter.
pub fn estimate_min_eig_optimal(
    inst: &Instance,
    client: usize,
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if n_samples < 1000 {
        return Err(Error::param(
            "estimate_min_eig_optimal needs at least 1000 samples",
        ));
    }
    if client >= inst.num_clients() {
        return Err(Error::param("client index out of range"));
    }
    optimal_gram_min_eig(inst.d(), inst.theta_star(), n_samples, |ds| {
        inst.sample_context_into(client, rng, ds)
    })
}

fn optimal_gram_min_eig(
    d: usize,
    theta: &[f64],
    n_samples: usize,
    mut draw: impl FnMut(&mut DecisionSet),
) -> Result<f64> {
    let mut gram = SymMat::zeros(d);
    let mut ds = DecisionSet::new(d);
    for _ in 0..n_samples {
        draw(&mut ds);
        let best = super::argmax_first(ds.arms().map(|x| crate::numkit::dot(x, theta)));
        gram.add_outer(ds.arm(best), 1.0 / n_samples as f64);
    }
    min_eigenvalue(&gram)
}

/// `max_ε P[gap <= ε] / ε` over `eps_grid`, where `gap` is the difference
/// between the best and runner-up mean reward of a context draw.
pub fn estimate_margin_constant(
    inst: &Instance,
    client: usize,
    eps_grid: &[f64],
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::param("eps_grid must be nonempty and positive"));
    }
    if eps_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::param("eps_grid must be sorted"));
    }
    if n_samples == 0 || client >= inst.num_clients() {
        return Err(Error::param("need n_samples > 0 and a valid client"));
    }
    let mut counts = vec![0usize; eps_grid.len()];
    let mut ds = DecisionSet::new(inst.d());
    for _ in 0..n_samples {
        inst.sample_context_into(client, rng, &mut ds);
        let gap = inst.min_gap(&ds);
        // grid is sorted: every ε from the first one >= gap onwards counts
        let first = eps_grid.partition_point(|e| *e < gap);
        for c in &mut counts[first..] {
            *c += 1;
        }
    }
    Ok(counts
        .iter()
        .zip(eps_grid)
        .map(|(&c, &e)| c as f64 / n_samples as f64 / e)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::make_axis_instance;

    #[test]
    fn axis_client_one_has_rank_one_gram() {
        let inst = make_axis_instance(5, &RngStream::new(1)).unwrap();
        for client in [0, 3] {
            let l = estimate_min_eig_optimal(&inst, client, 2000, &mut RngStream::new(2)).unwrap();
            assert_eq!(l, 0.0);
        }
    }

    #[test]
    fn min_sample_requirement() {
        let inst = make_axis_instance(2, &RngStream::new(1)).unwrap();
        assert!(estimate_min_eig_optimal(&inst, 0, 999, &mut RngStream::new(2)).is_err());
    }

    #[test]
    fn hard_gap_bounds_margin_estimate() {
        // Axis instance: client 1's gap is always |θ1| = 1/√2.
        let inst = make_axis_instance(3, &RngStream::new(4)).unwrap();
        let delta = 1.0 / 2f64.sqrt();
        let below = [0.1, 0.3, 0.5, 0.7];
        let c = estimate_margin_constant(&inst, 0, &below, 5000, &mut RngStream::new(0)).unwrap();
        assert_eq!(c, 0.0);
        assert!(c <= 1.0 / delta);
        // ε above every possible gap: P = 1, contribution exactly 1/ε
        let c = estimate_margin_constant(&inst, 0, &[2.0], 5000, &mut RngStream::new(0)).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
    }

    #[test]
    fn margin_grid_validation() {
        let inst = make_axis_instance(2, &RngStream::new(1)).unwrap();
        let mut rng = RngStream::new(0);
        assert!(estimate_margin_constant(&inst, 0, &[], 10, &mut rng).is_err());
        assert!(estimate_margin_constant(&inst, 0, &[0.2, 0.1], 10, &mut rng).is_err());
        assert!(estimate_margin_constant(&inst, 0, &[0.0], 10, &mut rng).is_err());
    }

    #[test]
    fn unit_feature_single_direction() {
        // d = 1, one arm with φ = 1 (padded with a second identical arm): Gram = 1.
        let l = optimal_gram_min_eig(1, &[0.5], 1000, |ds| {
            *ds = DecisionSet::from_arms(&[vec![1.0], vec![1.0]]).unwrap();
        })
        .unwrap();
        assert!((l - 1.0).abs() < 1e-12);
    }
}
