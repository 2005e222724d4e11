//! Samplers used by the environments and the privacy mechanisms.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[cfg(test)]
thread_local! {
    static ZERO_NOISE: std::cell::Cell<bool> = const { std::cell::Cell::new(false) };
}

/// Runs `f` with the Laplace sampler returning exactly zero on this thread.
/// Only compiled into unit tests.
#[cfg(test)]
pub(crate) fn with_zero_laplace<T>(f: impl FnOnce() -> T) -> T {
    ZERO_NOISE.with(|z| z.set(true));
    let out = f();
    ZERO_NOISE.with(|z| z.set(false));
    out
}

pub fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> Result<f64> {
    if !(sd >= 0.0) || !mean.is_finite() || !sd.is_finite() {
        return Err(Error::param("gaussian needs finite mean and sd >= 0"));
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(mean + sd * z)
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Zero-mean Laplace draw with density `exp(-|x|/scale) / (2 scale)`.
pub fn sample_laplace<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::param(format!(
            "laplace scale must be positive, got {scale}"
        )));
    }
    // Inverse CDF; u = -0.5 would map to -inf.
    let u = loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        if u != -0.5 {
            break u;
        }
    };
    #[cfg(test)]
    if ZERO_NOISE.with(|z| z.get()) {
        return Ok(0.0);
    }
    Ok(-scale * u.signum() * (1.0 - 2.0 * u.abs()).ln())
}

/// Uniform draw on the sphere of the given radius in `R^dim`.
pub fn sample_uniform_sphere<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    radius: f64,
) -> Result<Vec<f64>> {
    if dim == 0 || !(radius > 0.0) {
        return Err(Error::param(
            "sphere sampling needs dim >= 1 and radius > 0",
        ));
    }
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let n = crate::numkit::norm(&v);
        if n > 1e-300 {
            v.iter_mut().for_each(|x| *x *= radius / n);
            return Ok(v);
        }
    }
}

/// Uniform draw in the closed ball of the given radius.
pub fn sample_uniform_ball<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    radius: f64,
) -> Result<Vec<f64>> {
    let mut v = sample_uniform_sphere(rng, dim, 1.0)?;
    let rho = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    v.iter_mut().for_each(|x| *x *= rho);
    Ok(v)
}

/// `N(0, I_dim)` conditioned on `‖x‖ <= radius`, by rejection.
pub fn sample_truncated_gaussian_ball<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    radius: f64,
) -> Result<Vec<f64>> {
    if dim == 0 || !(radius > 0.0) {
        return Err(Error::param(
            "truncated gaussian needs dim >= 1 and radius > 0",
        ));
    }
    let r2 = radius * radius;
    loop {
        let v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() <= r2 {
            return Ok(v);
        }
    }
}

/// Index `i` with probability proportional to `exp(logw[i])`. Weights are
/// shifted by their maximum before exponentiating.
pub fn sample_categorical_logweights<R: Rng + ?Sized>(rng: &mut R, logw: &[f64]) -> Result<usize> {
    if logw.is_empty() {
        return Err(Error::param("categorical over an empty set"));
    }
    if logw.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFiniteInput("sample_categorical_logweights"));
    }
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logw.iter().map(|w| (w - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return Ok(i);
        }
    }
    // Rounding can leave target == total; fall back to the last positive weight.
    Ok(weights.iter().rposition(|w| *w > 0.0).unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::RngStream;

    #[test]
    fn laplace_mean_near_zero() {
        let mut rng = RngStream::new(1).derive("laplace");
        let s = 2.0;
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| sample_laplace(&mut rng, s).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 4.0 * s / 1e3, "mean {mean}");
    }

    #[test]
    fn laplace_variance() {
        // Var = 2 scale^2.
        let mut rng = RngStream::new(2);
        let n = 400_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_laplace(&mut rng, 0.5).unwrap())
            .collect();
        let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var - 0.5).abs() < 0.01, "var {var}");
    }

    #[test]
    fn sphere_norm_exact() {
        let mut rng = RngStream::new(3);
        for dim in [1, 2, 5] {
            for _ in 0..1000 {
                let v = sample_uniform_sphere(&mut rng, dim, 0.37).unwrap();
                assert!((crate::numkit::norm(&v) - 0.37).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncated_ball_within_radius() {
        let mut rng = RngStream::new(4);
        for _ in 0..10_000 {
            let v = sample_truncated_gaussian_ball(&mut rng, 2, 1.0).unwrap();
            assert!(crate::numkit::norm(&v) <= 1.0);
        }
    }

    #[test]
    fn categorical_symmetric() {
        let mut rng = RngStream::new(5);
        let n = 1_000_000;
        let zeros = (0..n)
            .filter(|_| sample_categorical_logweights(&mut rng, &[0.0, 0.0]).unwrap() == 0)
            .count();
        let f = zeros as f64 / n as f64;
        assert!((0.497..=0.503).contains(&f), "freq {f}");
    }

    #[test]
    fn categorical_extreme_weights_do_not_overflow() {
        let mut rng = RngStream::new(6);
        for _ in 0..100 {
            assert_eq!(
                sample_categorical_logweights(&mut rng, &[1e6, 0.0]).unwrap(),
                0
            );
            assert_eq!(
                sample_categorical_logweights(&mut rng, &[-1e6, -1e6 + 800.0]).unwrap(),
                1
            );
        }
    }

    #[test]
    fn parameter_validation() {
        let mut rng = RngStream::new(0);
        assert!(sample_laplace(&mut rng, 0.0).is_err());
        assert!(sample_gaussian(&mut rng, 0.0, -1.0).is_err());
        assert!(sample_uniform_sphere(&mut rng, 2, 0.0).is_err());
        assert!(sample_categorical_logweights(&mut rng, &[f64::NAN]).is_err());
        assert!(sample_categorical_logweights(&mut rng, &[]).is_err());
    }

    #[test]
    fn zero_noise_mode() {
        let mut rng = RngStream::new(0);
        let v = with_zero_laplace(|| sample_laplace(&mut rng, 10.0).unwrap());
        assert_eq!(v, 0.0);
        assert_ne!(sample_laplace(&mut rng, 10.0).unwrap(), 0.0);
    }
}
