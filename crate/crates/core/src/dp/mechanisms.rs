//! Winsorized private mean estimation.
//!
//! [`private_range`] picks a width-`4r` window with the exponential
//! mechanism; [`winsorized_mean_1d`] clamps to that window and adds Laplace
//! noise; [`winsorized_mean_highd`] applies the 1-D estimator per coordinate
//! after a random Hadamard rotation, which spreads a concentrated cloud of
//! vectors evenly across coordinates.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numkit::{hadamard_rotate, norm, sample_categorical_logweights, sample_laplace};

/// Hard limit on the number of candidate bins in [`private_range`].
const MAX_BINS: usize = 1 << 24;

/// Interval `[center - 2r, center + 2r]` returned by [`private_range`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeInterval {
    pub center: f64,
    pub r: f64,
}

impl RangeInterval {
    pub fn lo(&self) -> f64 {
        self.center - 2.0 * self.r
    }

    pub fn hi(&self) -> f64 {
        self.center + 2.0 * self.r
    }

    /// Always exactly `4r`.
    pub fn width(&self) -> f64 {
        4.0 * self.r
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo()).min(self.hi())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo() <= x && x <= self.hi()
    }
}

/// Midpoints of the `⌈B/r⌉` bins of length `2r` covering `[-B, B]`
/// (the last bin may overhang `B`).
pub fn range_midpoints(r: f64, bound: f64) -> Result<Vec<f64>> {
    let bins = range_bin_count(r, bound)?;
    Ok((0..bins).map(|j| -bound + r + 2.0 * r * j as f64).collect())
}

fn range_bin_count(r: f64, bound: f64) -> Result<usize> {
    if !(r > 0.0 && bound > 0.0) || !r.is_finite() || !bound.is_finite() {
        return Err(Error::param("private_range needs finite r > 0 and B > 0"));
    }
    let bins = (bound / r).ceil();
    if bins > MAX_BINS as f64 {
        return Err(Error::param(format!("B / r = {} bins is too many", bins)));
    }
    Ok((bins as usize).max(1))
}

/// Index of the midpoint nearest to `x`; exact ties go to the midpoint
/// closer to zero so that the snapping is symmetric on a symmetric grid.
fn snap_index(x: f64, r: f64, bound: f64, bins: usize) -> usize {
    let t = (x + bound - r) / (2.0 * r);
    let lower = t.floor();
    let j = match (t - lower).partial_cmp(&0.5) {
        Some(std::cmp::Ordering::Less) => lower,
        Some(std::cmp::Ordering::Greater) => lower + 1.0,
        _ => {
            let mid = |j: f64| (-bound + r + 2.0 * r * j).abs();
            if mid(lower) <= mid(lower + 1.0) {
                lower
            } else {
                lower + 1.0
            }
        }
    };
    j.clamp(0.0, (bins - 1) as f64) as usize
}

fn check_domain(xs: &[f64], bound: f64) -> Result<()> {
    for &x in xs {
        if !x.is_finite() {
            return Err(Error::NonFiniteInput("private_range"));
        }
        if x.abs() > bound * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain { value: x, bound });
        }
    }
    Ok(())
}

/// Exponential-mechanism choice of a `4r`-wide window likely to contain the
/// bulk of `xs`. Costs are `c(x) = max(#{x'_i < x}, #{x'_i > x})` over the
/// snapped inputs `x'_i`; a midpoint is drawn with weight `exp(-eps c / 2)`.
pub fn private_range<R: Rng + ?Sized>(
    xs: &[f64],
    eps: f64,
    r: f64,
    bound: f64,
    rng: &mut R,
) -> Result<RangeInterval> {
    if !(eps > 0.0) {
        return Err(Error::param("private_range needs eps > 0"));
    }
    let bins = range_bin_count(r, bound)?;
    check_domain(xs, bound)?;

    let mut hist = vec![0usize; bins];
    for &x in xs {
        hist[snap_index(x, r, bound, bins)] += 1;
    }
    let total = xs.len();
    let mut below = 0usize;
    let mut logw = Vec::with_capacity(bins);
    for &h in &hist {
        let above = total - below - h;
        let cost = below.max(above) as f64;
        logw.push(-eps * cost / 2.0);
        below += h;
    }
    let j = sample_categorical_logweights(rng, &logw)?;
    Ok(RangeInterval {
        center: -bound + r + 2.0 * r * j as f64,
        r,
    })
}

/// `ξ + mean(clamp(x_i, a, b))` with `[a, b] = private_range(xs, eps/2, r, B)`
/// and `ξ ~ Laplace(8r / (M eps))`. The clamped mean moves by at most
/// `4r / M` when one input changes, so the Laplace step spends `eps/2`.
pub fn winsorized_mean_1d<R: Rng + ?Sized>(
    xs: &[f64],
    r: f64,
    eps: f64,
    bound: f64,
    rng: &mut R,
) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::param("winsorized mean of an empty sample"));
    }
    let m = xs.len() as f64;
    let range = private_range(xs, eps / 2.0, r, bound, rng)?;
    let clamped = xs.iter().map(|&x| range.clamp(x)).sum::<f64>() / m;
    let noise = sample_laplace(rng, 8.0 * r / (m * eps))?;
    Ok(noise + clamped)
}

/// Per-coordinate privacy budget `eps / sqrt(6 d ln(1/delta))` and radius
/// `10 r sqrt(ln(d M / beta) / d)` used by [`winsorized_mean_highd`].
pub fn highd_coordinate_params(
    d: usize,
    m: usize,
    r: f64,
    beta: f64,
    eps: f64,
    delta: f64,
) -> Result<(f64, f64)> {
    if !(eps > 0.0 && r > 0.0 && beta > 0.0) {
        return Err(Error::param("winsorized_mean_highd needs eps, r, beta > 0"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("winsorized_mean_highd needs delta in (0, 1)"));
    }
    let df = d as f64;
    let eps_coord = eps / (6.0 * df * (1.0 / delta).ln()).sqrt();
    let log_term = (df * m as f64 / beta).ln();
    if !(log_term > 0.0) {
        return Err(Error::param("need d * M > beta"));
    }
    let r_coord = 10.0 * r * (log_term / df).sqrt();
    Ok((eps_coord, r_coord))
}

/// Private mean of vectors in the unit ball. `d` must be a power of two
/// (callers pad with zeros). Inputs are rotated by `U = H D / sqrt(d)` with
/// random signs `D`, averaged coordinate-wise with [`winsorized_mean_1d`]
/// over `[-sqrt(d), sqrt(d)]`, and rotated back with `Uᵀ`.
pub fn winsorized_mean_highd<R: Rng + ?Sized>(
    xs: &[Vec<f64>],
    r: f64,
    beta: f64,
    eps: f64,
    delta: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let m = xs.len();
    if m == 0 {
        return Err(Error::param("winsorized_mean_highd of an empty sample"));
    }
    let d = xs[0].len();
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::BadDimension(d));
    }
    for x in xs {
        if x.len() != d {
            return Err(Error::param("all inputs must share one dimension"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("winsorized_mean_highd"));
        }
        let n = norm(x);
        if n > 1.0 + 1e-9 {
            return Err(Error::OutOfDomain {
                value: n,
                bound: 1.0,
            });
        }
    }
    let (eps_coord, r_coord) = highd_coordinate_params(d, m, r, beta, eps, delta)?;

    let signs: Vec<f64> = (0..d)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let rotated: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| hadamard_rotate(x, &signs, false))
        .collect::<Result<_>>()?;
    let bound = (d as f64).sqrt();
    let mut column = vec![0.0; m];
    let mut means = Vec::with_capacity(d);
    for s in 0..d {
        for (c, y) in column.iter_mut().zip(&rotated) {
            // |y_s| <= ‖y‖ = ‖x‖ <= 1 <= sqrt(d); clip rounding excursions
            *c = y[s].clamp(-bound, bound);
        }
        means.push(winsorized_mean_1d(&column, r_coord, eps_coord, bound, rng)?);
    }
    hadamard_rotate(&means, &signs, true)
}

/// The accuracy threshold `80 r ln(d/β) sqrt(6 d ln(dM/β) ln(1/δ)) / (M ε)`
/// exceeded with probability at most `3β` plus an exponentially small term.
pub fn highd_error_bound(d: usize, m: usize, r: f64, beta: f64, eps: f64, delta: f64) -> f64 {
    let df = d as f64;
    let mf = m as f64;
    80.0 * r * (df / beta).ln() * (6.0 * df * (df * mf / beta).ln() * (1.0 / delta).ln()).sqrt()
        / (mf * eps)
}

/// The additive tail term `d² B / (10 r sqrt(ln(dM/β))) exp(-M ε / (8 sqrt(6 d ln(1/δ))))`
/// with `B = 1`.
pub fn highd_tail_term(d: usize, m: usize, r: f64, beta: f64, eps: f64, delta: f64) -> f64 {
    let df = d as f64;
    let mf = m as f64;
    df * df / (10.0 * r * (df * mf / beta).ln().sqrt())
        * (-mf * eps / (8.0 * (6.0 * df * (1.0 / delta).ln()).sqrt())).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{with_zero_laplace, RngStream};

    #[test]
    fn midpoints_cover_domain() {
        let m = range_midpoints(1.0, 2.0).unwrap();
        assert_eq!(m, vec![-1.0, 1.0]);
        // B/r non-integral: ⌈2.5⌉ = 3 bins, last one overhangs
        let m = range_midpoints(0.4, 1.0).unwrap();
        assert_eq!(m.len(), 3);
        assert!((m[2] + 0.4 - 1.4).abs() < 1e-12);
    }

    #[test]
    fn private_range_high_eps_concentrates() {
        // xs all at 0.5 snap to midpoint +1: c(-1) = 3, c(+1) = 0.
        // P(choose -1) = e^{-1.5e6} / (1 + e^{-1.5e6}) ≈ 0.
        let mut rng = RngStream::new(1);
        for _ in 0..1000 {
            let iv = private_range(&[0.5, 0.5, 0.5], 1e6, 1.0, 2.0, &mut rng).unwrap();
            assert_eq!((iv.lo(), iv.hi()), (-1.0, 3.0));
        }
    }

    #[test]
    fn private_range_empty_is_uniform() {
        let mut rng = RngStream::new(2);
        let n = 40_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let iv = private_range(&[], 1.0, 0.5, 2.0, &mut rng).unwrap();
            counts[((iv.center + 1.5) / 1.0).round() as usize] += 1;
        }
        for c in counts {
            // binomial(40000, 1/4): sd ≈ 87
            assert!((c as f64 - 10_000.0).abs() < 500.0, "{counts:?}");
        }
    }

    #[test]
    fn private_range_covers_single_bin() {
        let mut rng = RngStream::new(3);
        let xs = [0.31, 0.33, 0.36, 0.39];
        let iv = private_range(&xs, 1e9, 0.05, 1.0, &mut rng).unwrap();
        assert!(xs.iter().all(|&x| iv.contains(x)));
    }

    #[test]
    fn private_range_out_of_domain() {
        let mut rng = RngStream::new(0);
        assert!(matches!(
            private_range(&[0.0, 2.5], 1.0, 0.5, 2.0, &mut rng),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(private_range(&[0.0], 0.0, 0.5, 2.0, &mut rng).is_err());
        assert!(private_range(&[0.0], 1.0, 0.0, 2.0, &mut rng).is_err());
    }

    #[test]
    fn winsorized_1d_accuracy_high_eps() {
        // Laplace scale 8 r / (M ε) = 8 * 0.1 / (100 * 1e4) = 8e-7; the
        // chance of |ξ| > 1e-2 is exp(-1.25e4).
        let mut rng = RngStream::new(4);
        let xs = vec![0.3; 100];
        for _ in 0..1000 {
            let v = winsorized_mean_1d(&xs, 0.1, 1e4, 1.0, &mut rng).unwrap();
            assert!((v - 0.3).abs() < 1e-2);
        }
    }

    #[test]
    fn winsorized_1d_outlier_is_clamped() {
        let mut xs = vec![0.0; 20];
        xs[0] = 1.0;
        let mut rng = RngStream::new(5);
        let v = with_zero_laplace(|| winsorized_mean_1d(&xs, 0.05, 1e6, 1.0, &mut rng).unwrap());
        // window around 0 is [-0.15, 0.25] at most; outlier contributes <= 0.25/20
        assert!(v <= 0.25 / 20.0 + 1e-15, "{v}");
        assert!(v >= 0.0);
    }

    #[test]
    fn winsorized_1d_symmetric() {
        let xs = [-0.5, -0.2, 0.2, 0.5];
        let mut rng = RngStream::new(6);
        let n = 1_000_000;
        let pos = (0..n)
            .filter(|_| winsorized_mean_1d(&xs, 0.25, 1.0, 1.0, &mut rng).unwrap() > 0.0)
            .count();
        // sign test: 4 sd band for Binomial(1e6, 1/2)
        assert!((pos as f64 - 5e5).abs() < 2000.0, "{pos}");
    }

    #[test]
    fn highd_zero_noise_returns_mean() {
        let xs: Vec<Vec<f64>> = (0..16)
            .map(|i| {
                let t = i as f64 / 16.0;
                vec![
                    0.3 + 0.01 * t,
                    -0.2,
                    0.1 * t,
                    0.05,
                    0.0,
                    -0.01 * t,
                    0.2,
                    0.1,
                ]
            })
            .collect();
        let mean: Vec<f64> = (0..8)
            .map(|s| xs.iter().map(|x| x[s]).sum::<f64>() / 16.0)
            .collect();
        let mut rng = RngStream::new(7);
        let got = with_zero_laplace(|| {
            winsorized_mean_highd(&xs, 0.05, 0.05, 1e12, 1e-5, &mut rng).unwrap()
        });
        for (a, b) in got.iter().zip(&mean) {
            assert!((a - b).abs() < 1e-10, "{got:?} vs {mean:?}");
        }
    }

    #[test]
    fn highd_high_eps_constant_inputs() {
        // all inputs equal v, ε = 1e4, M = 256, d = 8.
        let v = vec![0.1, -0.3, 0.2, 0.0, 0.05, 0.4, -0.1, 0.25];
        let xs = vec![v.clone(); 256];
        let mut rng = RngStream::new(8);
        let trials = 200;
        let ok = (0..trials)
            .filter(|_| {
                let out = winsorized_mean_highd(&xs, 0.05, 0.05, 1e4, 1e-5, &mut rng).unwrap();
                crate::numkit::dist(&out, &v) <= 0.01
            })
            .count();
        assert!(ok as f64 >= 0.99 * trials as f64, "{ok}");
    }

    #[test]
    fn highd_deterministic_given_seed() {
        let xs = vec![vec![0.1, 0.2, 0.3, 0.4]; 10];
        let a = winsorized_mean_highd(&xs, 0.1, 0.1, 1.0, 1e-5, &mut RngStream::new(9)).unwrap();
        let b = winsorized_mean_highd(&xs, 0.1, 0.1, 1.0, 1e-5, &mut RngStream::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn highd_rejects_bad_inputs() {
        let mut rng = RngStream::new(0);
        assert!(matches!(
            winsorized_mean_highd(&[vec![0.0; 3]], 0.1, 0.1, 1.0, 1e-5, &mut rng),
            Err(Error::BadDimension(3))
        ));
        assert!(winsorized_mean_highd(&[vec![1.0, 1.0]], 0.1, 0.1, 1.0, 1e-5, &mut rng).is_err());
        assert!(winsorized_mean_highd(&[vec![0.1, 0.1]], 0.1, 0.1, 1.0, 0.0, &mut rng).is_err());
    }
}
