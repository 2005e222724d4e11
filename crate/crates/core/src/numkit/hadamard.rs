//! Randomized Hadamard rotation `U = H D / sqrt(d)` with `H` the Sylvester
//! Hadamard matrix and `D` a diagonal of random signs.

use crate::error::{Error, Result};

/// In-place unnormalized fast Walsh–Hadamard transform (Sylvester ordering,
/// `H[i][j] = (-1)^popcount(i & j)`).
pub fn fwht(x: &mut [f64]) {
    let n = x.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (x[i], x[i + h]);
                x[i] = a + b;
                x[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Forward mode returns `U x`, inverse mode returns `Uᵀ x`.
pub fn hadamard_rotate(x: &[f64], signs: &[f64], inverse: bool) -> Result<Vec<f64>> {
    let d = x.len();
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::BadDimension(d));
    }
    if signs.len() != d || signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
        return Err(Error::param("signs must be a ±1 vector of length d"));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let mut y: Vec<f64> = if inverse {
        x.to_vec()
    } else {
        x.iter().zip(signs).map(|(a, s)| a * s).collect()
    };
    fwht(&mut y);
    for v in &mut y {
        *v *= scale;
    }
    if inverse {
        for (v, s) in y.iter_mut().zip(signs) {
            *v *= s;
        }
    }
    Ok(y)
}

/// Smallest power of two `>= d`.
pub fn padded_dim(d: usize) -> usize {
    d.max(1).next_power_of_two()
}
