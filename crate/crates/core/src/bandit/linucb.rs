//! Ridge-regularized LinUCB with a unit ridge.

use crate::env::{argmax_first, DecisionSet};
use crate::error::{Error, Result};
use crate::numkit::{dot, pinv_solve, Cholesky, SymMat, PINV_RTOL};

/// Gram matrix `V`, response vector `Y` and exploration weight `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinUcbState {
    v: SymMat,
    y: Vec<f64>,
    alpha: f64,
}

impl LinUcbState {
    pub fn new(d: usize, alpha: f64) -> Self {
        Self {
            v: SymMat::zeros(d),
            y: vec![0.0; d],
            alpha,
        }
    }

    pub fn from_parts(v: SymMat, y: Vec<f64>, alpha: f64) -> Result<Self> {
        if v.dim() != y.len() {
            return Err(Error::param("V and Y dimensions differ"));
        }
        Ok(Self { v, y, alpha })
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn gram(&self) -> &SymMat {
        &self.v
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn reset(&mut self) {
        self.v = SymMat::zeros(self.dim());
        self.y.iter_mut().for_each(|v| *v = 0.0);
    }

    /// `V += x xᵀ`, `Y += r x`.
    pub fn update(&mut self, x: &[f64], r: f64) {
        self.v.add_outer(x, 1.0);
        for (y, &xi) in self.y.iter_mut().zip(x) {
            *y += r * xi;
        }
    }

    fn ridge_factor(&self) -> Result<Cholesky> {
        Cholesky::new(&self.v.shifted(1.0))
    }

    /// `(I + V)⁻¹ Y`
    pub fn ridge_estimate(&self) -> Result<Vec<f64>> {
        Ok(self.ridge_factor()?.solve(&self.y))
    }

    /// `xᵀ θ̂ + α ‖x‖_{(I+V)⁻¹}` for every arm.
    pub fn ucb_values(&self, ds: &DecisionSet) -> Result<Vec<f64>> {
        let chol = self.ridge_factor()?;
        let theta = chol.solve(&self.y);
        Ok(ds
            .arms()
            .map(|x| dot(x, &theta) + self.alpha * chol.inv_norm(x))
            .collect())
    }

    /// Arm with the largest upper confidence bound, lowest index on ties.
    pub fn select(&self, ds: &DecisionSet) -> Result<usize> {
        if ds.is_empty() {
            return Err(Error::param("empty decision set"));
        }
        Ok(argmax_first(self.ucb_values(ds)?))
    }

    /// Least-squares estimate `V† Y`.
    pub fn pinv_estimate(&self) -> Result<Vec<f64>> {
        pinv_solve(&self.v, &self.y, PINV_RTOL)
    }
}

/// `1 + sqrt(2 ln(M/β) + d ln |T_U|)`
pub fn compute_alpha(m: usize, beta: f64, t_u: f64, d: usize) -> f64 {
    1.0 + (2.0 * (m as f64 / beta).ln() + d as f64 * t_u.ln()).sqrt()
}
