//! Dense linear algebra for the small dimensions used by the bandit code
//! (d up to a few dozen). Everything is row-major `f64`.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

/// Symmetric `d x d` matrix with full row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    dim: usize,
    data: Vec<f64>,
}

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = v;
        }
        m
    }

    /// Builds a matrix from rows, rejecting non-square or asymmetric input.
    /// Asymmetry is tolerated up to `1e-12` relative to the largest entry and
    /// is removed by averaging the two triangles.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::param("matrix rows must all have length d"));
        }
        let scale = rows
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
            .max(1.0);
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                let (a, b) = (rows[i][j], rows[j][i]);
                if !a.is_finite() {
                    return Err(Error::NonFiniteInput("SymMat::from_rows"));
                }
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::param(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
                m.data[i * dim + j] = 0.5 * (a + b);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `self += w * x xᵀ`
    pub fn add_outer(&mut self, x: &[f64], w: f64) {
        debug_assert_eq!(x.len(), self.dim);
        let d = self.dim;
        for i in 0..d {
            let xi = w * x[i];
            if xi == 0.0 {
                continue;
            }
            let row = &mut self.data[i * d..(i + 1) * d];
            for (r, &xj) in row.iter_mut().zip(x) {
                *r += xi * xj;
            }
        }
    }

    /// `self + c I`
    pub fn shifted(&self, c: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.data[i * self.dim + i] += c;
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Eigendecomposition of a symmetric matrix. Eigenvalues are sorted
/// ascending; `vectors[k]` is the unit eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition.
pub fn sym_eigen(m: &SymMat) -> Result<SymEigen> {
    if !m.is_finite() {
        return Err(Error::NonFiniteInput("sym_eigen"));
    }
    let n = m.dim();
    let mut a = m.data.clone();
    let mut v = SymMat::identity(n).data;
    let total: f64 = a.iter().map(|x| x * x).sum();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off == 0.0 || off <= 1e-32 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|row| v[row * n + k]).collect())
        .collect();
    Ok(SymEigen { values, vectors })
}

pub fn min_eigenvalue(m: &SymMat) -> Result<f64> {
    if m.dim() == 0 {
        return Err(Error::param("min_eigenvalue of an empty matrix"));
    }
    Ok(sym_eigen(m)?.values[0])
}

/// Solves `V θ = Y` in the least-squares sense through the pseudo-inverse:
/// eigen-components with `λ <= rtol * λ_max` are dropped.
pub fn pinv_solve(v: &SymMat, y: &[f64], rtol: f64) -> Result<Vec<f64>> {
    if y.len() != v.dim() {
        return Err(Error::param("pinv_solve: dimension mismatch"));
    }
    if !(rtol > 0.0) {
        return Err(Error::param("pinv_solve: rtol must be positive"));
    }
    if y.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput("pinv_solve"));
    }
    let eig = sym_eigen(v)?;
    let mut out = vec![0.0; v.dim()];
    let lmax = eig.values.last().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return Ok(out);
    }
    let cutoff = rtol * lmax;
    for (lambda, vec) in eig.values.iter().zip(&eig.vectors) {
        if *lambda <= cutoff {
            continue;
        }
        let coef = dot(vec, y) / lambda;
        for (o, e) in out.iter_mut().zip(vec) {
            *o += coef * e;
        }
    }
    Ok(out)
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn new(a: &SymMat) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::NonFiniteInput("cholesky"));
        }
        let n = a.dim();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = a.get(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { dim: n, l })
    }

    /// Solves `L z = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= self.l[i * n + k] * z[k];
            }
            z[i] = s / self.l[i * n + i];
        }
        z
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }

    /// `sqrt(bᵀ A⁻¹ b) = ‖L⁻¹ b‖`
    pub fn inv_norm(&self, b: &[f64]) -> f64 {
        norm(&self.forward(b))
    }
}

/// `sqrt(xᵀ A⁻¹ x)` for positive definite `A`, via a Cholesky solve.
pub fn mahalanobis_inv_norm(x: &[f64], a: &SymMat) -> Result<f64> {
    if x.len() != a.dim() {
        return Err(Error::param("mahalanobis_inv_norm: dimension mismatch"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("mahalanobis_inv_norm"));
    }
    Ok(Cholesky::new(a)?.inv_norm(x))
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Scales `x` onto the unit ball if it lies outside it.
pub fn project_unit_ball(x: &mut [f64]) {
    let n = norm(x);
    if n > 1.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}
