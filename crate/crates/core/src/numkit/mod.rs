//! Small dense linear algebra and deterministic sampling.

mod hadamard;
mod linalg;
mod rng;
mod sample;

pub use hadamard::{fwht, hadamard_rotate, padded_dim};
pub use linalg::{
    dist, dot, mahalanobis_inv_norm, min_eigenvalue, norm, pinv_solve, project_unit_ball,
    sym_eigen, Cholesky, SymEigen, SymMat,
};
pub use rng::{fnv1a64, RngStream};
#[cfg(test)]
pub(crate) use sample::with_zero_laplace;
pub use sample::{
    sample_categorical_logweights, sample_gaussian, sample_laplace, sample_truncated_gaussian_ball,
    sample_uniform_ball, sample_uniform_sphere, standard_normal,
};

/// Default relative eigenvalue cutoff for [`pinv_solve`].
pub const PINV_RTOL: f64 = 1e-10;
