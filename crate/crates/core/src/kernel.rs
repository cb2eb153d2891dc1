//! Gaussian RBF kernel `k(x, z) = exp(-c² ‖x - z‖²)` and Gram matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width parameter of the RBF kernel. Stored as `c`; the kernel uses `c²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    c: f64,
}

impl KernelConfig {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!(
                "kernel width c must be positive and finite, got {c}"
            )));
        }
        Ok(KernelConfig { c })
    }

    /// Builds the config from `c²` directly.
    pub fn from_c2(c2: f64) -> Result<Self> {
        if !(c2.is_finite() && c2 > 0.0) {
            return Err(Error::invalid(format!(
                "kernel c² must be positive and finite, got {c2}"
            )));
        }
        Self::new(c2.sqrt())
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn c2(&self) -> f64 {
        self.c * self.c
    }

    #[inline]
    fn eval_sq_dist(&self, sq_dist: f64) -> f64 {
        (-self.c2() * sq_dist).exp()
    }
}

/// Symmetric N×N kernel matrix `Ω` over a set of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix(DMatrix<f64>);

impl KernelMatrix {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

impl std::ops::Deref for KernelMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

pub fn rbf(x: &[f64], z: &[f64], cfg: &KernelConfig) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch {
            context: "rbf",
            expected: x.len(),
            found: z.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::invalid("rbf needs inputs of dimension at least 1"));
    }
    let sq: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(cfg.eval_sq_dist(sq))
}

/// Squared distance between row `i` of `a` and row `j` of `b`, summed
/// directly over coordinates.
#[inline]
fn row_sq_dist(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    let mut sq = 0.0;
    for k in 0..a.ncols() {
        let d = a[(i, k)] - b[(j, k)];
        sq += d * d;
    }
    sq
}

/// Gram matrix of the rows of `inputs`. Only the upper triangle is evaluated;
/// the lower triangle is mirrored and the diagonal is exactly 1.
pub fn gram(inputs: &DMatrix<f64>, cfg: &KernelConfig) -> Result<KernelMatrix> {
    let n = inputs.nrows();
    if n == 0 || inputs.ncols() == 0 {
        return Err(Error::invalid("gram needs at least one input of dimension at least 1"));
    }
    let mut omega = DMatrix::zeros(n, n);
    for j in 0..n {
        omega[(j, j)] = 1.0;
        for i in 0..j {
            let v = cfg.eval_sq_dist(row_sq_dist(inputs, i, inputs, j));
            omega[(i, j)] = v;
            omega[(j, i)] = v;
        }
    }
    Ok(KernelMatrix(omega))
}

/// M×N matrix of kernel values between test rows and training rows.
pub fn cross_gram(test: &DMatrix<f64>, train: &DMatrix<f64>, cfg: &KernelConfig) -> Result<DMatrix<f64>> {
    if test.ncols() != train.ncols() {
        return Err(Error::DimensionMismatch {
            context: "cross_gram",
            expected: train.ncols(),
            found: test.ncols(),
        });
    }
    Ok(DMatrix::from_fn(test.nrows(), train.nrows(), |m, i| {
        cfg.eval_sq_dist(row_sq_dist(test, m, train, i))
    }))
}

/// Kernel values between one point and every training row.
pub(crate) fn kernel_row(x: &[f64], train: &DMatrix<f64>, cfg: &KernelConfig) -> Result<Vec<f64>> {
    if x.len() != train.ncols() {
        return Err(Error::DimensionMismatch {
            context: "input point",
            expected: train.ncols(),
            found: x.len(),
        });
    }
    Ok((0..train.nrows())
        .map(|i| {
            let sq: f64 = x
                .iter()
                .enumerate()
                .map(|(k, v)| (v - train[(i, k)]) * (v - train[(i, k)]))
                .sum();
            cfg.eval_sq_dist(sq)
        })
        .collect())
}
