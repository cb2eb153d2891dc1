//! Thin wrappers over nalgebra's dense factorizations that report breakdown
//! as [`Error::Singular`] instead of `None`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};

/// Partial-pivoting LU of a symmetric (possibly indefinite) matrix, with a
/// 1-norm reciprocal condition estimate taken at factorization time.
#[derive(Debug, Clone)]
pub struct SymmetricLu {
    lu: LU<f64, Dyn, Dyn>,
    dim: usize,
    rcond: f64,
}

impl SymmetricLu {
    /// Factors `matrix`, which must be symmetric. Systems whose reciprocal
    /// condition estimate falls below machine epsilon are rejected.
    pub fn factor(matrix: &DMatrix<f64>, what: &'static str) -> Result<Self> {
        debug_assert!(matrix.is_square());
        let norm = one_norm(matrix);
        let lu = matrix.clone().lu();
        if !lu.is_invertible() || norm == 0.0 {
            return Err(Error::Singular { what, rcond: 0.0 });
        }
        let inv_norm = estimate_inverse_one_norm(matrix.nrows(), |v| {
            lu.solve(v)
                .unwrap_or_else(|| DVector::from_element(v.len(), f64::INFINITY))
        });
        let rcond = 1.0 / (norm * inv_norm);
        if rcond.is_nan() || rcond < f64::EPSILON {
            return Err(Error::Singular { what, rcond });
        }
        Ok(SymmetricLu {
            lu,
            dim: matrix.nrows(),
            rcond,
        })
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        // invertibility was checked in `factor`
        self.lu.solve(rhs).expect("factor checked invertibility")
    }

    pub fn solve_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.lu.solve(rhs).expect("factor checked invertibility")
    }
}

/// Cholesky factor `L` of a symmetric positive definite matrix `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
}

impl SpdFactor {
    pub fn factor(matrix: &DMatrix<f64>, what: &'static str) -> Result<Self> {
        let chol = Cholesky::new(matrix.clone()).ok_or(Error::Singular { what, rcond: 0.0 })?;
        let l = chol.l_dirty();
        if (0..l.nrows()).any(|i| !(l[(i, i)].is_finite() && l[(i, i)] > 0.0)) {
            return Err(Error::Singular { what, rcond: 0.0 });
        }
        Ok(SpdFactor { chol })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    /// `A⁻¹`, symmetrized.
    pub fn inverse(&self) -> DMatrix<f64> {
        let mut inv = self.chol.inverse();
        symmetrize(&mut inv);
        inv
    }

    /// `L⁻¹ B`. Column `j` of the result has squared norm `bⱼᵀ A⁻¹ bⱼ`.
    pub fn whiten(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = rhs.clone();
        let ok = self.chol.l_dirty().solve_lower_triangular_mut(&mut out);
        debug_assert!(ok);
        out
    }
}

pub fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Replace `m` by `(m + mᵀ) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Hager–Higham estimate of `‖A⁻¹‖₁` for symmetric `A`, given a solver for
/// `A x = b`.
fn estimate_inverse_one_norm(n: usize, solve: impl Fn(&DVector<f64>) -> DVector<f64>) -> f64 {
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    let mut last_index = usize::MAX;
    for _ in 0..5 {
        let y = solve(&x);
        estimate = y.lp_norm(1);
        if !estimate.is_finite() {
            return f64::INFINITY;
        }
        let signs = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = solve(&signs);
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.abs()))
            .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if zmax <= z.dot(&x) || j == last_index {
            break;
        }
        x.fill(0.0);
        x[j] = 1.0;
        last_index = j;
    }
    // Alternating test vector guards against the power iteration stalling.
    if n > 1 {
        let alt = DVector::from_fn(n, |i, _| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * (1.0 + i as f64 / (n - 1) as f64)
        });
        let alt_est = 2.0 * solve(&alt).lp_norm(1) / (3.0 * n as f64);
        estimate = estimate.max(alt_est);
    }
    estimate
}

/// Format with 17 significant digits, which round-trips any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_estimate_is_exact_for_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 0.5, 2.0]));
        let lu = SymmetricLu::factor(&m, "test").unwrap();
        // ‖A‖₁ = 4, ‖A⁻¹‖₁ = 2
        assert!((lu.rcond() - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn rank_deficient_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(SymmetricLu::factor(&m, "m"), Err(Error::Singular { .. })));
        let nearly = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-17]);
        assert!(SymmetricLu::factor(&nearly, "m").is_err());
    }

    #[test]
    fn indefinite_matrix_is_not_spd() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(SpdFactor::factor(&m, "m").is_err());
        assert!(SymmetricLu::factor(&m, "m").is_ok());
    }

    #[test]
    fn whiten_gives_quadratic_form() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let f = SpdFactor::factor(&a, "a").unwrap();
        let b = DMatrix::from_column_slice(2, 1, &[1.0, -2.0]);
        let w = f.whiten(&b);
        let inv = f.inverse();
        let direct = (b.transpose() * &inv * &b)[(0, 0)];
        assert!((w.norm_squared() - direct).abs() < 1e-14);
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }
}
