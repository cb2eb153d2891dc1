//! Classical LS-SVR in the dual: assemble the bordered saddle system, solve
//! for `(b, α)`, predict with the kernel expansion. Also the plain
//! least-squares RBF network on the same basis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{matrix_to_rows, rows_to_matrix, Dataset};
use crate::error::{Error, Result};
use crate::kernel::{self, KernelConfig};
use crate::linalg::SymmetricLu;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LssvrConfig {
    gamma: f64,
    pub kernel: KernelConfig,
}

impl LssvrConfig {
    pub fn new(gamma: f64, kernel: KernelConfig) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(LssvrConfig { gamma, kernel })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid(format!(
            "gamma must be positive and finite, got {gamma}"
        )));
    }
    Ok(())
}

/// The (N+1)×(N+1) system `Ψ (b, α) = (0, y)` with
/// `Ψ = [[0, 1ᵀ], [1, Ω + γ⁻¹I]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSystem {
    pub psi: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

/// Borders `Ω + γ⁻¹I` with the ones row and column.
pub fn saddle_matrix(omega: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    let n = omega.nrows();
    let mut psi = DMatrix::zeros(n + 1, n + 1);
    for i in 1..=n {
        psi[(0, i)] = 1.0;
        psi[(i, 0)] = 1.0;
    }
    psi.view_mut((1, 1), (n, n)).copy_from(omega);
    for i in 1..=n {
        psi[(i, i)] += 1.0 / gamma;
    }
    psi
}

/// `(0, y)`.
pub fn padded_targets(y: &DVector<f64>) -> DVector<f64> {
    let mut rhs = DVector::zeros(y.len() + 1);
    rhs.rows_mut(1, y.len()).copy_from(y);
    rhs
}

/// The N×(N+1) design matrix `[1 K]` of the RBF network for kernel values `K`.
pub fn design_matrix(kernel_values: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = kernel_values.shape();
    let mut phi = DMatrix::from_element(m, n + 1, 1.0);
    phi.view_mut((0, 1), (m, n)).copy_from(kernel_values);
    phi
}

pub fn build_system(data: &Dataset, config: &LssvrConfig) -> Result<SaddleSystem> {
    let omega = kernel::gram(data.inputs(), &config.kernel)?;
    Ok(SaddleSystem {
        psi: saddle_matrix(&omega, config.gamma),
        rhs: padded_targets(data.targets()),
    })
}

/// A fitted kernel expansion `f(x) = b + Σᵢ αᵢ k(x, xᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LssvrModel {
    pub b: f64,
    pub alpha: DVector<f64>,
    pub train_inputs: DMatrix<f64>,
    pub config: LssvrConfig,
}

impl LssvrModel {
    /// Parameters stacked as `(b, α)`.
    pub fn theta(&self) -> DVector<f64> {
        let mut t = DVector::zeros(self.alpha.len() + 1);
        t[0] = self.b;
        t.rows_mut(1, self.alpha.len()).copy_from(&self.alpha);
        t
    }

    pub fn input_dim(&self) -> usize {
        self.train_inputs.ncols()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let k = kernel::kernel_row(x, &self.train_inputs, &self.config.kernel)?;
        Ok(self.b + k.iter().zip(self.alpha.iter()).map(|(k, a)| k * a).sum::<f64>())
    }

    pub fn predict_many(&self, inputs: &DMatrix<f64>) -> Result<DVector<f64>> {
        let k = kernel::cross_gram(inputs, &self.train_inputs, &self.config.kernel)?;
        Ok(k * &self.alpha + DVector::from_element(inputs.nrows(), self.b))
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            gamma: self.config.gamma,
            c: self.config.kernel.c(),
            b: self.b,
            alpha: self.alpha.iter().copied().collect(),
            train_inputs: matrix_to_rows(&self.train_inputs),
        }
    }

    pub fn from_document(doc: &ModelDocument) -> Result<Self> {
        let config = LssvrConfig::new(doc.gamma, KernelConfig::new(doc.c)?)?;
        let train_inputs = rows_to_matrix(&doc.train_inputs)?;
        if train_inputs.nrows() != doc.alpha.len() || train_inputs.ncols() == 0 {
            return Err(Error::invalid(format!(
                "model has {} dual weights but {} training inputs",
                doc.alpha.len(),
                train_inputs.nrows()
            )));
        }
        Ok(LssvrModel {
            b: doc.b,
            alpha: DVector::from_column_slice(&doc.alpha),
            train_inputs,
            config,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }
}

/// On-disk form of an [`LssvrModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub gamma: f64,
    pub c: f64,
    pub b: f64,
    pub alpha: Vec<f64>,
    pub train_inputs: Vec<Vec<f64>>,
}

/// Solves the saddle system with a pivoted LU. The factorization is returned
/// so callers can reuse it.
pub(crate) fn fit_factored(data: &Dataset, config: &LssvrConfig) -> Result<(LssvrModel, SymmetricLu, SaddleSystem)> {
    let system = build_system(data, config)?;
    let lu = SymmetricLu::factor(&system.psi, "LS-SVR saddle system")?;
    let theta = lu.solve(&system.rhs);
    let model = LssvrModel {
        b: theta[0],
        alpha: theta.rows(1, data.len()).into_owned(),
        train_inputs: data.inputs().clone(),
        config: *config,
    };
    Ok((model, lu, system))
}

pub fn fit(data: &Dataset, config: &LssvrConfig) -> Result<LssvrModel> {
    fit_factored(data, config).map(|(model, _, _)| model)
}

/// Minimum-norm least-squares fit of `[1 Ω] (b, α) ≈ y`. The design matrix
/// has more columns than rows, so the solution is taken through the
/// pseudoinverse.
pub fn fit_rbf_ls(data: &Dataset, config: &LssvrConfig) -> Result<LssvrModel> {
    let omega = kernel::gram(data.inputs(), &config.kernel)?;
    let phi = design_matrix(&omega);
    let n = data.len();
    let svd = phi.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = (n + 1) as f64 * f64::EPSILON * smax;
    let theta = svd
        .solve(data.targets(), tol)
        .map_err(|e| Error::invalid(e.to_string()))?;
    Ok(LssvrModel {
        b: theta[0],
        alpha: theta.rows(1, n).into_owned(),
        train_inputs: data.inputs().clone(),
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(gamma: f64) -> LssvrConfig {
        LssvrConfig::new(gamma, KernelConfig::new(1.0).unwrap()).unwrap()
    }

    fn two_point() -> Dataset {
        Dataset::from_rows(&[vec![0.0], vec![1.0]], &[0.0, 1.0]).unwrap()
    }

    fn random_problem(seed: u64, n: usize, d: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, d, |_, _| rng.gen_range(-2.0..2.0));
        let y = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..3.0));
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn config_validation() {
        let k = KernelConfig::new(1.0).unwrap();
        assert!(LssvrConfig::new(0.0, k).is_err());
        assert!(LssvrConfig::new(-1.0, k).is_err());
        assert!(LssvrConfig::new(f64::INFINITY, k).is_err());
    }

    #[test]
    fn system_two_point() {
        let s = build_system(&two_point(), &unit(1.0)).unwrap();
        let e = (-1.0f64).exp();
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 1.0, 1.0, 2.0, e, 1.0, e, 2.0]);
        assert!((s.psi - expected).amax() < 1e-16);
        assert_eq!(s.rhs.as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn system_single_point() {
        let d = Dataset::from_rows(&[vec![4.0]], &[2.5]).unwrap();
        let s = build_system(&d, &unit(4.0)).unwrap();
        assert_eq!(s.psi, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 1.25]));
    }

    #[test]
    fn system_block_structure_matches_loop() {
        let d = random_problem(3, 6, 2);
        let cfg = LssvrConfig::new(0.7, KernelConfig::new(0.9).unwrap()).unwrap();
        let s = build_system(&d, &cfg).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let expected = match (i, j) {
                    (0, 0) => 0.0,
                    (0, _) | (_, 0) => 1.0,
                    _ => {
                        let xi: Vec<f64> = d.inputs().row(i - 1).iter().copied().collect();
                        let xj: Vec<f64> = d.inputs().row(j - 1).iter().copied().collect();
                        let k = kernel::rbf(&xi, &xj, &cfg.kernel).unwrap();
                        if i == j {
                            k + 1.0 / 0.7
                        } else {
                            k
                        }
                    }
                };
                assert!((s.psi[(i, j)] - expected).abs() < 1e-15, "({i},{j})");
            }
        }
        assert_eq!(s.rhs[0], 0.0);
        assert_eq!(s.rhs.rows(1, 6), *d.targets());
    }

    #[test]
    fn fit_two_point_by_hand() {
        let m = fit(&two_point(), &unit(1.0)).unwrap();
        let a1 = -1.0 / (2.0 * (2.0 - (-1.0f64).exp()));
        assert!((m.b - 0.5).abs() < 1e-14);
        assert!((m.alpha[0] - a1).abs() < 1e-14);
        assert!((m.alpha[1] + a1).abs() < 1e-14);
        assert!((m.alpha[0] + 0.306_349_4).abs() < 1e-6);
        assert!((m.predict(&[0.5]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_targets_give_zero_weights() {
        let mut d = random_problem(4, 8, 3);
        d = Dataset::new(d.inputs().clone(), DVector::from_element(8, 2.75)).unwrap();
        let m = fit(&d, &unit(3.0)).unwrap();
        assert!((m.b - 2.75).abs() < 1e-12);
        assert!(m.alpha.amax() < 1e-12);
        assert!((m.predict(&[0.1, -9.0, 4.0]).unwrap() - 2.75).abs() < 1e-12);
    }

    #[test]
    fn fit_matches_full_pivot_oracle() {
        let d = random_problem(10, 10, 2);
        let cfg = unit(2.0);
        let m = fit(&d, &cfg).unwrap();
        let s = build_system(&d, &cfg).unwrap();
        let oracle = s.psi.clone().full_piv_lu().solve(&s.rhs).unwrap();
        assert!((m.theta() - &oracle).norm() <= 1e-10 * oracle.norm());
    }

    #[test]
    fn far_point_predicts_bias() {
        let d = random_problem(6, 5, 1);
        let m = fit(&d, &unit(1.0)).unwrap();
        // c²d² ≥ 40 from every training point
        let p = m.predict(&[2.0 + 40f64.sqrt() + 0.1]).unwrap();
        assert!((p - m.b).abs() < 1e-6);
    }

    #[test]
    fn predict_dimension_mismatch() {
        let m = fit(&two_point(), &unit(1.0)).unwrap();
        assert!(matches!(m.predict(&[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(m.predict_many(&DMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn predict_many_agrees_with_predict() {
        let d = random_problem(8, 7, 2);
        let m = fit(&d, &unit(1.5)).unwrap();
        let test = DMatrix::from_fn(4, 2, |i, j| 0.3 * i as f64 - 0.2 * j as f64);
        let many = m.predict_many(&test).unwrap();
        for i in 0..4 {
            let row: Vec<f64> = test.row(i).iter().copied().collect();
            assert!((many[i] - m.predict(&row).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn interpolation_limit() {
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![0.5 * i as f64]).collect();
        let ys: Vec<f64> = (0..12).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let d = Dataset::from_rows(&xs, &ys).unwrap();
        let m = fit(&d, &unit(1e8)).unwrap();
        let ymax = ys.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (x, y) in xs.iter().zip(&ys) {
            assert!((m.predict(x).unwrap() - y).abs() <= 1e-4 * ymax);
        }
    }

    #[test]
    fn saddle_and_normal_equations_agree() {
        let d = random_problem(12, 9, 2);
        let cfg = unit(0.8);
        let m = fit(&d, &cfg).unwrap();
        let s = build_system(&d, &cfg).unwrap();
        let normal = s.psi.tr_mul(&s.psi).cholesky().unwrap().solve(&s.psi.tr_mul(&s.rhs));
        assert!((m.theta() - &normal).norm() <= 1e-7 * normal.norm());
    }

    #[test]
    fn duplicate_inputs_are_allowed_but_exact_singularity_reported() {
        let d = Dataset::from_rows(&[vec![0.0], vec![0.0], vec![1.0]], &[1.0, 2.0, 0.0]).unwrap();
        let m = fit(&d, &unit(1.0)).unwrap();
        assert!(m.alpha.iter().all(|a| a.is_finite()));
        let err = fit(&d, &unit(1e20)).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }), "{err}");
        assert_eq!(err.category(), crate::ErrorCategory::Numerical);
    }

    #[test]
    fn rbf_ls_zero_targets() {
        let d = Dataset::new(random_problem(1, 5, 2).inputs().clone(), DVector::zeros(5)).unwrap();
        let m = fit_rbf_ls(&d, &unit(1.0)).unwrap();
        assert_eq!(m.b, 0.0);
        assert!(m.alpha.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn rbf_ls_single_point_is_min_norm() {
        let d = Dataset::from_rows(&[vec![0.3]], &[3.0]).unwrap();
        let m = fit_rbf_ls(&d, &unit(1.0)).unwrap();
        assert!((m.b - 1.5).abs() < 1e-14);
        assert!((m.alpha[0] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn rbf_ls_matches_qr_min_norm_oracle() {
        let d = random_problem(21, 8, 2);
        let cfg = unit(1.0);
        let m = fit_rbf_ls(&d, &cfg).unwrap();
        let omega = kernel::gram(d.inputs(), &cfg.kernel).unwrap();
        let phi = design_matrix(&omega);
        // min-norm solution of a full-row-rank system: ψᵀ = QR, θ = Q R⁻ᵀ y
        let qr = phi.transpose().qr();
        let r = qr.r();
        let z = r.transpose().solve_lower_triangular(d.targets()).unwrap();
        let oracle = qr.q() * z;
        let res = (&phi * m.theta() - d.targets()).norm();
        let res_oracle = (&phi * &oracle - d.targets()).norm();
        assert!((res - res_oracle).abs() <= 1e-9);
        assert!((m.theta() - &oracle).norm() <= 1e-8 * oracle.norm().max(1.0));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let d = random_problem(30, 6, 3);
        let m = fit(&d, &LssvrConfig::new(0.5, KernelConfig::from_c2(1.0).unwrap()).unwrap()).unwrap();
        let back = LssvrModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        for key in ["gamma", "c", "b", "alpha", "train_inputs"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn json_rejects_inconsistent_document() {
        let bad = r#"{"gamma":1,"c":1,"b":0,"alpha":[1,2],"train_inputs":[[0.0]]}"#;
        assert!(LssvrModel::from_json(bad).is_err());
        let bad_gamma = r#"{"gamma":0,"c":1,"b":0,"alpha":[1],"train_inputs":[[0.0]]}"#;
        assert!(LssvrModel::from_json(bad_gamma).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kkt_conditions_hold(seed in 0u64..10_000, n in 2usize..16, d in 1usize..4, gamma in 0.1f64..10.0) {
            let data = random_problem(seed, n, d);
            let cfg = unit(gamma);
            let m = fit(&data, &cfg).unwrap();
            let s = build_system(&data, &cfg).unwrap();
            let l1 = m.alpha.lp_norm(1);
            prop_assert!(m.alpha.sum().abs() <= 1e-8 * l1.max(1.0));
            let residual = (&s.psi * m.theta() - &s.rhs).norm();
            prop_assert!(residual <= 1e-8 * data.targets().norm().max(1.0));
            let f = m.predict_many(data.inputs()).unwrap();
            for i in 0..n {
                let e = data.targets()[i] - f[i];
                prop_assert!((m.alpha[i] - gamma * e).abs() <= 1e-8 * gamma.max(1.0));
            }
        }
    }
}
