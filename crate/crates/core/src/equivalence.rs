//! The gap between the LS-SVR solution `θ_LS` and the posterior mean `μ*` of
//! the ε-LS-SVR, in closed form and by direct subtraction, and the ε-sweep
//! that tracks it.
//!
//! The closed form is exact for every `ε ≥ 0`:
//!
//! ```text
//! θ_LS - μ* = ε·b_LS / (1 + ε·q) · G s₁,   G = (ΨᵀΨ)⁻¹,  q = G₁₁
//! ```
//!
//! using `s₁ᵀ Ψ⁻¹ (0, y) = b_LS`. Both sides assume `σ² = 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bayes::{self, EpsLssvrConfig, PosteriorBase};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel;
use crate::linalg::{fmt_f64, SymmetricLu};
use crate::lssvr::{self, design_matrix, padded_targets, saddle_matrix, LssvrConfig, LssvrModel};

/// Default sweep: `-log₁₀ ε = 0, 0.5, …, 5`.
pub fn default_exponents() -> Vec<f64> {
    (0..=10).map(|i| i as f64 * 0.5).collect()
}

/// `ε = 10^(-t)`; an infinite exponent gives `ε = 0`.
pub fn epsilon_from_exponent(t: f64) -> f64 {
    if t == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub epsilon: f64,
    pub gap_closed_form: Vec<f64>,
    pub gap_direct: Vec<f64>,
    pub gap_norm: f64,
    pub arse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSweepReport {
    /// `-log₁₀ ε` per record, increasing (so `ε` is decreasing).
    pub exponents: Vec<f64>,
    pub records: Vec<GapReport>,
}

impl GapSweepReport {
    pub const CSV_HEADER: &'static str = "neg_log10_eps,gap_norm,arse";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (t, r) in self.exponents.iter().zip(&self.records) {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(*t),
                fmt_f64(r.gap_norm),
                fmt_f64(r.arse)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep report serializes")
    }
}

/// Everything about one `(dataset, γ, c)` problem that the gap depends on
/// besides `ε`, factored once.
#[derive(Debug)]
pub struct GapAnalysis {
    model: LssvrModel,
    base: PosteriorBase,
    /// First column of `(ΨᵀΨ)⁻¹`.
    g_col: DVector<f64>,
}

impl GapAnalysis {
    pub fn new(data: &Dataset, config: &LssvrConfig) -> Result<Self> {
        let (model, lu, system) = lssvr::fit_factored(data, config)?;
        let omega = kernel::gram(data.inputs(), &config.kernel)?;
        let eps_cfg = EpsLssvrConfig::from_lssvr(0.0, config)?;
        let base = PosteriorBase::from_psi(&system.psi, &omega, data.targets(), &eps_cfg);
        Ok(GapAnalysis {
            model,
            base,
            g_col: first_column_of_inverse_gram(&lu),
        })
    }

    pub fn model(&self) -> &LssvrModel {
        &self.model
    }

    pub fn theta_ls(&self) -> DVector<f64> {
        self.model.theta()
    }

    /// `q = [(ΨᵀΨ)⁻¹]₁₁`.
    pub fn q(&self) -> f64 {
        self.g_col[0]
    }

    /// `b_LS · G s₁`, the first-order coefficient: the gap is `ε` times this
    /// vector, divided by `1 + εq`.
    pub fn first_order_coefficient(&self) -> DVector<f64> {
        &self.g_col * self.model.b
    }

    pub fn closed_form(&self, epsilon: f64) -> DVector<f64> {
        closed_form_gap(epsilon, self.model.b, &self.g_col)
    }

    /// Posterior mean at `ε` from a fresh Cholesky factorization of
    /// `ΨᵀΨ + ε s₁s₁ᵀ`.
    pub fn posterior_mean(&self, epsilon: f64) -> Result<DVector<f64>> {
        self.base.solve(epsilon).map(|(_, _, mean)| mean)
    }

    pub fn direct(&self, epsilon: f64) -> Result<DVector<f64>> {
        Ok(self.theta_ls() - self.posterior_mean(epsilon)?)
    }
}

fn closed_form_gap(epsilon: f64, b_ls: f64, g_col: &DVector<f64>) -> DVector<f64> {
    let q = g_col[0];
    g_col * (epsilon * b_ls / (1.0 + epsilon * q))
}

/// `G s₁ = Ψ⁻¹ (Ψ⁻¹ s₁)` for symmetric `Ψ`.
fn first_column_of_inverse_gram(lu: &SymmetricLu) -> DVector<f64> {
    let mut s1 = DVector::zeros(lu.dim());
    s1[0] = 1.0;
    lu.solve(&lu.solve(&s1))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::invalid(format!(
            "epsilon must be finite and non-negative, got {epsilon}"
        )));
    }
    Ok(())
}

/// `θ_LS - μ*` from the closed form.
pub fn gap_closed_form(data: &Dataset, config: &LssvrConfig, epsilon: f64) -> Result<DVector<f64>> {
    check_epsilon(epsilon)?;
    let (model, lu, _) = lssvr::fit_factored(data, config)?;
    Ok(closed_form_gap(epsilon, model.b, &first_column_of_inverse_gram(&lu)))
}

/// `θ_LS - μ*` from an LS-SVR fit and an independent posterior solve.
pub fn gap_direct(data: &Dataset, config: &LssvrConfig, epsilon: f64) -> Result<DVector<f64>> {
    let theta = lssvr::fit(data, config)?.theta();
    let post = bayes::posterior(data, &EpsLssvrConfig::from_lssvr(epsilon, config)?)?;
    Ok(theta - post.mean())
}

/// Mean absolute difference `(1/M) Σ |aᵢ - bᵢ|`. Despite the name this is
/// not a root-mean-square quantity.
pub fn arse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "arse",
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::invalid("arse needs at least one prediction"));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// Validates a sweep grid and returns it in increasing order (decreasing `ε`).
pub fn checked_exponents(exponents: &[f64]) -> Result<Vec<f64>> {
    if exponents.is_empty() {
        return Err(Error::invalid("sweep needs at least one exponent"));
    }
    if let Some(t) = exponents.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(Error::invalid(format!("sweep exponents must be non-negative, got {t}")));
    }
    let mut exponents = exponents.to_vec();
    exponents.sort_by(f64::total_cmp);
    if exponents.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("sweep exponents must be distinct"));
    }
    Ok(exponents)
}

/// Evaluates the gap and prediction discrepancy at `ε = 10^(-t)` for each
/// exponent. Predictions are compared on `eval_inputs`, or on the training
/// inputs when none are given.
pub fn sweep(
    data: &Dataset,
    config: &LssvrConfig,
    exponents: &[f64],
    eval_inputs: Option<&DMatrix<f64>>,
) -> Result<GapSweepReport> {
    let exponents = checked_exponents(exponents)?;
    let analysis = GapAnalysis::new(data, config)?;
    let theta = analysis.theta_ls();
    let eval = eval_inputs.unwrap_or(data.inputs());
    let phi_eval = design_matrix(&kernel::cross_gram(eval, data.inputs(), &config.kernel)?);
    let ls_pred = &phi_eval * &theta;

    let records = exponents
        .iter()
        .map(|&t| {
            let epsilon = epsilon_from_exponent(t);
            let annotate = |source: Error| Error::AtEpsilon {
                epsilon,
                source: Box::new(source),
            };
            let mean = analysis.posterior_mean(epsilon).map_err(annotate)?;
            let gap_direct = &theta - &mean;
            let eps_pred = &phi_eval * &mean;
            Ok(GapReport {
                epsilon,
                gap_closed_form: analysis.closed_form(epsilon).iter().copied().collect(),
                gap_norm: gap_direct.norm(),
                gap_direct: gap_direct.iter().copied().collect(),
                arse: arse(eps_pred.as_slice(), ls_pred.as_slice())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GapSweepReport { exponents, records })
}

/// Optimality diagnostics of a fitted LS-SVR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktDiagnostics {
    /// `|Σᵢ αᵢ|`
    pub alpha_sum: f64,
    /// `maxᵢ |αᵢ - γ (yᵢ - f(xᵢ))|`
    pub dual_violation: f64,
    /// `‖Ψ (b, α) - (0, y)‖`
    pub residual_norm: f64,
    pub alpha_l1: f64,
    pub target_norm: f64,
}

impl KktDiagnostics {
    /// All three conditions within `tol`, scaled by `max(1, ‖α‖₁)` for the
    /// sum and `max(1, ‖y‖)` for the other two.
    pub fn satisfied(&self, tol: f64) -> bool {
        self.alpha_sum <= tol * self.alpha_l1.max(1.0)
            && self.dual_violation <= tol * self.target_norm.max(1.0)
            && self.residual_norm <= tol * self.target_norm.max(1.0)
    }
}

pub fn kkt_check(model: &LssvrModel, targets: &DVector<f64>) -> Result<KktDiagnostics> {
    let n = model.alpha.len();
    if targets.len() != n {
        return Err(Error::DimensionMismatch {
            context: "kkt targets",
            expected: n,
            found: targets.len(),
        });
    }
    let gamma = model.config.gamma();
    let fitted = model.predict_many(&model.train_inputs)?;
    let dual_violation = (0..n)
        .map(|i| (model.alpha[i] - gamma * (targets[i] - fitted[i])).abs())
        .fold(0.0, f64::max);
    let omega = kernel::gram(&model.train_inputs, &model.config.kernel)?;
    let psi = saddle_matrix(&omega, gamma);
    let residual_norm = (psi * model.theta() - padded_targets(targets)).norm();
    Ok(KktDiagnostics {
        alpha_sum: model.alpha.sum().abs(),
        dual_violation,
        residual_norm,
        alpha_l1: model.alpha.lp_norm(1),
        target_norm: targets.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config(gamma: f64, c: f64) -> LssvrConfig {
        LssvrConfig::new(gamma, KernelConfig::new(c).unwrap()).unwrap()
    }

    fn random_problem(seed: u64, n: usize, d: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, d, |_, _| rng.gen_range(-1.5..1.5));
        let y = DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.5));
        Dataset::new(x, y).unwrap()
    }

    fn two_point() -> Dataset {
        Dataset::from_rows(&[vec![0.0], vec![1.0]], &[0.0, 1.0]).unwrap()
    }

    #[test]
    fn closed_form_vanishes_at_zero_epsilon() {
        let d = random_problem(1, 8, 2);
        let g = gap_closed_form(&d, &config(1.0, 1.0), 0.0).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn closed_form_vanishes_when_bias_is_zero() {
        // odd targets on inputs symmetric about the origin give b_LS = 0
        let xs = [-2.0, -1.0, -0.25, 0.25, 1.0, 2.0];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let ys: Vec<f64> = xs.iter().map(|&x: &f64| x.powi(3) - x).collect();
        let d = Dataset::from_rows(&rows, &ys).unwrap();
        let cfg = config(1.0, 1.0);
        assert!(lssvr::fit(&d, &cfg).unwrap().b.abs() < 1e-14);
        for eps in [1e-3, 1.0, 10.0] {
            assert!(gap_closed_form(&d, &cfg, eps).unwrap().amax() < 1e-13);
        }
    }

    #[test]
    fn closed_form_matches_two_solves_on_two_point() {
        let cfg = config(1.0, 1.0);
        let closed = gap_closed_form(&two_point(), &cfg, 1.0).unwrap();
        let direct = gap_direct(&two_point(), &cfg, 1.0).unwrap();
        assert!((closed - direct).amax() <= 1e-10);
    }

    #[test]
    fn direct_gap_vanishes_at_zero_epsilon() {
        let d = random_problem(2, 10, 3);
        let cfg = config(0.5, 1.0);
        let theta = lssvr::fit(&d, &cfg).unwrap().theta();
        let g = gap_direct(&d, &cfg, 0.0).unwrap();
        assert!(g.norm() <= 1e-9 * theta.norm().max(1.0));
    }

    #[test]
    fn direct_gap_first_order_bound() {
        let d = random_problem(3, 10, 2);
        let cfg = config(1.0, 1.0);
        let a = GapAnalysis::new(&d, &cfg).unwrap();
        let bound = a.first_order_coefficient().norm();
        let g = gap_direct(&d, &cfg, 1e-6).unwrap();
        assert!(g.norm() <= 1e-6 * bound * (1.0 + 1e-6));
    }

    #[test]
    fn gap_norm_equals_closed_form_norm() {
        let d = random_problem(4, 12, 2);
        let cfg = config(2.0, 0.8);
        let a = GapAnalysis::new(&d, &cfg).unwrap();
        let coef = a.first_order_coefficient().norm();
        for eps in [1e-4, 1e-2, 1.0, 10.0] {
            let direct = a.direct(eps).unwrap().norm();
            let exact = eps * coef / (1.0 + eps * a.q());
            assert!((direct - exact).abs() <= 1e-8 * exact.max(1e-12) + 1e-12, "eps {eps}");
        }
    }

    #[test]
    fn map_estimate_on_sinc_within_gap() {
        let d = crate::data::gen_sinc(200, -2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI, 4).unwrap();
        let cfg = config(1.0, 1.0);
        let eps = 1e-4;
        let post = bayes::posterior(&d, &EpsLssvrConfig::from_lssvr(eps, &cfg).unwrap()).unwrap();
        let theta = lssvr::fit(&d, &cfg).unwrap().theta();
        let closed = gap_closed_form(&d, &cfg, eps).unwrap();
        let residual = (&theta - post.map_estimate()) - &closed;
        assert!(residual.norm() <= 1e-8 * theta.norm().max(1.0));
    }

    #[test]
    fn arse_examples() {
        assert_eq!(arse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(arse(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 1.5);
        assert_eq!(arse(&[-3.0], &[3.0]).unwrap(), 6.0);
        assert!(arse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(arse(&[], &[]).is_err());
    }

    #[test]
    fn arse_is_a_metric_on_fixed_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let v: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..7).map(|_| rng.gen_range(-5.0..5.0)).collect())
                .collect();
            let ab = arse(&v[0], &v[1]).unwrap();
            assert!(ab >= 0.0);
            assert_eq!(ab, arse(&v[1], &v[0]).unwrap());
            assert!(arse(&v[0], &v[2]).unwrap() <= ab + arse(&v[1], &v[2]).unwrap() + 1e-12);
        }
    }

    #[test]
    fn sweep_is_monotone_on_default_grid() {
        let d = random_problem(5, 30, 2);
        let report = sweep(&d, &config(0.5, 1.0), &default_exponents(), None).unwrap();
        assert_eq!(report.records.len(), 11);
        for w in report.records.windows(2) {
            assert!(w[1].epsilon < w[0].epsilon);
            assert!(w[1].gap_norm < w[0].gap_norm);
            assert!(w[1].arse < w[0].arse);
        }
        for r in &report.records {
            let diff: f64 = r
                .gap_closed_form
                .iter()
                .zip(&r.gap_direct)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(diff <= 1e-8);
        }
    }

    #[test]
    fn sweep_with_zero_epsilon_appended() {
        let d = random_problem(6, 15, 1);
        let report = sweep(&d, &config(0.5, 1.0), &[f64::INFINITY, 2.0], None).unwrap();
        assert_eq!(report.exponents, vec![2.0, f64::INFINITY]);
        let last = report.records.last().unwrap();
        assert_eq!(last.epsilon, 0.0);
        assert!(last.arse <= 1e-9);
    }

    #[test]
    fn sweep_gap_ratio_is_first_order() {
        let d = random_problem(7, 10, 3);
        let report = sweep(&d, &config(1.0, 1.0), &[4.0, 5.0], None).unwrap();
        let r4 = report.records[0].gap_norm / 1e-4;
        let r5 = report.records[1].gap_norm / 1e-5;
        assert!((r4 / r5 - 1.0).abs() < 0.01);
    }

    #[test]
    fn sweep_prediction_gap_bounded_by_parameter_gap() {
        let d = random_problem(8, 12, 2);
        let cfg = config(0.5, 1.0);
        let eval = DMatrix::from_fn(9, 2, |i, j| (i as f64 - 4.0) * 0.4 + j as f64 * 0.1);
        let a = GapAnalysis::new(&d, &cfg).unwrap();
        let phi = design_matrix(&kernel::cross_gram(&eval, d.inputs(), &cfg.kernel).unwrap());
        for eps in [1.0, 1e-2, 1e-4] {
            let gap = a.direct(eps).unwrap();
            let diff = &phi * &gap;
            for i in 0..eval.nrows() {
                assert!(diff[i].abs() <= phi.row(i).norm() * gap.norm() * (1.0 + 1e-12));
            }
        }
        let report = sweep(&d, &cfg, &[0.0, 1.0], Some(&eval)).unwrap();
        assert!(report.records[1].arse < report.records[0].arse);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let d = random_problem(9, 5, 1);
        let cfg = config(0.5, 1.0);
        assert!(sweep(&d, &cfg, &[], None).is_err());
        assert!(sweep(&d, &cfg, &[-1.0], None).is_err());
        assert!(sweep(&d, &cfg, &[1.0, 1.0], None).is_err());
        assert!(sweep(&d, &cfg, &[f64::NAN], None).is_err());
    }

    #[test]
    fn sweep_csv_layout() {
        let d = random_problem(10, 6, 1);
        let report = sweep(&d, &config(0.5, 1.0), &[0.0, 0.5], None).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "neg_log10_eps,gap_norm,arse");
        assert_eq!(lines.len(), 3);
        let fields: Vec<f64> = lines[2].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields[0], 0.5);
        assert_eq!(fields[1], report.records[1].gap_norm);
        assert_eq!(fields[2], report.records[1].arse);
        let back: GapSweepReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn kkt_on_well_conditioned_fit() {
        let d = random_problem(11, 15, 2);
        let m = lssvr::fit(&d, &config(3.0, 1.0)).unwrap();
        let k = kkt_check(&m, d.targets()).unwrap();
        assert!(k.satisfied(1e-8), "{k:?}");
        assert!(k.alpha_sum <= 1e-8 && k.dual_violation <= 1e-8 && k.residual_norm <= 1e-8);
    }

    #[test]
    fn kkt_detects_perturbation() {
        let d = random_problem(12, 10, 2);
        let mut m = lssvr::fit(&d, &config(1.0, 1.0)).unwrap();
        m.alpha[0] += 0.1;
        let k = kkt_check(&m, d.targets()).unwrap();
        assert!((k.alpha_sum - 0.1).abs() < 1e-8);
        assert!(!k.satisfied(1e-8));
    }

    #[test]
    fn kkt_constant_targets() {
        let base = random_problem(13, 6, 2);
        let d = Dataset::new(base.inputs().clone(), DVector::from_element(6, -1.25)).unwrap();
        let m = lssvr::fit(&d, &config(1.0, 1.0)).unwrap();
        let k = kkt_check(&m, d.targets()).unwrap();
        assert!(k.alpha_sum < 1e-14 && k.dual_violation < 1e-14 && k.residual_norm < 1e-14);
        assert!(kkt_check(&m, &DVector::zeros(3)).is_err());
    }
}
