//! Bayesian ε-LS-SVR: an RBF network over all training points whose Gaussian
//! prior on `(b, α)` makes the posterior precision `ΨᵀΨ + ε s₁s₁ᵀ`.
//!
//! For small `ε` the prior precision itself is indefinite (the `ε → 0` limit
//! is a flat prior on the bias). Everything here therefore works in natural
//! parameters and never inverts the prior; only the posterior precision,
//! which is positive definite whenever `Ψ` is invertible, is factored.
//!
//! The observation variance defaults to `σ² = 1`, the value under which the
//! posterior mode coincides with the LS-SVR solution as `ε → 0`. Other values
//! scale the likelihood precision to `σ⁻² ΦᵀΦ`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{matrix_to_rows, rows_to_matrix, Dataset};
use crate::error::{Error, Result};
use crate::kernel::{self, KernelConfig};
use crate::linalg::{symmetrize, SpdFactor, SymmetricLu};
use crate::lssvr::{self, design_matrix, padded_targets, saddle_matrix, LssvrConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsLssvrConfig {
    epsilon: f64,
    gamma: f64,
    sigma2: f64,
    pub kernel: KernelConfig,
}

impl EpsLssvrConfig {
    pub fn new(epsilon: f64, gamma: f64, kernel: KernelConfig) -> Result<Self> {
        Self::with_sigma2(epsilon, gamma, kernel, 1.0)
    }

    pub fn with_sigma2(epsilon: f64, gamma: f64, kernel: KernelConfig, sigma2: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::invalid(format!(
                "epsilon must be finite and non-negative, got {epsilon}"
            )));
        }
        lssvr::check_gamma(gamma)?;
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::invalid(format!(
                "sigma2 must be positive and finite, got {sigma2}"
            )));
        }
        Ok(EpsLssvrConfig {
            epsilon,
            gamma,
            sigma2,
            kernel,
        })
    }

    pub fn from_lssvr(epsilon: f64, config: &LssvrConfig) -> Result<Self> {
        Self::new(epsilon, config.gamma(), config.kernel)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn lssvr(&self) -> LssvrConfig {
        LssvrConfig::new(self.gamma, self.kernel).expect("gamma validated at construction")
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::with_sigma2(epsilon, self.gamma, self.kernel, self.sigma2)
    }

    /// `σ⁻² - 1`, the weight of the extra likelihood term when `σ² ≠ 1`.
    fn excess_likelihood_precision(&self) -> f64 {
        1.0 / self.sigma2 - 1.0
    }
}

/// Gaussian prior on `(b, α)` in natural parameters: precision `Σ⁻¹` and
/// `Σ⁻¹μ = γ⁻¹ (0, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub precision: DMatrix<f64>,
    pub shift: DVector<f64>,
}

/// Prior precision assembled block by block:
/// `[[ε, γ⁻¹1ᵀ], [γ⁻¹1, 11ᵀ + 2γ⁻¹Ω + γ⁻²I]]`.
pub fn build_prior(data: &Dataset, config: &EpsLssvrConfig) -> Result<PriorSpec> {
    let omega = kernel::gram(data.inputs(), &config.kernel)?;
    let n = data.len();
    let g = 1.0 / config.gamma;
    let mut precision = DMatrix::zeros(n + 1, n + 1);
    precision[(0, 0)] = config.epsilon;
    for i in 1..=n {
        precision[(0, i)] = g;
        precision[(i, 0)] = g;
        for j in 1..=n {
            let mut v = 1.0 + 2.0 * g * omega[(i - 1, j - 1)];
            if i == j {
                v += g * g;
            }
            precision[(i, j)] = v;
        }
    }
    Ok(PriorSpec {
        precision,
        shift: padded_targets(data.targets()) * g,
    })
}

/// The same prior precision written as `ΨᵀΨ + ε s₁s₁ᵀ - ΦᵀΦ`.
pub fn prior_precision_structural(data: &Dataset, config: &EpsLssvrConfig) -> Result<DMatrix<f64>> {
    let omega = kernel::gram(data.inputs(), &config.kernel)?;
    let psi = saddle_matrix(&omega, config.gamma);
    let phi = design_matrix(&omega);
    let mut m = psi.tr_mul(&psi) - phi.tr_mul(&phi);
    m[(0, 0)] += config.epsilon;
    Ok(m)
}

/// Quantities of the posterior that do not depend on `ε`: `ΨᵀΨ` and `Ψᵀ(0, y)`,
/// plus the extra likelihood terms when `σ² ≠ 1`.
#[derive(Debug, Clone)]
pub(crate) struct PosteriorBase {
    pub gram: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl PosteriorBase {
    pub fn new(data: &Dataset, config: &EpsLssvrConfig) -> Result<Self> {
        let omega = kernel::gram(data.inputs(), &config.kernel)?;
        let psi = saddle_matrix(&omega, config.gamma);
        Ok(Self::from_psi(&psi, &omega, data.targets(), config))
    }

    pub fn from_psi(psi: &DMatrix<f64>, omega: &DMatrix<f64>, y: &DVector<f64>, config: &EpsLssvrConfig) -> Self {
        // Ψ is symmetric, and the plain product takes the blocked gemm path
        let mut gram = psi * psi;
        symmetrize(&mut gram);
        let mut rhs = psi.tr_mul(&padded_targets(y));
        let extra = config.excess_likelihood_precision();
        if extra != 0.0 {
            let phi = design_matrix(omega);
            gram += phi.transpose() * &phi * extra;
            rhs += phi.tr_mul(y) * extra;
        }
        PosteriorBase { gram, rhs }
    }

    /// Posterior precision and mean for one value of `ε`.
    pub fn solve(&self, epsilon: f64) -> Result<(DMatrix<f64>, SpdFactor, DVector<f64>)> {
        let mut precision = self.gram.clone();
        precision[(0, 0)] += epsilon;
        let factor = SpdFactor::factor(&precision, "posterior precision")?;
        let mean = factor.solve(&self.rhs);
        Ok((precision, factor, mean))
    }
}

/// Gaussian posterior over `(b, α)`. The covariance is only materialized when
/// first requested.
#[derive(Debug)]
pub struct GaussianPosterior {
    config: EpsLssvrConfig,
    train_inputs: DMatrix<f64>,
    mean: DVector<f64>,
    precision: DMatrix<f64>,
    factor: SpdFactor,
    covariance: OnceLock<DMatrix<f64>>,
}

pub fn posterior(data: &Dataset, config: &EpsLssvrConfig) -> Result<GaussianPosterior> {
    let base = PosteriorBase::new(data, config)?;
    GaussianPosterior::from_base(&base, data.inputs().clone(), config)
}

impl GaussianPosterior {
    pub(crate) fn from_base(base: &PosteriorBase, train_inputs: DMatrix<f64>, config: &EpsLssvrConfig) -> Result<Self> {
        let (precision, factor, mean) = base.solve(config.epsilon)?;
        Ok(GaussianPosterior {
            config: *config,
            train_inputs,
            mean,
            precision,
            factor,
            covariance: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &EpsLssvrConfig {
        &self.config
    }

    pub fn train_inputs(&self) -> &DMatrix<f64> {
        &self.train_inputs
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        self.covariance.get_or_init(|| self.factor.inverse())
    }

    /// Posterior mode, which for a Gaussian is the mean.
    pub fn map_estimate(&self) -> DVector<f64> {
        self.mean.clone()
    }

    pub fn predictive(&self, x: &[f64]) -> Result<PredictiveMoments> {
        let row = DMatrix::from_row_slice(1, x.len(), x);
        self.predictive_many(&row).map(|mut v| v.remove(0))
    }

    pub fn predictive_many(&self, inputs: &DMatrix<f64>) -> Result<Vec<PredictiveMoments>> {
        let k = kernel::cross_gram(inputs, &self.train_inputs, &self.config.kernel)?;
        Ok(moments(&k, &self.mean, |b| {
            let w = self.factor.whiten(b);
            w.column_iter().map(|c| c.norm_squared()).collect()
        }))
    }

    pub fn to_document(&self, with_covariance: bool) -> PosteriorDocument {
        PosteriorDocument {
            epsilon: self.config.epsilon,
            gamma: self.config.gamma,
            c: self.config.kernel.c(),
            sigma2: self.config.sigma2,
            mean: self.mean.iter().copied().collect(),
            covariance: with_covariance.then(|| matrix_to_rows(self.covariance())),
            train_inputs: matrix_to_rows(&self.train_inputs),
        }
    }
}

pub fn map_estimate(posterior: &GaussianPosterior) -> DVector<f64> {
    posterior.map_estimate()
}

pub fn predictive(posterior: &GaussianPosterior, x: &[f64]) -> Result<PredictiveMoments> {
    posterior.predictive(x)
}

/// Posterior covariance through the rank-one route
/// `Σ* = G - ε/(1 + εq) G s₁ s₁ᵀ G` with `G = (ΨᵀΨ)⁻¹` and `q = G₁₁`, where
/// `G` comes from two solves against an LU factorization of `Ψ`.
pub fn posterior_covariance_sm(data: &Dataset, config: &EpsLssvrConfig) -> Result<DMatrix<f64>> {
    if config.sigma2 != 1.0 {
        return Err(Error::invalid(
            "the rank-one covariance route needs sigma2 = 1 (precision ΨᵀΨ + εs₁s₁ᵀ)",
        ));
    }
    let system = lssvr::build_system(data, &config.lssvr())?;
    let lu = SymmetricLu::factor(&system.psi, "LS-SVR saddle system")?;
    Ok(sherman_morrison_covariance(&lu, config.epsilon))
}

/// `(ΨᵀΨ)⁻¹ = Ψ⁻¹Ψ⁻¹` for symmetric `Ψ`.
pub(crate) fn inverse_psi_gram(lu: &SymmetricLu) -> DMatrix<f64> {
    let first = lu.solve_matrix(&DMatrix::identity(lu.dim(), lu.dim()));
    let mut g = lu.solve_matrix(&first);
    symmetrize(&mut g);
    g
}

fn sherman_morrison_covariance(lu: &SymmetricLu, epsilon: f64) -> DMatrix<f64> {
    let g = inverse_psi_gram(lu);
    if epsilon == 0.0 {
        return g;
    }
    let q = g[(0, 0)];
    let v = g.column(0).into_owned();
    let scale = epsilon / (1.0 + epsilon * q);
    let mut cov = g - (&v * v.transpose()) * scale;
    symmetrize(&mut cov);
    cov
}

/// Mean and variance of `f(x) = b + Σᵢ αᵢ k(x, xᵢ)` under the posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveMoments {
    pub mean: f64,
    /// `φ(x)ᵀ Σ* φ(x)` with `φ(x) = (1, k(x, x₁), …, k(x, x_N))`.
    pub variance_full: f64,
    /// Kernel-only form `Σᵢⱼ k(x, xᵢ) k(x, xⱼ) Σ*_αα[i, j]`, ignoring the bias
    /// rows and columns of the covariance.
    pub variance_paper: f64,
}

impl PredictiveMoments {
    pub fn std_dev(&self) -> f64 {
        self.variance_full.max(0.0).sqrt()
    }

    /// `mean ± z·sd` from the full variance.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        let half = z * self.std_dev();
        (self.mean - half, self.mean + half)
    }
}

/// `quad(B)` must return `diag(Bᵀ Σ* B)` for the columns of `B`.
fn moments(
    kernel_values: &DMatrix<f64>,
    mean: &DVector<f64>,
    quad: impl Fn(&DMatrix<f64>) -> Vec<f64>,
) -> Vec<PredictiveMoments> {
    let phi = design_matrix(kernel_values);
    let means = &phi * mean;
    let phi_t = phi.transpose();
    let full = quad(&phi_t);
    let mut kernel_only = phi_t;
    kernel_only.row_mut(0).fill(0.0);
    let kernel_block = quad(&kernel_only);
    (0..means.len())
        .map(|i| PredictiveMoments {
            mean: means[i],
            variance_full: full[i],
            variance_paper: kernel_block[i],
        })
        .collect()
}

/// On-disk form of a posterior. `train_inputs` is needed to evaluate the
/// kernel at new points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDocument {
    pub epsilon: f64,
    pub gamma: f64,
    pub c: f64,
    pub sigma2: f64,
    pub mean: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<Vec<Vec<f64>>>,
    pub train_inputs: Vec<Vec<f64>>,
}

impl PosteriorDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("posterior document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A posterior restored from a [`PosteriorDocument`], with the covariance held
/// explicitly.
#[derive(Debug, Clone)]
pub struct PosteriorSnapshot {
    pub config: EpsLssvrConfig,
    pub mean: DVector<f64>,
    pub covariance: Option<DMatrix<f64>>,
    pub train_inputs: DMatrix<f64>,
}

impl PosteriorSnapshot {
    pub fn from_document(doc: &PosteriorDocument) -> Result<Self> {
        let config = EpsLssvrConfig::with_sigma2(doc.epsilon, doc.gamma, KernelConfig::new(doc.c)?, doc.sigma2)?;
        let train_inputs = rows_to_matrix(&doc.train_inputs)?;
        let n = train_inputs.nrows();
        if n == 0 || train_inputs.ncols() == 0 || doc.mean.len() != n + 1 {
            return Err(Error::invalid(format!(
                "posterior mean has {} entries for {} training inputs",
                doc.mean.len(),
                n
            )));
        }
        let covariance = match &doc.covariance {
            Some(rows) => {
                let m = rows_to_matrix(rows)?;
                if m.shape() != (n + 1, n + 1) {
                    return Err(Error::invalid(format!(
                        "posterior covariance is {}x{}, expected {}x{}",
                        m.nrows(),
                        m.ncols(),
                        n + 1,
                        n + 1
                    )));
                }
                Some(m)
            }
            None => None,
        };
        Ok(PosteriorSnapshot {
            config,
            mean: DVector::from_column_slice(&doc.mean),
            covariance,
            train_inputs,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&PosteriorDocument::from_json(text)?)
    }

    pub fn predictive_many(&self, inputs: &DMatrix<f64>) -> Result<Vec<PredictiveMoments>> {
        let cov = self
            .covariance
            .as_ref()
            .ok_or_else(|| Error::invalid("posterior document has no covariance; variances unavailable"))?;
        let k = kernel::cross_gram(inputs, &self.train_inputs, &self.config.kernel)?;
        Ok(moments(&k, &self.mean, |b| {
            let sb = cov * b;
            b.column_iter().zip(sb.column_iter()).map(|(x, y)| x.dot(&y)).collect()
        }))
    }
}
