//! # lssvr-core
//!
//! Least-squares support vector regression with a Gaussian RBF kernel, and
//! its Bayesian counterpart: the ε-LS-SVR, an RBF network with one hidden
//! unit per training point and a Gaussian prior on the output weights and
//! bias.
//!
//! The two estimators solve closely related linear systems. The LS-SVR dual
//! parameters `θ_LS = (b, α)` solve the bordered system `Ψ θ = (0, y)`; the
//! ε-LS-SVR posterior has precision `ΨᵀΨ + ε s₁s₁ᵀ`. Their difference is
//! available in closed form and vanishes linearly as `ε → 0`.
//!
//! - [`kernel`]: RBF kernel and Gram matrices.
//! - [`lssvr`]: dual LS-SVR fit and prediction, least-squares RBF network.
//! - [`bayes`]: prior, posterior, covariance by rank-one update, predictive
//!   moments.
//! - [`equivalence`]: closed-form and direct parameter gap, ε-sweep, KKT
//!   diagnostics.
//! - [`data`]: CSV loading, standardization, sinc and synthetic generators.

pub mod bayes;
pub mod data;
pub mod equivalence;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod lssvr;

pub use bayes::{EpsLssvrConfig, GaussianPosterior, PosteriorDocument, PosteriorSnapshot, PredictiveMoments};
pub use data::{Dataset, TargetColumn};
pub use equivalence::{GapReport, GapSweepReport, KktDiagnostics};
pub use error::{Error, ErrorCategory, Result};
pub use kernel::{KernelConfig, KernelMatrix};
pub use lssvr::{LssvrConfig, LssvrModel};
