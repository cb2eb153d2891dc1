use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "lssvr",
    version,
    about = "LS-SVR and Bayesian epsilon-LS-SVR regression with an RBF kernel"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the LS-SVR dual and write the model as JSON.
    Fit(FitArgs),
    /// Fit the epsilon-LS-SVR posterior and write it as JSON.
    Posterior(PosteriorArgs),
    /// Gap between the two estimators over a grid of epsilon values.
    GapSweep(SweepArgs),
    /// Predict with a saved model or posterior.
    Predict(PredictArgs),
    /// Posterior predictions for noiseless sinc data on a dense grid.
    SincDemo(SincDemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Where the training data comes from.
#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct SourceArgs {
    /// CSV file with one row per example.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,

    /// Generate N sinc points uniformly on [LO, HI]. Bounds accept a `pi`
    /// suffix, e.g. `-2pi`.
    #[arg(long, num_args = 3, value_names = ["N", "LO", "HI"], allow_hyphen_values = true)]
    pub sinc: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    /// Target column, by header name or zero-based index. Defaults to the
    /// last column.
    #[arg(long, value_name = "NAME|IDX")]
    pub target: Option<String>,

    /// The CSV has no header row.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Regularization constant.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,

    /// Kernel width, k(x, z) = exp(-c^2 |x - z|^2). Default 1.
    #[arg(long, conflicts_with = "c2", allow_negative_numbers = true)]
    pub c: Option<f64>,

    /// Squared kernel width.
    #[arg(long, allow_negative_numbers = true)]
    pub c2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    /// Prior precision of the bias.
    #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
    pub epsilon: f64,

    /// Noise variance.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub sigma2: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub bayes: BayesArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Leave the covariance out of the document. Such a file can't give
    /// predictive variances.
    #[arg(long)]
    pub mean_only: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated values of -log10(epsilon); `inf` means epsilon = 0.
    /// Default 0,0.5,...,5.
    #[arg(long, value_delimiter = ',', value_name = "T,...", allow_negative_numbers = true)]
    pub exponents: Option<Vec<f64>>,
    /// CSV of inputs on which to compare predictions; defaults to the
    /// training inputs. All columns are inputs unless --eval-target is given.
    #[arg(long, value_name = "PATH")]
    pub eval: Option<PathBuf>,
    #[arg(long, value_name = "NAME|IDX", requires = "eval")]
    pub eval_target: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
#[group(id = "saved", required = true, multiple = false)]
pub struct SavedArgs {
    /// Model JSON written by `fit`.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Posterior JSON written by `posterior`.
    #[arg(long, value_name = "FILE")]
    pub posterior: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub saved: SavedArgs,
    /// CSV of inputs. A --target column, if named, is dropped.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    #[arg(long, value_name = "NAME|IDX")]
    pub target: Option<String>,
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SincDemoArgs {
    /// Training sample size and range.
    #[arg(
        long,
        num_args = 3,
        value_names = ["N", "LO", "HI"],
        allow_hyphen_values = true,
        default_values = ["1200", "-2pi", "2pi"]
    )]
    pub sinc: Vec<String>,
    /// Prediction grid: range and number of points.
    #[arg(
        long,
        num_args = 3,
        value_names = ["LO", "HI", "M"],
        allow_hyphen_values = true,
        default_values = ["-3pi", "3pi", "601"]
    )]
    pub grid: Vec<String>,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub bayes: BayesArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}
