//! Browser-independent half of the demo. Everything here is plain Rust so it
//! can be tested natively.

use std::f64::consts::PI;

use lssvr_core::bayes;
use lssvr_core::data::{self, Dataset};
use lssvr_core::equivalence::{self, default_exponents};
use lssvr_core::{EpsLssvrConfig, Error, KernelConfig, LssvrConfig, Result};

/// Browsers stall on dense solves much above this.
pub const MAX_POINTS: usize = 600;

/// Values per row in [`flatten_bands`] output.
pub const BAND_STRIDE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandRow {
    pub x: f64,
    /// NaN when no ground truth is known.
    pub truth: f64,
    pub mean: f64,
    pub var_full: f64,
    pub var_paper: f64,
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_POINTS {
        return Err(Error::invalid(format!(
            "at most {MAX_POINTS} training points in the browser, got {n}"
        )));
    }
    Ok(())
}

fn bands(
    train: &Dataset,
    config: &EpsLssvrConfig,
    lo: f64,
    hi: f64,
    m: usize,
    truth: impl Fn(f64) -> f64,
) -> Result<Vec<BandRow>> {
    let grid = data::grid(lo, hi, m)?;
    let post = bayes::posterior(train, config)?;
    let moments = post.predictive_many(&grid)?;
    Ok(grid
        .column(0)
        .iter()
        .zip(moments)
        .map(|(&x, p)| BandRow {
            x,
            truth: truth(x),
            mean: p.mean,
            var_full: p.variance_full,
            var_paper: p.variance_paper,
        })
        .collect())
}

/// Seeded sinc sample on [-2π, 2π], as `(x, y)` pairs.
pub fn sinc_sample(n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    check_size(n)?;
    let d = data::gen_sinc(n, -2.0 * PI, 2.0 * PI, seed)?;
    Ok((0..d.len()).map(|i| (d.inputs()[(i, 0)], d.targets()[i])).collect())
}

/// Posterior bands over [-3π, 3π] for a seeded sinc sample.
pub fn sinc_bands(n: usize, seed: u64, gamma: f64, c: f64, epsilon: f64, grid_points: usize) -> Result<Vec<BandRow>> {
    let config = EpsLssvrConfig::new(epsilon, gamma, KernelConfig::new(c)?)?;
    check_size(n)?;
    let train = data::gen_sinc(n, -2.0 * PI, 2.0 * PI, seed)?;
    bands(&train, &config, -3.0 * PI, 3.0 * PI, grid_points, data::sinc)
}

/// Posterior bands for arbitrary 1-D points, e.g. placed by clicking.
#[allow(clippy::too_many_arguments)]
pub fn point_bands(
    xs: &[f64],
    ys: &[f64],
    gamma: f64,
    c: f64,
    epsilon: f64,
    lo: f64,
    hi: f64,
    grid_points: usize,
) -> Result<Vec<BandRow>> {
    let config = EpsLssvrConfig::new(epsilon, gamma, KernelConfig::new(c)?)?;
    check_size(xs.len())?;
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let train = Dataset::from_rows(&rows, ys)?;
    bands(&train, &config, lo, hi, grid_points, |_| f64::NAN)
}

/// `(-log10 ε, gap_norm, arse)` over the default grid for a seeded sinc sample.
pub fn gap_curve(n: usize, seed: u64, gamma: f64, c: f64) -> Result<Vec<[f64; 3]>> {
    let config = LssvrConfig::new(gamma, KernelConfig::new(c)?)?;
    check_size(n)?;
    let train = data::gen_sinc(n, -2.0 * PI, 2.0 * PI, seed)?;
    let report = equivalence::sweep(&train, &config, &default_exponents(), None)?;
    Ok(report
        .exponents
        .iter()
        .zip(&report.records)
        .map(|(&t, r)| [t, r.gap_norm, r.arse])
        .collect())
}

pub fn flatten_bands(rows: &[BandRow]) -> Vec<f64> {
    rows.iter()
        .flat_map(|r| [r.x, r.truth, r.mean, r.var_full, r.var_paper])
        .collect()
}
