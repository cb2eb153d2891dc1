//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Results cross the boundary as flat `Float64Array`s. Band rows are
//! `x, truth, mean, var_full, var_paper`; gap rows are
//! `neg_log10_eps, gap_norm, arse`.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: lssvr_core::Error) -> String {
    format!("{}: {e}", e.category())
}

/// `x, y` pairs of the seeded sinc sample.
#[wasm_bindgen(js_name = sincSample)]
pub fn sinc_sample(n: usize, seed: u32) -> Result<Vec<f64>, String> {
    let pts = demo::sinc_sample(n, u64::from(seed)).map_err(js)?;
    Ok(pts.into_iter().flat_map(|(x, y)| [x, y]).collect())
}

#[wasm_bindgen(js_name = sincBands)]
pub fn sinc_bands(
    n: usize,
    seed: u32,
    gamma: f64,
    c: f64,
    epsilon: f64,
    grid_points: usize,
) -> Result<Vec<f64>, String> {
    demo::sinc_bands(n, u64::from(seed), gamma, c, epsilon, grid_points)
        .map(|rows| demo::flatten_bands(&rows))
        .map_err(js)
}

#[wasm_bindgen(js_name = pointBands)]
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
) -> Result<Vec<f64>, String> {
    demo::point_bands(xs, ys, gamma, c, epsilon, lo, hi, grid_points)
        .map(|rows| demo::flatten_bands(&rows))
        .map_err(js)
}

#[wasm_bindgen(js_name = gapCurve)]
pub fn gap_curve(n: usize, seed: u32, gamma: f64, c: f64) -> Result<Vec<f64>, String> {
    demo::gap_curve(n, u64::from(seed), gamma, c)
        .map(|rows| rows.into_iter().flatten().collect())
        .map_err(js)
}
