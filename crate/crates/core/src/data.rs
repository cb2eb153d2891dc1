//! Regression datasets: CSV loading, z-scoring, seeded splits and the
//! synthetic generators used by the demos.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// N inputs of dimension D with one real target each.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: DMatrix<f64>,
    targets: DVector<f64>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(inputs: DMatrix<f64>, targets: DVector<f64>) -> Result<Self> {
        Self::with_names(inputs, targets, None)
    }

    pub fn with_names(inputs: DMatrix<f64>, targets: DVector<f64>, feature_names: Option<Vec<String>>) -> Result<Self> {
        if inputs.nrows() == 0 || inputs.ncols() == 0 {
            return Err(Error::invalid("dataset needs at least one row and one feature"));
        }
        if inputs.nrows() != targets.len() {
            return Err(Error::DimensionMismatch {
                context: "dataset targets",
                expected: inputs.nrows(),
                found: targets.len(),
            });
        }
        if let Some(names) = &feature_names {
            if names.len() != inputs.ncols() {
                return Err(Error::DimensionMismatch {
                    context: "feature names",
                    expected: inputs.ncols(),
                    found: names.len(),
                });
            }
        }
        if inputs.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains non-finite values"));
        }
        Ok(Dataset {
            inputs,
            targets,
            feature_names,
        })
    }

    /// Builds a dataset from row vectors.
    pub fn from_rows(rows: &[Vec<f64>], targets: &[f64]) -> Result<Self> {
        Self::new(rows_to_matrix(rows)?, DVector::from_column_slice(targets))
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    fn select(&self, rows: &[usize]) -> Result<Dataset> {
        let inputs = self.inputs.select_rows(rows);
        let targets = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.targets[i]));
        Dataset::with_names(inputs, targets, self.feature_names.clone())
    }
}

/// Stacks equal-length rows into an N×D matrix.
pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = rows.first().map(Vec::len).unwrap_or(0);
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            context: "input rows",
            expected: d,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Which CSV column holds the regression target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetColumn {
    Name(String),
    Index(usize),
    Last,
}

impl TargetColumn {
    /// A bare non-negative integer is an index; anything else is a header name.
    pub fn parse(s: &str) -> TargetColumn {
        match s.parse::<usize>() {
            Ok(i) => TargetColumn::Index(i),
            Err(_) => TargetColumn::Name(s.to_string()),
        }
    }
}

/// Loads a dataset from comma-separated decimals. With `target = None` every
/// column is an input and the targets are zero (useful for prediction inputs).
pub fn load_csv(path: impl AsRef<Path>, target: Option<&TargetColumn>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, target, has_header)
}

pub fn parse_csv(text: &str, target: Option<&TargetColumn>, has_header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header: Option<Vec<String>> = if has_header {
        let h = reader.headers().map_err(|e| csv_error(e, 1))?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };

    let first_data_line = if has_header { 2 } else { 1 };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = header.as_ref().map(Vec::len);
    for (k, record) in reader.records().enumerate() {
        let line = first_data_line + k;
        let record = record.map_err(|e| csv_error(e, line))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                row: line,
                column: record.len().min(expected) + 1,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(expected);
        for (col, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::Parse {
                    row: line,
                    column: col + 1,
                    message: "missing value".into(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: line,
                column: col + 1,
                message: format!("not a decimal number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: col + 1,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    let width = width.unwrap_or(0);
    if rows.is_empty() {
        return Err(Error::invalid("CSV contains no data rows"));
    }

    let target_idx = match target {
        None => None,
        Some(TargetColumn::Last) => Some(width - 1),
        Some(TargetColumn::Index(i)) => {
            if *i >= width {
                return Err(Error::invalid(format!(
                    "target column index {i} out of range for {width} columns"
                )));
            }
            Some(*i)
        }
        Some(TargetColumn::Name(name)) => {
            let h = header.as_ref().ok_or_else(|| {
                Error::invalid(format!(
                    "target column {name:?} given by name but the CSV has no header"
                ))
            })?;
            Some(
                h.iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::invalid(format!("no column named {name:?}")))?,
            )
        }
    };

    let input_cols: Vec<usize> = (0..width).filter(|c| Some(*c) != target_idx).collect();
    if input_cols.is_empty() {
        return Err(Error::invalid("CSV has no input columns besides the target"));
    }
    let inputs = DMatrix::from_fn(rows.len(), input_cols.len(), |i, j| rows[i][input_cols[j]]);
    let targets = match target_idx {
        Some(t) => DVector::from_iterator(rows.len(), rows.iter().map(|r| r[t])),
        None => DVector::zeros(rows.len()),
    };
    let names = header.map(|h| input_cols.iter().map(|&c| h[c].clone()).collect());
    Dataset::with_names(inputs, targets, names)
}

fn csv_error(e: csv::Error, line: usize) -> Error {
    Error::Parse {
        row: e.position().map(|p| p.line() as usize).unwrap_or(line),
        column: 0,
        message: e.to_string(),
    }
}

/// How [`standardize`] treats zero-variance features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantFeatures {
    Reject,
    /// Keep the feature, centred, with its std recorded as 1.
    PassThrough,
}

/// Per-feature z-score statistics, estimated with the `n - 1` denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams {
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub target: Option<(f64, f64)>,
}

impl StandardizationParams {
    pub fn fit(data: &Dataset, constant: ConstantFeatures, targets: bool) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::invalid("standardization needs at least 2 rows"));
        }
        let mut input_mean = Vec::with_capacity(data.dim());
        let mut input_std = Vec::with_capacity(data.dim());
        for j in 0..data.dim() {
            let col: Vec<f64> = data.inputs.column(j).iter().copied().collect();
            let (m, s) = mean_std(&col);
            let s = if s > 0.0 {
                s
            } else if constant == ConstantFeatures::PassThrough {
                1.0
            } else {
                let name = data
                    .feature_names()
                    .map(|n| n[j].clone())
                    .unwrap_or_else(|| format!("#{j}"));
                return Err(Error::invalid(format!("feature {name} has zero variance")));
            };
            input_mean.push(m);
            input_std.push(s);
        }
        let target = if targets {
            let (m, s) = mean_std(data.targets.as_slice());
            if s <= 0.0 {
                return Err(Error::invalid("target has zero variance"));
            }
            Some((m, s))
        } else {
            None
        };
        Ok(StandardizationParams {
            input_mean,
            input_std,
            target,
        })
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        self.map(data, |v, m, s| (v - m) / s)
    }

    pub fn inverse(&self, data: &Dataset) -> Result<Dataset> {
        self.map(data, |v, m, s| v * s + m)
    }

    fn map(&self, data: &Dataset, f: impl Fn(f64, f64, f64) -> f64) -> Result<Dataset> {
        if data.dim() != self.input_mean.len() {
            return Err(Error::DimensionMismatch {
                context: "standardization",
                expected: self.input_mean.len(),
                found: data.dim(),
            });
        }
        let inputs = DMatrix::from_fn(data.len(), data.dim(), |i, j| {
            f(data.inputs[(i, j)], self.input_mean[j], self.input_std[j])
        });
        let targets = match self.target {
            Some((m, s)) => data.targets.map(|v| f(v, m, s)),
            None => data.targets.clone(),
        };
        Dataset::with_names(inputs, targets, data.feature_names.clone())
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Z-scores `data` using statistics estimated on `fit_on`.
pub fn standardize(
    data: &Dataset,
    fit_on: &Dataset,
    constant: ConstantFeatures,
) -> Result<(Dataset, StandardizationParams)> {
    let params = StandardizationParams::fit(fit_on, constant, false)?;
    Ok((params.apply(data)?, params))
}

/// Shuffles rows with a seeded generator and splits off `test_fraction` of them.
pub fn split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = data.len();
    let n_test = ((n as f64) * test_fraction).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::invalid(format!(
            "cannot split {n} rows with test fraction {test_fraction}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (test, train) = idx.split_at(n_test);
    Ok((data.select(train)?, data.select(test)?))
}

/// Normalized sinc, `sin(πx) / (πx)`, equal to 1 at the origin.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// `n` inputs drawn uniformly from `[lo, hi]` with sinc targets.
pub fn gen_sinc(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Dataset> {
    check_range(lo, hi)?;
    if n == 0 {
        return Err(Error::invalid("sinc sample size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(lo, hi);
    let xs: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
    let targets = DVector::from_iterator(n, xs.iter().map(|&x| sinc(x)));
    Dataset::new(DMatrix::from_column_slice(n, 1, &xs), targets)
}

/// Smooth synthetic regression problem with standard-normal inputs in `d`
/// dimensions, a nonzero-mean target and Gaussian-ish noise.
pub fn gen_smooth(n: usize, d: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("synthetic problem needs n ≥ 1 and d ≥ 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let offset = rng.gen_range(1.0..3.0);
    let mut normal = || {
        // Box–Muller
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    };
    let mut inputs = DMatrix::zeros(n, d);
    let mut targets = DVector::zeros(n);
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..d {
            let x = normal();
            inputs[(i, j)] = x;
            s += weights[j] * x;
        }
        targets[i] = offset + s.sin() + 0.3 * inputs[(i, 0)] * inputs[(i, 0)] + noise * normal();
    }
    Dataset::new(inputs, targets)
}

/// `m` equally spaced points from `lo` to `hi` inclusive, as an M×1 matrix.
pub fn grid(lo: f64, hi: f64, m: usize) -> Result<DMatrix<f64>> {
    check_range(lo, hi)?;
    if m < 2 {
        return Err(Error::invalid(format!("grid needs at least 2 points, got {m}")));
    }
    let step = (hi - lo) / (m - 1) as f64;
    Ok(DMatrix::from_fn(m, 1, |i, _| {
        if i == m - 1 {
            hi
        } else {
            lo + step * i as f64
        }
    }))
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("invalid range [{lo}, {hi}]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_header_by_name() {
        let d = parse_csv("x,y\n0,1\n1,2\n2,3\n", Some(&TargetColumn::Name("y".into())), true).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.dim(), 1);
        assert_eq!(d.targets().as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(d.inputs().column(0).as_slice(), &[0.0, 1.0, 2.0]);
        assert_eq!(d.feature_names().unwrap(), &["x".to_string()]);
    }

    #[test]
    fn csv_target_in_middle_keeps_column_order() {
        let d = parse_csv("1,10,2\n3,20,4\n", Some(&TargetColumn::Index(1)), false).unwrap();
        assert_eq!(d.targets().as_slice(), &[10.0, 20.0]);
        assert_eq!(d.inputs()[(1, 0)], 3.0);
        assert_eq!(d.inputs()[(1, 1)], 4.0);
    }

    #[test]
    fn csv_last_column_target() {
        let d = parse_csv("1,2,3\n4,5,6\n", Some(&TargetColumn::Last), false).unwrap();
        assert_eq!(d.targets().as_slice(), &[3.0, 6.0]);
        assert_eq!(d.dim(), 2);
        assert_eq!(TargetColumn::parse("2"), TargetColumn::Index(2));
        assert_eq!(TargetColumn::parse("y"), TargetColumn::Name("y".into()));
    }

    #[test]
    fn csv_target_index_out_of_range() {
        let err = parse_csv("1,2\n", Some(&TargetColumn::Index(5)), false).unwrap_err();
        assert!(err.to_string().contains('5'), "{err}");
    }

    #[test]
    fn csv_nan_is_parse_error_with_location() {
        let err = parse_csv("x,y\n0,1\n1,NaN\n", Some(&TargetColumn::Index(1)), true).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => assert_eq!((row, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_missing_and_garbage() {
        assert!(matches!(
            parse_csv("1,\n", Some(&TargetColumn::Index(0)), false),
            Err(Error::Parse { row: 1, column: 2, .. })
        ));
        assert!(matches!(
            parse_csv("1,abc\n", Some(&TargetColumn::Index(0)), false),
            Err(Error::Parse { .. })
        ));
        assert!(parse_csv("x,y\n", None, true).is_err());
    }

    #[test]
    fn csv_without_target_is_all_inputs() {
        let d = parse_csv("0.5\n1.5\n", None, false).unwrap();
        assert_eq!(d.dim(), 1);
        assert_eq!(d.targets().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn load_csv_missing_file_is_io() {
        let err = load_csv("/nonexistent/file.csv", None, true).unwrap_err();
        assert_eq!(err.category(), crate::ErrorCategory::Io);
    }

    #[test]
    fn dataset_rejects_bad_shapes() {
        assert!(Dataset::new(DMatrix::zeros(2, 1), DVector::zeros(3)).is_err());
        assert!(Dataset::new(DMatrix::zeros(0, 1), DVector::zeros(0)).is_err());
        assert!(Dataset::new(DMatrix::from_element(1, 1, f64::INFINITY), DVector::zeros(1)).is_err());
    }

    #[test]
    fn standardize_against_self() {
        let d = gen_smooth(40, 3, 0.1, 2).unwrap();
        let (z, params) = standardize(&d, &d, ConstantFeatures::Reject).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = z.inputs().column(j).iter().copied().collect();
            let (m, s) = mean_std(&col);
            assert!(m.abs() < 1e-12);
            assert!((s - 1.0).abs() < 1e-12);
        }
        let back = params.inverse(&z).unwrap();
        assert!((back.inputs() - d.inputs()).amax() < 1e-12);
    }

    #[test]
    fn standardize_constant_feature() {
        let d = Dataset::from_rows(&[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]], &[0.0, 1.0, 2.0]).unwrap();
        assert!(standardize(&d, &d, ConstantFeatures::Reject).is_err());
        let (z, p) = standardize(&d, &d, ConstantFeatures::PassThrough).unwrap();
        assert_eq!(p.input_std[1], 1.0);
        assert_eq!(z.inputs().column(1).as_slice(), &[0.0, 0.0, 0.0]);
        let single = Dataset::from_rows(&[vec![1.0]], &[0.0]).unwrap();
        assert!(standardize(&single, &single, ConstantFeatures::PassThrough).is_err());
    }

    #[test]
    fn standardize_targets_round_trip() {
        let d = gen_smooth(20, 2, 0.1, 8).unwrap();
        let p = StandardizationParams::fit(&d, ConstantFeatures::Reject, true).unwrap();
        let back = p.inverse(&p.apply(&d).unwrap()).unwrap();
        assert!((back.targets() - d.targets()).amax() < 1e-12);
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(1.0).abs() < 1e-15);
        assert!((sinc(0.5) - 2.0 / PI).abs() < 1e-15);
        assert!((sinc(0.5) - std::f64::consts::FRAC_2_PI).abs() < 1e-15);
    }

    #[test]
    fn gen_sinc_is_seeded() {
        let a = gen_sinc(50, -2.0 * PI, 2.0 * PI, 7).unwrap();
        let b = gen_sinc(50, -2.0 * PI, 2.0 * PI, 7).unwrap();
        let c = gen_sinc(50, -2.0 * PI, 2.0 * PI, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.inputs().iter().all(|&x| (-2.0 * PI..=2.0 * PI).contains(&x)));
        for i in 0..a.len() {
            assert_eq!(a.targets()[i], sinc(a.inputs()[(i, 0)]));
        }
        assert!(gen_sinc(10, 1.0, 1.0, 0).is_err());
        assert!(gen_sinc(0, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn grid_points() {
        assert_eq!(grid(0.0, 1.0, 2).unwrap().as_slice(), &[0.0, 1.0]);
        assert_eq!(grid(-1.0, 1.0, 3).unwrap().as_slice(), &[-1.0, 0.0, 1.0]);
        let g = grid(0.0, 10.0, 11).unwrap();
        for (i, v) in g.iter().enumerate() {
            assert_eq!(*v, i as f64);
        }
        assert!(grid(0.0, 1.0, 1).is_err());
        assert!(grid(1.0, 0.0, 5).is_err());
    }

    #[test]
    fn split_is_disjoint_and_seeded() {
        let d = gen_smooth(20, 1, 0.0, 1).unwrap();
        let (tr, te) = split(&d, 0.25, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (15, 5));
        let (tr2, _) = split(&d, 0.25, 3).unwrap();
        assert_eq!(tr, tr2);
        let mut all: Vec<f64> = tr.inputs().iter().chain(te.inputs().iter()).copied().collect();
        all.sort_by(f64::total_cmp);
        let mut orig: Vec<f64> = d.inputs().iter().copied().collect();
        orig.sort_by(f64::total_cmp);
        assert_eq!(all, orig);
    }
}
