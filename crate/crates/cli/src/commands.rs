use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use lssvr_core::bayes;
use lssvr_core::data::{self, load_csv};
use lssvr_core::equivalence::{self, checked_exponents, default_exponents};
use lssvr_core::linalg::fmt_f64;
use lssvr_core::lssvr;
use lssvr_core::{
    Dataset, EpsLssvrConfig, Error, KernelConfig, LssvrConfig, LssvrModel, PosteriorSnapshot, Result, TargetColumn,
};
use serde_json::json;

use crate::args::{
    BayesArgs, CsvArgs, FitArgs, Format, KernelArgs, PosteriorArgs, PredictArgs, SincDemoArgs, SourceArgs, SweepArgs,
};
use crate::output::{read_text, write_output, Report};

/// Parses a real number with an optional `pi` factor: `2pi`, `-pi`, `0.5*pi`.
pub fn parse_scalar(s: &str) -> Result<f64> {
    let t = s.trim();
    let (num, scale) = match t.strip_suffix("pi") {
        Some(head) => (head.strip_suffix('*').unwrap_or(head), PI),
        None => (t, 1.0),
    };
    let v = match num {
        "" | "+" if scale == PI => 1.0,
        "-" if scale == PI => -1.0,
        _ => num
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("not a number: {s:?}")))?,
    };
    let v = v * scale;
    if !v.is_finite() {
        return Err(Error::invalid(format!("value must be finite: {s:?}")));
    }
    Ok(v)
}

fn parse_count(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::invalid(format!("{what} must be a non-negative integer, got {s:?}")))
}

fn kernel_config(args: &KernelArgs) -> Result<KernelConfig> {
    match (args.c, args.c2) {
        (Some(c), _) => KernelConfig::new(c),
        (None, Some(c2)) => KernelConfig::from_c2(c2),
        (None, None) => KernelConfig::new(1.0),
    }
}

fn lssvr_config(args: &KernelArgs) -> Result<LssvrConfig> {
    LssvrConfig::new(args.gamma, kernel_config(args)?)
}

fn bayes_config(kernel: &KernelArgs, bayes: &BayesArgs) -> Result<EpsLssvrConfig> {
    EpsLssvrConfig::with_sigma2(bayes.epsilon, kernel.gamma, kernel_config(kernel)?, bayes.sigma2)
}

#[derive(Debug, Clone, Copy)]
struct SincSpec {
    n: usize,
    lo: f64,
    hi: f64,
}

impl SincSpec {
    fn parse(values: &[String]) -> Result<Self> {
        let [n, lo, hi] = values else {
            return Err(Error::invalid("--sinc takes N LO HI"));
        };
        let spec = SincSpec {
            n: parse_count(n, "sinc sample size")?,
            lo: parse_scalar(lo)?,
            hi: parse_scalar(hi)?,
        };
        if spec.n == 0 {
            return Err(Error::invalid("sinc sample size must be at least 1"));
        }
        if spec.lo >= spec.hi {
            return Err(Error::invalid(format!(
                "sinc range needs LO < HI, got [{}, {}]",
                spec.lo, spec.hi
            )));
        }
        Ok(spec)
    }
}

/// A training-data source, checked but not yet read.
enum Source {
    File {
        path: PathBuf,
        target: TargetColumn,
        has_header: bool,
    },
    Sinc(SincSpec),
}

impl Source {
    fn resolve(source: &SourceArgs, csv: &CsvArgs) -> Result<Self> {
        match (&source.data, &source.sinc) {
            (Some(path), None) => Ok(Source::File {
                path: path.clone(),
                target: csv.target.as_deref().map_or(TargetColumn::Last, TargetColumn::parse),
                has_header: !csv.no_header,
            }),
            (None, Some(spec)) => {
                if csv.target.is_some() || csv.no_header {
                    return Err(Error::invalid("--target and --no-header only apply to --data"));
                }
                Ok(Source::Sinc(SincSpec::parse(spec)?))
            }
            _ => Err(Error::invalid("exactly one of --data and --sinc is required")),
        }
    }

    fn load(&self, seed: u64) -> Result<Dataset> {
        match self {
            Source::File {
                path,
                target,
                has_header,
            } => load_csv(path, Some(target), *has_header),
            Source::Sinc(s) => data::gen_sinc(s.n, s.lo, s.hi, seed),
        }
    }
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

pub fn fit(args: &FitArgs) -> Result<()> {
    let config = lssvr_config(&args.kernel)?;
    let source = Source::resolve(&args.source, &args.csv)?;
    let data = source.load(args.seed)?;

    let model = lssvr::fit(&data, &config)?;
    let kkt = equivalence::kkt_check(&model, data.targets())?;
    write_output(args.out.as_deref(), &with_newline(model.to_json()))?;

    let report = Report::new(args.out.as_deref());
    report.line(format!("b = {}", fmt_f64(model.b)));
    report.line(format!("|alpha| = {}", fmt_f64(model.alpha.norm())));
    report.line(format!(
        "kkt: |sum alpha| = {}, max dual violation = {}, residual = {}",
        fmt_f64(kkt.alpha_sum),
        fmt_f64(kkt.dual_violation),
        fmt_f64(kkt.residual_norm)
    ));
    Ok(())
}

pub fn posterior(args: &PosteriorArgs) -> Result<()> {
    let config = bayes_config(&args.kernel, &args.bayes)?;
    let source = Source::resolve(&args.source, &args.csv)?;
    let data = source.load(args.seed)?;

    let post = bayes::posterior(&data, &config)?;
    let doc = post.to_document(!args.mean_only);
    write_output(args.out.as_deref(), &with_newline(doc.to_json()))?;

    let report = Report::new(args.out.as_deref());
    let mean = post.mean();
    report.line(format!("bias mean = {}", fmt_f64(mean[0])));
    report.line(format!(
        "|alpha mean| = {}",
        fmt_f64(mean.rows(1, mean.len() - 1).norm())
    ));
    if let Some(cov) = &doc.covariance {
        report.line(format!("bias variance = {}", fmt_f64(cov[0][0])));
    }
    Ok(())
}

pub fn gap_sweep(args: &SweepArgs) -> Result<()> {
    let config = lssvr_config(&args.kernel)?;
    let exponents = checked_exponents(args.exponents.as_deref().unwrap_or(&default_exponents()))?;
    let source = Source::resolve(&args.source, &args.csv)?;
    let data = source.load(args.seed)?;
    let eval = match &args.eval {
        Some(path) => {
            let target = args.eval_target.as_deref().map(TargetColumn::parse);
            Some(load_csv(path, target.as_ref(), !args.csv.no_header)?)
        }
        None => None,
    };

    let sweep = equivalence::sweep(&data, &config, &exponents, eval.as_ref().map(Dataset::inputs))?;
    let text = match args.format {
        Format::Csv => sweep.to_csv(),
        Format::Json => with_newline(sweep.to_json()),
    };
    write_output(args.out.as_deref(), &text)?;

    let last = sweep.records.last().expect("sweep has at least one record");
    Report::new(args.out.as_deref()).line(format!(
        "final gap_norm = {} at epsilon = {}",
        fmt_f64(last.gap_norm),
        fmt_f64(last.epsilon)
    ));
    Ok(())
}

enum Saved {
    Model(LssvrModel),
    Posterior(PosteriorSnapshot),
}

fn load_saved(model: Option<&Path>, posterior: Option<&Path>) -> Result<Saved> {
    match (model, posterior) {
        (Some(p), None) => Ok(Saved::Model(LssvrModel::from_json(&read_text(p)?)?)),
        (None, Some(p)) => Ok(Saved::Posterior(PosteriorSnapshot::from_json(&read_text(p)?)?)),
        _ => Err(Error::invalid("exactly one of --model and --posterior is required")),
    }
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let saved = load_saved(args.saved.model.as_deref(), args.saved.posterior.as_deref())?;
    let target = args.target.as_deref().map(TargetColumn::parse);
    let rows = load_csv(&args.data, target.as_ref(), !args.no_header)?;
    let inputs = rows.inputs();

    let text = match saved {
        Saved::Model(model) => {
            let pred = model.predict_many(inputs)?;
            match args.format {
                Format::Csv => {
                    let mut out = String::from("prediction\n");
                    for p in pred.iter() {
                        out.push_str(&fmt_f64(*p));
                        out.push('\n');
                    }
                    out
                }
                Format::Json => with_newline(to_json(&json!(pred.as_slice()))),
            }
        }
        Saved::Posterior(post) => {
            let moments = post.predictive_many(inputs)?;
            match args.format {
                Format::Csv => {
                    let mut out = String::from("mean,var_full,var_paper\n");
                    for m in &moments {
                        out.push_str(&format!(
                            "{},{},{}\n",
                            fmt_f64(m.mean),
                            fmt_f64(m.variance_full),
                            fmt_f64(m.variance_paper)
                        ));
                    }
                    out
                }
                Format::Json => with_newline(to_json(&json!(moments))),
            }
        }
    };
    write_output(args.out.as_deref(), &text)
}

fn to_json(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values serialize")
}

pub fn sinc_demo(args: &SincDemoArgs) -> Result<()> {
    let config = bayes_config(&args.kernel, &args.bayes)?;
    let spec = SincSpec::parse(&args.sinc)?;
    let [glo, ghi, gm] = args.grid.as_slice() else {
        return Err(Error::invalid("--grid takes LO HI M"));
    };
    let (glo, ghi, gm) = (parse_scalar(glo)?, parse_scalar(ghi)?, parse_count(gm, "grid size")?);
    let xs = data::grid(glo, ghi, gm)?;

    let train = data::gen_sinc(spec.n, spec.lo, spec.hi, args.seed)?;
    let post = bayes::posterior(&train, &config)?;
    let moments = post.predictive_many(&xs)?;

    let rows: Vec<(f64, f64, _)> = xs
        .column(0)
        .iter()
        .zip(&moments)
        .map(|(&x, m)| (x, data::sinc(x), m))
        .collect();
    let text = match args.format {
        Format::Csv => {
            let mut out = String::from("x,true,mean,var_full,var_paper\n");
            for (x, y, m) in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_f64(*x),
                    fmt_f64(*y),
                    fmt_f64(m.mean),
                    fmt_f64(m.variance_full),
                    fmt_f64(m.variance_paper)
                ));
            }
            out
        }
        Format::Json => {
            let records: Vec<_> = rows
                .iter()
                .map(|(x, y, m)| {
                    json!({
                        "x": x,
                        "true": y,
                        "mean": m.mean,
                        "var_full": m.variance_full,
                        "var_paper": m.variance_paper,
                    })
                })
                .collect();
            with_newline(to_json(&json!(records)))
        }
    };
    write_output(args.out.as_deref(), &text)?;

    let inside = |x: f64| spec.lo <= x && x <= spec.hi;
    let max_err = rows
        .iter()
        .filter(|r| inside(r.0))
        .map(|(_, y, m)| (m.mean - y).abs())
        .fold(0.0, f64::max);
    let avg = |keep: bool| {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| inside(r.0) == keep)
            .map(|r| r.2.variance_full)
            .collect();
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let report = Report::new(args.out.as_deref());
    report.line(format!(
        "max |mean - sinc| inside training range = {}",
        fmt_f64(max_err)
    ));
    report.line(format!(
        "mean var_full inside = {}, outside = {}",
        fmt_f64(avg(true)),
        fmt_f64(avg(false))
    ));
    Ok(())
}
