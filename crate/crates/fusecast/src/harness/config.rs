//! Experiment configuration: a line-oriented `key = value` file with
//! `[section]` headers.
//!
//! Grammar: blank lines and lines starting with `#` or `;` are skipped;
//! `[name]` opens a section; every other line must be `key = value`.
//! Unknown sections or keys and duplicate keys are configuration errors.
//! The dataset path is resolved relative to the config file's directory.

use crate::combine::{Standardization, StatsMode};
use crate::error::{Error, Result};
use crate::metrics::ArvDenominator;
use crate::models::{ForecastMode, SvrGrid, TrainingConfig};
use crate::series::{SplitSpec, Transform};
use std::collections::HashSet;
use std::path::{Path, PathBuf};

/// Which statistical model fills the report's first row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArimaSpec {
    /// Pure autoregression of the given order.
    Ar { order: usize },
    /// Airline-style seasonal model (0,1,1)x(0,1,1) at the given period.
    Sarima { period: usize },
}

/// Combination rules the harness can run, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombinerKind {
    SimpleAverage,
    Trimmed,
    Winsorized,
    Median,
    ErrorWeighted,
    VarianceWeighted,
    NonlinearEnsemble,
}

impl CombinerKind {
    pub fn label(&self) -> &'static str {
        match self {
            CombinerKind::SimpleAverage => "simple_average",
            CombinerKind::Trimmed => "trimmed",
            CombinerKind::Winsorized => "winsorized",
            CombinerKind::Median => "median",
            CombinerKind::ErrorWeighted => "error_weighted",
            CombinerKind::VarianceWeighted => "variance_weighted",
            CombinerKind::NonlinearEnsemble => "nonlinear_ensemble",
        }
    }

    fn from_name(name: &str) -> Option<CombinerKind> {
        Some(match name {
            "simple_average" => CombinerKind::SimpleAverage,
            "trimmed" => CombinerKind::Trimmed,
            "winsorized" => CombinerKind::Winsorized,
            "median" => CombinerKind::Median,
            "error_weighted" => CombinerKind::ErrorWeighted,
            "variance_weighted" => CombinerKind::VarianceWeighted,
            "nonlinear_ensemble" => CombinerKind::NonlinearEnsemble,
            _ => return None,
        })
    }

    pub fn all() -> Vec<CombinerKind> {
        vec![
            CombinerKind::SimpleAverage,
            CombinerKind::Trimmed,
            CombinerKind::Winsorized,
            CombinerKind::Median,
            CombinerKind::ErrorWeighted,
            CombinerKind::VarianceWeighted,
            CombinerKind::NonlinearEnsemble,
        ]
    }
}

/// Report serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Table,
    Csv,
}

/// Everything one experiment run needs: dataset location and shape, model
/// settings, combiner list, and output options.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub path: PathBuf,
    pub transform: Option<Transform>,
    pub length: usize,
    pub test_size: usize,
    pub period: Option<usize>,
    pub arima: ArimaSpec,
    pub ann_layout: (usize, usize, usize),
    pub training: TrainingConfig,
    pub combiners: Vec<CombinerKind>,
    pub trim_percent: f64,
    pub winsorize_order: usize,
    pub ridge: Option<f64>,
    pub standardization: Standardization,
    pub stats_mode: StatsMode,
    pub mode: ForecastMode,
    pub format: ReportFormat,
    pub arv: ArvDenominator,
    pub out_dir: PathBuf,
    pub footnotes: Vec<String>,
}

impl ExperimentConfig {
    /// Checks the cross-field invariants that do not need the dataset file.
    pub fn validate(&self) -> Result<()> {
        SplitSpec::for_total(self.length, self.test_size)?;
        self.training.validate()?;
        let (p, h, q) = self.ann_layout;
        if p == 0 || h == 0 || q == 0 {
            return Err(Error::Config("ann layout parts must all be positive".into()));
        }
        match self.arima {
            ArimaSpec::Ar { order } if order == 0 => {
                return Err(Error::Config("ar order must be positive".into()))
            }
            ArimaSpec::Sarima { period } if period < 2 => {
                return Err(Error::Config("sarima period must be at least 2".into()))
            }
            ArimaSpec::Sarima { period } => {
                if self.period != Some(period) {
                    return Err(Error::Config(format!(
                        "sarima period {period} must match the dataset period"
                    )));
                }
            }
            _ => {}
        }
        if !(0.0..50.0).contains(&self.trim_percent) {
            return Err(Error::Config(format!(
                "trim percent {} must lie in [0, 50)",
                self.trim_percent
            )));
        }
        if let Some(r) = self.ridge {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::Config("ridge must be a nonnegative number".into()));
            }
        }
        if self.combiners.is_empty() {
            return Ok(());
        }
        let mut seen = HashSet::new();
        for c in &self.combiners {
            if !seen.insert(*c) {
                return Err(Error::Config(format!("combiner {} listed twice", c.label())));
            }
        }
        Ok(())
    }
}

fn parse_usize(value: &str, line: usize) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("config line {line}: '{value}' is not a whole number")))
}

fn parse_f64(value: &str, line: usize) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("config line {line}: '{value}' is not a number")))
}

fn parse_f64_list(value: &str, line: usize) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse_f64(v.trim(), line)).collect()
}

fn parse_bool_like<'a>(value: &'a str, options: &[&str], line: usize, key: &str) -> Result<&'a str> {
    if options.contains(&value) {
        Ok(value)
    } else {
        Err(Error::Parse(format!(
            "config line {line}: {key} must be one of {}; got '{value}'",
            options.join(" | ")
        )))
    }
}

#[derive(Default)]
struct Builder {
    name: Option<String>,
    path: Option<String>,
    transform: Option<Option<Transform>>,
    length: Option<usize>,
    test_size: Option<usize>,
    period: Option<usize>,
    arima: Option<ArimaSpec>,
    ann_layout: Option<(usize, usize, usize)>,
    svm_lag: Option<usize>,
    svm_c: Option<Vec<f64>>,
    svm_sigma: Option<Vec<f64>>,
    svm_epsilon: Option<Vec<f64>>,
    seed: Option<u64>,
    cv_folds: Option<usize>,
    combiners: Option<Vec<CombinerKind>>,
    trim_percent: Option<f64>,
    winsorize_order: Option<usize>,
    ridge: Option<f64>,
    standardization: Option<Standardization>,
    stats_mode: Option<StatsMode>,
    mode: Option<ForecastMode>,
    format: Option<ReportFormat>,
    arv: Option<ArvDenominator>,
    out_dir: Option<String>,
    footnote: Option<String>,
}

fn set_once<T>(slot: &mut Option<T>, value: T, key: &str, line: usize) -> Result<()> {
    if slot.is_some() {
        return Err(Error::Parse(format!("config line {line}: duplicate key '{key}'")));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_arima(value: &str, line: usize) -> Result<ArimaSpec> {
    if let Some(order) = value.strip_prefix("ar:") {
        return Ok(ArimaSpec::Ar { order: parse_usize(order.trim(), line)? });
    }
    if let Some(period) = value.strip_prefix("sarima:") {
        return Ok(ArimaSpec::Sarima { period: parse_usize(period.trim(), line)? });
    }
    Err(Error::Parse(format!(
        "config line {line}: arima must be 'ar:<order>' or 'sarima:<period>'; got '{value}'"
    )))
}

fn parse_layout(value: &str, line: usize) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!(
            "config line {line}: ann layout must be 'inputs,hidden,outputs'; got '{value}'"
        )));
    }
    Ok((
        parse_usize(parts[0], line)?,
        parse_usize(parts[1], line)?,
        parse_usize(parts[2], line)?,
    ))
}

fn parse_combiners(value: &str, line: usize) -> Result<Vec<CombinerKind>> {
    if value == "none" {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(str::trim)
        .map(|name| {
            CombinerKind::from_name(name).ok_or_else(|| {
                Error::Parse(format!("config line {line}: unknown combiner '{name}'"))
            })
        })
        .collect()
}

/// Parses config text; `base` is the directory dataset paths resolve against.
pub fn parse_config(text: &str, base: &Path) -> Result<ExperimentConfig> {
    let mut b = Builder::default();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(name) = inner.strip_suffix(']') else {
                return Err(Error::Parse(format!("config line {line}: unclosed section header")));
            };
            section = name.trim().to_string();
            if !matches!(section.as_str(), "dataset" | "models" | "training" | "combine" | "output")
            {
                return Err(Error::Parse(format!(
                    "config line {line}: unknown section '[{section}]'"
                )));
            }
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(Error::Parse(format!(
                "config line {line}: expected 'key = value', got '{trimmed}'"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        match (section.as_str(), key) {
            ("dataset", "name") => set_once(&mut b.name, value.to_string(), key, line)?,
            ("dataset", "path") => set_once(&mut b.path, value.to_string(), key, line)?,
            ("dataset", "transform") => {
                let t = match parse_bool_like(value, &["none", "log10"], line, key)? {
                    "log10" => Some(Transform::Log10),
                    _ => None,
                };
                set_once(&mut b.transform, t, key, line)?
            }
            ("dataset", "length") => set_once(&mut b.length, parse_usize(value, line)?, key, line)?,
            ("dataset", "test_size") => {
                set_once(&mut b.test_size, parse_usize(value, line)?, key, line)?
            }
            ("dataset", "period") => set_once(&mut b.period, parse_usize(value, line)?, key, line)?,
            ("models", "arima") => set_once(&mut b.arima, parse_arima(value, line)?, key, line)?,
            ("models", "ann") => set_once(&mut b.ann_layout, parse_layout(value, line)?, key, line)?,
            ("models", "svm_lag") => {
                set_once(&mut b.svm_lag, parse_usize(value, line)?, key, line)?
            }
            ("models", "svm_c") => set_once(&mut b.svm_c, parse_f64_list(value, line)?, key, line)?,
            ("models", "svm_sigma") => {
                set_once(&mut b.svm_sigma, parse_f64_list(value, line)?, key, line)?
            }
            ("models", "svm_epsilon") => {
                set_once(&mut b.svm_epsilon, parse_f64_list(value, line)?, key, line)?
            }
            ("training", "seed") => {
                let seed = value.parse().map_err(|_| {
                    Error::Parse(format!("config line {line}: '{value}' is not a valid seed"))
                })?;
                set_once(&mut b.seed, seed, key, line)?
            }
            ("training", "cv_folds") => {
                set_once(&mut b.cv_folds, parse_usize(value, line)?, key, line)?
            }
            ("combine", "combiners") => {
                set_once(&mut b.combiners, parse_combiners(value, line)?, key, line)?
            }
            ("combine", "trim_percent") => {
                set_once(&mut b.trim_percent, parse_f64(value, line)?, key, line)?
            }
            ("combine", "winsorize_order") => {
                set_once(&mut b.winsorize_order, parse_usize(value, line)?, key, line)?
            }
            ("combine", "ridge") => set_once(&mut b.ridge, parse_f64(value, line)?, key, line)?,
            ("combine", "standardization") => {
                let s = match parse_bool_like(value, &["variance", "stddev"], line, key)? {
                    "stddev" => Standardization::StdDev,
                    _ => Standardization::Variance,
                };
                set_once(&mut b.standardization, s, key, line)?
            }
            ("combine", "stats") => {
                let s = match parse_bool_like(value, &["frozen", "recompute"], line, key)? {
                    "recompute" => StatsMode::Recompute,
                    _ => StatsMode::Frozen,
                };
                set_once(&mut b.stats_mode, s, key, line)?
            }
            ("output", "mode") => {
                let m = match parse_bool_like(value, &["rolling", "iterated"], line, key)? {
                    "iterated" => ForecastMode::Iterated,
                    _ => ForecastMode::Rolling,
                };
                set_once(&mut b.mode, m, key, line)?
            }
            ("output", "format") => {
                let f = match parse_bool_like(value, &["table", "csv"], line, key)? {
                    "csv" => ReportFormat::Csv,
                    _ => ReportFormat::Table,
                };
                set_once(&mut b.format, f, key, line)?
            }
            ("output", "arv") => {
                let a = match parse_bool_like(value, &["printed", "conventional"], line, key)? {
                    "conventional" => ArvDenominator::Conventional,
                    _ => ArvDenominator::Printed,
                };
                set_once(&mut b.arv, a, key, line)?
            }
            ("output", "dir") => set_once(&mut b.out_dir, value.to_string(), key, line)?,
            ("output", "footnote") => set_once(&mut b.footnote, value.to_string(), key, line)?,
            ("", _) => {
                return Err(Error::Parse(format!(
                    "config line {line}: key '{key}' appears before any [section]"
                )))
            }
            (s, k) => {
                return Err(Error::Parse(format!(
                    "config line {line}: unknown key '{k}' in section '[{s}]'"
                )))
            }
        }
    }

    let require = |what: &str| Error::Config(format!("config is missing required key {what}"));
    let name = b.name.ok_or_else(|| require("[dataset] name"))?;
    let rel_path = b.path.ok_or_else(|| require("[dataset] path"))?;
    let length = b.length.ok_or_else(|| require("[dataset] length"))?;
    let test_size = b.test_size.ok_or_else(|| require("[dataset] test_size"))?;
    let arima = b.arima.ok_or_else(|| require("[models] arima"))?;
    let ann_layout = b.ann_layout.ok_or_else(|| require("[models] ann"))?;
    let svm_lag = b.svm_lag.ok_or_else(|| require("[models] svm_lag"))?;

    let mut grid = SvrGrid::default();
    if let Some(c) = b.svm_c {
        grid.c = c;
    }
    if let Some(s) = b.svm_sigma {
        grid.sigma = s;
    }
    if let Some(e) = b.svm_epsilon {
        grid.epsilon = e;
    }
    let training = TrainingConfig {
        seed: b.seed.unwrap_or(42),
        lag: svm_lag,
        svr_grid: grid,
        cv_folds: b.cv_folds.unwrap_or(4),
        ..TrainingConfig::default()
    };

    let config = ExperimentConfig {
        name,
        path: base.join(rel_path),
        transform: b.transform.unwrap_or(None),
        length,
        test_size,
        period: b.period,
        arima,
        ann_layout,
        training,
        combiners: b.combiners.unwrap_or_else(CombinerKind::all),
        trim_percent: b.trim_percent.unwrap_or(20.0),
        winsorize_order: b.winsorize_order.unwrap_or(1),
        ridge: b.ridge,
        standardization: b.standardization.unwrap_or_default(),
        stats_mode: b.stats_mode.unwrap_or_default(),
        mode: b.mode.unwrap_or_default(),
        format: b.format.unwrap_or_default(),
        arv: b.arv.unwrap_or_default(),
        out_dir: PathBuf::from(b.out_dir.unwrap_or_else(|| "out".to_string())),
        footnotes: b.footnote.into_iter().collect(),
    };
    config.validate()?;
    Ok(config)
}

/// Reads and parses a config file; dataset paths resolve against its
/// directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}
