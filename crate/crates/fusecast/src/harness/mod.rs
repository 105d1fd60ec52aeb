//! Experiment orchestration: load a dataset, split it chronologically, train
//! the base forecasters on the training window, fit every configured
//! combiner on the validation window, and score everything on the test
//! window.

pub mod config;
mod diagram;
mod report;

pub use config::{load_config, parse_config, ArimaSpec, CombinerKind, ExperimentConfig, ReportFormat};
pub use diagram::{emit_forecast_diagram, render_diagram_csv, render_diagram_svg};
pub use report::{emit_report, render_report, write_atomic};

use crate::combine::{
    combine_pointwise, error_based_weights, fit_nonlinear_ensemble, predict_nonlinear,
    trimmed_exclusions, variance_based_weights, ForecastSet, LinearCombinerSpec,
    NonlinearEnsembleWeights, WeightMetric,
};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, ErrorReport};
use crate::models::{
    fit_ar, fit_mlp, fit_sarima, fit_svr, forecast, select_hyperparameters, Forecaster,
    SarimaOrders,
};
use crate::series::{apply_transform, split, SplitSpec, TimeSeries};
use std::path::Path;
use std::time::Instant;

/// One scored row of the final report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub metrics: ErrorReport,
}

/// Everything a finished experiment produced: test-window metrics per model
/// and combiner, combiner failures, validation-window SSE diagnostics, the
/// fitted ensemble together with the validation data it was fitted on, the
/// test-window forecasts for diagramming, and per-stage timings (never
/// serialized into output files).
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub dataset: String,
    pub seed: u64,
    pub mode: crate::models::ForecastMode,
    pub rows: Vec<ReportRow>,
    pub failures: Vec<(String, String)>,
    pub validation_sse: Vec<(String, f64)>,
    pub ensemble: Option<NonlinearEnsembleWeights>,
    pub validation_actuals: Vec<f64>,
    pub validation_forecasts: Vec<(String, Vec<f64>)>,
    pub test_actuals: Vec<f64>,
    pub test_forecasts: Vec<(String, Vec<f64>)>,
    pub footnotes: Vec<String>,
    pub timings: Vec<(String, f64)>,
}

/// Reads a dataset file and applies the configured transform.
///
/// The file is a one-column CSV: an optional `value` header, then one number
/// per line; blank lines and `#` comments are skipped. The parsed count must
/// match the configured length.
pub fn load_dataset(path: &Path, config: &ExperimentConfig) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    let mut values = Vec::new();
    let mut saw_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_data && trimmed.eq_ignore_ascii_case("value") {
            saw_data = true;
            continue;
        }
        saw_data = true;
        let v: f64 = trimmed.parse().map_err(|_| {
            Error::Parse(format!(
                "{} line {line}: could not parse '{trimmed}' as a number",
                path.display()
            ))
        })?;
        values.push(v);
    }
    if values.len() != config.length {
        return Err(Error::Size(format!(
            "{}: found {} observations, config says {}",
            path.display(),
            values.len(),
            config.length
        )));
    }
    let series = TimeSeries::new(config.name.clone(), values, config.period)?;
    match config.transform {
        Some(t) => apply_transform(&series, t),
        None => Ok(series),
    }
}

fn sse(actual: &[f64], forecast: &[f64]) -> f64 {
    actual
        .iter()
        .zip(forecast)
        .map(|(a, f)| (a - f) * (a - f))
        .sum()
}

fn train_base_models(
    config: &ExperimentConfig,
    train: &TimeSeries,
) -> Result<Vec<(String, Box<dyn Forecaster>)>> {
    let mut models: Vec<(String, Box<dyn Forecaster>)> = Vec::with_capacity(3);

    let arima: Box<dyn Forecaster> = match config.arima {
        ArimaSpec::Ar { order } => {
            Box::new(fit_ar(train, order).map_err(|e| e.in_stage("train-arima"))?)
        }
        ArimaSpec::Sarima { period } => Box::new(
            fit_sarima(train, SarimaOrders::airline(period))
                .map_err(|e| e.in_stage("train-arima"))?,
        ),
    };
    models.push(("arima".to_string(), arima));

    let candidates = config.training.svr_grid.candidates();
    let cfg = config.training.clone();
    let (_, best, _) = select_hyperparameters(
        &candidates,
        train.values(),
        config.training.cv_folds,
        |values, hyper| {
            let sub = TimeSeries::new("svm", values.to_vec(), None)?;
            Ok(Box::new(fit_svr(&sub, *hyper, &cfg)?) as Box<dyn Forecaster>)
        },
    )
    .map_err(|e| e.in_stage("train-svm"))?;
    let svm = fit_svr(train, best, &config.training).map_err(|e| e.in_stage("train-svm"))?;
    models.push(("svm".to_string(), Box::new(svm)));

    let ann =
        fit_mlp(train, config.ann_layout, &config.training).map_err(|e| e.in_stage("train-ann"))?;
    models.push(("ann".to_string(), Box::new(ann)));

    Ok(models)
}

fn forecast_window(
    models: &[(String, Box<dyn Forecaster>)],
    history: &[f64],
    window: &[f64],
    mode: crate::models::ForecastMode,
    stage: &'static str,
) -> Result<ForecastSet> {
    let mut names = Vec::with_capacity(models.len());
    let mut columns = Vec::with_capacity(models.len());
    for (label, model) in models {
        let column = forecast(model.as_ref(), history, window.len(), mode, Some(window))
            .map_err(|e| e.in_stage(stage))?;
        names.push(label.clone());
        columns.push(column);
    }
    ForecastSet::new(names, columns).map_err(|e| e.in_stage(stage))
}

enum FittedCombiner {
    Linear(LinearCombinerSpec),
    Nonlinear(Box<NonlinearEnsembleWeights>),
}

fn fit_combiner(
    kind: CombinerKind,
    config: &ExperimentConfig,
    val_set: &ForecastSet,
    val_actuals: &[f64],
    val_reports: &[ErrorReport],
) -> Result<FittedCombiner> {
    let spec = match kind {
        CombinerKind::SimpleAverage => LinearCombinerSpec::SimpleAverage,
        CombinerKind::Trimmed => {
            let mapes: Vec<f64> = val_reports.iter().map(|r| r.mape).collect();
            let excluded = trimmed_exclusions(&mapes, config.trim_percent)?;
            LinearCombinerSpec::Trimmed { excluded }
        }
        CombinerKind::Winsorized => LinearCombinerSpec::Winsorized { i: config.winsorize_order },
        CombinerKind::Median => LinearCombinerSpec::Median,
        CombinerKind::ErrorWeighted => {
            let weights = error_based_weights(val_reports, WeightMetric::Mape)?;
            LinearCombinerSpec::ErrorBased { weights }
        }
        CombinerKind::VarianceWeighted => {
            let (intercept, weights) = variance_based_weights(val_set, val_actuals)?;
            LinearCombinerSpec::VarianceBased { intercept, weights }
        }
        CombinerKind::NonlinearEnsemble => {
            let fitted = fit_nonlinear_ensemble(
                val_set,
                val_actuals,
                config.ridge,
                config.standardization,
            )?;
            return Ok(FittedCombiner::Nonlinear(Box::new(fitted)));
        }
    };
    // validate the rule against the validation window before accepting it
    combine_pointwise(val_set, &spec)?;
    Ok(FittedCombiner::Linear(spec))
}

/// Runs the combining-and-scoring part of the pipeline on pre-built models.
/// Splitting the series, training, forecasting both held-out windows,
/// combiner fitting, and evaluation all happen here; only dataset loading
/// and base-model construction live outside, so tests can inject synthetic
/// forecasters.
pub fn run_pipeline(
    config: &ExperimentConfig,
    series: &TimeSeries,
    models: Vec<(String, Box<dyn Forecaster>)>,
    timings: Vec<(String, f64)>,
) -> Result<ExperimentReport> {
    let mut timings = timings;
    let spec = SplitSpec::for_total(series.len(), config.test_size)
        .map_err(|e| e.in_stage("split"))?;
    let (train, validation, test) = split(series, spec).map_err(|e| e.in_stage("split"))?;

    let clock = Instant::now();
    let val_set = forecast_window(
        &models,
        train.values(),
        validation.values(),
        config.mode,
        "validation-forecasts",
    )?;
    let mut history = train.values().to_vec();
    history.extend_from_slice(validation.values());
    let test_set =
        forecast_window(&models, &history, test.values(), config.mode, "test-forecasts")?;
    timings.push(("forecasts".to_string(), clock.elapsed().as_secs_f64()));

    let clock = Instant::now();
    let val_reports: Vec<ErrorReport> = (0..val_set.model_count())
        .map(|i| evaluate(validation.values(), val_set.column(i), config.arv))
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("fit-combiners"))?;

    let mut validation_sse: Vec<(String, f64)> = (0..val_set.model_count())
        .map(|i| (val_set.names()[i].clone(), sse(validation.values(), val_set.column(i))))
        .collect();

    let mut fitted: Vec<(CombinerKind, FittedCombiner)> = Vec::new();
    let mut failures: Vec<(String, String)> = Vec::new();
    let mut ensemble = None;
    for &kind in &config.combiners {
        match fit_combiner(kind, config, &val_set, validation.values(), &val_reports) {
            Ok(c) => {
                let val_sse = match &c {
                    FittedCombiner::Linear(spec) => {
                        sse(validation.values(), &combine_pointwise(&val_set, spec)?)
                    }
                    FittedCombiner::Nonlinear(w) => {
                        ensemble = Some((**w).clone());
                        w.validation_sse()
                    }
                };
                validation_sse.push((kind.label().to_string(), val_sse));
                fitted.push((kind, c));
            }
            Err(e) => failures.push((kind.label().to_string(), e.to_string())),
        }
    }
    timings.push(("fit-combiners".to_string(), clock.elapsed().as_secs_f64()));

    let clock = Instant::now();
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut test_forecasts: Vec<(String, Vec<f64>)> = Vec::new();
    for i in 0..test_set.model_count() {
        let label = test_set.names()[i].clone();
        let metrics = evaluate(test.values(), test_set.column(i), config.arv)
            .map_err(|e| e.in_stage("evaluate"))?;
        rows.push(ReportRow { label: label.clone(), metrics });
        test_forecasts.push((label, test_set.column(i).to_vec()));
    }
    for (kind, combiner) in &fitted {
        let combined = match combiner {
            FittedCombiner::Linear(spec) => combine_pointwise(&test_set, spec),
            FittedCombiner::Nonlinear(w) => predict_nonlinear(w, &test_set, config.stats_mode),
        };
        let combined = match combined {
            Ok(c) => c,
            Err(e) => {
                failures.push((kind.label().to_string(), e.to_string()));
                continue;
            }
        };
        match evaluate(test.values(), &combined, config.arv) {
            Ok(metrics) => {
                rows.push(ReportRow { label: kind.label().to_string(), metrics });
                test_forecasts.push((kind.label().to_string(), combined));
            }
            Err(e) => failures.push((kind.label().to_string(), e.to_string())),
        }
    }
    timings.push(("evaluate".to_string(), clock.elapsed().as_secs_f64()));

    for row in &rows {
        let m = row.metrics;
        if !(m.mape.is_finite() && m.mse.is_finite() && m.arv.is_finite()) {
            return Err(Error::Domain(format!(
                "report row {} has non-finite metrics",
                row.label
            ))
            .in_stage("evaluate"));
        }
    }

    Ok(ExperimentReport {
        dataset: config.name.clone(),
        seed: config.training.seed,
        mode: config.mode,
        rows,
        failures,
        validation_sse,
        ensemble,
        validation_actuals: validation.values().to_vec(),
        validation_forecasts: (0..val_set.model_count())
            .map(|i| (val_set.names()[i].clone(), val_set.column(i).to_vec()))
            .collect(),
        test_actuals: test.values().to_vec(),
        test_forecasts,
        footnotes: config.footnotes.clone(),
        timings,
    })
}

/// Runs a full experiment: load, split, train the three base models, fit
/// combiners on the validation window, evaluate on the test window.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let clock = Instant::now();
    let series = load_dataset(&config.path, config).map_err(|e| e.in_stage("load-dataset"))?;
    let mut timings = vec![("load-dataset".to_string(), clock.elapsed().as_secs_f64())];

    let spec = SplitSpec::for_total(series.len(), config.test_size)
        .map_err(|e| e.in_stage("split"))?;
    let (train, _, _) = split(&series, spec).map_err(|e| e.in_stage("split"))?;

    let clock = Instant::now();
    let models = train_base_models(config, &train)?;
    timings.push(("train-models".to_string(), clock.elapsed().as_secs_f64()));

    run_pipeline(config, &series, models, timings)
}
