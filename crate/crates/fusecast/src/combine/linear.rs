//! The six linear combination rules: simple average, trimmed average,
//! winsorized average, median, error-based weighting, and variance-based
//! (least squares) weighting.

use crate::combine::ForecastSet;
use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::metrics::ErrorReport;
use nalgebra::{DMatrix, DVector};

/// Which validation metric drives error-based weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMetric {
    #[default]
    Mape,
    Mse,
    Arv,
}

impl WeightMetric {
    fn pick(&self, report: &ErrorReport) -> f64 {
        match self {
            WeightMetric::Mape => report.mape,
            WeightMetric::Mse => report.mse,
            WeightMetric::Arv => report.arv,
        }
    }
}

/// A linear combination rule, carrying fitted parameters where the rule has
/// any.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearCombinerSpec {
    SimpleAverage,
    /// Averages after dropping the listed model columns entirely.
    Trimmed { excluded: Vec<usize> },
    /// Replaces the i smallest and i largest values of each row by their
    /// nearest kept neighbors before averaging.
    Winsorized { i: usize },
    Median,
    /// Fixed per-model weights, nonnegative and summing to one.
    ErrorBased { weights: Vec<f64> },
    /// Ordinary-least-squares weights with intercept.
    VarianceBased { intercept: f64, weights: Vec<f64> },
}

/// Selects which models a trimmed average should exclude: the
/// floor(k% · n) models with the worst (largest) validation metric.
/// Ties keep the earlier model.
pub fn trimmed_exclusions(validation_metrics: &[f64], k_percent: f64) -> Result<Vec<usize>> {
    if !(0.0..50.0).contains(&k_percent) {
        return Err(Error::Config(format!(
            "trimmed combiner: k percent must lie in [0, 50), got {k_percent}"
        )));
    }
    let n = validation_metrics.len();
    if n == 0 {
        return Err(Error::Size("trimmed combiner: no models".into()));
    }
    let count = ((k_percent / 100.0) * n as f64).floor() as usize;
    if count >= n {
        return Err(Error::Config("trimmed combiner: would exclude every model".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        validation_metrics[b]
            .partial_cmp(&validation_metrics[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut excluded: Vec<usize> = order.into_iter().take(count).collect();
    excluded.sort_unstable();
    Ok(excluded)
}

/// Weights proportional to the inverse of each model's validation metric,
/// normalized to sum to one.
pub fn error_based_weights(validation_reports: &[ErrorReport], metric: WeightMetric) -> Result<Vec<f64>> {
    if validation_reports.is_empty() {
        return Err(Error::Size("error-based weights: no models".into()));
    }
    let values: Vec<f64> = validation_reports.iter().map(|r| metric.pick(r)).collect();
    if let Some(i) = values.iter().position(|&v| v == 0.0) {
        return Err(Error::Domain(format!(
            "error-based weights: model {i} has zero validation error; use it outright"
        )));
    }
    if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Domain("error-based weights: invalid metric value".into()));
    }
    let inverses: Vec<f64> = values.iter().map(|&v| 1.0 / v).collect();
    let total: f64 = inverses.iter().sum();
    Ok(inverses.into_iter().map(|v| v / total).collect())
}

/// Ordinary least squares of the actuals on an intercept plus the forecast
/// columns. Returns (intercept, per-model weights).
pub fn variance_based_weights(forecasts: &ForecastSet, actuals: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = forecasts.model_count();
    let rows = forecasts.len();
    if actuals.len() != rows {
        return Err(Error::Size(format!(
            "variance-based weights: {} actuals for {} forecast rows",
            actuals.len(),
            rows
        )));
    }
    let mut x = DMatrix::zeros(rows, n + 1);
    for k in 0..rows {
        x[(k, 0)] = 1.0;
        for i in 0..n {
            x[(k, i + 1)] = forecasts.column(i)[k];
        }
    }
    let y = DVector::from_column_slice(actuals);
    let beta = ols(&x, &y)?;
    Ok((beta[0], beta.as_slice()[1..].to_vec()))
}

/// Applies a linear combination rule per time index.
pub fn combine_pointwise(forecasts: &ForecastSet, spec: &LinearCombinerSpec) -> Result<Vec<f64>> {
    let n = forecasts.model_count();
    match spec {
        LinearCombinerSpec::Trimmed { excluded } => {
            if excluded.iter().any(|&i| i >= n) {
                return Err(Error::Config("trimmed combiner: excluded index out of range".into()));
            }
            if excluded.len() >= n {
                return Err(Error::Config("trimmed combiner: would exclude every model".into()));
            }
        }
        LinearCombinerSpec::Winsorized { i } => {
            if *i >= n / 2 + 1 {
                return Err(Error::Config(format!(
                    "winsorized combiner: i must be below floor(n/2) + 1 = {}, got {i}",
                    n / 2 + 1
                )));
            }
        }
        LinearCombinerSpec::ErrorBased { weights } | LinearCombinerSpec::VarianceBased { weights, .. } => {
            if weights.len() != n {
                return Err(Error::Size(format!(
                    "combiner: {} weights for {} models",
                    weights.len(),
                    n
                )));
            }
        }
        _ => {}
    }

    let out = (0..forecasts.len())
        .map(|k| {
            let row = forecasts.row(k);
            match spec {
                LinearCombinerSpec::SimpleAverage => row.iter().sum::<f64>() / n as f64,
                LinearCombinerSpec::Trimmed { excluded } => {
                    let kept: Vec<f64> = row
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !excluded.contains(i))
                        .map(|(_, &v)| v)
                        .collect();
                    kept.iter().sum::<f64>() / kept.len() as f64
                }
                LinearCombinerSpec::Winsorized { i } => {
                    let mut sorted = row.clone();
                    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                    let low = sorted[*i];
                    let high = sorted[n - 1 - *i];
                    let clamped: f64 = sorted.iter().map(|&v| v.clamp(low, high)).sum();
                    clamped / n as f64
                }
                LinearCombinerSpec::Median => {
                    let mut sorted = row.clone();
                    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                    if n % 2 == 1 {
                        sorted[n / 2]
                    } else {
                        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
                    }
                }
                LinearCombinerSpec::ErrorBased { weights } => {
                    row.iter().zip(weights).map(|(v, w)| v * w).sum()
                }
                LinearCombinerSpec::VarianceBased { intercept, weights } => {
                    intercept + row.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>()
                }
            }
        })
        .collect();
    Ok(out)
}
