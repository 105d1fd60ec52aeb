//! Forecast combination: six linear pooling rules and the nonlinear
//! ensemble with pairwise interaction terms.

pub mod linear;
pub mod nonlinear;

pub use linear::{
    combine_pointwise, error_based_weights, trimmed_exclusions, variance_based_weights,
    LinearCombinerSpec, WeightMetric,
};
pub use nonlinear::{
    build_design_matrices, fit_nonlinear_ensemble, predict_nonlinear, DesignMatrices, ModelStats,
    NonlinearEnsembleWeights, Standardization, StatsMode,
};

use crate::error::{Error, Result};

/// Aligned forecasts from n named models over a common target window:
/// N rows (time) by n columns (models).
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSet {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl ForecastSet {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Size(format!(
                "forecast set: {} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.len() < 2 {
            return Err(Error::Size("forecast set: need at least 2 models".into()));
        }
        let len = columns[0].len();
        if len == 0 {
            return Err(Error::Size("forecast set: empty forecast columns".into()));
        }
        for (name, column) in names.iter().zip(&columns) {
            if column.len() != len {
                return Err(Error::Alignment(format!(
                    "forecast set: column {name} has {} values, expected {len}",
                    column.len()
                )));
            }
            if column.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!(
                    "forecast set: column {name} contains a non-finite value"
                )));
            }
        }
        let mut seen = names.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != names.len() {
            return Err(Error::Alignment("forecast set: duplicate model names".into()));
        }
        Ok(ForecastSet { names, columns })
    }

    /// Number of models (columns).
    pub fn model_count(&self) -> usize {
        self.columns.len()
    }

    /// Number of time points (rows).
    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    /// Values of all models at time index k.
    pub fn row(&self, k: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[k]).collect()
    }

    /// Reorders the models by `order` (a permutation of column indices).
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.model_count()).collect::<Vec<_>>() {
            return Err(Error::Size("forecast set: invalid permutation".into()));
        }
        ForecastSet::new(
            order.iter().map(|&i| self.names[i].clone()).collect(),
            order.iter().map(|&i| self.columns[i].clone()).collect(),
        )
    }
}
