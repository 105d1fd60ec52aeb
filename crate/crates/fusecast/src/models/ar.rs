//! Autoregressive model fitted by conditional least squares.

use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::models::{dump_line, Forecaster};
use crate::series::TimeSeries;
use nalgebra::{DMatrix, DVector};

/// An AR(p) model with intercept: y_t = c + φ_1 y_{t-1} + … + φ_p y_{t-p}.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    intercept: f64,
    coefficients: Vec<f64>,
}

impl ArModel {
    /// Builds a model from explicit parameters. `coefficients[i]` multiplies
    /// the value i+1 steps back.
    pub fn new(intercept: f64, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Size("ar: order must be positive".into()));
        }
        if !intercept.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("ar: non-finite parameter".into()));
        }
        Ok(ArModel { intercept, coefficients })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

impl Forecaster for ArModel {
    fn name(&self) -> &str {
        "ar"
    }

    fn lag(&self) -> usize {
        self.coefficients.len()
    }

    fn predict_next(&self, history: &[f64]) -> Result<Vec<f64>> {
        let p = self.coefficients.len();
        if history.len() < p {
            return Err(Error::Size(format!(
                "ar: need {} history values, got {}",
                p,
                history.len()
            )));
        }
        let mut y = self.intercept;
        for (j, phi) in self.coefficients.iter().enumerate() {
            y += phi * history[history.len() - 1 - j];
        }
        Ok(vec![y])
    }

    fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&dump_line("model", "ar"));
        out.push_str(&dump_line("order", self.coefficients.len()));
        out.push_str(&dump_line("intercept", self.intercept));
        for (i, phi) in self.coefficients.iter().enumerate() {
            out.push_str(&dump_line(&format!("phi_{}", i + 1), phi));
        }
        out
    }
}

/// Fits an AR(p) model with intercept by ordinary least squares on the
/// lagged design matrix (conditional on the first p observations).
pub fn fit_ar(train: &TimeSeries, p: usize) -> Result<ArModel> {
    if p == 0 {
        return Err(Error::Size("fit_ar: order must be positive".into()));
    }
    let values = train.values();
    if values.len() <= p + 1 {
        return Err(Error::Size(format!(
            "fit_ar: order {} needs more than {} observations, got {}",
            p,
            p + 1,
            values.len()
        )));
    }
    let rows = values.len() - p;
    let mut x = DMatrix::zeros(rows, p + 1);
    let mut y = DVector::zeros(rows);
    for t in 0..rows {
        x[(t, 0)] = 1.0;
        for j in 0..p {
            x[(t, j + 1)] = values[t + p - 1 - j];
        }
        y[t] = values[t + p];
    }
    let beta = ols(&x, &y)?;
    ArModel::new(beta[0], beta.as_slice()[1..].to_vec())
}
