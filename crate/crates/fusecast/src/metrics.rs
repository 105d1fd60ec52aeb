//! Forecast accuracy metrics: MAPE, MSE, and ARV.

use crate::error::{Error, Result};

/// Which denominator the ARV computation uses.
///
/// `Printed` divides by the sum of squared deviations between the mean of the
/// actuals and each *forecast* value. `Conventional` divides by the sum of
/// squared deviations of the *actuals* from their own mean (the variance of
/// the target window).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArvDenominator {
    #[default]
    Printed,
    Conventional,
}

/// Accuracy summary for one forecast against one actual window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// Mean absolute percentage error, in percent.
    pub mape: f64,
    /// Mean squared error.
    pub mse: f64,
    /// Average relative variance.
    pub arv: f64,
}

/// Computes MAPE, MSE, and ARV for `forecast` against `actual`.
///
/// Lengths must match and be nonzero. MAPE requires every actual value to be
/// nonzero; ARV requires a nonzero denominator. Values must be finite.
pub fn evaluate(actual: &[f64], forecast: &[f64], arv_denominator: ArvDenominator) -> Result<ErrorReport> {
    if actual.is_empty() {
        return Err(Error::Size("evaluate: empty actual window".into()));
    }
    if actual.len() != forecast.len() {
        return Err(Error::Size(format!(
            "evaluate: actual has {} values but forecast has {}",
            actual.len(),
            forecast.len()
        )));
    }
    if actual.iter().chain(forecast.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Domain("evaluate: non-finite value".into()));
    }
    if actual.iter().any(|&y| y == 0.0) {
        return Err(Error::Domain(
            "evaluate: actual window contains a zero, MAPE is undefined".into(),
        ));
    }

    let n = actual.len() as f64;
    let mape = actual
        .iter()
        .zip(forecast)
        .map(|(&y, &f)| ((y - f) / y).abs())
        .sum::<f64>()
        / n
        * 100.0;
    let sse = actual
        .iter()
        .zip(forecast)
        .map(|(&y, &f)| (y - f) * (y - f))
        .sum::<f64>();
    let mse = sse / n;

    let mean = actual.iter().sum::<f64>() / n;
    let denom = match arv_denominator {
        ArvDenominator::Printed => forecast.iter().map(|&f| (mean - f) * (mean - f)).sum::<f64>(),
        ArvDenominator::Conventional => actual.iter().map(|&y| (y - mean) * (y - mean)).sum::<f64>(),
    };
    if denom == 0.0 {
        return Err(Error::Domain("evaluate: ARV denominator is zero".into()));
    }
    let arv = sse / denom;

    Ok(ErrorReport { mape, mse, arv })
}
