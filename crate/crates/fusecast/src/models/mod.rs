//! The three base forecasters (autoregression, seasonal ARIMA, MLP, SVR),
//! shared training plumbing, and hyperparameter selection.

pub mod ar;
pub mod mlp;
pub mod sarima;
pub mod select;
pub mod simplex;
pub mod svr;

pub use ar::{fit_ar, ArModel};
pub use mlp::{fit_mlp, MlpModel, MlpNetwork};
pub use sarima::{fit_sarima, SarimaModel, SarimaOrders};
pub use select::select_hyperparameters;
pub use svr::{fit_svr, SvrModel};

use crate::error::{Error, Result};

/// How multi-step forecasts consume history.
///
/// `Rolling` produces one-step-ahead forecasts, extending the history with
/// the actual observed value after each step. `Iterated` feeds the model's
/// own predictions forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForecastMode {
    #[default]
    Rolling,
    Iterated,
}

impl std::fmt::Display for ForecastMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ForecastMode::Rolling => write!(f, "rolling"),
            ForecastMode::Iterated => write!(f, "iterated"),
        }
    }
}

/// A fitted forecasting model.
///
/// Models consume and produce values in the working units of the series they
/// were fitted on (any model-internal differencing is inverted before values
/// are returned).
pub trait Forecaster {
    /// Model name used in reports and dumps.
    fn name(&self) -> &str;

    /// Minimum number of trailing history values needed for one prediction.
    fn lag(&self) -> usize;

    /// Predicts the next value(s) following `history`. Always returns at
    /// least one value; multi-output networks return one block per call.
    fn predict_next(&self, history: &[f64]) -> Result<Vec<f64>>;

    /// Serializes the fitted parameters as `key = value` lines.
    fn dump(&self) -> String;
}

/// Produces `horizon` forecasts following `history`.
///
/// In `Rolling` mode the history is extended with `observed` values (the
/// actuals of the forecast window, in order) after each step, so `observed`
/// must supply at least `horizon - 1` values. In `Iterated` mode the model's
/// own predictions are appended instead and `observed` is ignored. Both modes
/// coincide at horizon 1.
pub fn forecast(
    model: &dyn Forecaster,
    history: &[f64],
    horizon: usize,
    mode: ForecastMode,
    observed: Option<&[f64]>,
) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::Size("forecast: horizon must be at least 1".into()));
    }
    if history.len() < model.lag() {
        return Err(Error::Size(format!(
            "forecast: model {} needs {} history values, got {}",
            model.name(),
            model.lag(),
            history.len()
        )));
    }
    let mut extended = history.to_vec();
    let mut out = Vec::with_capacity(horizon);
    match mode {
        ForecastMode::Rolling => {
            let obs = observed.unwrap_or(&[]);
            if obs.len() + 1 < horizon {
                return Err(Error::Size(format!(
                    "forecast: rolling mode over horizon {} needs {} observed values, got {}",
                    horizon,
                    horizon - 1,
                    obs.len()
                )));
            }
            for k in 0..horizon {
                let block = model.predict_next(&extended)?;
                out.push(block[0]);
                if k + 1 < horizon {
                    extended.push(obs[k]);
                }
            }
        }
        ForecastMode::Iterated => {
            while out.len() < horizon {
                let block = model.predict_next(&extended)?;
                if block.is_empty() {
                    return Err(Error::Optimization(format!(
                        "forecast: model {} returned no values",
                        model.name()
                    )));
                }
                extended.extend_from_slice(&block);
                out.extend_from_slice(&block);
            }
            out.truncate(horizon);
        }
    }
    Ok(out)
}

/// Resilient-propagation step-size schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct RpropParams {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub grow: f64,
    pub shrink: f64,
    pub epochs: usize,
}

impl Default for RpropParams {
    fn default() -> Self {
        RpropParams {
            initial_step: 0.1,
            min_step: 1e-6,
            max_step: 50.0,
            grow: 1.2,
            shrink: 0.5,
            epochs: 1000,
        }
    }
}

/// Candidate grid for SVR hyperparameter selection. Enumerated with C
/// outermost, then σ, then ε; earlier grid points win ties.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrGrid {
    pub c: Vec<f64>,
    pub sigma: Vec<f64>,
    pub epsilon: Vec<f64>,
}

impl Default for SvrGrid {
    fn default() -> Self {
        SvrGrid {
            c: vec![1.0, 10.0, 100.0],
            sigma: vec![0.5, 1.0, 2.0],
            epsilon: vec![0.001, 0.01, 0.05],
        }
    }
}

impl SvrGrid {
    /// Flattens the grid into (C, σ, ε) candidates in tie-break order.
    pub fn candidates(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.c.len() * self.sigma.len() * self.epsilon.len());
        for &c in &self.c {
            for &sigma in &self.sigma {
                for &epsilon in &self.epsilon {
                    out.push((c, sigma, epsilon));
                }
            }
        }
        out
    }
}

/// Shared training settings for the seeded models.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub seed: u64,
    pub lag: usize,
    pub rprop: RpropParams,
    pub svr_grid: SvrGrid,
    pub cv_folds: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            seed: 42,
            lag: 12,
            rprop: RpropParams::default(),
            svr_grid: SvrGrid::default(),
            cv_folds: 4,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lag == 0 {
            return Err(Error::Config("lag window length must be positive".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cross validation needs at least 2 folds".into()));
        }
        let r = &self.rprop;
        if !(r.grow > 1.0 && r.shrink > 0.0 && r.shrink < 1.0) {
            return Err(Error::Config(
                "rprop factors must satisfy grow > 1 > shrink > 0".into(),
            ));
        }
        if !(r.initial_step > 0.0 && r.min_step > 0.0 && r.min_step <= r.max_step) {
            return Err(Error::Config("rprop step sizes must be positive and ordered".into()));
        }
        if r.epochs == 0 {
            return Err(Error::Config("epoch limit must be positive".into()));
        }
        if self.svr_grid.candidates().is_empty() {
            return Err(Error::Config("svr grid is empty".into()));
        }
        Ok(())
    }
}

/// Affine map of a value range onto [0, 1], fitted on training data only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMaxScaler {
    pub min: f64,
    pub max: f64,
}

impl MinMaxScaler {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Size("scaler: no values".into()));
        }
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::Domain("scaler: non-finite value".into()));
        }
        if max == min {
            return Err(Error::Domain("scaler: constant values cannot be scaled".into()));
        }
        Ok(MinMaxScaler { min, max })
    }

    pub fn transform(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }

    pub fn invert(&self, v: f64) -> f64 {
        self.min + v * (self.max - self.min)
    }
}

/// Builds sliding windows of `input_len` lagged values mapped to the next
/// `output_len` values. Returns (inputs, targets), one row per window.
pub fn sliding_windows(
    values: &[f64],
    input_len: usize,
    output_len: usize,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if input_len == 0 || output_len == 0 {
        return Err(Error::Size("sliding windows: zero window length".into()));
    }
    if values.len() < input_len + output_len {
        return Err(Error::Size(format!(
            "sliding windows: need at least {} values, got {}",
            input_len + output_len,
            values.len()
        )));
    }
    let rows = values.len() - input_len - output_len + 1;
    let mut inputs = Vec::with_capacity(rows);
    let mut targets = Vec::with_capacity(rows);
    for t in 0..rows {
        inputs.push(values[t..t + input_len].to_vec());
        targets.push(values[t + input_len..t + input_len + output_len].to_vec());
    }
    Ok((inputs, targets))
}

/// Formats one `key = value` dump line; floats print with full round-trip
/// precision.
pub(crate) fn dump_line(key: &str, value: impl std::fmt::Display) -> String {
    format!("{key} = {value}\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Halver;
    impl Forecaster for Halver {
        fn name(&self) -> &str {
            "halver"
        }
        fn lag(&self) -> usize {
            1
        }
        fn predict_next(&self, history: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![history[history.len() - 1] * 0.5])
        }
        fn dump(&self) -> String {
            String::new()
        }
    }

    #[test]
    fn iterated_feeds_own_predictions() {
        let out = forecast(&Halver, &[4.0], 2, ForecastMode::Iterated, None).unwrap();
        assert_eq!(out, vec![2.0, 1.0]);
    }

    #[test]
    fn rolling_uses_observed_values() {
        let out = forecast(&Halver, &[4.0], 3, ForecastMode::Rolling, Some(&[8.0, 6.0])).unwrap();
        assert_eq!(out, vec![2.0, 4.0, 3.0]);
    }

    #[test]
    fn rolling_equals_iterated_at_horizon_one() {
        let r = forecast(&Halver, &[4.0], 1, ForecastMode::Rolling, None).unwrap();
        let i = forecast(&Halver, &[4.0], 1, ForecastMode::Iterated, None).unwrap();
        assert_eq!(r, i);
    }

    #[test]
    fn rolling_requires_observed_window() {
        assert!(forecast(&Halver, &[4.0], 3, ForecastMode::Rolling, Some(&[8.0])).is_err());
        assert!(forecast(&Halver, &[4.0], 3, ForecastMode::Rolling, None).is_err());
    }

    #[test]
    fn insufficient_history_rejected() {
        assert!(forecast(&Halver, &[], 1, ForecastMode::Iterated, None).is_err());
    }

    #[test]
    fn scaler_round_trip() {
        let s = MinMaxScaler::fit(&[2.0, 4.0, 10.0]).unwrap();
        assert_eq!(s.transform(2.0), 0.0);
        assert_eq!(s.transform(10.0), 1.0);
        assert!((s.invert(s.transform(7.3)) - 7.3).abs() < 1e-12);
    }

    #[test]
    fn scaler_rejects_constant() {
        assert!(MinMaxScaler::fit(&[3.0, 3.0]).is_err());
    }

    #[test]
    fn sliding_windows_shape() {
        let (x, y) = sliding_windows(&[1.0, 2.0, 3.0, 4.0, 5.0], 2, 1).unwrap();
        assert_eq!(x, vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0]]);
        assert_eq!(y, vec![vec![3.0], vec![4.0], vec![5.0]]);
    }

    #[test]
    fn sliding_windows_multi_output() {
        let vals: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let (x, y) = sliding_windows(&vals, 12, 12).unwrap();
        assert_eq!(x.len(), 30 - 12 - 12 + 1);
        assert_eq!(y[0].len(), 12);
        assert_eq!(y[0][0], 12.0);
    }

    #[test]
    fn svr_grid_order_is_c_major() {
        let g = SvrGrid {
            c: vec![1.0, 2.0],
            sigma: vec![0.5],
            epsilon: vec![0.1, 0.2],
        };
        assert_eq!(
            g.candidates(),
            vec![(1.0, 0.5, 0.1), (1.0, 0.5, 0.2), (2.0, 0.5, 0.1), (2.0, 0.5, 0.2)]
        );
    }
}
