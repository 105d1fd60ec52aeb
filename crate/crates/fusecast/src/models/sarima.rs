//! Seasonal ARIMA (0,1,1)×(0,1,1)_s fitted by conditional sum of squares.

use crate::error::{Error, Result};
use crate::models::{dump_line, simplex, Forecaster};
use crate::series::TimeSeries;

/// Order specification; only (0,1,1)×(0,1,1) with a seasonal period is
/// supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SarimaOrders {
    pub order: (usize, usize, usize),
    pub seasonal: (usize, usize, usize),
    pub period: usize,
}

impl SarimaOrders {
    pub fn airline(period: usize) -> Self {
        SarimaOrders {
            order: (0, 1, 1),
            seasonal: (0, 1, 1),
            period,
        }
    }
}

/// A fitted (0,1,1)×(0,1,1)_s model. The doubly differenced series follows
/// w_t = ε_t + θ_1 ε_{t-1} + Θ_1 ε_{t-s} + θ_1 Θ_1 ε_{t-s-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SarimaModel {
    period: usize,
    theta: f64,
    seasonal_theta: f64,
    innovation_variance: f64,
    boundary_warning: bool,
}

const INVERTIBILITY_BOX: f64 = 0.995;
const BOUNDARY_WARNING_AT: f64 = 0.99;

impl SarimaModel {
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn seasonal_theta(&self) -> f64 {
        self.seasonal_theta
    }

    pub fn innovation_variance(&self) -> f64 {
        self.innovation_variance
    }

    /// True when the optimizer stopped against the invertibility boundary.
    pub fn boundary_warning(&self) -> bool {
        self.boundary_warning
    }
}

/// Runs the innovation recursion over the doubly differenced series with
/// zero pre-sample innovations.
fn innovations(values: &[f64], period: usize, theta: f64, seasonal_theta: f64) -> Vec<f64> {
    let s = period;
    let m = values.len().saturating_sub(s + 1);
    let mut w = Vec::with_capacity(m);
    for j in (s + 1)..values.len() {
        w.push(values[j] - values[j - 1] - values[j - s] + values[j - s - 1]);
    }
    let mut eps = Vec::with_capacity(w.len());
    for (i, &wt) in w.iter().enumerate() {
        let at = |k: isize| -> f64 {
            if k >= 0 {
                eps[k as usize]
            } else {
                0.0
            }
        };
        let i = i as isize;
        let e = wt
            - theta * at(i - 1)
            - seasonal_theta * at(i - s as isize)
            - theta * seasonal_theta * at(i - s as isize - 1);
        eps.push(e);
    }
    eps
}

/// Fits (θ_1, Θ_1) by minimizing the conditional sum of squared innovations
/// with a derivative-free simplex search from (0.1, 0.1), constrained to the
/// invertibility box.
pub fn fit_sarima(train: &TimeSeries, orders: SarimaOrders) -> Result<SarimaModel> {
    if orders.order != (0, 1, 1) || orders.seasonal != (0, 1, 1) {
        return Err(Error::Config(format!(
            "fit_sarima: only the (0,1,1)x(0,1,1)_s configuration is supported, got ({},{},{})x({},{},{})",
            orders.order.0,
            orders.order.1,
            orders.order.2,
            orders.seasonal.0,
            orders.seasonal.1,
            orders.seasonal.2
        )));
    }
    let s = orders.period;
    if s < 2 {
        return Err(Error::Config("fit_sarima: seasonal period must be at least 2".into()));
    }
    let values = train.values();
    if values.len() <= 2 * s + 2 {
        return Err(Error::Size(format!(
            "fit_sarima: period {} needs more than {} observations, got {}",
            s,
            2 * s + 2,
            values.len()
        )));
    }

    let css = |params: &[f64]| -> f64 {
        let (theta, seasonal_theta) = (params[0], params[1]);
        let t_excess = (theta.abs() - INVERTIBILITY_BOX).max(0.0);
        let s_excess = (seasonal_theta.abs() - INVERTIBILITY_BOX).max(0.0);
        if t_excess > 0.0 || s_excess > 0.0 {
            return 1e10 * (1.0 + t_excess + s_excess);
        }
        innovations(values, s, theta, seasonal_theta)
            .iter()
            .map(|e| e * e)
            .sum()
    };

    let (params, sse) = simplex::minimize(css, &[0.1, 0.1], 0.1, 1e-12, 1e-8, 2000)?;
    if !sse.is_finite() || sse >= 1e10 {
        return Err(Error::Optimization(
            "fit_sarima: simplex search diverged outside the invertibility box".into(),
        ));
    }
    let (theta, seasonal_theta) = (params[0], params[1]);
    let m = values.len() - s - 1;
    Ok(SarimaModel {
        period: s,
        theta,
        seasonal_theta,
        innovation_variance: sse / m as f64,
        boundary_warning: theta.abs() > BOUNDARY_WARNING_AT
            || seasonal_theta.abs() > BOUNDARY_WARNING_AT,
    })
}

impl Forecaster for SarimaModel {
    fn name(&self) -> &str {
        "sarima"
    }

    fn lag(&self) -> usize {
        2 * self.period + 2
    }

    fn predict_next(&self, history: &[f64]) -> Result<Vec<f64>> {
        let s = self.period;
        let t = history.len();
        if t < self.lag() {
            return Err(Error::Size(format!(
                "sarima: need {} history values, got {}",
                self.lag(),
                t
            )));
        }
        let eps = innovations(history, s, self.theta, self.seasonal_theta);
        let m = eps.len() as isize;
        let at = |k: isize| -> f64 {
            if k >= 0 && k < m {
                eps[k as usize]
            } else {
                0.0
            }
        };
        let s_i = s as isize;
        let w_next = self.theta * at(m - 1)
            + self.seasonal_theta * at(m - s_i)
            + self.theta * self.seasonal_theta * at(m - s_i - 1);
        let y_next = w_next + history[t - 1] + history[t - s] - history[t - s - 1];
        Ok(vec![y_next])
    }

    fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&dump_line("model", "sarima"));
        out.push_str(&dump_line("order", "0,1,1"));
        out.push_str(&dump_line("seasonal_order", "0,1,1"));
        out.push_str(&dump_line("period", self.period));
        out.push_str(&dump_line("theta_1", self.theta));
        out.push_str(&dump_line("seasonal_theta_1", self.seasonal_theta));
        out.push_str(&dump_line("innovation_variance", self.innovation_variance));
        out.push_str(&dump_line("boundary_warning", self.boundary_warning));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = rng.random_range(1e-12..1.0f64);
        let u2: f64 = rng.random_range(0.0..1.0f64);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    fn simulate(theta: f64, seasonal_theta: f64, s: usize, len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps: Vec<f64> = (0..len).map(|_| standard_normal(&mut rng)).collect();
        let mut y = Vec::with_capacity(len);
        for t in 0..len {
            if t <= s {
                y.push(100.0 + 0.1 * eps[t]);
                continue;
            }
            let e = |k: isize| -> f64 {
                if k >= 0 {
                    eps[k as usize]
                } else {
                    0.0
                }
            };
            let t_i = t as isize;
            let s_i = s as isize;
            let w = eps[t] + theta * e(t_i - 1) + seasonal_theta * e(t_i - s_i)
                + theta * seasonal_theta * e(t_i - s_i - 1);
            y.push(w + y[t - 1] + y[t - s] - y[t - s - 1]);
        }
        y
    }

    #[test]
    fn simulate_then_refit_recovers_coefficients() {
        let y = simulate(0.3, 0.5, 12, 240, 9);
        let series = TimeSeries::new("sim", y, Some(12)).unwrap();
        let m = fit_sarima(&series, SarimaOrders::airline(12)).unwrap();
        assert!((m.theta() - 0.3).abs() < 0.1, "theta = {}", m.theta());
        assert!(
            (m.seasonal_theta() - 0.5).abs() < 0.1,
            "seasonal theta = {}",
            m.seasonal_theta()
        );
        assert!(!m.boundary_warning());
    }

    #[test]
    fn seasonal_random_walk_fits_near_zero() {
        let y = simulate(0.0, 0.0, 12, 240, 7);
        let series = TimeSeries::new("walk", y, Some(12)).unwrap();
        let m = fit_sarima(&series, SarimaOrders::airline(12)).unwrap();
        assert!(m.theta().abs() < 0.1, "theta = {}", m.theta());
        assert!(m.seasonal_theta().abs() < 0.1, "seasonal theta = {}", m.seasonal_theta());
    }

    #[test]
    fn unsupported_orders_rejected() {
        let y = simulate(0.0, 0.0, 12, 60, 1);
        let series = TimeSeries::new("sim", y, Some(12)).unwrap();
        let mut orders = SarimaOrders::airline(12);
        orders.order = (1, 1, 1);
        assert!(fit_sarima(&series, orders).is_err());
    }

    #[test]
    fn short_series_rejected() {
        let series = TimeSeries::new("short", vec![1.0; 26], Some(12)).unwrap();
        assert!(fit_sarima(&series, SarimaOrders::airline(12)).is_err());
    }

    #[test]
    fn one_step_forecast_matches_hand_recursion() {
        let y = simulate(0.3, 0.5, 4, 60, 3);
        let series = TimeSeries::new("sim", y.clone(), Some(4)).unwrap();
        let m = fit_sarima(&series, SarimaOrders::airline(4)).unwrap();
        let pred = m.predict_next(&y).unwrap()[0];
        let eps = innovations(&y, 4, m.theta(), m.seasonal_theta());
        let k = eps.len();
        let w_next = m.theta() * eps[k - 1]
            + m.seasonal_theta() * eps[k - 4]
            + m.theta() * m.seasonal_theta() * eps[k - 5];
        let expect = w_next + y[y.len() - 1] + y[y.len() - 4] - y[y.len() - 5];
        assert!((pred - expect).abs() < 1e-12);
    }

    #[test]
    fn innovations_reproduce_simulated_noise_when_given_truth() {
        // with the true coefficients and a long burn-in, the recursion's
        // innovations converge to the simulated ones
        let y = simulate(0.3, 0.5, 12, 240, 11);
        let eps = innovations(&y, 12, 0.3, 0.5);
        let tail = &eps[eps.len() - 20..];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sim_eps: Vec<f64> = (0..240).map(|_| standard_normal(&mut rng)).collect();
        let sim_tail = &sim_eps[240 - 20..];
        for (a, b) in tail.iter().zip(sim_tail) {
            assert!((a - b).abs() < 0.05, "innovation drift: {a} vs {b}");
        }
    }
}
