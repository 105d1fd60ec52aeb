//! ε-insensitive support vector regression with an RBF kernel, solved by
//! sequential pairwise optimization of the dual problem.

use crate::error::{Error, Result};
use crate::models::{dump_line, Forecaster, MinMaxScaler, TrainingConfig};
use crate::series::TimeSeries;

/// K(x, y) = exp(-‖x−y‖² / (2σ²)).
pub fn rbf_kernel(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let dist2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-dist2 / (2.0 * sigma * sigma)).exp()
}

/// KKT violation tolerance at which the pairwise solver stops.
pub const SMO_TOLERANCE: f64 = 1e-3;

/// Which of the paired dual variables (α, α*) a working-set candidate moves.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Alpha,
    AlphaStar,
}

/// Solves the SVR dual for coefficients β_i = α_i − α*_i and the bias.
///
/// Maintains Σβ = 0 by moving one ascent and one descent variable per step,
/// each step sized by the one-dimensional quadratic optimum and clipped to
/// the [0, C] boxes. Stops when the maximal KKT violation falls below `tol`;
/// errors if `max_iter` pair updates do not reach it.
pub(crate) fn smo_solve(
    kernel: &[Vec<f64>],
    targets: &[f64],
    c: f64,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = targets.len();
    if n < 2 || kernel.len() != n || kernel.iter().any(|row| row.len() != n) {
        return Err(Error::Size("svr: kernel matrix must be square over at least 2 rows".into()));
    }
    let mut alpha = vec![0.0f64; n];
    let mut alpha_star = vec![0.0f64; n];
    let mut f = vec![0.0f64; n];

    let select = |alpha: &[f64], alpha_star: &[f64], f: &[f64]| {
        let mut up: Option<(f64, usize, Side)> = None;
        let mut down: Option<(f64, usize, Side)> = None;
        for i in 0..n {
            let e = targets[i] - f[i];
            if alpha[i] < c {
                let v = e - epsilon;
                if up.is_none_or(|(best, _, _)| v > best) {
                    up = Some((v, i, Side::Alpha));
                }
            }
            if alpha_star[i] > 0.0 {
                let v = e + epsilon;
                if up.is_none_or(|(best, _, _)| v > best) {
                    up = Some((v, i, Side::AlphaStar));
                }
            }
            if alpha[i] > 0.0 {
                let v = e - epsilon;
                if down.is_none_or(|(best, _, _)| v < best) {
                    down = Some((v, i, Side::Alpha));
                }
            }
            if alpha_star[i] < c {
                let v = e + epsilon;
                if down.is_none_or(|(best, _, _)| v < best) {
                    down = Some((v, i, Side::AlphaStar));
                }
            }
        }
        (up, down)
    };

    for _ in 0..max_iter {
        let (up, down) = select(&alpha, &alpha_star, &f);
        let (Some((m, u, u_side)), Some((m_low, v, v_side))) = (up, down) else {
            return Err(Error::Optimization("svr: degenerate working set".into()));
        };
        if m - m_low <= tol {
            let bias = (m + m_low) / 2.0;
            let beta: Vec<f64> = alpha.iter().zip(&alpha_star).map(|(a, s)| a - s).collect();
            return Ok((beta, bias));
        }
        let eta = (kernel[u][u] + kernel[v][v] - 2.0 * kernel[u][v]).max(1e-12);
        let up_room = match u_side {
            Side::Alpha => c - alpha[u],
            Side::AlphaStar => alpha_star[u],
        };
        let down_room = match v_side {
            Side::Alpha => alpha[v],
            Side::AlphaStar => c - alpha_star[v],
        };
        let t = ((m - m_low) / eta).min(up_room).min(down_room);
        match u_side {
            Side::Alpha => alpha[u] += t,
            Side::AlphaStar => alpha_star[u] -= t,
        }
        match v_side {
            Side::Alpha => alpha[v] -= t,
            Side::AlphaStar => alpha_star[v] += t,
        }
        for i in 0..n {
            f[i] += t * (kernel[i][u] - kernel[i][v]);
        }
    }
    Err(Error::Optimization(format!(
        "svr: pairwise solver did not reach tolerance {tol} within {max_iter} updates"
    )))
}

/// A fitted SVR forecaster. Support vectors and dual coefficients live in the
/// min-max-scaled representation, as do the (C, σ, ε) hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    support_vectors: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
    bias: f64,
    sigma: f64,
    c: f64,
    epsilon: f64,
    scaler: MinMaxScaler,
}

impl SvrModel {
    /// Builds a model from explicit parts, dropping vectors whose dual
    /// coefficient is zero and validating the box constraint |β_i| ≤ C.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        support_vectors: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
        bias: f64,
        sigma: f64,
        c: f64,
        epsilon: f64,
        scaler: MinMaxScaler,
    ) -> Result<Self> {
        if support_vectors.len() != coefficients.len() {
            return Err(Error::Size("svr: vector and coefficient counts differ".into()));
        }
        if !(sigma > 0.0 && c > 0.0 && epsilon >= 0.0) {
            return Err(Error::Config(
                "svr: require sigma > 0, C > 0, epsilon >= 0".into(),
            ));
        }
        let lag = support_vectors.first().map(|v| v.len()).unwrap_or(0);
        if lag == 0 && !support_vectors.is_empty() {
            return Err(Error::Size("svr: empty support vector".into()));
        }
        let mut kept_vectors = Vec::new();
        let mut kept_coefficients = Vec::new();
        for (vector, &coeff) in support_vectors.iter().zip(&coefficients) {
            if vector.len() != lag {
                return Err(Error::Size("svr: ragged support vectors".into()));
            }
            if !coeff.is_finite() || coeff.abs() > c + 1e-9 {
                return Err(Error::Domain(format!(
                    "svr: dual coefficient {coeff} outside the |coefficient| <= C box"
                )));
            }
            if coeff != 0.0 {
                kept_vectors.push(vector.clone());
                kept_coefficients.push(coeff);
            }
        }
        Ok(SvrModel {
            support_vectors: kept_vectors,
            coefficients: kept_coefficients,
            bias,
            sigma,
            c,
            epsilon,
            scaler,
        })
    }

    pub fn support_vector_count(&self) -> usize {
        self.support_vectors.len()
    }

    pub fn hyperparameters(&self) -> (f64, f64, f64) {
        (self.c, self.sigma, self.epsilon)
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Evaluates the decision function on an already-scaled window: the sum
    /// of dual coefficients times kernel values, plus the bias.
    pub fn decision(&self, scaled_window: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, &coeff)| coeff * rbf_kernel(scaled_window, sv, self.sigma))
            .sum::<f64>()
            + self.bias
    }
}

/// Fits an SVR on sliding lag windows of the series, min-max scaled to
/// [0, 1] from the training values only. `hyper` is (C, σ, ε) in scaled
/// units.
pub fn fit_svr(train: &TimeSeries, hyper: (f64, f64, f64), cfg: &TrainingConfig) -> Result<SvrModel> {
    let (c, sigma, epsilon) = hyper;
    if !(c > 0.0 && sigma > 0.0 && epsilon >= 0.0) {
        return Err(Error::Config(
            "fit_svr: require C > 0, sigma > 0, epsilon >= 0".into(),
        ));
    }
    let lag = cfg.lag;
    if train.len() <= lag + 1 {
        return Err(Error::Size(format!(
            "fit_svr: lag {} needs more than {} observations, got {}",
            lag,
            lag + 1,
            train.len()
        )));
    }
    let scaler = MinMaxScaler::fit(train.values())?;
    let scaled: Vec<f64> = train.values().iter().map(|&v| scaler.transform(v)).collect();
    let (inputs, target_rows) = super::sliding_windows(&scaled, lag, 1)?;
    let targets: Vec<f64> = target_rows.iter().map(|r| r[0]).collect();
    let n = inputs.len();
    let kernel: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| rbf_kernel(&inputs[i], &inputs[j], sigma)).collect())
        .collect();
    let (beta, bias) = smo_solve(&kernel, &targets, c, epsilon, SMO_TOLERANCE, 100_000 * n)?;
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &b) in beta.iter().enumerate() {
        if b.abs() > 1e-12 {
            support_vectors.push(inputs[i].clone());
            coefficients.push(b);
        }
    }
    SvrModel::new(support_vectors, coefficients, bias, sigma, c, epsilon, scaler)
}

impl Forecaster for SvrModel {
    fn name(&self) -> &str {
        "svr"
    }

    fn lag(&self) -> usize {
        self.support_vectors.first().map(|v| v.len()).unwrap_or(1)
    }

    fn predict_next(&self, history: &[f64]) -> Result<Vec<f64>> {
        let lag = self.lag();
        if history.len() < lag {
            return Err(Error::Size(format!(
                "svr: need {} history values, got {}",
                lag,
                history.len()
            )));
        }
        let x: Vec<f64> = history[history.len() - lag..]
            .iter()
            .map(|&v| self.scaler.transform(v))
            .collect();
        Ok(vec![self.scaler.invert(self.decision(&x))])
    }

    fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&dump_line("model", "svr"));
        out.push_str(&dump_line("lag", self.lag()));
        out.push_str(&dump_line("c", self.c));
        out.push_str(&dump_line("sigma", self.sigma));
        out.push_str(&dump_line("epsilon", self.epsilon));
        out.push_str(&dump_line("bias", self.bias));
        out.push_str(&dump_line("scaler_min", self.scaler.min));
        out.push_str(&dump_line("scaler_max", self.scaler.max));
        out.push_str(&dump_line("support_vector_count", self.support_vectors.len()));
        for (i, (sv, coeff)) in self.support_vectors.iter().zip(&self.coefficients).enumerate() {
            out.push_str(&dump_line(&format!("sv_{i}_coefficient"), coeff));
            let joined = sv.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            out.push_str(&dump_line(&format!("sv_{i}_window"), joined));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine_problem(n: usize, lag: usize, sigma: f64) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
        let values: Vec<f64> = (0..n + lag)
            .map(|i| 0.5 + 0.4 * ((i as f64) * 0.6).sin())
            .collect();
        let (inputs, target_rows) = crate::models::sliding_windows(&values, lag, 1).unwrap();
        let targets: Vec<f64> = target_rows.iter().map(|r| r[0]).collect();
        let n = inputs.len();
        let kernel: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| rbf_kernel(&inputs[i], &inputs[j], sigma)).collect())
            .collect();
        (inputs, targets, kernel)
    }

    #[test]
    fn linear_series_fits_inside_tube() {
        let vals: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let s = TimeSeries::new("line", vals, None).unwrap();
        let cfg = TrainingConfig {
            lag: 3,
            ..TrainingConfig::default()
        };
        let epsilon = 0.01;
        let m = fit_svr(&s, (100.0, 1.0, epsilon), &cfg).unwrap();
        let scaled: Vec<f64> = s.values().iter().map(|&v| {
            (v - 1.0) / 19.0
        }).collect();
        let (inputs, target_rows) = crate::models::sliding_windows(&scaled, 3, 1).unwrap();
        for (x, t) in inputs.iter().zip(&target_rows) {
            let err = (m.decision(x) - t[0]).abs();
            assert!(err <= epsilon + 1e-3, "in-sample error {err}");
        }
    }

    #[test]
    fn duals_within_box_and_interior_points_at_zero() {
        let c = 5.0;
        let epsilon = 0.05;
        let (inputs, targets, kernel) = sine_problem(40, 3, 1.0);
        let (beta, bias) = smo_solve(&kernel, &targets, c, epsilon, SMO_TOLERANCE, 1_000_000).unwrap();
        let n = targets.len();
        let mut interior = 0;
        for i in 0..n {
            assert!(beta[i].abs() <= c + 1e-12);
            let prediction: f64 = (0..n).map(|j| beta[j] * kernel[i][j]).sum::<f64>() + bias;
            let residual = (targets[i] - prediction).abs();
            if residual < epsilon - 3.0 * SMO_TOLERANCE {
                assert_eq!(beta[i], 0.0, "interior point {i} has nonzero dual {}", beta[i]);
                interior += 1;
            }
        }
        assert!(interior > 0, "test data produced no interior points");
        let _ = inputs;
    }

    #[test]
    fn hand_built_two_vector_model() {
        let scaler = MinMaxScaler { min: 0.0, max: 1.0 };
        let m = SvrModel::new(
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            vec![1.0, -1.0],
            0.0,
            1.0,
            10.0,
            0.1,
            scaler,
        )
        .unwrap();
        let expect = 1.0 - (-((2.0f64) / 2.0)).exp();
        assert!((m.decision(&[0.0, 0.0]) - expect).abs() < 1e-15);
    }

    #[test]
    fn prediction_reproduces_kernel_expansion_exactly() {
        let vals: Vec<f64> = (0..30).map(|i| ((i as f64) * 0.4).cos() + 2.0).collect();
        let s = TimeSeries::new("wave", vals, None).unwrap();
        let cfg = TrainingConfig {
            lag: 4,
            ..TrainingConfig::default()
        };
        let m = fit_svr(&s, (10.0, 1.0, 0.01), &cfg).unwrap();
        let window = [0.1, 0.4, 0.3, 0.2];
        let manual: f64 = m
            .support_vectors
            .iter()
            .zip(&m.coefficients)
            .map(|(sv, &coeff)| coeff * rbf_kernel(&window, sv, 1.0))
            .sum::<f64>()
            + m.bias();
        assert_eq!(m.decision(&window), manual);
    }

    #[test]
    fn zero_coefficient_vectors_are_dropped() {
        let scaler = MinMaxScaler { min: 0.0, max: 1.0 };
        let m = SvrModel::new(
            vec![vec![0.0], vec![0.5], vec![1.0]],
            vec![1.0, 0.0, -1.0],
            0.0,
            1.0,
            2.0,
            0.1,
            scaler,
        )
        .unwrap();
        assert_eq!(m.support_vector_count(), 2);
    }

    #[test]
    fn coefficient_outside_box_rejected() {
        let scaler = MinMaxScaler { min: 0.0, max: 1.0 };
        assert!(SvrModel::new(
            vec![vec![0.0]],
            vec![3.0],
            0.0,
            1.0,
            2.0,
            0.1,
            scaler,
        )
        .is_err());
    }

    #[test]
    fn iteration_cap_errors_out() {
        let (_, targets, kernel) = sine_problem(20, 2, 1.0);
        assert!(matches!(
            smo_solve(&kernel, &targets, 100.0, 0.0, 1e-9, 3),
            Err(Error::Optimization(_))
        ));
    }

    #[test]
    fn deterministic_fit() {
        let vals: Vec<f64> = (0..40).map(|i| ((i as f64) * 0.3).sin() * 3.0 + 5.0).collect();
        let s = TimeSeries::new("wave", vals, None).unwrap();
        let cfg = TrainingConfig {
            lag: 5,
            ..TrainingConfig::default()
        };
        let a = fit_svr(&s, (10.0, 0.5, 0.01), &cfg).unwrap();
        let b = fit_svr(&s, (10.0, 0.5, 0.01), &cfg).unwrap();
        assert_eq!(a.dump(), b.dump());
    }
}
