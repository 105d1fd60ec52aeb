//! Single-hidden-layer perceptron trained by resilient propagation.

use crate::error::{Error, Result};
use crate::models::{dump_line, Forecaster, MinMaxScaler, RpropParams, TrainingConfig};
use crate::series::TimeSeries;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Feed-forward network with logistic hidden units and identity outputs.
/// Weight matrices are stored row-major: `w1[j*inputs + i]` connects input i
/// to hidden j, `w2[k*hidden + j]` connects hidden j to output k.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    inputs: usize,
    hidden: usize,
    outputs: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

fn logistic(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

impl MlpNetwork {
    /// Builds a network with weights drawn uniformly from (-0.5, 0.5).
    pub fn random(inputs: usize, hidden: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if inputs == 0 || hidden == 0 || outputs == 0 {
            return Err(Error::Size("mlp: all layer sizes must be positive".into()));
        }
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-0.5..0.5)).collect() };
        Ok(MlpNetwork {
            inputs,
            hidden,
            outputs,
            w1: draw(hidden * inputs),
            b1: draw(hidden),
            w2: draw(outputs * hidden),
            b2: draw(outputs),
        })
    }

    pub fn layout(&self) -> (usize, usize, usize) {
        (self.inputs, self.hidden, self.outputs)
    }

    pub fn param_count(&self) -> usize {
        self.hidden * self.inputs + self.hidden + self.outputs * self.hidden + self.outputs
    }

    /// Flattens all weights in the order w1, b1, w2, b2.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.extend_from_slice(&self.b2);
        p
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Size(format!(
                "mlp: expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let (a, rest) = params.split_at(self.hidden * self.inputs);
        let (b, rest) = rest.split_at(self.hidden);
        let (c, d) = rest.split_at(self.outputs * self.hidden);
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2.copy_from_slice(d);
        Ok(())
    }

    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|j| {
                let mut a = self.b1[j];
                for i in 0..self.inputs {
                    a += self.w1[j * self.inputs + i] * x[i];
                }
                logistic(a)
            })
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let z = self.hidden_activations(x);
        (0..self.outputs)
            .map(|k| {
                let mut a = self.b2[k];
                for j in 0..self.hidden {
                    a += self.w2[k * self.hidden + j] * z[j];
                }
                a
            })
            .collect()
    }

    /// Sum of squared errors over all rows and output components.
    pub fn sse(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> f64 {
        inputs
            .iter()
            .zip(targets)
            .map(|(x, y)| {
                self.forward(x)
                    .iter()
                    .zip(y)
                    .map(|(o, t)| (o - t) * (o - t))
                    .sum::<f64>()
            })
            .sum()
    }

    /// Full-batch gradient of the SSE with respect to `params()`, by
    /// backpropagation.
    pub fn grad(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Vec<f64> {
        let mut g_w1 = vec![0.0; self.w1.len()];
        let mut g_b1 = vec![0.0; self.b1.len()];
        let mut g_w2 = vec![0.0; self.w2.len()];
        let mut g_b2 = vec![0.0; self.b2.len()];
        for (x, y) in inputs.iter().zip(targets) {
            let z = self.hidden_activations(x);
            let out: Vec<f64> = (0..self.outputs)
                .map(|k| {
                    let mut a = self.b2[k];
                    for j in 0..self.hidden {
                        a += self.w2[k * self.hidden + j] * z[j];
                    }
                    a
                })
                .collect();
            let delta_out: Vec<f64> = out.iter().zip(y).map(|(o, t)| 2.0 * (o - t)).collect();
            for k in 0..self.outputs {
                g_b2[k] += delta_out[k];
                for j in 0..self.hidden {
                    g_w2[k * self.hidden + j] += delta_out[k] * z[j];
                }
            }
            for j in 0..self.hidden {
                let mut dz = 0.0;
                for k in 0..self.outputs {
                    dz += self.w2[k * self.hidden + j] * delta_out[k];
                }
                let delta_hidden = dz * z[j] * (1.0 - z[j]);
                g_b1[j] += delta_hidden;
                for i in 0..self.inputs {
                    g_w1[j * self.inputs + i] += delta_hidden * x[i];
                }
            }
        }
        let mut g = Vec::with_capacity(self.param_count());
        g.extend_from_slice(&g_w1);
        g.extend_from_slice(&g_b1);
        g.extend_from_slice(&g_w2);
        g.extend_from_slice(&g_b2);
        g
    }

    /// Trains by sign-based resilient propagation (iRprop-): per-weight step
    /// sizes grow on consistent gradient signs and shrink on sign flips, with
    /// the flipped gradient zeroed. Keeps the best weights seen, so the final
    /// SSE never exceeds the initial one. Stops early once the best SSE has
    /// not improved by more than a 1e-10 relative margin for 25 consecutive
    /// epochs. Returns the final (best) SSE.
    pub fn train_rprop(
        &mut self,
        inputs: &[Vec<f64>],
        targets: &[Vec<f64>],
        cfg: &RpropParams,
    ) -> Result<f64> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::Size("mlp: empty or misaligned training rows".into()));
        }
        let n = self.param_count();
        let mut params = self.params();
        let mut steps = vec![cfg.initial_step; n];
        let mut prev_grad = vec![0.0; n];
        let mut best_params = params.clone();
        let mut best_sse = self.sse(inputs, targets);
        let mut stale_epochs = 0usize;

        for _ in 0..cfg.epochs {
            let mut g = self.grad(inputs, targets);
            for i in 0..n {
                let product = prev_grad[i] * g[i];
                if product > 0.0 {
                    steps[i] = (steps[i] * cfg.grow).min(cfg.max_step);
                } else if product < 0.0 {
                    steps[i] = (steps[i] * cfg.shrink).max(cfg.min_step);
                    g[i] = 0.0;
                }
                if g[i] > 0.0 {
                    params[i] -= steps[i];
                } else if g[i] < 0.0 {
                    params[i] += steps[i];
                }
            }
            prev_grad.copy_from_slice(&g);
            self.set_params(&params)?;
            let sse = self.sse(inputs, targets);
            if sse < best_sse * (1.0 - 1e-10) {
                stale_epochs = 0;
            } else {
                stale_epochs += 1;
            }
            if sse < best_sse {
                best_sse = sse;
                best_params.copy_from_slice(&params);
            }
            if stale_epochs >= 25 {
                break;
            }
        }
        self.set_params(&best_params)?;
        Ok(best_sse)
    }
}

/// A fitted perceptron forecaster: min-max scaling into [0, 1] around an
/// `MlpNetwork` over sliding lag windows.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    network: MlpNetwork,
    scaler: MinMaxScaler,
    training_sse: f64,
}

impl MlpModel {
    pub fn network(&self) -> &MlpNetwork {
        &self.network
    }

    /// Final training SSE in scaled units.
    pub fn training_sse(&self) -> f64 {
        self.training_sse
    }
}

/// Fits a (p, h, q) perceptron on sliding windows of the series, min-max
/// scaled to [0, 1] from the training values only. Deterministic for a fixed
/// `cfg.seed`.
pub fn fit_mlp(train: &TimeSeries, layout: (usize, usize, usize), cfg: &TrainingConfig) -> Result<MlpModel> {
    let (p, h, q) = layout;
    if p == 0 || h == 0 || q == 0 {
        return Err(Error::Size("fit_mlp: all layer sizes must be positive".into()));
    }
    if train.len() <= p + q {
        return Err(Error::Size(format!(
            "fit_mlp: layout ({p},{h},{q}) needs more than {} observations, got {}",
            p + q,
            train.len()
        )));
    }
    let scaler = MinMaxScaler::fit(train.values())?;
    let scaled: Vec<f64> = train.values().iter().map(|&v| scaler.transform(v)).collect();
    let (inputs, targets) = super::sliding_windows(&scaled, p, q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut network = MlpNetwork::random(p, h, q, &mut rng)?;
    let training_sse = network.train_rprop(&inputs, &targets, &cfg.rprop)?;
    Ok(MlpModel {
        network,
        scaler,
        training_sse,
    })
}

impl Forecaster for MlpModel {
    fn name(&self) -> &str {
        "mlp"
    }

    fn lag(&self) -> usize {
        self.network.inputs
    }

    fn predict_next(&self, history: &[f64]) -> Result<Vec<f64>> {
        let p = self.network.inputs;
        if history.len() < p {
            return Err(Error::Size(format!(
                "mlp: need {} history values, got {}",
                p,
                history.len()
            )));
        }
        let x: Vec<f64> = history[history.len() - p..]
            .iter()
            .map(|&v| self.scaler.transform(v))
            .collect();
        Ok(self.network.forward(&x).iter().map(|&v| self.scaler.invert(v)).collect())
    }

    fn dump(&self) -> String {
        let (p, h, q) = self.network.layout();
        let mut out = String::new();
        out.push_str(&dump_line("model", "mlp"));
        out.push_str(&dump_line("layout", format!("{p},{h},{q}")));
        out.push_str(&dump_line("scaler_min", self.scaler.min));
        out.push_str(&dump_line("scaler_max", self.scaler.max));
        out.push_str(&dump_line("training_sse", self.training_sse));
        for j in 0..h {
            for i in 0..p {
                out.push_str(&dump_line(
                    &format!("w1_{j}_{i}"),
                    self.network.w1[j * p + i],
                ));
            }
        }
        for j in 0..h {
            out.push_str(&dump_line(&format!("b1_{j}"), self.network.b1[j]));
        }
        for k in 0..q {
            for j in 0..h {
                out.push_str(&dump_line(
                    &format!("w2_{k}_{j}"),
                    self.network.w2[k * h + j],
                ));
            }
        }
        for k in 0..q {
            out.push_str(&dump_line(&format!("b2_{k}"), self.network.b2[k]));
        }
        out
    }
}
