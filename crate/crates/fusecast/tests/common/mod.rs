//! Shared oracles for the integration suites: an independent builder for the
//! combined-forecast design matrix and a derivative-free quadratic minimizer
//! used to cross-check the closed-form solver. Nothing here calls into the
//! library's solve path; the only shared ground is the model definition
//! itself.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

/// Builds the full combination design `[1 | f1 f2 f3 | v1·v2 v2·v3 v3·v1]`
/// for three models, where `v_i = (f_i − mean_i) / variance_i` uses the
/// population statistics of each forecast column.
pub fn oracle_design(forecasts: &[Vec<f64>]) -> DMatrix<f64> {
    assert_eq!(forecasts.len(), 3, "oracle covers the three-model layout");
    let rows = forecasts[0].len();
    let stats: Vec<(f64, f64)> = forecasts
        .iter()
        .map(|col| {
            let mean = col.iter().sum::<f64>() / rows as f64;
            let variance = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / rows as f64;
            (mean, variance)
        })
        .collect();
    let v = |model: usize, k: usize| {
        let (mean, variance) = stats[model];
        (forecasts[model][k] - mean) / variance
    };
    let mut design = DMatrix::zeros(rows, 7);
    for k in 0..rows {
        design[(k, 0)] = 1.0;
        for m in 0..3 {
            design[(k, 1 + m)] = forecasts[m][k];
        }
        design[(k, 4)] = v(0, k) * v(1, k);
        design[(k, 5)] = v(1, k) * v(2, k);
        design[(k, 6)] = v(2, k) * v(0, k);
    }
    design
}

/// Sum of squared residuals of `actual` against `design · beta`, evaluated
/// directly row by row.
pub fn oracle_sse(design: &DMatrix<f64>, actual: &[f64], beta: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 0..design.nrows() {
        let mut fitted = 0.0;
        for j in 0..design.ncols() {
            fitted += design[(k, j)] * beta[j];
        }
        total += (actual[k] - fitted).powi(2);
    }
    total
}

fn eval_along(design: &DMatrix<f64>, actual: &[f64], x: &[f64], d: &[f64], t: f64) -> f64 {
    let trial: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + t * di).collect();
    oracle_sse(design, actual, &trial)
}

/// Exact line minimization for a quadratic objective: the vertex of the
/// parabola through three equally spaced evaluations. Returns the objective
/// at the updated point.
fn line_minimize(design: &DMatrix<f64>, actual: &[f64], x: &mut [f64], d: &[f64]) -> f64 {
    let h = 1e-2;
    let below = eval_along(design, actual, x, d, -h);
    let center = eval_along(design, actual, x, d, 0.0);
    let above = eval_along(design, actual, x, d, h);
    let curvature = below - 2.0 * center + above;
    if curvature <= 0.0 {
        return center;
    }
    let step = 0.5 * h * (below - above) / curvature;
    for (xi, di) in x.iter_mut().zip(d) {
        *xi += step * di;
    }
    oracle_sse(design, actual, x)
}

/// Minimizes the residual SSE from the origin by Powell's derivative-free
/// conjugate-direction search: each round line-minimizes along every kept
/// direction, then along the round's net displacement, which replaces the
/// direction that produced the largest single drop. On a positive-definite
/// quadratic the line searches are exact and the method terminates in a few
/// rounds.
pub fn minimize_sse(design: &DMatrix<f64>, actual: &[f64]) -> Vec<f64> {
    let p = design.ncols();
    let mut x = vec![0.0; p];
    let mut dirs: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut d = vec![0.0; p];
            d[j] = 1.0;
            d
        })
        .collect();
    let mut fx = oracle_sse(design, actual, &x);
    for _ in 0..20 * p {
        let start = x.clone();
        let f_start = fx;
        let mut drop_idx = 0;
        let mut drop_gain = -1.0;
        for i in 0..p {
            let before = fx;
            fx = line_minimize(design, actual, &mut x, &dirs[i]);
            if before - fx > drop_gain {
                drop_gain = before - fx;
                drop_idx = i;
            }
        }
        let pattern: Vec<f64> = x.iter().zip(&start).map(|(a, b)| a - b).collect();
        let norm = pattern.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            let unit: Vec<f64> = pattern.iter().map(|v| v / norm).collect();
            fx = line_minimize(design, actual, &mut x, &unit);
            dirs.remove(drop_idx);
            dirs.push(unit);
        }
        let scale = 1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if norm <= 1e-12 * scale && f_start - fx <= f64::EPSILON * (1.0 + f_start) {
            break;
        }
    }
    x
}

/// Condition number of the design after normalizing every column to unit
/// 2-norm, so raw column scale differences do not count against it.
pub fn normalized_condition(design: &DMatrix<f64>) -> f64 {
    let mut scaled = design.clone();
    for mut col in scaled.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let singular = scaled.svd(false, false).singular_values;
    let largest = singular.max();
    let smallest = singular.min();
    if smallest <= 0.0 {
        f64::INFINITY
    } else {
        largest / smallest
    }
}

/// Standard normal draw by the Box-Muller transform, deterministic under the
/// seeded generator.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
