//! Derivative-free Nelder-Mead simplex minimization.

use crate::error::{Error, Result};

/// Minimizes `f` starting from `x0` with the standard Nelder-Mead moves
/// (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
///
/// Stops when the simplex collapses (function spread below `f_tol` and vertex
/// spread below `x_tol`) or after `max_iter` iterations. Returns the best
/// vertex and its value; errors only if the objective is non-finite at the
/// start.
pub fn minimize(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    initial_step: f64,
    f_tol: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = x0.len();
    if n == 0 {
        return Err(Error::Optimization("simplex: empty starting point".into()));
    }
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if initial_step != 0.0 { initial_step } else { 0.05 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    if !values[0].is_finite() {
        return Err(Error::Optimization(
            "simplex: objective not finite at starting point".into(),
        ));
    }

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let f_spread = (values[worst] - values[best]).abs();
        let x_spread = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if f_spread <= f_tol && x_spread <= x_tol {
            break;
        }

        // centroid of all vertices except the worst
        let mut centroid = vec![0.0; n];
        for (i, v) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }

        let point_at = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = point_at(1.0);
        let f_reflected = f(&reflected);
        if f_reflected < values[best] {
            let expanded = point_at(2.0);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            let contracted = if f_reflected < values[worst] {
                point_at(0.5)
            } else {
                point_at(-0.5)
            };
            let f_contracted = f(&contracted);
            if f_contracted < values[worst].min(f_reflected) {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // shrink toward the best vertex
                let best_point = simplex[best].clone();
                for (i, v) in simplex.iter_mut().enumerate() {
                    if i == best {
                        continue;
                    }
                    for (x, b) in v.iter_mut().zip(&best_point) {
                        *x = b + 0.5 * (*x - b);
                    }
                    values[i] = f(v);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    Ok((simplex.swap_remove(best), values[best]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_shifted_quadratic() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 1.5).powi(2);
        let (x, v) = minimize(f, &[0.0, 0.0], 0.5, 1e-14, 1e-10, 2000).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-6);
        assert!((x[1] + 1.5).abs() < 1e-6);
        assert!(v < 1e-10);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let (x, _) = minimize(f, &[-1.2, 1.0], 0.5, 1e-14, 1e-12, 5000).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-4);
        assert!((x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn one_dimensional_works() {
        let f = |x: &[f64]| (x[0] - 0.25).powi(2);
        let (x, _) = minimize(f, &[5.0], 0.1, 1e-15, 1e-12, 2000).unwrap();
        assert!((x[0] - 0.25).abs() < 1e-6);
    }
}
