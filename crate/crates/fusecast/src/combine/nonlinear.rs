//! Nonlinear forecast ensemble: individual forecasts plus pairwise products
//! of standardized forecasts, with weights obtained in closed form from the
//! normal equations of the validation-window SSE.

use crate::combine::ForecastSet;
use crate::error::{Error, Result};
use crate::models::dump_line;
use nalgebra::{Cholesky, DMatrix, DVector};

/// How forecasts are standardized before entering the cross terms: divide
/// the centered forecast by the variance (the default) or by the standard
/// deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Standardization {
    #[default]
    Variance,
    StdDev,
}

impl std::fmt::Display for Standardization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Standardization::Variance => write!(f, "variance"),
            Standardization::StdDev => write!(f, "stddev"),
        }
    }
}

/// Which standardization statistics prediction uses: the ones frozen at fit
/// time (default) or statistics recomputed from the forecasts being
/// combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StatsMode {
    #[default]
    Frozen,
    Recompute,
}

/// Per-model standardization statistics: mean and population variance of a
/// forecast column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelStats {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and population variance of one forecast column.
pub fn compute_stats(column: &[f64]) -> ModelStats {
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let variance = column.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    ModelStats { mean, variance }
}

fn standardize(value: f64, stats: &ModelStats, mode: Standardization) -> f64 {
    match mode {
        Standardization::Variance => (value - stats.mean) / stats.variance,
        Standardization::StdDev => (value - stats.mean) / stats.variance.sqrt(),
    }
}

/// Unordered model pairs feeding the cross terms. Three models pair up as
/// (1,2), (2,3), (3,1) to mirror the combined-forecast formula's term order;
/// other counts use lexicographic pairs.
pub fn pair_order(n: usize) -> Vec<(usize, usize)> {
    if n == 3 {
        return vec![(0, 1), (1, 2), (2, 0)];
    }
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// The two design blocks of the ensemble's least-squares problem: F holds a
/// leading column of ones followed by the raw forecasts (N×(n+1)); G holds
/// one column per model pair, the elementwise product of the two
/// standardized forecast columns (N×C(n,2)).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrices {
    pub f: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub pairs: Vec<(usize, usize)>,
}

fn validated_stats(stats: &[ModelStats], n: usize) -> Result<()> {
    if stats.len() != n {
        return Err(Error::Size(format!(
            "design matrices: {} statistics for {} models",
            stats.len(),
            n
        )));
    }
    for (i, s) in stats.iter().enumerate() {
        if !(s.variance > 0.0 && s.variance.is_finite() && s.mean.is_finite()) {
            return Err(Error::Domain(format!(
                "design matrices: model {} has a degenerate (constant) forecast column",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Builds F and G from the forecasts and per-model statistics.
pub fn build_design_matrices(
    forecasts: &ForecastSet,
    stats: &[ModelStats],
    standardization: Standardization,
) -> Result<DesignMatrices> {
    let n = forecasts.model_count();
    let rows = forecasts.len();
    validated_stats(stats, n)?;
    let mut f = DMatrix::zeros(rows, n + 1);
    for k in 0..rows {
        f[(k, 0)] = 1.0;
        for i in 0..n {
            f[(k, i + 1)] = forecasts.column(i)[k];
        }
    }
    let standardized: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            forecasts
                .column(i)
                .iter()
                .map(|&v| standardize(v, &stats[i], standardization))
                .collect()
        })
        .collect();
    let pairs = pair_order(n);
    let mut g = DMatrix::zeros(rows, pairs.len());
    for (p, &(i, j)) in pairs.iter().enumerate() {
        for k in 0..rows {
            g[(k, p)] = standardized[i][k] * standardized[j][k];
        }
    }
    Ok(DesignMatrices { f, g, pairs })
}

/// Fitted ensemble weights: intercept w0, one weight per model, one θ per
/// model pair, plus the standardization statistics frozen at fit time and
/// solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearEnsembleWeights {
    names: Vec<String>,
    w0: f64,
    weights: Vec<f64>,
    thetas: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    stats: Vec<ModelStats>,
    standardization: Standardization,
    validation_sse: f64,
    solver_residual: f64,
    ridge: Option<f64>,
    ridge_applied: bool,
}

impl NonlinearEnsembleWeights {
    /// Builds weights from explicit parts (diagnostics zeroed); mainly for
    /// constructing reference points and tests.
    pub fn from_parts(
        names: Vec<String>,
        w0: f64,
        weights: Vec<f64>,
        thetas: Vec<f64>,
        stats: Vec<ModelStats>,
        standardization: Standardization,
    ) -> Result<Self> {
        let n = names.len();
        if weights.len() != n {
            return Err(Error::Size(format!("{} weights for {} models", weights.len(), n)));
        }
        let pairs = pair_order(n);
        if thetas.len() != pairs.len() {
            return Err(Error::Size(format!(
                "{} pair weights for {} model pairs",
                thetas.len(),
                pairs.len()
            )));
        }
        validated_stats(&stats, n)?;
        if !w0.is_finite()
            || weights.iter().any(|v| !v.is_finite())
            || thetas.iter().any(|v| !v.is_finite())
        {
            return Err(Error::Domain("ensemble weights must be finite".into()));
        }
        Ok(NonlinearEnsembleWeights {
            names,
            w0,
            weights,
            thetas,
            pairs,
            stats,
            standardization,
            validation_sse: 0.0,
            solver_residual: 0.0,
            ridge: None,
            ridge_applied: false,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn stats(&self) -> &[ModelStats] {
        &self.stats
    }

    pub fn standardization(&self) -> Standardization {
        self.standardization
    }

    /// Achieved SSE on the fitting window.
    pub fn validation_sse(&self) -> f64 {
        self.validation_sse
    }

    /// ‖designᵀ·(actual − combined)‖∞ on the fitting window; half the largest
    /// SSE partial derivative.
    pub fn solver_residual(&self) -> f64 {
        self.solver_residual
    }

    pub fn ridge(&self) -> Option<f64> {
        self.ridge
    }

    /// True when a positive ridge was folded into the inverted blocks.
    pub fn ridge_applied(&self) -> bool {
        self.ridge_applied
    }

    /// Serializes the fitted weights, frozen statistics, and diagnostics as
    /// `key = value` lines.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&dump_line("combiner", "nonlinear_ensemble"));
        out.push_str(&dump_line("models", self.names.join(",")));
        out.push_str(&dump_line("standardization", self.standardization));
        out.push_str(&dump_line("w0", self.w0));
        for (i, w) in self.weights.iter().enumerate() {
            out.push_str(&dump_line(&format!("w_{}", i + 1), w));
        }
        for (&(i, j), theta) in self.pairs.iter().zip(&self.thetas) {
            out.push_str(&dump_line(&format!("theta_{}_{}", i + 1, j + 1), theta));
        }
        for (i, s) in self.stats.iter().enumerate() {
            out.push_str(&dump_line(&format!("mu_{}", i + 1), s.mean));
            out.push_str(&dump_line(&format!("sigma2_{}", i + 1), s.variance));
        }
        out.push_str(&dump_line("validation_sse", self.validation_sse));
        out.push_str(&dump_line("solver_residual", self.solver_residual));
        match self.ridge {
            Some(r) => out.push_str(&dump_line("ridge", r)),
            None => out.push_str(&dump_line("ridge", "none")),
        }
        out.push_str(&dump_line("ridge_applied", self.ridge_applied));
        out
    }

    /// Evaluates the combined forecast for every row of `forecasts` using
    /// the given statistics.
    fn evaluate_rows(&self, forecasts: &ForecastSet, stats: &[ModelStats]) -> Vec<f64> {
        let n = forecasts.model_count();
        (0..forecasts.len())
            .map(|k| {
                let mut y = self.w0;
                for i in 0..n {
                    y += self.weights[i] * forecasts.column(i)[k];
                }
                for (&(i, j), theta) in self.pairs.iter().zip(&self.thetas) {
                    let vi = standardize(forecasts.column(i)[k], &stats[i], self.standardization);
                    let vj = standardize(forecasts.column(j)[k], &stats[j], self.standardization);
                    y += theta * vi * vj;
                }
                y
            })
            .collect()
    }
}

const PIVOT_RATIO_FLOOR: f64 = 1e-6;

/// Cholesky factor with a relative pivot-ratio guard: factorization failure
/// or a collapsed pivot means the block is numerically singular.
fn guarded_cholesky(matrix: DMatrix<f64>, block: &str, strict: bool) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let chol = Cholesky::new(matrix).ok_or_else(|| singularity_error(block))?;
    if strict {
        let l = chol.l();
        let diag: Vec<f64> = (0..l.nrows()).map(|i| l[(i, i)]).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min / max).is_finite() || min / max < PIVOT_RATIO_FLOOR {
            return Err(singularity_error(block));
        }
    }
    Ok(chol)
}

fn singularity_error(block: &str) -> Error {
    Error::Singular(format!(
        "nonlinear ensemble: the {block} block of the normal equations is singular; \
optimal weights exist only when every inverted block is invertible \
(collinear or constant forecast columns; a positive ridge makes the solve proceed)"
    ))
}

/// Fits the ensemble weights on a validation window in closed form.
///
/// The normal equations are solved blockwise: with F and G the design
/// blocks, V = FᵀF, Z = FᵀG, U = GᵀG, b = FᵀY, d = GᵀY, the pair weights
/// are θ = (U − ZᵀV⁻¹Z)⁻¹(d − ZᵀV⁻¹b) and the linear weights
/// w = V⁻¹(b − Zθ). Columns are equilibrated to unit norm first and the
/// solution is polished by a few refinement passes against the original
/// data, so the returned weights satisfy the stationarity conditions to
/// high absolute accuracy even on raw-scale data.
///
/// `ridge` adds λ to the diagonal of both inverted blocks (in the
/// equilibrated basis) and sets a diagnostic flag; without it a singular
/// block fails loudly.
pub fn fit_nonlinear_ensemble(
    val_forecasts: &ForecastSet,
    val_actuals: &[f64],
    ridge: Option<f64>,
    standardization: Standardization,
) -> Result<NonlinearEnsembleWeights> {
    let n = val_forecasts.model_count();
    let rows = val_forecasts.len();
    let pairs = pair_order(n);
    let unknowns = n + 1 + pairs.len();
    if val_actuals.len() != rows {
        return Err(Error::Size(format!(
            "nonlinear ensemble: {} actuals for {} forecast rows",
            val_actuals.len(),
            rows
        )));
    }
    if val_actuals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("nonlinear ensemble: non-finite actual value".into()));
    }
    if rows < unknowns {
        return Err(Error::Size(format!(
            "nonlinear ensemble: {rows} rows cannot determine {unknowns} weights"
        )));
    }
    let lambda = match ridge {
        Some(l) if l < 0.0 || !l.is_finite() => {
            return Err(Error::Config("nonlinear ensemble: ridge must be nonnegative".into()))
        }
        Some(l) if l > 0.0 => Some(l),
        _ => None,
    };

    let stats: Vec<ModelStats> = (0..n).map(|i| compute_stats(val_forecasts.column(i))).collect();
    let design = build_design_matrices(val_forecasts, &stats, standardization)?;
    let m = n + 1;
    let p = design.pairs.len();

    // equilibrate: scale every design column to unit 2-norm
    let mut x = DMatrix::zeros(rows, unknowns);
    x.view_mut((0, 0), (rows, m)).copy_from(&design.f);
    x.view_mut((0, m), (rows, p)).copy_from(&design.g);
    let col_norms: Vec<f64> = (0..unknowns).map(|j| x.column(j).norm()).collect();
    if col_norms.iter().any(|&c| c == 0.0 || !c.is_finite()) {
        return Err(singularity_error("linear"));
    }
    let mut x_scaled = x.clone();
    for (j, &norm) in col_norms.iter().enumerate() {
        x_scaled.column_mut(j).scale_mut(1.0 / norm);
    }
    let y = DVector::from_column_slice(val_actuals);

    let f_scaled = x_scaled.view((0, 0), (rows, m)).into_owned();
    let g_scaled = x_scaled.view((0, m), (rows, p)).into_owned();
    let mut v = f_scaled.transpose() * &f_scaled;
    let z = f_scaled.transpose() * &g_scaled;
    let mut u = g_scaled.transpose() * &g_scaled;
    let b = f_scaled.transpose() * &y;
    let d = g_scaled.transpose() * &y;
    if let Some(l) = lambda {
        for i in 0..m {
            v[(i, i)] += l;
        }
        for i in 0..p {
            u[(i, i)] += l;
        }
    }
    let strict = lambda.is_none();
    let chol_v = guarded_cholesky(v, "linear", strict)?;
    let v_inv_z = chol_v.solve(&z);
    let v_inv_b = chol_v.solve(&b);
    let schur = &u - z.transpose() * &v_inv_z;
    let chol_s = guarded_cholesky(schur, "interaction", strict)?;
    let theta_scaled = chol_s.solve(&(&d - z.transpose() * &v_inv_b));
    let w_scaled = chol_v.solve(&(&b - &z * &theta_scaled));

    let mut beta_scaled = DVector::zeros(unknowns);
    beta_scaled.rows_mut(0, m).copy_from(&w_scaled);
    beta_scaled.rows_mut(m, p).copy_from(&theta_scaled);

    // refinement: re-derive the gradient from the data and push it through
    // the same block factorization
    for _ in 0..3 {
        let mut residual_grad = x_scaled.transpose() * (&y - &x_scaled * &beta_scaled);
        if let Some(l) = lambda {
            residual_grad -= l * &beta_scaled;
        }
        let r_f = residual_grad.rows(0, m).into_owned();
        let r_g = residual_grad.rows(m, p).into_owned();
        let delta_theta = chol_s.solve(&(&r_g - z.transpose() * chol_v.solve(&r_f)));
        let delta_w = chol_v.solve(&(&r_f - &z * &delta_theta));
        for i in 0..m {
            beta_scaled[i] += delta_w[i];
        }
        for i in 0..p {
            beta_scaled[m + i] += delta_theta[i];
        }
    }

    let beta: Vec<f64> = beta_scaled
        .iter()
        .zip(&col_norms)
        .map(|(&v, &norm)| v / norm)
        .collect();
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(singularity_error("combined"));
    }

    let mut fitted = NonlinearEnsembleWeights {
        names: val_forecasts.names().to_vec(),
        w0: beta[0],
        weights: beta[1..m].to_vec(),
        thetas: beta[m..].to_vec(),
        pairs,
        stats,
        standardization,
        validation_sse: 0.0,
        solver_residual: 0.0,
        ridge: lambda,
        ridge_applied: lambda.is_some(),
    };
    let combined = fitted.evaluate_rows(val_forecasts, &fitted.stats);
    let residual: Vec<f64> = val_actuals.iter().zip(&combined).map(|(a, c)| a - c).collect();
    fitted.validation_sse = residual.iter().map(|r| r * r).sum();
    fitted.solver_residual = (0..unknowns)
        .map(|j| {
            residual
                .iter()
                .enumerate()
                .map(|(k, r)| x[(k, j)] * r)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);
    Ok(fitted)
}

/// Evaluates the fitted ensemble on new forecasts.
///
/// With `StatsMode::Frozen` (the default) the fit-time statistics
/// standardize the cross terms; `StatsMode::Recompute` re-derives them from
/// the forecasts being combined. Model names and order must match the fit.
pub fn predict_nonlinear(
    weights: &NonlinearEnsembleWeights,
    forecasts: &ForecastSet,
    mode: StatsMode,
) -> Result<Vec<f64>> {
    if forecasts.names() != weights.names() {
        return Err(Error::Alignment(format!(
            "nonlinear ensemble: fitted on models [{}], asked to combine [{}]",
            weights.names().join(", "),
            forecasts.names().join(", ")
        )));
    }
    let stats: Vec<ModelStats> = match mode {
        StatsMode::Frozen => weights.stats().to_vec(),
        StatsMode::Recompute => (0..forecasts.model_count())
            .map(|i| compute_stats(forecasts.column(i)))
            .collect(),
    };
    validated_stats(&stats, forecasts.model_count())?;
    Ok(weights.evaluate_rows(forecasts, &stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_stats(n: usize) -> Vec<ModelStats> {
        (0..n).map(|_| ModelStats { mean: 0.0, variance: 1.0 }).collect()
    }

    fn random_instance(seed: u64, rows: usize) -> (ForecastSet, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let columns: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..rows).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let actuals: Vec<f64> = (0..rows)
            .map(|k| {
                0.4 + 0.5 * columns[0][k] + 0.3 * columns[1][k] + 0.2 * columns[2][k]
                    + 0.05 * columns[0][k] * columns[1][k]
                    + rng.random_range(-0.1..0.1)
            })
            .collect();
        let fs = ForecastSet::new(
            vec!["a".into(), "b".into(), "c".into()],
            columns,
        )
        .unwrap();
        (fs, actuals)
    }

    #[test]
    fn standardized_column_by_variance() {
        let fs = ForecastSet::new(
            vec!["a".into(), "b".into()],
            vec![vec![2.0, 4.0], vec![0.0, 2.0]],
        )
        .unwrap();
        let stats = vec![
            ModelStats { mean: 3.0, variance: 1.0 },
            ModelStats { mean: 1.0, variance: 1.0 },
        ];
        let d = build_design_matrices(&fs, &stats, Standardization::Variance).unwrap();
        // v columns are (-1, 1) and (-1, 1); their product column is (1, 1)
        assert_eq!(d.f[(0, 1)], 2.0);
        assert_eq!(d.f[(1, 1)], 4.0);
        assert_eq!(d.g[(0, 0)], 1.0);
        assert_eq!(d.g[(1, 0)], 1.0);
    }

    #[test]
    fn three_model_shapes_and_pair_order() {
        let (fs, _) = random_instance(1, 14);
        let stats: Vec<ModelStats> = (0..3).map(|i| compute_stats(fs.column(i))).collect();
        let d = build_design_matrices(&fs, &stats, Standardization::Variance).unwrap();
        assert_eq!(d.f.shape(), (14, 4));
        assert_eq!(d.g.shape(), (14, 3));
        assert_eq!(d.pairs, vec![(0, 1), (1, 2), (2, 0)]);
        assert!((0..14).all(|k| d.f[(k, 0)] == 1.0));
    }

    #[test]
    fn general_pair_order_is_lexicographic() {
        assert_eq!(pair_order(4), vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(pair_order(2), vec![(0, 1)]);
    }

    #[test]
    fn identical_columns_share_g_columns() {
        let col = vec![1.0, 3.0, 2.0, 5.0];
        let fs = ForecastSet::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![col.clone(), col.clone(), col.clone()],
        )
        .unwrap();
        let stats: Vec<ModelStats> = (0..3).map(|i| compute_stats(fs.column(i))).collect();
        let d = build_design_matrices(&fs, &stats, Standardization::Variance).unwrap();
        for k in 0..4 {
            assert_eq!(d.g[(k, 0)], d.g[(k, 1)]);
            assert_eq!(d.g[(k, 1)], d.g[(k, 2)]);
        }
    }

    #[test]
    fn constant_column_rejected() {
        let fs = ForecastSet::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 1.0], vec![1.0, 2.0]],
        )
        .unwrap();
        let stats: Vec<ModelStats> = (0..2).map(|i| compute_stats(fs.column(i))).collect();
        assert!(build_design_matrices(&fs, &stats, Standardization::Variance).is_err());
    }

    #[test]
    fn exact_target_in_span_gives_zero_sse() {
        let (fs, _) = random_instance(3, 30);
        let actuals = fs.column(0).to_vec();
        let w = fit_nonlinear_ensemble(&fs, &actuals, None, Standardization::Variance).unwrap();
        let scale: f64 = actuals.iter().map(|v| v * v).sum();
        assert!(w.validation_sse() <= 1e-12 * scale.max(1.0), "sse {}", w.validation_sse());
    }

    #[test]
    fn stationarity_at_the_optimum() {
        let (fs, actuals) = random_instance(5, 50);
        let w = fit_nonlinear_ensemble(&fs, &actuals, None, Standardization::Variance).unwrap();
        // SSE partials are twice the stored residual projection
        assert!(2.0 * w.solver_residual() <= 1e-6, "residual {}", w.solver_residual());
    }

    #[test]
    fn nesting_dominance_on_random_instances() {
        for seed in 0..5 {
            let (fs, actuals) = random_instance(seed, 40);
            let w = fit_nonlinear_ensemble(&fs, &actuals, None, Standardization::Variance).unwrap();
            for i in 0..3 {
                let sse: f64 = fs
                    .column(i)
                    .iter()
                    .zip(&actuals)
                    .map(|(f, a)| (a - f) * (a - f))
                    .sum();
                assert!(w.validation_sse() <= sse + 1e-9);
            }
            let avg_sse: f64 = (0..fs.len())
                .map(|k| {
                    let avg = fs.row(k).iter().sum::<f64>() / 3.0;
                    (actuals[k] - avg) * (actuals[k] - avg)
                })
                .sum();
            assert!(w.validation_sse() <= avg_sse + 1e-9);
        }
    }

    #[test]
    fn duplicate_columns_are_singular_without_ridge() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let col: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let other: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fs = ForecastSet::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![col.clone(), col.clone(), other],
        )
        .unwrap();
        let actuals: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!(matches!(
            fit_nonlinear_ensemble(&fs, &actuals, None, Standardization::Variance),
            Err(Error::Singular(_))
        ));
        let ridged =
            fit_nonlinear_ensemble(&fs, &actuals, Some(1e-8), Standardization::Variance).unwrap();
        assert!(ridged.ridge_applied());
        assert_eq!(ridged.ridge(), Some(1e-8));
    }

    #[test]
    fn predict_hand_example() {
        // v1 = (5-3)/1 = 2, v2 = (3-0)/1 = 3, prediction = 1 + 5 + 2*3 = 12
        let w = NonlinearEnsembleWeights::from_parts(
            vec!["a".into(), "b".into(), "c".into()],
            1.0,
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![
                ModelStats { mean: 3.0, variance: 1.0 },
                ModelStats { mean: 0.0, variance: 1.0 },
                ModelStats { mean: 0.0, variance: 1.0 },
            ],
            Standardization::Variance,
        )
        .unwrap();
        let fs = ForecastSet::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![5.0], vec![3.0], vec![7.0]],
        )
        .unwrap();
        let out = predict_nonlinear(&w, &fs, StatsMode::Frozen).unwrap();
        assert_eq!(out, vec![12.0]);
    }

    #[test]
    fn zero_thetas_reduce_to_linear_combination() {
        let w = NonlinearEnsembleWeights::from_parts(
            vec!["a".into(), "b".into(), "c".into()],
            0.5,
            vec![0.2, 0.3, 0.4],
            vec![0.0, 0.0, 0.0],
            unit_stats(3),
            Standardization::Variance,
        )
        .unwrap();
        let (fs, _) = random_instance(8, 10);
        let out = predict_nonlinear(&w, &fs, StatsMode::Frozen).unwrap();
        for k in 0..10 {
            let row = fs.row(k);
            let linear = 0.5 + 0.2 * row[0] + 0.3 * row[1] + 0.4 * row[2];
            assert!((out[k] - linear).abs() < 1e-12);
        }
    }

    #[test]
    fn predicting_on_fit_set_reproduces_stored_sse() {
        let (fs, actuals) = random_instance(13, 25);
        let w = fit_nonlinear_ensemble(&fs, &actuals, None, Standardization::Variance).unwrap();
        let out = predict_nonlinear(&w, &fs, StatsMode::Frozen).unwrap();
        let sse: f64 = actuals.iter().zip(&out).map(|(a, c)| (a - c) * (a - c)).sum();
        assert_eq!(sse, w.validation_sse());
    }

    #[test]
    fn name_mismatch_rejected() {
        let (fs, actuals) = random_instance(2, 20);
        let w = fit_nonlinear_ensemble(&fs, &actuals, None, Standardization::Variance).unwrap();
        let renamed = ForecastSet::new(
            vec!["x".into(), "b".into(), "c".into()],
            (0..3).map(|i| fs.column(i).to_vec()).collect(),
        )
        .unwrap();
        assert!(matches!(
            predict_nonlinear(&w, &renamed, StatsMode::Frozen),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn permutation_equivariance() {
        let (fs, actuals) = random_instance(21, 40);
        let base = fit_nonlinear_ensemble(&fs, &actuals, None, Standardization::Variance).unwrap();
        let order = [1, 2, 0];
        let permuted_fs = fs.permuted(&order).unwrap();
        let permuted =
            fit_nonlinear_ensemble(&permuted_fs, &actuals, None, Standardization::Variance).unwrap();
        for (new_i, &old_i) in order.iter().enumerate() {
            assert!((permuted.weights()[new_i] - base.weights()[old_i]).abs() < 1e-7);
        }
        // new pairs (0,1),(1,2),(2,0) map onto old pairs (1,2),(2,0),(0,1)
        assert!((permuted.thetas()[0] - base.thetas()[1]).abs() < 1e-7);
        assert!((permuted.thetas()[1] - base.thetas()[2]).abs() < 1e-7);
        assert!((permuted.thetas()[2] - base.thetas()[0]).abs() < 1e-7);
        let p_base = predict_nonlinear(&base, &fs, StatsMode::Frozen).unwrap();
        let p_perm = predict_nonlinear(&permuted, &permuted_fs, StatsMode::Frozen).unwrap();
        for (a, b) in p_base.iter().zip(&p_perm) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn recompute_mode_uses_new_statistics() {
        let w = NonlinearEnsembleWeights::from_parts(
            vec!["a".into(), "b".into()],
            0.0,
            vec![0.0, 0.0],
            vec![1.0],
            vec![
                ModelStats { mean: 100.0, variance: 50.0 },
                ModelStats { mean: 100.0, variance: 50.0 },
            ],
            Standardization::Variance,
        )
        .unwrap();
        let fs = ForecastSet::new(
            vec!["a".into(), "b".into()],
            vec![vec![2.0, 4.0], vec![0.0, 2.0]],
        )
        .unwrap();
        // recomputed stats: means (3, 1), variances (1, 1): v products are 1 at both rows
        let out = predict_nonlinear(&w, &fs, StatsMode::Recompute).unwrap();
        assert!((out[0] - 1.0).abs() < 1e-12);
        assert!((out[1] - 1.0).abs() < 1e-12);
    }
}
