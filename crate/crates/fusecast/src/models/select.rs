//! Hyperparameter selection by chronological cross validation.

use crate::error::{Error, Result};
use crate::models::Forecaster;

/// Scores each candidate by expanding-window cross validation and returns
/// the winner.
///
/// The training values are cut into `fold_count` contiguous blocks. For each
/// fold f ≥ 1 a model is fitted on blocks 0..f and scored by rolling
/// one-step-ahead MSE over block f; the candidate score is the mean across
/// folds. Candidates whose fit or scoring fails on any fold are skipped.
/// Returns (grid index, candidate, mean MSE); ties keep the earliest grid
/// point, so the result is deterministic.
pub fn select_hyperparameters<H: Clone>(
    candidates: &[H],
    train: &[f64],
    fold_count: usize,
    fit: impl Fn(&[f64], &H) -> Result<Box<dyn Forecaster>>,
) -> Result<(usize, H, f64)> {
    if candidates.is_empty() {
        return Err(Error::Config("hyperparameter grid is empty".into()));
    }
    if fold_count < 2 {
        return Err(Error::Config("cross validation needs at least 2 folds".into()));
    }
    if train.len() < fold_count {
        return Err(Error::Size(format!(
            "cross validation: {} values cannot form {} folds",
            train.len(),
            fold_count
        )));
    }
    let base = train.len() / fold_count;
    let remainder = train.len() % fold_count;
    let mut ends = Vec::with_capacity(fold_count);
    let mut cursor = 0;
    for i in 0..fold_count {
        cursor += base + usize::from(i < remainder);
        ends.push(cursor);
    }

    let score = |candidate: &H| -> Option<f64> {
        let mut total = 0.0;
        for f in 1..fold_count {
            let prefix = &train[..ends[f - 1]];
            let block = &train[ends[f - 1]..ends[f]];
            let model = fit(prefix, candidate).ok()?;
            let mut history = prefix.to_vec();
            let mut sse = 0.0;
            for &actual in block {
                let prediction = model.predict_next(&history).ok()?;
                let err = prediction[0] - actual;
                if !err.is_finite() {
                    return None;
                }
                sse += err * err;
                history.push(actual);
            }
            total += sse / block.len() as f64;
        }
        Some(total / (fold_count - 1) as f64)
    };

    let mut best: Option<(usize, f64)> = None;
    for (i, candidate) in candidates.iter().enumerate() {
        let Some(mse) = score(candidate) else {
            continue;
        };
        if best.is_none_or(|(_, best_mse)| mse < best_mse) {
            best = Some((i, mse));
        }
    }
    match best {
        Some((i, mse)) => Ok((i, candidates[i].clone(), mse)),
        None => Err(Error::Optimization(
            "no hyperparameter candidate could be fitted on the cross validation folds".into(),
        )),
    }
}
