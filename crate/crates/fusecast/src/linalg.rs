//! Shared dense least-squares plumbing.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff below which a design matrix is treated as
/// rank deficient.
pub(crate) const RANK_TOLERANCE: f64 = 1e-12;

/// Ordinary least squares via SVD with an explicit rank check.
///
/// Errors with a singularity diagnostic when the design matrix is rank
/// deficient (collinear or constant columns) instead of returning a
/// minimum-norm solution.
pub(crate) fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    if x.nrows() != y.len() {
        return Err(Error::Size(format!(
            "least squares: {} rows but {} targets",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() < x.ncols() {
        return Err(Error::Singular(format!(
            "least squares: {} rows cannot determine {} coefficients",
            x.nrows(),
            x.ncols()
        )));
    }
    let svd = x.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if max_sv == 0.0 {
        return Err(Error::Singular("least squares: zero design matrix".into()));
    }
    let cutoff = max_sv * RANK_TOLERANCE;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if rank < x.ncols() {
        return Err(Error::Singular(format!(
            "least squares: design matrix rank {} below column count {}",
            rank,
            x.ncols()
        )));
    }
    let beta = svd
        .solve(y, cutoff)
        .map_err(|e| Error::Singular(format!("least squares: {e}")))?;
    Ok(DVector::from_column_slice(beta.as_slice()))
}
