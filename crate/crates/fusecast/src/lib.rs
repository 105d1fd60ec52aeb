//! Forecast combination toolkit: base forecasters, linear pooling rules, and
//! a nonlinear ensemble with pairwise interaction terms fitted in closed form.

pub mod combine;
pub mod error;
pub mod harness;
mod linalg;
pub mod metrics;
pub mod models;
pub mod series;

pub use error::{Error, Result};
pub use metrics::{evaluate, ArvDenominator, ErrorReport};
pub use series::{SplitSpec, TimeSeries, Transform};
