//! Time series container, chronological splitting, and value transforms.

use crate::error::{Error, Result};

/// A single recorded transform step. Composite transforms (differencing of
/// order d, seasonal differencing of order D) are recorded as repeated steps
/// so that inversion can walk the log back one step at a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformStep {
    /// Base-10 logarithm of every value.
    Log10,
    /// One application of differencing at the given lag (1 = ordinary,
    /// the seasonal period for seasonal differencing). Shortens the series
    /// by `lag`.
    Diff { lag: usize },
}

/// A transform request, expanded into [`TransformStep`]s when applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Log10,
    /// Ordinary differencing applied `order` times.
    Difference { order: usize },
    /// Seasonal differencing at `period`, applied `order` times.
    SeasonalDifference { order: usize, period: usize },
}

/// Ordered real observations with an optional seasonal period and a record
/// of the transforms applied to reach the current values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    name: String,
    values: Vec<f64>,
    period: Option<usize>,
    transform_log: Vec<TransformStep>,
}

impl TimeSeries {
    /// Build a series, validating that values are nonempty and finite and
    /// that the period, if present, is at least 2 and shorter than the series.
    pub fn new(name: impl Into<String>, values: Vec<f64>, period: Option<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Size("series must be nonempty".into()));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "series value at index {bad} is not finite"
            )));
        }
        if let Some(p) = period {
            if p < 2 || p >= values.len() {
                return Err(Error::Size(format!(
                    "period {p} must be >= 2 and < series length {}",
                    values.len()
                )));
            }
        }
        Ok(TimeSeries {
            name: name.into(),
            values,
            period,
            transform_log: Vec::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    /// The transforms applied to this series, in application order.
    pub fn transform_log(&self) -> &[TransformStep] {
        &self.transform_log
    }

    fn with_values(&self, values: Vec<f64>, log: Vec<TransformStep>) -> TimeSeries {
        TimeSeries {
            name: self.name.clone(),
            values,
            period: self.period,
            transform_log: log,
        }
    }
}

/// Chronological train/validation/test sizes. Validation and test windows
/// are equal-sized by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub train_len: usize,
    pub validation_len: usize,
    pub test_len: usize,
}

impl SplitSpec {
    /// Derive a split for a series of `total` observations holding out the
    /// final `test_len` for testing and an equal-sized validation window
    /// before it.
    pub fn for_total(total: usize, test_len: usize) -> Result<Self> {
        if test_len == 0 {
            return Err(Error::Size("test window must be nonempty".into()));
        }
        if total <= 2 * test_len {
            return Err(Error::Size(format!(
                "series of length {total} cannot hold two windows of {test_len} plus training data"
            )));
        }
        Ok(SplitSpec {
            train_len: total - 2 * test_len,
            validation_len: test_len,
            test_len,
        })
    }

    fn validate(&self, total: usize) -> Result<()> {
        if self.train_len == 0 || self.validation_len == 0 || self.test_len == 0 {
            return Err(Error::Size("all split windows must be nonempty".into()));
        }
        if self.validation_len != self.test_len {
            return Err(Error::Size(format!(
                "validation window ({}) must equal test window ({})",
                self.validation_len, self.test_len
            )));
        }
        let sum = self.train_len + self.validation_len + self.test_len;
        if sum != total {
            return Err(Error::Size(format!(
                "split sizes sum to {sum} but the series has {total} observations"
            )));
        }
        Ok(())
    }
}

/// Partition a series chronologically: the test window is the final
/// `test_len` observations, validation the final `validation_len` of the
/// remainder, training everything before.
pub fn split(series: &TimeSeries, spec: SplitSpec) -> Result<(TimeSeries, TimeSeries, TimeSeries)> {
    spec.validate(series.len())?;
    let v = series.values();
    let train_end = spec.train_len;
    let val_end = train_end + spec.validation_len;
    let log = series.transform_log.clone();
    let train = series.with_values(v[..train_end].to_vec(), log.clone());
    let validation = series.with_values(v[train_end..val_end].to_vec(), log.clone());
    let test = series.with_values(v[val_end..].to_vec(), log);
    Ok((train, validation, test))
}

fn apply_step(values: &[f64], step: TransformStep) -> Result<Vec<f64>> {
    match step {
        TransformStep::Log10 => values
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    Ok(v.log10())
                } else {
                    Err(Error::Domain(format!("log10 of nonpositive value {v}")))
                }
            })
            .collect(),
        TransformStep::Diff { lag } => {
            if values.len() <= lag {
                return Err(Error::Size(format!(
                    "cannot difference at lag {lag}: series has only {} values",
                    values.len()
                )));
            }
            Ok((lag..values.len()).map(|t| values[t] - values[t - lag]).collect())
        }
    }
}

fn expand(series: &TimeSeries, kind: Transform) -> Result<Vec<TransformStep>> {
    match kind {
        Transform::Log10 => Ok(vec![TransformStep::Log10]),
        Transform::Difference { order } => Ok(vec![TransformStep::Diff { lag: 1 }; order]),
        Transform::SeasonalDifference { order, period } => {
            let p = match (period, series.period()) {
                (0, Some(sp)) => sp,
                (0, None) => {
                    return Err(Error::Config(
                        "seasonal differencing needs a period: none given and the series has none"
                            .into(),
                    ))
                }
                (p, _) => p,
            };
            if p < 2 {
                return Err(Error::Config(format!("seasonal period {p} must be >= 2")));
            }
            Ok(vec![TransformStep::Diff { lag: p }; order])
        }
    }
}

/// Apply a transform, returning a new series with its transform log extended.
pub fn apply_transform(series: &TimeSeries, kind: Transform) -> Result<TimeSeries> {
    let steps = expand(series, kind)?;
    let mut values = series.values().to_vec();
    let mut log = series.transform_log.clone();
    for step in steps {
        values = apply_step(&values, step)?;
        log.push(step);
    }
    series
        .with_values(values, log)
        .validated()
}

impl TimeSeries {
    fn validated(self) -> Result<TimeSeries> {
        if self.values.is_empty() {
            return Err(Error::Size("transform consumed the whole series".into()));
        }
        Ok(self)
    }
}

/// Invert every transform in the series' log, newest first. The anchor
/// supplies the observations consumed by differencing: it must be the
/// untransformed series (or a suffix of it) that precedes/contains the
/// transformed values.
///
/// The anchor is replayed through the same transform chain so that each
/// differencing step can be seeded with the values it consumed.
pub fn invert_transform(series: &TimeSeries, anchor: &TimeSeries) -> Result<TimeSeries> {
    if series.transform_log.is_empty() {
        return Err(Error::Config("series has no transforms to invert".into()));
    }
    // Anchor staged through each prefix of the transform chain.
    let mut stages: Vec<Vec<f64>> = Vec::with_capacity(series.transform_log.len());
    let mut current = anchor.values().to_vec();
    stages.push(current.clone());
    for step in &series.transform_log[..series.transform_log.len() - 1] {
        current = apply_step(&current, *step)?;
        stages.push(current.clone());
    }

    let mut values = series.values().to_vec();
    for (idx, step) in series.transform_log.iter().enumerate().rev() {
        let context = &stages[idx];
        values = invert_step(&values, *step, context)?;
    }
    Ok(TimeSeries {
        name: series.name.clone(),
        values,
        period: series.period,
        transform_log: Vec::new(),
    })
}

fn invert_step(values: &[f64], step: TransformStep, context: &[f64]) -> Result<Vec<f64>> {
    match step {
        TransformStep::Log10 => Ok(values.iter().map(|&v| 10f64.powf(v)).collect()),
        TransformStep::Diff { lag } => {
            if context.len() < lag {
                return Err(Error::Size(format!(
                    "anchor supplies only {} values but differencing at lag {lag} needs {lag}",
                    context.len()
                )));
            }
            // seed[i] holds the most recent reconstructed value at phase i.
            let mut out = Vec::with_capacity(values.len());
            let seed_start = context.len() - lag;
            for (t, &dv) in values.iter().enumerate() {
                let prev = if t < lag {
                    context[seed_start + t]
                } else {
                    out[t - lag]
                };
                out.push(dv + prev);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64]) -> TimeSeries {
        TimeSeries::new("t", values.to_vec(), None).unwrap()
    }

    #[test]
    fn split_is_a_partition() {
        let s = series(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        let spec = SplitSpec::for_total(10, 2).unwrap();
        assert_eq!(spec.train_len, 6);
        let (tr, va, te) = split(&s, spec).unwrap();
        assert_eq!(tr.len(), 6);
        assert_eq!(va.len(), 2);
        assert_eq!(te.len(), 2);
        let mut rejoined = tr.values().to_vec();
        rejoined.extend_from_slice(va.values());
        rejoined.extend_from_slice(te.values());
        assert_eq!(rejoined, s.values());
    }

    #[test]
    fn split_sizes_match_bundled_datasets() {
        // lynx: 114 total, 14 test
        let spec = SplitSpec::for_total(114, 14).unwrap();
        assert_eq!((spec.train_len, spec.validation_len, spec.test_len), (86, 14, 14));
        // sunspots: 288 total, 67 test
        let spec = SplitSpec::for_total(288, 67).unwrap();
        assert_eq!((spec.train_len, spec.validation_len, spec.test_len), (154, 67, 67));
    }

    #[test]
    fn split_rejects_bad_sizes() {
        let s = series(&[1.0, 2.0, 3.0]);
        let spec = SplitSpec {
            train_len: 1,
            validation_len: 1,
            test_len: 2,
        };
        assert!(matches!(split(&s, spec), Err(Error::Size(_))));
    }

    #[test]
    fn log10_of_exact_powers() {
        let s = series(&[10.0, 100.0, 1000.0]);
        let t = apply_transform(&s, Transform::Log10).unwrap();
        assert_eq!(t.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(t.transform_log(), &[TransformStep::Log10]);
    }

    #[test]
    fn log10_rejects_nonpositive() {
        let s = series(&[1.0, 0.0]);
        assert!(matches!(
            apply_transform(&s, Transform::Log10),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn first_difference() {
        let s = series(&[1.0, 3.0, 6.0, 10.0]);
        let t = apply_transform(&s, Transform::Difference { order: 1 }).unwrap();
        assert_eq!(t.values(), &[2.0, 3.0, 4.0]);
    }

    #[test]
    fn seasonal_difference_of_periodic_series_is_zero() {
        let base: Vec<f64> = (0..12).map(|i| (i as f64).sin() + 2.0).collect();
        let mut values = Vec::new();
        for _ in 0..4 {
            values.extend_from_slice(&base);
        }
        let s = TimeSeries::new("periodic", values, Some(12)).unwrap();
        let t = apply_transform(&s, Transform::SeasonalDifference { order: 1, period: 12 }).unwrap();
        assert_eq!(t.len(), 36);
        assert!(t.values().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn invert_log10() {
        let s = series(&[10.0, 100.0]);
        let t = apply_transform(&s, Transform::Log10).unwrap();
        let back = invert_transform(&t, &s).unwrap();
        assert!((back.values()[0] - 10.0).abs() < 1e-9);
        assert!((back.values()[1] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn invert_first_difference_with_anchor() {
        // differenced values (2, 3) with anchor last value 1 -> (3, 6)
        let anchor = series(&[1.0]);
        let diffed = TimeSeries {
            name: "d".into(),
            values: vec![2.0, 3.0],
            period: None,
            transform_log: vec![TransformStep::Diff { lag: 1 }],
        };
        let back = invert_transform(&diffed, &anchor).unwrap();
        assert_eq!(back.values(), &[3.0, 6.0]);
    }

    #[test]
    fn composite_round_trip_within_tolerance() {
        // 50 positive values, log10 + d=1 + D=1 (s=12)
        let vals: Vec<f64> = (0..50)
            .map(|i| 100.0 + 40.0 * ((i as f64) * 0.7).sin() + (i as f64) * 1.3)
            .collect();
        let s = TimeSeries::new("rt", vals.clone(), Some(12)).unwrap();
        let t1 = apply_transform(&s, Transform::Log10).unwrap();
        let t2 = apply_transform(&t1, Transform::Difference { order: 1 }).unwrap();
        let t3 = apply_transform(&t2, Transform::SeasonalDifference { order: 1, period: 12 }).unwrap();
        assert_eq!(t3.len(), 50 - 1 - 12);
        // anchor: the 13 observations the differencing consumed
        let anchor = TimeSeries::new("rt", vals[..13].to_vec(), Some(12)).unwrap();
        let back = invert_transform(&t3, &anchor).unwrap();
        // the reconstruction covers the suffix the transforms could not keep
        assert_eq!(back.len(), t3.len());
        for (b, orig) in back.values().iter().zip(vals.iter().skip(13)) {
            assert!(
                ((b - orig) / orig).abs() < 1e-9,
                "round trip drifted: {b} vs {orig}"
            );
        }
    }
}
