use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, MetRows};
use crate::matrix::Matrix;
use crate::wavelet::{self, Extension, WaveletError, WaveletSpec};

/// Which previous days feed each pattern. `[1, 2]` uses the previous day
/// and the day before it at the same step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LagConfig {
    pub day_lags: Vec<usize>,
}

impl Default for LagConfig {
    fn default() -> Self {
        Self { day_lags: vec![1, 2] }
    }
}

impl LagConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.day_lags.is_empty() || self.day_lags.contains(&0) {
            return Err(DataError::Config(format!("day lags {:?} must be non-empty and positive", self.day_lags)));
        }
        Ok(())
    }

    pub fn max_lag(&self) -> usize {
        self.day_lags.iter().copied().max().unwrap_or(0)
    }

    /// Lagged inputs plus irradiance, temperature, wind speed and humidity.
    pub fn feature_count(&self) -> usize {
        self.day_lags.len() + 4
    }
}

/// Daylight PV profile of one day split into components that sum to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayComponents {
    pub date: NaiveDate,
    pub bands: Vec<Vec<f64>>,
}

impl DayComponents {
    /// The undecomposed profile as a single band.
    pub fn raw(date: NaiveDate, pv: Vec<f64>) -> Self {
        Self { date, bands: vec![pv] }
    }

    /// Multiresolution components `[A_L, D_1, .., D_L]` of the profile.
    pub fn decomposed(
        date: NaiveDate,
        pv: &[f64],
        spec: &WaveletSpec,
        extension: Extension,
    ) -> Result<Self, WaveletError> {
        Ok(Self { date, bands: wavelet::multiresolution(pv, spec, extension)? })
    }
}

/// Per-column min-max mapping onto `[-1, 1]`. Zero-span columns map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub ranges: Vec<(f64, f64)>,
}

impl Normalization {
    pub fn fit(m: &Matrix) -> Self {
        let ranges = (0..m.cols())
            .map(|c| {
                m.iter_rows()
                    .map(|r| r[c])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
            })
            .collect();
        Self { ranges }
    }

    pub fn normalize_value(&self, col: usize, x: f64) -> f64 {
        let (lo, hi) = self.ranges[col];
        if hi > lo {
            2.0 * (x - lo) / (hi - lo) - 1.0
        } else {
            0.0
        }
    }

    pub fn denormalize_value(&self, col: usize, y: f64) -> f64 {
        let (lo, hi) = self.ranges[col];
        if hi > lo {
            lo + (y + 1.0) * 0.5 * (hi - lo)
        } else {
            lo
        }
    }

    fn map(&self, m: &Matrix, f: impl Fn(usize, f64) -> f64) -> Result<Matrix, DataError> {
        if m.cols() != self.ranges.len() {
            return Err(DataError::Config(format!(
                "matrix has {} columns, normalization has {}",
                m.cols(),
                self.ranges.len()
            )));
        }
        let data = m.as_slice().iter().enumerate().map(|(i, &v)| f(i % m.cols(), v)).collect();
        Ok(Matrix::from_vec(m.rows(), m.cols(), data))
    }

    pub fn normalize(&self, m: &Matrix) -> Result<Matrix, DataError> {
        self.map(m, |c, v| self.normalize_value(c, v))
    }

    pub fn denormalize(&self, m: &Matrix) -> Result<Matrix, DataError> {
        self.map(m, |c, v| self.denormalize_value(c, v))
    }
}

/// Normalized training patterns for one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSet {
    pub component: usize,
    pub inputs: Matrix,
    pub targets: Matrix,
    pub input_norm: Normalization,
    pub target_norm: Normalization,
    /// Target day of each block of rows, in row order.
    pub dates: Vec<NaiveDate>,
}

impl PatternSet {
    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.rows() == 0
    }
}

/// Raw (unnormalized) feature rows for one day, one row per daylight step.
pub fn build_feature_matrix(lagged: &[&[f64]], met: &MetRows) -> Result<Matrix, DataError> {
    let steps = met.len();
    if lagged.iter().any(|l| l.len() != steps) {
        return Err(DataError::Config("lagged profiles and meteorological rows differ in length".into()));
    }
    let cols = lagged.len() + 4;
    let mut data = Vec::with_capacity(steps * cols);
    for s in 0..steps {
        data.extend(lagged.iter().map(|l| l[s]));
        data.extend([met.irradiance[s], met.temperature[s], met.wind_speed[s], met.humidity[s]]);
    }
    Ok(Matrix::from_vec(steps, cols, data))
}

/// Builds one normalized pattern set per component.
///
/// Days within the first `max_lag` days of `history` only serve as lags.
/// Every later day is a target and needs all its lag days in `history` and
/// complete daylight meteorology in `dataset`.
pub fn build_patterns(
    dataset: &Dataset,
    history: &[DayComponents],
    lags: &LagConfig,
) -> Result<Vec<PatternSet>, DataError> {
    lags.validate()?;
    let first = history.first().ok_or_else(|| DataError::Config("history is empty".into()))?;
    let n_bands = first.bands.len();
    let steps = dataset.daylight_steps();
    let by_date: BTreeMap<NaiveDate, &DayComponents> = history.iter().map(|d| (d.date, d)).collect();
    if by_date.len() != history.len() {
        return Err(DataError::Integrity("history repeats a date".into()));
    }
    for d in history {
        if d.bands.len() != n_bands || d.bands.iter().any(|b| b.len() != steps) {
            return Err(DataError::Gap {
                date: d.date,
                detail: format!("expected {n_bands} bands of {steps} daylight steps"),
            });
        }
    }
    let start = *by_date.keys().next().unwrap() + Duration::days(lags.max_lag() as i64);
    let targets: Vec<&DayComponents> = by_date.range(start..).map(|(_, d)| *d).collect();
    if targets.is_empty() {
        return Err(DataError::Config(format!(
            "history of {} days is too short for lag {}",
            history.len(),
            lags.max_lag()
        )));
    }

    let mut per_band_inputs = vec![Vec::new(); n_bands];
    let mut per_band_targets = vec![Vec::new(); n_bands];
    let mut dates = Vec::with_capacity(targets.len());
    for day in &targets {
        let met = dataset.met_rows(day.date)?;
        let lagged_days: Vec<&DayComponents> = lags
            .day_lags
            .iter()
            .map(|&l| {
                let date = day.date - Duration::days(l as i64);
                by_date
                    .get(&date)
                    .copied()
                    .ok_or(DataError::Gap { date, detail: format!("lag day for target {} is absent", day.date) })
            })
            .collect::<Result<_, _>>()?;
        for b in 0..n_bands {
            let lagged: Vec<&[f64]> = lagged_days.iter().map(|d| d.bands[b].as_slice()).collect();
            let x = build_feature_matrix(&lagged, &met)?;
            per_band_inputs[b].extend_from_slice(x.as_slice());
            per_band_targets[b].extend_from_slice(&day.bands[b]);
        }
        dates.push(day.date);
    }

    let rows = targets.len() * steps;
    let cols = lags.feature_count();
    (0..n_bands)
        .map(|b| {
            let x = Matrix::from_vec(rows, cols, std::mem::take(&mut per_band_inputs[b]));
            let y = Matrix::from_vec(rows, 1, std::mem::take(&mut per_band_targets[b]));
            let input_norm = Normalization::fit(&x);
            let target_norm = Normalization::fit(&y);
            Ok(PatternSet {
                component: b,
                inputs: input_norm.normalize(&x)?,
                targets: target_norm.normalize(&y)?,
                input_norm,
                target_norm,
                dates: dates.clone(),
            })
        })
        .collect()
}
