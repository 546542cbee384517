//! Forecast accuracy metrics, the persistence baseline and the benchmark
//! harness comparing the ensemble with single-network models.

mod benchmark;
mod metrics;

pub use benchmark::{
    classify_dataset, length_experiment, resolution_experiment, run_benchmarks, score_test_days, select_test_days,
    write_benchmark_csv, write_long_csv, BenchmarkConfig, BenchmarkModel, BenchmarkReport, BenchmarkRow, LengthRow,
    ModelForecast, ResolutionRow, Season, TestDay,
};
pub use metrics::{error_variance, mape, r_squared, MetricReport};

use chrono::{Duration, NaiveDate};
use thiserror::Error;

use crate::dataio::{DataError, Dataset};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("peak power must be positive, got {0}")]
    Normalization(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("actual values are constant; r_squared is undefined")]
    DegenerateVariance,
    #[error("benchmark setup: {0}")]
    Setup(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Previous-day persistence: the forecast for each daylight step of
/// `target_day` is the PV power at the same time on the day before.
pub fn persistence_forecast(history: &Dataset, target_day: NaiveDate) -> Result<Vec<f64>, EvalError> {
    Ok(history.daylight_pv(target_day - Duration::days(1))?)
}
