use serde::{Deserialize, Serialize};

use super::EvalError;

fn check(actual: &[f64], forecast: &[f64], peak: f64) -> Result<(), EvalError> {
    if !(peak > 0.0) {
        return Err(EvalError::Normalization(peak));
    }
    if actual.len() != forecast.len() {
        return Err(EvalError::Shape(format!("{} actual vs {} forecast values", actual.len(), forecast.len())));
    }
    if actual.is_empty() {
        return Err(EvalError::Shape("empty forecast horizon".into()));
    }
    Ok(())
}

/// Mean absolute error over the horizon as a percentage of the plant peak.
pub fn mape(actual: &[f64], forecast: &[f64], peak: f64) -> Result<f64, EvalError> {
    check(actual, forecast, peak)?;
    let sum: f64 = actual.iter().zip(forecast).map(|(a, f)| (a - f).abs()).sum();
    Ok(100.0 * sum / (actual.len() as f64 * peak))
}

/// Population variance of the peak-normalized errors `(a − f)/peak`.
pub fn error_variance(actual: &[f64], forecast: &[f64], peak: f64) -> Result<f64, EvalError> {
    check(actual, forecast, peak)?;
    let n = actual.len() as f64;
    let errors: Vec<f64> = actual.iter().zip(forecast).map(|(a, f)| a - f).collect();
    let mean = errors.iter().sum::<f64>() / n;
    Ok(errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n / (peak * peak))
}

/// Coefficient of determination `1 − SS_res/SS_tot`.
pub fn r_squared(actual: &[f64], forecast: &[f64]) -> Result<f64, EvalError> {
    if actual.len() != forecast.len() {
        return Err(EvalError::Shape(format!("{} actual vs {} forecast values", actual.len(), forecast.len())));
    }
    if actual.len() < 2 {
        return Err(EvalError::Shape("r_squared needs at least two samples".into()));
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(EvalError::DegenerateVariance);
    }
    let ss_res: f64 = actual.iter().zip(forecast).map(|(a, f)| (a - f).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mape_pct: f64,
    pub error_variance: f64,
    /// Absent when the actual profile is constant.
    pub r_squared: Option<f64>,
    pub horizon: usize,
    pub peak_power: f64,
}

impl MetricReport {
    pub fn compute(actual: &[f64], forecast: &[f64], peak: f64) -> Result<Self, EvalError> {
        Ok(Self {
            mape_pct: mape(actual, forecast, peak)?,
            error_variance: error_variance(actual, forecast, peak)?,
            r_squared: match r_squared(actual, forecast) {
                Ok(r) => Some(r),
                Err(EvalError::DegenerateVariance) => None,
                Err(e) => return Err(e),
            },
            horizon: actual.len(),
            peak_power: peak,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_examples() {
        assert_eq!(mape(&[50.0, 80.0], &[45.0, 88.0], 100.0).unwrap(), 6.5);
        assert_eq!(mape(&[3.0, 3.0], &[3.0, 3.0], 3.0).unwrap(), 0.0);
        assert_eq!(mape(&[10.0, 10.0], &[0.0, 0.0], 10.0).unwrap(), 100.0);
        let v = error_variance(&[50.0, 80.0], &[45.0, 72.0], 100.0).unwrap();
        assert_eq!(v, 2.25e-4);
        assert_eq!(error_variance(&[5.0, 6.0, 7.0], &[4.0, 5.0, 6.0], 10.0).unwrap(), 0.0);
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap(), 0.5);
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(mape(&[1.0], &[1.0], 0.0), Err(EvalError::Normalization(0.0)));
        assert!(matches!(mape(&[1.0], &[1.0, 2.0], 1.0), Err(EvalError::Shape(_))));
        assert_eq!(r_squared(&[2.0, 2.0], &[1.0, 3.0]), Err(EvalError::DegenerateVariance));
    }
}
