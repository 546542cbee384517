use super::{EnsembleError, MemberForecastMatrix};
use crate::evaluation;

/// Correctly rounded sum of finite values (Shewchuk's partials with the
/// half-even correction), independent of summation order.
pub fn exact_sum(values: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for &v in values {
        let mut x = v;
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// Number of values removed in total: `2·floor(α·N/200)`.
pub fn trim_count(n: usize, alpha: f64) -> usize {
    2 * (alpha * n as f64 / 200.0).floor() as usize
}

/// Mean of the values left after dropping `trim_count/2` from each end of
/// the sorted sample. The mean is correctly rounded, so the result does not
/// depend on input order and `alpha = 0` gives the plain mean.
pub fn trim_aggregate(values: &[f64], alpha: f64) -> Result<f64, EnsembleError> {
    if values.is_empty() {
        return Err(EnsembleError::Trim("no values to aggregate".into()));
    }
    if !(0.0..=100.0).contains(&alpha) {
        return Err(EnsembleError::Trim(format!("alpha {alpha} outside [0, 100]")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EnsembleError::Trim("non-finite member value".into()));
    }
    let n = values.len();
    let cut = trim_count(n, alpha);
    if cut >= n {
        return Err(EnsembleError::Trim(format!("alpha {alpha} trims all {n} values")));
    }
    if cut == 0 {
        return Ok(exact_sum(values) / n as f64);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let kept = &sorted[cut / 2..n - cut / 2];
    Ok(exact_sum(kept) / kept.len() as f64)
}

/// Per-step trimmed mean across members.
pub fn aggregate_steps(members: &MemberForecastMatrix, alpha: f64) -> Result<Vec<f64>, EnsembleError> {
    let m = &members.values;
    (0..m.cols()).map(|c| trim_aggregate(&m.column(c), alpha)).collect()
}

/// Picks the candidate with the lowest validation MAPE over all validation
/// steps. Ties go to the smaller alpha; candidates that would trim every
/// member are skipped.
pub fn select_alpha(
    validation: &[(MemberForecastMatrix, Vec<f64>)],
    peak_power: f64,
    candidates: &[f64],
) -> Result<f64, EnsembleError> {
    if candidates.is_empty() {
        return Err(EnsembleError::Config("alpha candidate list is empty".into()));
    }
    if validation.is_empty() {
        return Err(EnsembleError::Config("no validation days".into()));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best: Option<(f64, f64)> = None;
    for &alpha in &sorted {
        let mut actual_all = Vec::new();
        let mut forecast_all = Vec::new();
        let mut valid = true;
        for (members, actual) in validation {
            match aggregate_steps(members, alpha) {
                Ok(f) => forecast_all.extend(f),
                Err(EnsembleError::Trim(_)) => {
                    valid = false;
                    break;
                }
                Err(e) => return Err(e),
            }
            actual_all.extend_from_slice(actual);
        }
        if !valid {
            continue;
        }
        let score = evaluation::mape(&actual_all, &forecast_all, peak_power)?;
        if best.is_none_or(|(_, s)| score < s) {
            best = Some((alpha, score));
        }
    }
    best.map(|(a, _)| a).ok_or_else(|| EnsembleError::Config("every alpha candidate trims all members".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn exact_sum_beats_naive() {
        assert_eq!(exact_sum(&[1e16, 1.0, -1e16]), 1.0);
        assert_eq!(exact_sum(&[0.1; 10]), 1.0);
        assert_eq!(exact_sum(&[]), 0.0);
    }

    #[test]
    fn hand_cases() {
        assert_eq!(trim_aggregate(&[1.0, 2.0, 3.0, 100.0], 50.0).unwrap(), 2.5);
        assert_eq!(trim_aggregate(&[1.0, 2.0, 3.0, 100.0], 0.0).unwrap(), 26.5);
        assert_eq!(trim_count(100, 10.0), 10);
        assert_eq!(trim_count(4, 50.0), 2);
        assert_eq!(trim_count(5, 30.0), 0);
        assert!(trim_aggregate(&[1.0, 2.0], 100.0).is_err());
        assert!(trim_aggregate(&[], 0.0).is_err());
    }

    fn matrix(rows: &[Vec<f64>]) -> MemberForecastMatrix {
        MemberForecastMatrix { members: (0..rows.len()).map(|i| (0, i)).collect(), values: Matrix::from_rows(rows) }
    }

    #[test]
    fn alpha_selection() {
        let actual = vec![10.0, 20.0];
        let mut rows = vec![actual.clone(); 95];
        rows.extend(vec![vec![500.0, -400.0]; 5]);
        let val = vec![(matrix(&rows), actual.clone())];
        let alpha = select_alpha(&val, 100.0, &[0.0, 10.0, 20.0, 30.0, 40.0, 50.0]).unwrap();
        assert_eq!(alpha, 10.0);

        let exact = vec![(matrix(&[actual.clone(), actual.clone()]), actual.clone())];
        assert_eq!(select_alpha(&exact, 100.0, &[30.0, 0.0, 10.0]).unwrap(), 0.0);
        assert_eq!(select_alpha(&exact, 100.0, &[40.0]).unwrap(), 40.0);
        assert!(select_alpha(&exact, 100.0, &[]).is_err());
    }
}
