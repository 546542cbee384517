use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate, NaiveTime, Timelike};

use super::{check_resolution, slot_of, DataError, Dataset, Field, SampleRecord};

pub const DEFAULT_NEIGHBORS: usize = 3;

/// Per-day grid of values indexed by time-of-day slot.
struct DayGrid {
    date: NaiveDate,
    /// `values[slot][field]`; `None` for absent records and missing values.
    values: Vec<[Option<f64>; 5]>,
}

fn day_grids(dataset: &Dataset) -> Vec<DayGrid> {
    let slots = dataset.slots_per_day();
    dataset
        .day_ranges()
        .into_iter()
        .map(|(date, range)| {
            let mut values = vec![[None; 5]; slots];
            for r in &dataset.records()[range] {
                let slot = slot_of(r.timestamp, dataset.resolution_minutes());
                for (fi, &f) in Field::ALL.iter().enumerate() {
                    values[slot][fi] = r.get(f);
                }
            }
            DayGrid { date, values }
        })
        .collect()
}

fn field_scale(dataset: &Dataset, field: Field) -> f64 {
    let vals: Vec<f64> = dataset.records().iter().filter_map(|r| r.get(field)).collect();
    if vals.len() < 2 {
        return 1.0;
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
    if var > 0.0 {
        var.sqrt()
    } else {
        1.0
    }
}

/// Root-mean-square difference over slots and fields present in both days,
/// each field scaled by its dataset-wide standard deviation.
fn day_distance(a: &DayGrid, b: &DayGrid, scales: &[f64; 5]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (ra, rb) in a.values.iter().zip(&b.values) {
        for fi in 0..5 {
            if let (Some(x), Some(y)) = (ra[fi], rb[fi]) {
                sum += ((x - y) / scales[fi]).powi(2);
                n += 1;
            }
        }
    }
    if n == 0 {
        f64::INFINITY
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Fills every missing value with the mean of the same time-of-day value on
/// the `k` most similar days that are complete for that field.
///
/// Similarity uses the original (unfilled) data, so the result does not
/// depend on the order in which gaps are visited. Ties are broken by the
/// earlier date.
pub fn reconstruct_missing(dataset: &Dataset, k: usize) -> Result<Dataset, DataError> {
    if k == 0 {
        return Err(DataError::Config("neighbor count must be positive".into()));
    }
    let grids = day_grids(dataset);
    let slots = dataset.slots_per_day();
    let mut scales = [1.0; 5];
    for (fi, &f) in Field::ALL.iter().enumerate() {
        scales[fi] = field_scale(dataset, f);
    }

    let mut records = dataset.records().to_vec();
    let index_of = |date: NaiveDate, slot: usize| -> Option<usize> {
        let t = date.and_time(NaiveTime::MIN) + Duration::minutes((slot as u32 * dataset.resolution_minutes()) as i64);
        let first = records_first(dataset)?;
        let step = dataset.resolution_minutes() as i64;
        let offset = (t - first).num_minutes();
        (offset >= 0 && offset % step == 0).then(|| (offset / step) as usize)
    };

    for (fi, &field) in Field::ALL.iter().enumerate() {
        let missing = dataset.records().iter().filter(|r| r.get(field).is_none()).count();
        if missing == 0 {
            continue;
        }
        if missing == dataset.len() {
            return Err(DataError::IrrecoverableField(field));
        }
        let complete: Vec<usize> =
            (0..grids.len()).filter(|&d| grids[d].values.iter().all(|v| v[fi].is_some())).collect();
        for (d, grid) in grids.iter().enumerate() {
            let gaps: Vec<usize> = (0..slots)
                .filter(|&s| grid.values[s][fi].is_none())
                .filter(|&s| index_of(grid.date, s).is_some_and(|i| i < records.len()))
                .collect();
            if gaps.is_empty() {
                continue;
            }
            let mut candidates: Vec<(f64, usize)> =
                complete.iter().filter(|&&c| c != d).map(|&c| (day_distance(grid, &grids[c], &scales), c)).collect();
            if candidates.len() < k {
                return Err(DataError::InsufficientDays { field, needed: k, found: candidates.len() });
            }
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let neighbors = &candidates[..k];
            for s in gaps {
                let fill = neighbors.iter().map(|&(_, c)| grids[c].values[s][fi].unwrap()).sum::<f64>() / k as f64;
                let i = index_of(grid.date, s).unwrap();
                debug_assert!(records[i].get(field).is_none());
                records[i].set(field, Some(fill));
            }
        }
    }
    Dataset::new(records, dataset.resolution_minutes(), dataset.daylight())
}

fn records_first(dataset: &Dataset) -> Option<chrono::NaiveDateTime> {
    dataset.records().first().map(|r| r.timestamp)
}

/// Averages source samples into windows of `target_minutes`, labeled by the
/// window start (aligned to midnight). Missing samples are excluded from the
/// mean; an all-missing window yields a missing value.
pub fn resample(dataset: &Dataset, target_minutes: u32) -> Result<Dataset, DataError> {
    check_resolution(target_minutes)?;
    let source = dataset.resolution_minutes();
    if !target_minutes.is_multiple_of(source) {
        return Err(DataError::Resolution(format!(
            "target {target_minutes} min is not a multiple of source {source} min"
        )));
    }
    if target_minutes == source {
        return Ok(dataset.clone());
    }
    let mut windows: BTreeMap<chrono::NaiveDateTime, ([f64; 5], [usize; 5])> = BTreeMap::new();
    for r in dataset.records() {
        let minute = r.timestamp.time().num_seconds_from_midnight() / 60;
        let start = r.timestamp.date().and_time(NaiveTime::MIN)
            + Duration::minutes((minute / target_minutes * target_minutes) as i64);
        let entry = windows.entry(start).or_insert(([0.0; 5], [0; 5]));
        for (fi, &f) in Field::ALL.iter().enumerate() {
            if let Some(v) = r.get(f) {
                entry.0[fi] += v;
                entry.1[fi] += 1;
            }
        }
    }
    let records = windows
        .into_iter()
        .map(|(t, (sum, count))| {
            let mut rec = SampleRecord::empty(t);
            for (fi, &f) in Field::ALL.iter().enumerate() {
                rec.set(f, (count[fi] > 0).then(|| sum[fi] / count[fi] as f64));
            }
            rec
        })
        .collect();
    Dataset::new(records, target_minutes, dataset.daylight())
}

/// Sets PV power to exactly zero outside the daylight window.
pub fn apply_night_zero(dataset: &Dataset) -> Dataset {
    let window = dataset.daylight();
    let records = dataset
        .records()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if !window.contains(r.timestamp.time()) {
                r.pv_power = Some(0.0);
            }
            r
        })
        .collect();
    Dataset::new(records, dataset.resolution_minutes(), window).expect("spacing unchanged")
}

#[cfg(test)]
mod tests {
    use super::super::DaylightWindow;
    use super::*;
    use chrono::NaiveDateTime;

    fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M").unwrap()
    }

    fn hourly_days(days: usize, f: impl Fn(usize, usize) -> f64) -> Dataset {
        let start = ts("2014-01-01T00:00");
        let recs = (0..days * 24)
            .map(|i| {
                let v = f(i / 24, i % 24);
                SampleRecord {
                    timestamp: start + Duration::hours(i as i64),
                    pv_power: Some(v),
                    irradiance: Some(v),
                    temperature: Some(v),
                    wind_speed: Some(v),
                    humidity: Some(v.min(100.0)),
                }
            })
            .collect();
        Dataset::new(recs, 60, DaylightWindow::default()).unwrap()
    }

    #[test]
    fn reconstruct_is_identity_without_gaps() {
        let ds = hourly_days(4, |d, h| (d * 24 + h) as f64);
        assert_eq!(reconstruct_missing(&ds, 3).unwrap(), ds);
    }

    #[test]
    fn single_gap_filled_from_identical_day() {
        // Days 0 and 2 identical; day 1 very different; gap on day 2 must come from day 0.
        let ds = hourly_days(3, |d, h| if d == 1 { 50.0 + h as f64 } else { h as f64 });
        let mut recs = ds.clone().into_records();
        recs[2 * 24 + 10].pv_power = None;
        let gapped = Dataset::new(recs, 60, DaylightWindow::default()).unwrap();
        let filled = reconstruct_missing(&gapped, 1).unwrap();
        assert_eq!(filled.records()[2 * 24 + 10].pv_power, Some(10.0));
        assert_eq!(filled, ds);
    }

    #[test]
    fn reconstruct_errors() {
        let ds = hourly_days(2, |_, h| h as f64);
        let mut recs = ds.clone().into_records();
        recs.iter_mut().for_each(|r| r.humidity = None);
        let none = Dataset::new(recs, 60, DaylightWindow::default()).unwrap();
        assert_eq!(reconstruct_missing(&none, 1), Err(DataError::IrrecoverableField(Field::Humidity)));

        let mut recs = ds.into_records();
        recs[3].temperature = None;
        let one = Dataset::new(recs, 60, DaylightWindow::default()).unwrap();
        assert!(matches!(reconstruct_missing(&one, 2), Err(DataError::InsufficientDays { .. })));
    }

    #[test]
    fn resample_means_and_alignment() {
        let start = ts("2014-01-01T00:00");
        let recs: Vec<SampleRecord> = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0]
            .iter()
            .enumerate()
            .map(|(i, &v)| SampleRecord {
                pv_power: Some(v),
                irradiance: if i == 1 { None } else { Some(v) },
                humidity: None,
                ..SampleRecord::empty(start + Duration::minutes(i as i64))
            })
            .collect();
        let ds = Dataset::new(recs, 1, DaylightWindow::default()).unwrap();
        let out = resample(&ds, 3).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out.records()[0].pv_power, Some(4.0));
        assert_eq!(out.records()[0].irradiance, Some(4.0));
        assert_eq!(out.records()[1].timestamp, ts("2014-01-01T00:03"));
        assert_eq!(out.records()[1].pv_power, Some(10.0));
        assert_eq!(out.records()[0].humidity, None);
        assert_eq!(resample(&ds, 1).unwrap(), ds);
        assert!(matches!(resample(&out, 4), Err(DataError::Resolution(_))));
    }

    #[test]
    fn night_zero_only_touches_night() {
        let ds = hourly_days(1, |_, _| 5.0);
        let z = apply_night_zero(&ds);
        for r in z.records() {
            let h = r.timestamp.hour();
            let expect = if (7..17).contains(&h) { 5.0 } else { 0.0 };
            assert_eq!(r.pv_power, Some(expect));
            assert_eq!(r.irradiance, Some(5.0));
        }
    }
}
