use chrono::{Duration, NaiveDate, NaiveDateTime};
use proptest::prelude::*;
use pvnne::dataio::{
    apply_night_zero, build_patterns, parse_records, reconstruct_missing, resample, write_records, DataError, Dataset,
    DayComponents, DaylightWindow, Field, LagConfig, SampleRecord, Schema,
};
use pvnne::synth::{generate_year, SynthConfig};
use pvnne::wavelet::{Extension, WaveletSpec};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_year(days: usize, resolution: u32) -> Dataset {
    let cfg = SynthConfig {
        n_days: days,
        resolution_minutes: resolution,
        composition: vec![[60.0, 30.0, 10.0]; days.div_ceil(30)],
        ..Default::default()
    };
    generate_year(&cfg).unwrap().dataset
}

#[test]
fn csv_round_trip_is_lossless() {
    let ds = small_year(3, 15);
    let mut buf = Vec::new();
    write_records(&mut buf, ds.records()).unwrap();
    let back = parse_records(&buf[..], &Schema::default()).unwrap();
    assert_eq!(back, ds.records());
}

#[test]
fn missing_values_are_filled_from_similar_days() {
    let ds = small_year(40, 15);
    let total = ds.len() * Field::ALL.len();
    let drop = (total as f64 * 0.0062).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let mut records = ds.records().to_vec();
    let mut dropped = Vec::new();
    for i in sample(&mut rng, total, drop) {
        let (r, f) = (i / Field::ALL.len(), Field::ALL[i % Field::ALL.len()]);
        dropped.push((r, f, records[r].get(f).unwrap()));
        records[r].set(f, None);
    }
    let holed = Dataset::new(records, 15, ds.daylight()).unwrap();
    assert_eq!(holed.missing_counts().values().sum::<usize>(), drop);

    let filled = reconstruct_missing(&holed, 3).unwrap();
    assert_eq!(filled.missing_counts().values().sum::<usize>(), 0);
    // Untouched values survive unchanged.
    for (i, (a, b)) in ds.records().iter().zip(filled.records()).enumerate() {
        for f in Field::ALL {
            if !dropped.iter().any(|&(r, df, _)| r == i && df == f) {
                assert_eq!(a.get(f), b.get(f));
            }
        }
    }
    // Filled PV values land within the plant's range.
    for &(r, f, _) in &dropped {
        let v = filled.records()[r].get(f).unwrap();
        assert!(f.admits(v), "{f} {v}");
        if f == Field::PvPower {
            assert!(v <= 300.0);
        }
    }
    // Filling twice changes nothing.
    assert_eq!(reconstruct_missing(&filled, 3).unwrap(), filled);
}

#[test]
fn fill_needs_enough_complete_days() {
    let ds = small_year(3, 60);
    let mut records = ds.records().to_vec();
    for day in 0..3 {
        records[day * 24 + 12].irradiance = None;
    }
    let holed = Dataset::new(records, 60, ds.daylight()).unwrap();
    assert!(matches!(reconstruct_missing(&holed, 3), Err(DataError::InsufficientDays { .. })));
}

#[test]
fn resampling_preserves_daily_energy() {
    let fine = small_year(4, 1);
    for target in [15, 30, 60] {
        let coarse = resample(&fine, target).unwrap();
        assert_eq!(coarse.resolution_minutes(), target);
        assert_eq!(coarse.len() * target as usize, fine.len());
        for date in fine.dates() {
            let e_fine: f64 = fine.day(date).iter().map(|r| r.pv_power.unwrap()).sum::<f64>() / 60.0;
            let e_coarse: f64 =
                coarse.day(date).iter().map(|r| r.pv_power.unwrap()).sum::<f64>() * target as f64 / 60.0;
            assert!((e_fine - e_coarse).abs() < 1e-9 * e_fine.max(1.0), "{target} {date}");
        }
    }
    assert!(resample(&fine, 7).is_err());
    assert!(resample(&small_year(2, 15), 10).is_err());
}

#[test]
fn night_zero_only_touches_night() {
    let ds = small_year(2, 15);
    let z = apply_night_zero(&ds);
    let window = DaylightWindow::default();
    for (a, b) in ds.records().iter().zip(z.records()) {
        if window.contains(a.timestamp.time()) {
            assert_eq!(a, b);
        } else {
            assert_eq!(b.pv_power, Some(0.0));
        }
    }
}

#[test]
fn shuffled_rows_parse_in_timestamp_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let start = NaiveDate::from_ymd_opt(2014, 3, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let mut rows: Vec<(NaiveDateTime, f64)> = (0..100).map(|i| (start + Duration::minutes(15 * i), i as f64)).collect();
    rows.shuffle(&mut rng);
    let mut text = String::from("timestamp,pv_kw,ghi_wm2,temp_c,wind_ms,humidity_pct\n");
    for (t, v) in &rows {
        text.push_str(&format!("{},{v},1,20,2,50\n", t.format("%Y-%m-%dT%H:%M")));
    }
    let parsed = parse_records(text.as_bytes(), &Schema::default()).unwrap();
    let mut oracle = rows.clone();
    oracle.sort_by_key(|r| r.0);
    let got: Vec<(NaiveDateTime, f64)> = parsed.iter().map(|r| (r.timestamp, r.pv_power.unwrap())).collect();
    assert_eq!(got, oracle);
}

fn month_history(ds: &Dataset) -> Vec<DayComponents> {
    let spec = WaveletSpec::db4();
    ds.dates()
        .iter()
        .map(|&d| DayComponents::decomposed(d, &ds.daylight_pv(d).unwrap(), &spec, Extension::Symmetric).unwrap())
        .collect()
}

#[test]
fn pattern_counts_follow_lag_depth() {
    let ds = apply_night_zero(&small_year(30, 15));
    assert_eq!(ds.daylight_steps(), 40);
    let history = month_history(&ds);
    for (lags, days) in [(vec![1], 29), (LagConfig::default().day_lags, 28)] {
        let lags = LagConfig { day_lags: lags };
        let sets = build_patterns(&ds, &history, &lags).unwrap();
        assert_eq!(sets.len(), 4);
        for set in &sets {
            assert_eq!(set.inputs.rows(), days * 40);
            assert_eq!(set.targets.rows(), days * 40);
            assert_eq!(set.inputs.cols(), lags.feature_count());
        }
    }
}

#[test]
fn patterns_are_normalized_and_invertible() {
    let ds = apply_night_zero(&small_year(30, 15));
    let history = month_history(&ds);
    let sets = build_patterns(&ds, &history, &LagConfig::default()).unwrap();
    for set in &sets {
        assert!(set.inputs.as_slice().iter().chain(set.targets.as_slice()).all(|v| (-1.0..=1.0).contains(v)));
        let back = set.target_norm.denormalize(&set.targets).unwrap();
        let first_day = set.dates[0];
        let band = &history.iter().find(|d| d.date == first_day).unwrap().bands[set.component];
        for (i, x) in band.iter().enumerate() {
            assert!((back.get(i, 0) - x).abs() <= 1e-12 * (1.0 + x.abs()), "{} vs {x}", back.get(i, 0));
        }
    }
}

fn t0() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2014, 5, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
}

proptest! {
    #[test]
    fn regularize_keeps_every_present_record(keep in prop::collection::vec(any::<bool>(), 96)) {
        let records: Vec<SampleRecord> = keep
            .iter()
            .enumerate()
            .filter(|(_, &k)| k)
            .map(|(i, _)| SampleRecord { pv_power: Some(i as f64), ..SampleRecord::empty(t0() + Duration::minutes(15 * i as i64)) })
            .collect();
        prop_assume!(!records.is_empty());
        let ds = Dataset::regularize(records.clone(), 15, DaylightWindow::default()).unwrap();
        let present: Vec<&SampleRecord> = ds.records().iter().filter(|r| r.pv_power.is_some()).collect();
        prop_assert_eq!(present.len(), records.len());
        prop_assert!(ds.records().windows(2).all(|w| w[1].timestamp - w[0].timestamp == Duration::minutes(15)));
    }

    #[test]
    fn resampled_values_are_window_means(values in prop::collection::vec(0.0f64..300.0, 120)) {
        let records: Vec<SampleRecord> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| SampleRecord { pv_power: Some(v), ..SampleRecord::empty(t0() + Duration::minutes(i as i64)) })
            .collect();
        let ds = Dataset::new(records, 1, DaylightWindow::default()).unwrap();
        let r = resample(&ds, 30).unwrap();
        for (w, rec) in r.records().iter().enumerate() {
            let mean = values[w * 30..(w + 1) * 30].iter().sum::<f64>() / 30.0;
            prop_assert!((rec.pv_power.unwrap() - mean).abs() < 1e-9);
        }
    }
}
