use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{error_variance, mape, persistence_forecast, r_squared, EvalError};
use crate::dataio::{apply_night_zero, resample, Dataset, LagConfig};
use crate::ensemble::{
    exact_sum, fit_ensemble, DateSpan, EnsembleConfig, EnsembleModel, MemberForecastMatrix, ModelLayout, Trainer,
    TrainerConfigs, WaveletSettings,
};
use crate::seed::derive_seed;
use crate::sky::{self, DayClass, DayKind, SiteGeometry};
use crate::synth::day_of_year;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Summer,
    Autumn,
    Winter,
    Spring,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Summer, Season::Autumn, Season::Winter, Season::Spring];

    /// Southern-hemisphere seasons by day of year: summer 1–60 and 331–365,
    /// autumn 61–150, winter 151–240, spring 241–330.
    pub fn of(date: NaiveDate) -> Season {
        match day_of_year(date) {
            61..=150 => Season::Autumn,
            151..=240 => Season::Winter,
            241..=330 => Season::Spring,
            _ => Season::Summer,
        }
    }

    pub fn abbreviation(self) -> &'static str {
        match self {
            Season::Summer => "Su",
            Season::Autumn => "Au",
            Season::Winter => "W",
            Season::Spring => "Sp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BenchmarkModel {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
}

impl BenchmarkModel {
    pub const ALL: [BenchmarkModel; 6] = [
        BenchmarkModel::M1,
        BenchmarkModel::M2,
        BenchmarkModel::M3,
        BenchmarkModel::M4,
        BenchmarkModel::M5,
        BenchmarkModel::M6,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BenchmarkModel::M1 => "M1",
            BenchmarkModel::M2 => "M2",
            BenchmarkModel::M3 => "M3",
            BenchmarkModel::M4 => "M4",
            BenchmarkModel::M5 => "M5",
            BenchmarkModel::M6 => "M6",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            BenchmarkModel::M1 => "persistence",
            BenchmarkModel::M2 => "backprop network",
            BenchmarkModel::M3 => "pso network",
            BenchmarkModel::M4 => "wavelet + backprop network",
            BenchmarkModel::M5 => "wavelet + pso network",
            BenchmarkModel::M6 => "wavelet ensemble",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub train_days: usize,
    pub validation_days: usize,
    /// Plant rated peak in kW; the largest observed output when absent.
    pub peak_power_kw: Option<f64>,
    pub baseline_hidden: usize,
    pub ensemble: EnsembleConfig,
    pub trainers: TrainerConfigs,
    pub wavelet: WaveletSettings,
    pub lags: LagConfig,
    pub site: SiteGeometry,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            train_days: 30,
            validation_days: 5,
            peak_power_kw: None,
            baseline_hidden: 20,
            ensemble: EnsembleConfig::default(),
            trainers: TrainerConfigs::default(),
            wavelet: WaveletSettings::default(),
            lags: LagConfig::default(),
            site: SiteGeometry::default(),
        }
    }
}

impl BenchmarkConfig {
    /// Days of data needed before a test day.
    pub fn history_days(&self) -> usize {
        self.train_days + self.validation_days + self.lags.max_lag()
    }

    fn peak(&self, dataset: &Dataset) -> Result<f64, EvalError> {
        let peak = match self.peak_power_kw {
            Some(p) => p,
            None => dataset.records().iter().filter_map(|r| r.pv_power).fold(0.0, f64::max),
        };
        if peak > 0.0 {
            Ok(peak)
        } else {
            Err(EvalError::Normalization(peak))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestDay {
    pub season: Season,
    pub kind: DayKind,
    pub date: NaiveDate,
    pub k_t: f64,
}

/// Clearness-index class of every day with complete irradiance.
pub fn classify_dataset(dataset: &Dataset, site: &SiteGeometry) -> Result<Vec<(NaiveDate, DayClass)>, EvalError> {
    let mut out = Vec::new();
    for date in dataset.dates() {
        let Ok(irr) = dataset.day_irradiance(date) else { continue };
        let h0 =
            sky::extraterrestrial_insolation(day_of_year(date), site).map_err(|e| EvalError::Setup(e.to_string()))?;
        let class = sky::classify_day(sky::daily_insolation(&irr, dataset.resolution_minutes()), h0)
            .map_err(|e| EvalError::Setup(e.to_string()))?;
        out.push((date, class));
    }
    Ok(out)
}

/// For each season and day kind, the first day of that kind preceded by at
/// least `history_days` days of data. Combinations without such a day are
/// left out.
pub fn select_test_days(
    dataset: &Dataset,
    site: &SiteGeometry,
    history_days: usize,
) -> Result<Vec<TestDay>, EvalError> {
    let Some(first) = dataset.records().first().map(|r| r.timestamp.date()) else {
        return Err(EvalError::Setup("dataset is empty".into()));
    };
    let earliest = first + Duration::days(history_days as i64);
    let classes = classify_dataset(dataset, site)?;
    let mut out = Vec::new();
    for season in Season::ALL {
        for kind in DayKind::ALL {
            if let Some((date, class)) =
                classes.iter().find(|(d, c)| *d >= earliest && Season::of(*d) == season && c.kind == kind)
            {
                out.push(TestDay { season, kind, date: *date, k_t: class.k_t });
            }
        }
    }
    Ok(out)
}

/// A model's forecast for one test day. Ensembles also report their members.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelForecast {
    pub forecast: Vec<f64>,
    pub members: Option<MemberForecastMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: BenchmarkModel,
    pub mape_pct: Option<f64>,
    pub error_variance: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub season: Season,
    pub kind: DayKind,
    pub date: NaiveDate,
    pub k_t: f64,
    pub results: Vec<ModelResult>,
    /// Mean of the individual ensemble members' MAPE values.
    pub member_mean_mape: Option<f64>,
}

impl BenchmarkRow {
    pub fn mape(&self, model: BenchmarkModel) -> Option<f64> {
        self.results.iter().find(|r| r.model == model).and_then(|r| r.mape_pct)
    }

    pub fn variance(&self, model: BenchmarkModel) -> Option<f64> {
        self.results.iter().find(|r| r.model == model).and_then(|r| r.error_variance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub peak_power_kw: f64,
    pub rows: Vec<BenchmarkRow>,
    /// Column average over rows where the model produced a value.
    pub average_mape: BTreeMap<BenchmarkModel, Option<f64>>,
    pub average_member_mape: Option<f64>,
    /// Error variance per season, model and day kind.
    pub season_variance: BTreeMap<Season, BTreeMap<BenchmarkModel, BTreeMap<DayKind, Option<f64>>>>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Scores every model on every test day using `forecaster`. A failing model
/// only blanks its own cell.
pub fn score_test_days<F>(
    dataset: &Dataset,
    test_days: &[TestDay],
    peak: f64,
    forecaster: F,
) -> Result<BenchmarkReport, EvalError>
where
    F: Fn(BenchmarkModel, &TestDay) -> Result<ModelForecast, String>,
{
    if !(peak > 0.0) {
        return Err(EvalError::Normalization(peak));
    }
    let mut rows = Vec::with_capacity(test_days.len());
    for day in test_days {
        let actual = dataset.daylight_pv(day.date)?;
        let mut results = Vec::with_capacity(6);
        let mut member_mean_mape = None;
        for model in BenchmarkModel::ALL {
            let scored = forecaster(model, day).and_then(|f| {
                let m = mape(&actual, &f.forecast, peak).map_err(|e| e.to_string())?;
                let v = error_variance(&actual, &f.forecast, peak).map_err(|e| e.to_string())?;
                if let Some(members) = &f.members {
                    let per: Vec<f64> = (0..members.values.rows())
                        .map(|r| mape(&actual, members.values.row(r), peak))
                        .collect::<Result<_, _>>()
                        .map_err(|e| e.to_string())?;
                    member_mean_mape = Some(exact_sum(&per) / per.len() as f64);
                }
                Ok((m, v))
            });
            results.push(match scored {
                Ok((m, v)) => ModelResult { model, mape_pct: Some(m), error_variance: Some(v), failure: None },
                Err(e) => ModelResult { model, mape_pct: None, error_variance: None, failure: Some(e) },
            });
        }
        rows.push(BenchmarkRow {
            season: day.season,
            kind: day.kind,
            date: day.date,
            k_t: day.k_t,
            results,
            member_mean_mape,
        });
    }
    let average_mape = BenchmarkModel::ALL
        .iter()
        .map(|&m| (m, mean(&rows.iter().filter_map(|r| r.mape(m)).collect::<Vec<_>>())))
        .collect();
    let average_member_mape = mean(&rows.iter().filter_map(|r| r.member_mean_mape).collect::<Vec<_>>());
    let mut season_variance: BTreeMap<Season, BTreeMap<BenchmarkModel, BTreeMap<DayKind, Option<f64>>>> =
        BTreeMap::new();
    for r in &rows {
        for m in BenchmarkModel::ALL {
            season_variance.entry(r.season).or_default().entry(m).or_default().insert(r.kind, r.variance(m));
        }
    }
    Ok(BenchmarkReport { peak_power_kw: peak, rows, average_mape, average_member_mape, season_variance })
}

fn model_setup(model: BenchmarkModel, config: &BenchmarkConfig) -> Option<(EnsembleConfig, bool)> {
    let h = config.baseline_hidden;
    match model {
        BenchmarkModel::M1 => None,
        BenchmarkModel::M2 => Some((EnsembleConfig::single(h, Trainer::Backprop, 0), false)),
        BenchmarkModel::M3 => Some((EnsembleConfig::single(h, Trainer::Pso, 0), false)),
        BenchmarkModel::M4 => Some((EnsembleConfig::single(h, Trainer::Backprop, 0), true)),
        BenchmarkModel::M5 => Some((EnsembleConfig::single(h, Trainer::Pso, 0), true)),
        BenchmarkModel::M6 => Some((config.ensemble.clone(), true)),
    }
}

/// Trains `model` on the `train_days` days that end `validation_days`
/// before `test_start`; the days in between calibrate alpha.
fn fit_before(
    dataset: &Dataset,
    test_start: NaiveDate,
    model: BenchmarkModel,
    config: &BenchmarkConfig,
    peak: f64,
    seed_path: &[u64],
) -> Result<EnsembleModel, String> {
    let (mut ens, wavelet) = model_setup(model, config).ok_or("persistence is not trained")?;
    ens.base_seed = derive_seed(config.ensemble.base_seed, seed_path);
    let layout = ModelLayout {
        wavelet: wavelet.then_some(config.wavelet),
        lags: config.lags.clone(),
        resolution_minutes: dataset.resolution_minutes(),
        daylight: dataset.daylight(),
    };
    let val_first = test_start - Duration::days(config.validation_days as i64);
    let train =
        DateSpan { first: val_first - Duration::days(config.train_days as i64), last: val_first - Duration::days(1) };
    let validation: Vec<NaiveDate> =
        (0..config.validation_days).map(|i| val_first + Duration::days(i as i64)).collect();
    fit_ensemble(dataset, &ens, &layout, &config.trainers, train, &validation, peak).map_err(|e| e.to_string())
}

fn forecast_with(
    model: &Result<EnsembleModel, String>,
    dataset: &Dataset,
    date: NaiveDate,
) -> Result<ModelForecast, String> {
    let model = model.as_ref().map_err(|e| format!("training failed: {e}"))?;
    let f = model.forecast_day(dataset, date).map_err(|e| e.to_string())?;
    let members = (f.members.values.rows() > 1).then_some(f.members);
    Ok(ModelForecast { forecast: f.aggregate, members })
}

type SeasonModels = BTreeMap<Season, BTreeMap<BenchmarkModel, Result<EnsembleModel, String>>>;

fn train_season_models(
    dataset: &Dataset,
    test_days: &[TestDay],
    config: &BenchmarkConfig,
    models: &[BenchmarkModel],
    peak: f64,
) -> SeasonModels {
    let mut out = SeasonModels::new();
    for (si, season) in Season::ALL.iter().enumerate() {
        let Some(start) = test_days.iter().filter(|d| d.season == *season).map(|d| d.date).min() else {
            continue;
        };
        let trained = models
            .iter()
            .filter(|&&m| m != BenchmarkModel::M1)
            .map(|&m| (m, fit_before(dataset, start, m, config, peak, &[si as u64, m as u64])))
            .collect();
        out.insert(*season, trained);
    }
    out
}

/// Trains M2–M6 once per season on the window preceding that season's
/// earliest test day, then scores all six models on every test day.
pub fn run_benchmarks(
    dataset: &Dataset,
    test_days: &[TestDay],
    config: &BenchmarkConfig,
) -> Result<BenchmarkReport, EvalError> {
    if test_days.is_empty() {
        return Err(EvalError::Setup("no test days".into()));
    }
    let peak = config.peak(dataset)?;
    let trained = train_season_models(dataset, test_days, config, &BenchmarkModel::ALL, peak);
    score_test_days(dataset, test_days, peak, |model, day| match model {
        BenchmarkModel::M1 => persistence_forecast(dataset, day.date)
            .map(|forecast| ModelForecast { forecast, members: None })
            .map_err(|e| e.to_string()),
        _ => forecast_with(&trained[&day.season][&model], dataset, day.date),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthRow {
    pub season: Season,
    pub date: NaiveDate,
    pub train_days: usize,
    pub mape_pct: Option<f64>,
    pub failure: Option<String>,
}

/// Ensemble MAPE on each test day for each training-window length.
pub fn length_experiment(
    dataset: &Dataset,
    test_days: &[TestDay],
    lengths: &[usize],
    config: &BenchmarkConfig,
) -> Result<Vec<LengthRow>, EvalError> {
    let peak = config.peak(dataset)?;
    let mut rows = Vec::new();
    for (di, day) in test_days.iter().enumerate() {
        let actual = dataset.daylight_pv(day.date)?;
        for &len in lengths {
            let cfg = BenchmarkConfig { train_days: len, ..config.clone() };
            let result = fit_before(dataset, day.date, BenchmarkModel::M6, &cfg, peak, &[100 + di as u64, len as u64])
                .and_then(|m| forecast_with(&Ok(m), dataset, day.date))
                .and_then(|f| mape(&actual, &f.forecast, peak).map_err(|e| e.to_string()));
            let (mape_pct, failure) = match result {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e)),
            };
            rows.push(LengthRow { season: day.season, date: day.date, train_days: len, mape_pct, failure });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionRow {
    pub resolution_minutes: u32,
    /// Over all daylight steps of all test days pooled.
    pub r_squared: Option<f64>,
    pub mape_pct: Option<f64>,
    pub failure: Option<String>,
}

/// Resamples `dataset` to each resolution, trains the ensemble per season as
/// in [`run_benchmarks`], and reports R² of the pooled test-day forecasts.
pub fn resolution_experiment(
    dataset: &Dataset,
    resolutions: &[u32],
    test_days: &[TestDay],
    config: &BenchmarkConfig,
) -> Result<Vec<ResolutionRow>, EvalError> {
    let peak = config.peak(dataset)?;
    let mut rows = Vec::new();
    for &res in resolutions {
        let attempt = || -> Result<(f64, f64), String> {
            let ds = apply_night_zero(&resample(dataset, res).map_err(|e| e.to_string())?);
            let trained = train_season_models(&ds, test_days, config, &[BenchmarkModel::M6], peak);
            let mut actual = Vec::new();
            let mut forecast = Vec::new();
            for day in test_days {
                let f = forecast_with(&trained[&day.season][&BenchmarkModel::M6], &ds, day.date)?;
                actual.extend(ds.daylight_pv(day.date).map_err(|e| e.to_string())?);
                forecast.extend(f.forecast);
            }
            let r2 = r_squared(&actual, &forecast).map_err(|e| e.to_string())?;
            let m = mape(&actual, &forecast, peak).map_err(|e| e.to_string())?;
            Ok((r2, m))
        };
        rows.push(match attempt() {
            Ok((r2, m)) => {
                ResolutionRow { resolution_minutes: res, r_squared: Some(r2), mape_pct: Some(m), failure: None }
            }
            Err(e) => ResolutionRow { resolution_minutes: res, r_squared: None, mape_pct: None, failure: Some(e) },
        });
    }
    Ok(rows)
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "failed".to_string(), |x| format!("{x:.4}"))
}

/// `season,day,M1,..,M6` with one row per test day and a final average row.
pub fn write_benchmark_csv<W: Write>(sink: W, report: &BenchmarkReport) -> Result<(), EvalError> {
    let io = |e: csv::Error| EvalError::Setup(e.to_string());
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["season".to_string(), "day".to_string()];
    header.extend(BenchmarkModel::ALL.iter().map(|m| m.label().to_string()));
    w.write_record(&header).map_err(io)?;
    for r in &report.rows {
        let mut row = vec![r.season.abbreviation().to_string(), r.kind.abbreviation().to_string()];
        row.extend(BenchmarkModel::ALL.iter().map(|&m| fmt_cell(r.mape(m))));
        w.write_record(&row).map_err(io)?;
    }
    let mut avg = vec!["Average".to_string(), String::new()];
    avg.extend(BenchmarkModel::ALL.iter().map(|m| fmt_cell(report.average_mape[m])));
    w.write_record(&avg).map_err(io)?;
    w.flush().map_err(|e| EvalError::Setup(e.to_string()))
}

/// One row per (test day, model) for external plotting.
pub fn write_long_csv<W: Write>(sink: W, report: &BenchmarkReport) -> Result<(), EvalError> {
    let io = |e: csv::Error| EvalError::Setup(e.to_string());
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["season", "day", "date", "model", "mape_pct", "error_variance"]).map_err(io)?;
    for r in &report.rows {
        for res in &r.results {
            w.write_record([
                r.season.abbreviation().to_string(),
                r.kind.abbreviation().to_string(),
                r.date.to_string(),
                res.model.label().to_string(),
                res.mape_pct.map(|v| v.to_string()).unwrap_or_default(),
                res.error_variance.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| EvalError::Setup(e.to_string()))
}
