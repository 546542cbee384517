use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{Duration, NaiveDate};
use pvnne::dataio::{
    apply_night_zero, parse_records, reconstruct_missing, resample, write_records, Dataset, Field, SampleRecord,
};
use pvnne::ensemble::{
    fit_ensemble, structure_summary, write_forecast_csv, write_members_csv, DateSpan, EnsembleModel, MemberStatus,
    ModelLayout,
};
use pvnne::evaluation::{
    classify_dataset, length_experiment, resolution_experiment, run_benchmarks, select_test_days, write_benchmark_csv,
    write_long_csv, MetricReport, Season, TestDay,
};
use pvnne::sky::{season_composition, DayClass, DayKind};
use pvnne::synth::generate_year;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{read_input, FileDigest, OutputDir};
use crate::{Cli, CliError, Command};

struct Run {
    cfg: RunConfig,
    toml: String,
    inputs: Vec<FileDigest>,
}

impl Run {
    fn new(cli: &Cli) -> Result<Self, CliError> {
        let mut inputs = Vec::new();
        let mut cfg = match &cli.config {
            Some(path) => {
                let (bytes, digest) = read_input(path)?;
                inputs.push(digest);
                let text = String::from_utf8(bytes).map_err(|_| CliError::Config("config is not UTF-8".into()))?;
                RunConfig::from_toml(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        if let Some(path) = &cli.data {
            cfg.data.path = Some(path.clone());
        }
        if let Some(r) = cli.resolution {
            cfg.data.resolution_minutes = Some(r);
        }
        if let Some(day) = cli.day {
            cfg.evaluation.forecast_day = Some(day);
        }
        cfg.validate()?;
        let toml = cfg.to_toml()?;
        Ok(Self { cfg, toml, inputs })
    }

    fn finish(self, out: OutputDir, command: Command) -> Result<(), CliError> {
        out.finish(command.name(), self.cfg.seed, &self.toml, self.inputs)?;
        Ok(())
    }

    /// Loads the measurement file, or generates the synthetic year when no
    /// file is configured. `synth_resolution` overrides the generator's.
    fn load(&mut self, synth_resolution: Option<u32>) -> Result<Loaded, CliError> {
        let cfg = &self.cfg;
        let target = cfg.data.resolution_minutes;
        match &cfg.data.path {
            Some(path) => {
                let (bytes, digest) = read_input(path)?;
                self.inputs.push(digest);
                let records = parse_records(&bytes[..], &cfg.data.schema)?;
                let native = match cfg.data.source_resolution_minutes {
                    Some(r) => r,
                    None => infer_resolution(&records)?,
                };
                let raw = Dataset::regularize(records, native, cfg.data.daylight)?;
                let missing_before = raw.missing_counts();
                let mut ds = if missing_before.values().any(|&n| n > 0) {
                    reconstruct_missing(&raw, cfg.data.neighbors)?
                } else {
                    raw
                };
                if let Some(t) = target.filter(|&t| t != native) {
                    ds = resample(&ds, t)?;
                }
                Ok(Loaded {
                    dataset: apply_night_zero(&ds),
                    peak: cfg.evaluation.peak_power_kw,
                    missing_before,
                    synthetic: None,
                })
            }
            None => {
                let mut synth = cfg.synth_config();
                if let Some(r) = synth_resolution {
                    synth.resolution_minutes = r;
                }
                let year = generate_year(&synth)?;
                let mut ds = year.dataset.clone();
                if let Some(t) = target.filter(|&t| t != synth.resolution_minutes) {
                    ds = resample(&ds, t)?;
                }
                Ok(Loaded {
                    missing_before: ds.missing_counts(),
                    dataset: ds,
                    peak: cfg.evaluation.peak_power_kw.or(Some(synth.plant.peak_kw())),
                    synthetic: Some(year.days),
                })
            }
        }
    }
}

struct Loaded {
    dataset: Dataset,
    peak: Option<f64>,
    missing_before: BTreeMap<Field, usize>,
    synthetic: Option<Vec<pvnne::synth::SyntheticDay>>,
}

impl Loaded {
    fn peak(&self) -> f64 {
        self.peak.unwrap_or_else(|| self.dataset.records().iter().filter_map(|r| r.pv_power).fold(0.0, f64::max))
    }

    fn last_date(&self) -> Result<NaiveDate, CliError> {
        self.dataset.dates().last().copied().ok_or_else(|| CliError::Data("dataset has no days".into()))
    }
}

fn infer_resolution(records: &[SampleRecord]) -> Result<u32, CliError> {
    records
        .windows(2)
        .map(|w| (w[1].timestamp - w[0].timestamp).num_minutes())
        .filter(|&m| m > 0)
        .min()
        .and_then(|m| u32::try_from(m).ok())
        .ok_or_else(|| CliError::Data("cannot infer resolution from fewer than two timestamps".into()))
}

pub(crate) fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let mut run = Run::new(cli)?;
    let mut out = OutputDir::create(&cli.out)?;
    match cli.command {
        Command::Synth => synth(&mut run, &mut out, cli)?,
        Command::Ingest => ingest(&mut run, &mut out)?,
        Command::Classify => classify(&mut run, &mut out)?,
        Command::Train => train(&mut run, &mut out)?,
        Command::Forecast => forecast(&mut run, &mut out, cli)?,
        Command::Evaluate => evaluate(&mut run, &mut out)?,
        Command::ExperimentResolution => experiment_resolution(&mut run, &mut out, cli)?,
        Command::ExperimentLength => experiment_length(&mut run, &mut out)?,
    }
    run.finish(out, cli.command)
}

fn csv_bytes(buf: &mut Vec<u8>, text: String) -> Result<(), CliError> {
    buf.extend_from_slice(text.as_bytes());
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_classes(out: &mut OutputDir, classes: &[(NaiveDate, DayClass)], window_days: usize) -> Result<(), CliError> {
    let mut text = String::from("date,season,kind,k_t\n");
    for (d, c) in classes {
        let _ = writeln!(text, "{d},{},{},{}", Season::of(*d).abbreviation(), c.kind.as_str(), c.k_t);
    }
    out.write("classification.csv", text.as_bytes())?;
    let only: Vec<DayClass> = classes.iter().map(|(_, c)| *c).collect();
    let mut text = String::from("start_day,window_days,partial,clear_pct,partially_cloudy_pct,cloudy_pct\n");
    for w in season_composition(&only, window_days) {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            w.start_day, w.window_days, w.partial, w.clear_pct, w.partial_pct, w.cloudy_pct
        );
    }
    out.write("composition.csv", text.as_bytes())
}

fn synth(run: &mut Run, out: &mut OutputDir, cli: &Cli) -> Result<(), CliError> {
    if run.cfg.data.path.is_some() {
        return Err(CliError::Usage("synth does not read a data file".into()));
    }
    let loaded = run.load(cli.resolution)?;
    out.write_with("synthetic.csv", |buf| Ok(write_records(buf, loaded.dataset.records())?))?;
    let days = loaded.synthetic.as_deref().unwrap_or_default();
    let mut text = String::from("date,requested,kind,k_t,attempts\n");
    for d in days {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            d.date,
            d.requested.as_str(),
            d.class.kind.as_str(),
            d.class.k_t,
            d.attempts
        );
    }
    out.write("synthetic_days.csv", text.as_bytes())?;
    let classes: Vec<(NaiveDate, DayClass)> = days.iter().map(|d| (d.date, d.class)).collect();
    write_classes(out, &classes, run.cfg.synth.window_days)
}

#[derive(Serialize)]
struct IngestReport {
    records: usize,
    days: usize,
    resolution_minutes: u32,
    missing_before: BTreeMap<Field, usize>,
    missing_after: BTreeMap<Field, usize>,
}

fn ingest(run: &mut Run, out: &mut OutputDir) -> Result<(), CliError> {
    if run.cfg.data.path.is_none() {
        return Err(CliError::Usage("ingest needs --data or data.path".into()));
    }
    let loaded = run.load(None)?;
    let ds = &loaded.dataset;
    out.write_with("clean.csv", |buf| Ok(write_records(buf, ds.records())?))?;
    out.write_json(
        "ingest_report.json",
        &IngestReport {
            records: ds.len(),
            days: ds.dates().len(),
            resolution_minutes: ds.resolution_minutes(),
            missing_before: loaded.missing_before.clone(),
            missing_after: ds.missing_counts(),
        },
    )
}

fn classify(run: &mut Run, out: &mut OutputDir) -> Result<(), CliError> {
    let loaded = run.load(None)?;
    let classes = classify_dataset(&loaded.dataset, &run.cfg.site)?;
    write_classes(out, &classes, run.cfg.synth.window_days)
}

fn layout(cfg: &RunConfig, ds: &Dataset) -> ModelLayout {
    ModelLayout {
        wavelet: Some(cfg.wavelet),
        lags: cfg.lags.clone(),
        resolution_minutes: ds.resolution_minutes(),
        daylight: ds.daylight(),
    }
}

#[derive(Serialize)]
struct TrainingSummary {
    target_day: NaiveDate,
    train_first: NaiveDate,
    train_last: NaiveDate,
    validation_days: Vec<NaiveDate>,
    alpha: f64,
    members: usize,
    usable_members: usize,
    failures: Vec<String>,
    structures: Vec<StructureSummary>,
}

#[derive(Serialize)]
struct StructureSummary {
    structure: usize,
    hidden: usize,
    trainer: pvnne::ensemble::Trainer,
    members: usize,
}

fn train(run: &mut Run, out: &mut OutputDir) -> Result<(), CliError> {
    let loaded = run.load(None)?;
    let cfg = &run.cfg;
    let target = match cfg.evaluation.forecast_day {
        Some(d) => d,
        None => loaded.last_date()?,
    };
    let ev = &cfg.evaluation;
    let val_first = target - Duration::days(ev.validation_days as i64);
    let span =
        DateSpan { first: val_first - Duration::days(ev.train_days as i64), last: val_first - Duration::days(1) };
    let validation: Vec<NaiveDate> = (0..ev.validation_days).map(|i| val_first + Duration::days(i as i64)).collect();
    let ds = &loaded.dataset;
    let model =
        fit_ensemble(ds, &cfg.ensemble_config(), &layout(cfg, ds), &cfg.trainers, span, &validation, loaded.peak())?;
    out.write("model.json", model.to_json()?.as_bytes())?;
    let failures = model
        .members
        .iter()
        .filter_map(|m| match &m.status {
            MemberStatus::Failed { reason } => Some(format!("({}, {}): {reason}", m.structure, m.index)),
            _ => None,
        })
        .collect();
    let structures = structure_summary(&model)
        .into_iter()
        .map(|(structure, (hidden, trainer, members))| StructureSummary { structure, hidden, trainer, members })
        .collect();
    out.write_json(
        "training.json",
        &TrainingSummary {
            target_day: target,
            train_first: span.first,
            train_last: span.last,
            validation_days: validation,
            alpha: model.alpha,
            members: model.members.len(),
            usable_members: model.usable_members(),
            failures,
            structures,
        },
    )
}

fn forecast(run: &mut Run, out: &mut OutputDir, cli: &Cli) -> Result<(), CliError> {
    let model_path = cli.model.clone().unwrap_or_else(|| out.path("model.json"));
    let (bytes, digest) = read_input(&model_path)?;
    run.inputs.push(digest);
    let text = String::from_utf8(bytes).map_err(|_| CliError::Data("model file is not UTF-8".into()))?;
    let model = EnsembleModel::from_json(&text)?;
    let loaded = run.load(None)?;
    let day = match run.cfg.evaluation.forecast_day {
        Some(d) => d,
        None => loaded.last_date()?,
    };
    let f = model.forecast_day(&loaded.dataset, day)?;
    out.write_with("forecast.csv", |buf| Ok(write_forecast_csv(buf, &f)?))?;
    out.write_with("members.csv", |buf| Ok(write_members_csv(buf, &f)?))?;
    if let Ok(actual) = loaded.dataset.daylight_pv(day) {
        out.write_json("metrics.json", &MetricReport::compute(&actual, &f.aggregate, loaded.peak())?)?;
    }
    Ok(())
}

fn explicit_test_days(loaded: &Loaded, cfg: &RunConfig) -> Result<Vec<TestDay>, CliError> {
    let classes: BTreeMap<NaiveDate, DayClass> = classify_dataset(&loaded.dataset, &cfg.site)?.into_iter().collect();
    cfg.evaluation
        .test_days
        .iter()
        .map(|&date| {
            let c =
                classes.get(&date).ok_or_else(|| CliError::Data(format!("test day {date} has no complete data")))?;
            Ok(TestDay { season: Season::of(date), kind: c.kind, date, k_t: c.k_t })
        })
        .collect()
}

fn test_days(loaded: &Loaded, cfg: &RunConfig, history: usize) -> Result<Vec<TestDay>, CliError> {
    let days = if cfg.evaluation.test_days.is_empty() {
        select_test_days(&loaded.dataset, &cfg.site, history)?
    } else {
        explicit_test_days(loaded, cfg)?
    };
    if days.is_empty() {
        return Err(CliError::Data(format!("no test day has {history} days of history")));
    }
    Ok(days)
}

fn write_test_days(out: &mut OutputDir, days: &[TestDay]) -> Result<(), CliError> {
    let mut text = String::from("season,day,date,k_t\n");
    for d in days {
        let _ = writeln!(text, "{},{},{},{}", d.season.abbreviation(), d.kind.abbreviation(), d.date, d.k_t);
    }
    out.write("test_days.csv", text.as_bytes())
}

fn evaluate(run: &mut Run, out: &mut OutputDir) -> Result<(), CliError> {
    let loaded = run.load(None)?;
    let bench = run.cfg.benchmark_config(Some(loaded.peak()));
    let days = test_days(&loaded, &run.cfg, bench.history_days())?;
    write_test_days(out, &days)?;
    let report = run_benchmarks(&loaded.dataset, &days, &bench)?;
    out.write_with("benchmark.csv", |buf| Ok(write_benchmark_csv(buf, &report)?))?;
    out.write_with("benchmark_long.csv", |buf| Ok(write_long_csv(buf, &report)?))?;
    out.write_json("benchmark.json", &report)
}

fn experiment_resolution(run: &mut Run, out: &mut OutputDir, cli: &Cli) -> Result<(), CliError> {
    let resolutions = match cli.resolution {
        Some(r) => vec![r],
        None => run.cfg.evaluation.resolutions.clone(),
    };
    // Resampling happens per resolution, so load at the finest available.
    run.cfg.data.resolution_minutes = None;
    let finest = resolutions.iter().copied().min();
    let loaded = run.load(finest)?;
    let bench = run.cfg.benchmark_config(Some(loaded.peak()));
    let days = test_days(&loaded, &run.cfg, bench.history_days())?;
    write_test_days(out, &days)?;
    let rows = resolution_experiment(&loaded.dataset, &resolutions, &days, &bench)?;
    out.write_with("resolution.csv", |buf| {
        let mut text = String::from("resolution_minutes,r_squared,mape_pct,failure\n");
        for r in &rows {
            let failure = r.failure.as_deref().unwrap_or("").replace([',', '\n'], ";");
            let _ = writeln!(text, "{},{},{},{failure}", r.resolution_minutes, opt(r.r_squared), opt(r.mape_pct));
        }
        csv_bytes(buf, text)
    })
}

fn experiment_length(run: &mut Run, out: &mut OutputDir) -> Result<(), CliError> {
    let loaded = run.load(None)?;
    let bench = run.cfg.benchmark_config(Some(loaded.peak()));
    let longest = run.cfg.evaluation.lengths.iter().copied().max().unwrap_or(bench.train_days);
    let history = longest + bench.validation_days + bench.lags.max_lag();
    let days = if run.cfg.evaluation.test_days.is_empty() {
        let chosen: Vec<TestDay> = select_test_days(&loaded.dataset, &run.cfg.site, history)?
            .into_iter()
            .filter(|d| d.kind == DayKind::Clear && d.season != Season::Autumn)
            .collect();
        if chosen.is_empty() {
            return Err(CliError::Data(format!("no clear test day has {history} days of history")));
        }
        chosen
    } else {
        explicit_test_days(&loaded, &run.cfg)?
    };
    write_test_days(out, &days)?;
    let rows = length_experiment(&loaded.dataset, &days, &run.cfg.evaluation.lengths, &bench)?;
    out.write_with("length.csv", |buf| {
        let mut text = String::from("season,date,train_days,mape_pct,failure\n");
        for r in &rows {
            let failure = r.failure.as_deref().unwrap_or("").replace([',', '\n'], ";");
            let _ =
                writeln!(text, "{},{},{},{},{failure}", r.season.abbreviation(), r.date, r.train_days, opt(r.mape_pct));
        }
        csv_bytes(buf, text)
    })
}
