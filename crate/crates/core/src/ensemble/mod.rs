//! Ensemble of feedforward networks over wavelet components.
//!
//! Members are grouped into structures; all members of a structure share a
//! hidden-layer size and a trainer. Every member owns one network per
//! component band. A member's forecast is the sum of its de-normalized
//! component forecasts, and the ensemble forecast is the per-step trimmed
//! mean over members.

mod trim;

pub use trim::{aggregate_steps, exact_sum, select_alpha, trim_aggregate, trim_count};

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::{
    build_feature_matrix, build_patterns, DataError, Dataset, DayComponents, DaylightWindow, LagConfig, Normalization,
    PatternSet,
};
use crate::evaluation::EvalError;
use crate::matrix::Matrix;
use crate::neural::{self, init_network, LmConfig, Network, NetworkSpec, NeuralError, TrainReport};
use crate::pso::{self, PsoConfig, PsoError};
use crate::seed::derive_seed;
use crate::wavelet::{Extension, WaveletError, WaveletName, WaveletSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("invalid ensemble configuration: {0}")]
    Config(String),
    #[error("trim error: {0}")]
    Trim(String),
    #[error("{failed} of {total} members failed to train: {}", .diagnostics.join("; "))]
    Training { failed: usize, total: usize, diagnostics: Vec<String> },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("ensemble has not been trained")]
    NotTrained,
    #[error("ensemble document: {0}")]
    Format(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Pso(#[from] PsoError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trainer {
    Lm,
    Pso,
    Backprop,
}

impl std::fmt::Display for Trainer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Trainer::Lm => "lm",
            Trainer::Pso => "pso",
            Trainer::Backprop => "backprop",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackpropConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub tolerance: f64,
}

impl Default for BackpropConfig {
    fn default() -> Self {
        Self { learning_rate: 0.05, max_epochs: 1000, tolerance: 1e-6 }
    }
}

/// Hyperparameters of every trainer. The PSO seed is overridden per network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerConfigs {
    pub lm: LmConfig,
    pub pso: PsoConfig,
    pub backprop: BackpropConfig,
}

impl Default for TrainerConfigs {
    fn default() -> Self {
        Self {
            lm: LmConfig { max_epochs: 50, ..LmConfig::default() },
            pso: PsoConfig { swarm_size: 20, max_iterations: 60, ..PsoConfig::default() },
            backprop: BackpropConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub n_structures: usize,
    pub models_per_structure: usize,
    /// Hidden-layer size of each structure.
    pub hidden_schedule: Vec<usize>,
    /// Trainer of each structure.
    pub trainer_split: Vec<Trainer>,
    pub alpha_candidates: Vec<f64>,
    pub base_seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_structures: 5,
            models_per_structure: 20,
            hidden_schedule: vec![10, 15, 20, 25, 30],
            trainer_split: vec![Trainer::Lm, Trainer::Lm, Trainer::Pso, Trainer::Pso, Trainer::Pso],
            alpha_candidates: vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0],
            base_seed: 0,
        }
    }
}

impl EnsembleConfig {
    /// A one-member ensemble, i.e. a single network.
    pub fn single(hidden: usize, trainer: Trainer, base_seed: u64) -> Self {
        Self {
            n_structures: 1,
            models_per_structure: 1,
            hidden_schedule: vec![hidden],
            trainer_split: vec![trainer],
            alpha_candidates: vec![0.0],
            base_seed,
        }
    }

    pub fn total_members(&self) -> usize {
        self.n_structures * self.models_per_structure
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.n_structures == 0 || self.models_per_structure == 0 {
            return Err(EnsembleError::Config("structure and model counts must be positive".into()));
        }
        if self.hidden_schedule.len() != self.n_structures {
            return Err(EnsembleError::Config(format!(
                "hidden schedule has {} entries for {} structures",
                self.hidden_schedule.len(),
                self.n_structures
            )));
        }
        if self.trainer_split.len() != self.n_structures {
            return Err(EnsembleError::Config(format!(
                "trainer split has {} entries for {} structures",
                self.trainer_split.len(),
                self.n_structures
            )));
        }
        if self.hidden_schedule.contains(&0) {
            return Err(EnsembleError::Config("hidden sizes must be positive".into()));
        }
        let mut seen = self.hidden_schedule.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.hidden_schedule.len() {
            return Err(EnsembleError::Config("hidden sizes must be distinct".into()));
        }
        if self.alpha_candidates.is_empty() || self.alpha_candidates.iter().any(|a| !(0.0..=100.0).contains(a)) {
            return Err(EnsembleError::Config(format!(
                "alpha candidates {:?} must lie in [0, 100]",
                self.alpha_candidates
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveletSettings {
    pub name: WaveletName,
    pub levels: usize,
    pub extension: Extension,
}

impl Default for WaveletSettings {
    fn default() -> Self {
        Self { name: WaveletName::Db4, levels: 3, extension: Extension::Symmetric }
    }
}

impl WaveletSettings {
    pub fn spec(&self) -> Result<WaveletSpec, WaveletError> {
        WaveletSpec::new(self.name, self.levels)
    }
}

/// Data layout an ensemble is trained for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelLayout {
    /// `None` forecasts the raw profile as a single component.
    pub wavelet: Option<WaveletSettings>,
    pub lags: LagConfig,
    pub resolution_minutes: u32,
    pub daylight: DaylightWindow,
}

impl ModelLayout {
    pub fn components(&self) -> usize {
        self.wavelet.map_or(1, |w| w.levels + 1)
    }

    pub fn steps(&self) -> usize {
        self.daylight.steps(self.resolution_minutes)
    }

    /// Splits a daylight profile into this layout's components.
    pub fn split(&self, date: NaiveDate, pv: Vec<f64>) -> Result<DayComponents, EnsembleError> {
        match &self.wavelet {
            None => Ok(DayComponents::raw(date, pv)),
            Some(w) => Ok(DayComponents::decomposed(date, &pv, &w.spec()?, w.extension)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum MemberStatus {
    Untrained,
    Trained { final_mse: Vec<f64> },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub structure: usize,
    pub index: usize,
    pub hidden: usize,
    pub trainer: Trainer,
    /// One network per component.
    pub networks: Vec<Network>,
    pub status: MemberStatus,
}

impl Member {
    pub fn usable(&self) -> bool {
        matches!(self.status, MemberStatus::Trained { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentNormalization {
    pub input: Normalization,
    pub target: Normalization,
}

/// Forecasts of each usable member (rows) over the horizon (columns), kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberForecastMatrix {
    /// `(structure, index)` of each row.
    pub members: Vec<(usize, usize)>,
    pub values: Matrix,
}

impl MemberForecastMatrix {
    pub fn row_mean(&self) -> Vec<f64> {
        (0..self.values.cols()).map(|c| exact_sum(&self.values.column(c)) / self.values.rows() as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub config: EnsembleConfig,
    pub layout: ModelLayout,
    pub members: Vec<Member>,
    /// Per component; empty before training.
    pub normalization: Vec<ComponentNormalization>,
    pub alpha: f64,
}

pub const ENSEMBLE_FORMAT: &str = "pvnne-ensemble";
pub const ENSEMBLE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct EnsembleDocument {
    format: String,
    version: u32,
    model: EnsembleModel,
}

/// One day-ahead forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayForecast {
    pub date: NaiveDate,
    pub timestamps: Vec<NaiveDateTime>,
    pub aggregate: Vec<f64>,
    pub members: MemberForecastMatrix,
}

/// Creates untrained member skeletons. Member `(s, m)` gets hidden size
/// `hidden_schedule[s]`; its component `k` network is seeded from
/// `(base_seed, s, m, k)`.
pub fn build_ensemble(config: &EnsembleConfig, layout: &ModelLayout) -> Result<EnsembleModel, EnsembleError> {
    config.validate()?;
    layout.lags.validate()?;
    if let Some(w) = &layout.wavelet {
        w.spec()?;
    }
    let inputs = layout.lags.feature_count();
    let mut members = Vec::with_capacity(config.total_members());
    for s in 0..config.n_structures {
        let hidden = config.hidden_schedule[s];
        for m in 0..config.models_per_structure {
            let networks = (0..layout.components())
                .map(|k| {
                    let seed = derive_seed(config.base_seed, &[s as u64, m as u64, k as u64]);
                    init_network(&NetworkSpec::new(vec![inputs, hidden, 1], seed))
                })
                .collect::<Result<_, _>>()?;
            members.push(Member {
                structure: s,
                index: m,
                hidden,
                trainer: config.trainer_split[s],
                networks,
                status: MemberStatus::Untrained,
            });
        }
    }
    Ok(EnsembleModel {
        config: config.clone(),
        layout: layout.clone(),
        members,
        normalization: Vec::new(),
        alpha: config.alpha_candidates.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

fn train_network(
    network: &Network,
    trainer: Trainer,
    patterns: &PatternSet,
    trainers: &TrainerConfigs,
    pso_seed: u64,
) -> Result<(Network, TrainReport), EnsembleError> {
    let (x, y) = (&patterns.inputs, &patterns.targets);
    let out = match trainer {
        Trainer::Lm => neural::train_lm(network, x, y, &trainers.lm)?,
        Trainer::Pso => pso::train_pso(network, x, y, &PsoConfig { seed: pso_seed, ..trainers.pso.clone() })?,
        Trainer::Backprop => {
            let bp = &trainers.backprop;
            neural::train_backprop(network, x, y, bp.learning_rate, bp.max_epochs, bp.tolerance)?
        }
    };
    if !out.1.final_mse.is_finite() {
        return Err(EnsembleError::Neural(NeuralError::Numeric("non-finite final mse".into())));
    }
    Ok(out)
}

impl EnsembleModel {
    pub fn is_trained(&self) -> bool {
        !self.normalization.is_empty()
    }

    pub fn usable_members(&self) -> usize {
        self.members.iter().filter(|m| m.usable()).count()
    }

    /// Trains every member on the per-component pattern sets. Members train
    /// in parallel; each one's result depends only on its own seeds.
    pub fn train(&self, patterns: &[PatternSet], trainers: &TrainerConfigs) -> Result<EnsembleModel, EnsembleError> {
        let k = self.layout.components();
        if patterns.len() != k {
            return Err(EnsembleError::Shape(format!("{} pattern sets for {k} components", patterns.len())));
        }
        let inputs = self.layout.lags.feature_count();
        if let Some(p) = patterns.iter().find(|p| p.inputs.cols() != inputs || p.targets.cols() != 1 || p.is_empty()) {
            return Err(EnsembleError::Shape(format!(
                "component {} patterns are {}x{} -> {}, expected {inputs} inputs and 1 target",
                p.component,
                p.inputs.rows(),
                p.inputs.cols(),
                p.targets.cols()
            )));
        }
        let base = self.config.base_seed;
        let members: Vec<Member> = self
            .members
            .par_iter()
            .map(|member| {
                let mut out = member.clone();
                let mut mses = Vec::with_capacity(k);
                for (c, net) in member.networks.iter().enumerate() {
                    let seed = derive_seed(base, &[member.structure as u64, member.index as u64, c as u64, 1]);
                    match train_network(net, member.trainer, &patterns[c], trainers, seed) {
                        Ok((trained, report)) => {
                            out.networks[c] = trained;
                            mses.push(report.final_mse);
                        }
                        Err(e) => {
                            out.status = MemberStatus::Failed { reason: format!("component {c}: {e}") };
                            return out;
                        }
                    }
                }
                out.status = MemberStatus::Trained { final_mse: mses };
                out
            })
            .collect();
        let failed: Vec<String> = members
            .iter()
            .filter_map(|m| match &m.status {
                MemberStatus::Failed { reason } => Some(format!("member ({}, {}): {reason}", m.structure, m.index)),
                _ => None,
            })
            .collect();
        if failed.len() * 2 > members.len() {
            return Err(EnsembleError::Training { failed: failed.len(), total: members.len(), diagnostics: failed });
        }
        Ok(EnsembleModel {
            members,
            normalization: patterns
                .iter()
                .map(|p| ComponentNormalization { input: p.input_norm.clone(), target: p.target_norm.clone() })
                .collect(),
            ..self.clone()
        })
    }

    /// Normalized feature rows of each component for forecasting `date`.
    ///
    /// Lag days come from the PV history in `dataset`; the meteorological
    /// rows of `date` itself serve as the weather forecast.
    pub fn component_inputs(&self, dataset: &Dataset, date: NaiveDate) -> Result<Vec<Matrix>, EnsembleError> {
        if !self.is_trained() {
            return Err(EnsembleError::NotTrained);
        }
        self.check_dataset(dataset)?;
        let lag_days: Vec<DayComponents> = self
            .layout
            .lags
            .day_lags
            .iter()
            .map(|&l| {
                let d = date - Duration::days(l as i64);
                self.layout.split(d, dataset.daylight_pv(d)?)
            })
            .collect::<Result<_, _>>()?;
        let met = dataset.met_rows(date)?;
        (0..self.layout.components())
            .map(|k| {
                let lagged: Vec<&[f64]> = lag_days.iter().map(|d| d.bands[k].as_slice()).collect();
                let raw = build_feature_matrix(&lagged, &met)?;
                Ok(self.normalization[k].input.normalize(&raw)?)
            })
            .collect()
    }

    fn check_dataset(&self, dataset: &Dataset) -> Result<(), EnsembleError> {
        if dataset.resolution_minutes() != self.layout.resolution_minutes || dataset.daylight() != self.layout.daylight
        {
            return Err(EnsembleError::Shape(format!(
                "dataset is {} min / {:?}, model expects {} min / {:?}",
                dataset.resolution_minutes(),
                dataset.daylight(),
                self.layout.resolution_minutes,
                self.layout.daylight
            )));
        }
        Ok(())
    }

    /// Forecast of every usable member from normalized component inputs.
    pub fn predict_members(&self, inputs: &[Matrix]) -> Result<MemberForecastMatrix, EnsembleError> {
        if !self.is_trained() {
            return Err(EnsembleError::NotTrained);
        }
        let k = self.layout.components();
        if inputs.len() != k {
            return Err(EnsembleError::Shape(format!("{} input blocks for {k} components", inputs.len())));
        }
        let steps = inputs[0].rows();
        if inputs.iter().any(|m| m.rows() != steps) {
            return Err(EnsembleError::Shape("component inputs differ in row count".into()));
        }
        let usable: Vec<&Member> = self.members.iter().filter(|m| m.usable()).collect();
        if usable.is_empty() {
            return Err(EnsembleError::NotTrained);
        }
        let rows: Vec<Vec<f64>> = usable
            .par_iter()
            .map(|member| {
                let mut total = vec![0.0; steps];
                for (c, net) in member.networks.iter().enumerate() {
                    let out = net.predict(&inputs[c])?;
                    let norm = &self.normalization[c].target;
                    for (t, v) in total.iter_mut().zip(out.as_slice()) {
                        *t += norm.denormalize_value(0, *v);
                    }
                }
                Ok(total.into_iter().map(|v: f64| v.max(0.0)).collect())
            })
            .collect::<Result<_, EnsembleError>>()?;
        Ok(MemberForecastMatrix {
            members: usable.iter().map(|m| (m.structure, m.index)).collect(),
            values: Matrix::from_rows(&rows),
        })
    }

    /// Day-ahead forecast of `date`: member forecasts and their trimmed mean
    /// under the stored alpha.
    pub fn forecast_day(&self, dataset: &Dataset, date: NaiveDate) -> Result<DayForecast, EnsembleError> {
        let inputs = self.component_inputs(dataset, date)?;
        let members = self.predict_members(&inputs)?;
        let aggregate = aggregate_steps(&members, self.alpha)?;
        Ok(DayForecast { date, timestamps: dataset.daylight_timestamps(date), aggregate, members })
    }

    pub fn to_json(&self) -> Result<String, EnsembleError> {
        let doc = EnsembleDocument { format: ENSEMBLE_FORMAT.into(), version: ENSEMBLE_VERSION, model: self.clone() };
        serde_json::to_string(&doc).map_err(|e| EnsembleError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, EnsembleError> {
        let doc: EnsembleDocument = serde_json::from_str(text).map_err(|e| EnsembleError::Format(e.to_string()))?;
        if doc.format != ENSEMBLE_FORMAT || doc.version != ENSEMBLE_VERSION {
            return Err(EnsembleError::Format(format!(
                "expected {ENSEMBLE_FORMAT} v{ENSEMBLE_VERSION}, found {} v{}",
                doc.format, doc.version
            )));
        }
        doc.model.config.validate()?;
        Ok(doc.model)
    }
}

/// Inclusive calendar range of training target days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateSpan {
    pub first: NaiveDate,
    pub last: NaiveDate,
}

impl DateSpan {
    pub fn days(&self) -> impl Iterator<Item = NaiveDate> {
        let first = self.first;
        (0..=(self.last - self.first).num_days()).map(move |i| first + Duration::days(i))
    }
}

/// Builds, trains and calibrates an ensemble in one go: patterns for the
/// target days in `train` (their lag days precede the span), member
/// training, then alpha selection on `validation` days.
pub fn fit_ensemble(
    dataset: &Dataset,
    config: &EnsembleConfig,
    layout: &ModelLayout,
    trainers: &TrainerConfigs,
    train: DateSpan,
    validation: &[NaiveDate],
    peak_power: f64,
) -> Result<EnsembleModel, EnsembleError> {
    if train.last < train.first {
        return Err(EnsembleError::Config("training span is empty".into()));
    }
    let skeleton = build_ensemble(config, layout)?;
    let history_start = train.first - Duration::days(layout.lags.max_lag() as i64);
    let history = DateSpan { first: history_start, last: train.last }
        .days()
        .map(|d| layout.split(d, dataset.daylight_pv(d)?))
        .collect::<Result<Vec<_>, _>>()?;
    let patterns = build_patterns(dataset, &history, &layout.lags)?;
    let mut model = skeleton.train(&patterns, trainers)?;
    if config.alpha_candidates.len() > 1 {
        let val = validation
            .iter()
            .map(|&d| {
                let members = model.predict_members(&model.component_inputs(dataset, d)?)?;
                Ok((members, dataset.daylight_pv(d)?))
            })
            .collect::<Result<Vec<_>, EnsembleError>>()?;
        model.alpha = select_alpha(&val, peak_power, &config.alpha_candidates)?;
    }
    Ok(model)
}

/// Writes `timestamp,forecast_kw` rows.
pub fn write_forecast_csv<W: Write>(sink: W, forecast: &DayForecast) -> Result<(), EnsembleError> {
    let io = |e: csv::Error| EnsembleError::Format(e.to_string());
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["timestamp", "forecast_kw"]).map_err(io)?;
    for (t, v) in forecast.timestamps.iter().zip(&forecast.aggregate) {
        w.write_record([t.format("%Y-%m-%dT%H:%M:%S").to_string(), v.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| EnsembleError::Format(e.to_string()))
}

/// Writes one row per member: `structure,index,` then one column per timestamp.
pub fn write_members_csv<W: Write>(sink: W, forecast: &DayForecast) -> Result<(), EnsembleError> {
    let io = |e: csv::Error| EnsembleError::Format(e.to_string());
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["structure".to_string(), "index".to_string()];
    header.extend(forecast.timestamps.iter().map(|t| t.format("%Y-%m-%dT%H:%M:%S").to_string()));
    w.write_record(&header).map_err(io)?;
    for (r, (s, m)) in forecast.members.members.iter().enumerate() {
        let mut row = vec![s.to_string(), m.to_string()];
        row.extend(forecast.members.values.row(r).iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| EnsembleError::Format(e.to_string()))
}

/// Member count per structure and trainer, for reports.
pub fn structure_summary(model: &EnsembleModel) -> BTreeMap<usize, (usize, Trainer, usize)> {
    let mut out = BTreeMap::new();
    for m in &model.members {
        let e = out.entry(m.structure).or_insert((m.hidden, m.trainer, 0));
        if m.usable() {
            e.2 += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(wavelet: bool) -> ModelLayout {
        ModelLayout {
            wavelet: wavelet.then(WaveletSettings::default),
            lags: LagConfig::default(),
            resolution_minutes: 15,
            daylight: DaylightWindow::default(),
        }
    }

    #[test]
    fn default_skeleton() {
        let model = build_ensemble(&EnsembleConfig::default(), &layout(true)).unwrap();
        assert_eq!(model.members.len(), 100);
        for (s, h) in [10, 15, 20, 25, 30].iter().enumerate() {
            let group: Vec<_> = model.members.iter().filter(|m| m.structure == s).collect();
            assert_eq!(group.len(), 20);
            assert!(group.iter().all(|m| m.hidden == *h && m.networks.len() == 4));
        }
        assert_eq!(model, build_ensemble(&EnsembleConfig::default(), &layout(true)).unwrap());
        assert_ne!(model.members[0].networks[0], model.members[1].networks[0]);
    }

    #[test]
    fn config_validation() {
        let bad = EnsembleConfig { hidden_schedule: vec![10, 10, 20, 25, 30], ..Default::default() };
        assert!(matches!(bad.validate(), Err(EnsembleError::Config(_))));
        let bad = EnsembleConfig { trainer_split: vec![Trainer::Lm], ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(EnsembleConfig::single(20, Trainer::Pso, 1).validate().is_ok());
    }

    #[test]
    fn predict_sums_denormalized_components() {
        let mut model = build_ensemble(&EnsembleConfig::single(3, Trainer::Lm, 0), &layout(true)).unwrap();
        // Zero networks output 0, which de-normalizes to each band's midpoint.
        for net in &mut model.members[0].networks {
            *net = Network::zeros(net.spec()).unwrap();
        }
        model.members[0].status = MemberStatus::Trained { final_mse: vec![0.0; 4] };
        model.normalization = [(0.0, 10.0), (-1.0, 1.0), (-2.0, 4.0), (5.0, 5.0)]
            .iter()
            .map(|&r| ComponentNormalization {
                input: Normalization { ranges: vec![(0.0, 1.0); 6] },
                target: Normalization { ranges: vec![r] },
            })
            .collect();
        let inputs = vec![Matrix::zeros(40, 6); 4];
        let out = model.predict_members(&inputs).unwrap();
        assert_eq!((out.values.rows(), out.values.cols()), (1, 40));
        assert!(out.values.as_slice().iter().all(|&v| v == 5.0 + 0.0 + 1.0 + 5.0));
    }
}
