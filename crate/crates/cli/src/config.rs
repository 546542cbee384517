use std::path::PathBuf;

use chrono::NaiveDate;
use pvnne::dataio::{DaylightWindow, LagConfig, Schema};
use pvnne::ensemble::{EnsembleConfig, TrainerConfigs, WaveletSettings};
use pvnne::evaluation::BenchmarkConfig;
use pvnne::seed::derive_seed;
use pvnne::sky::SiteGeometry;
use pvnne::synth::{CloudModel, PlantParams, SynthConfig, TABLE_COMPOSITION};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Sub-streams of the top-level seed.
const SYNTH_STREAM: u64 = 1;
const ENSEMBLE_STREAM: u64 = 2;

/// The whole run configuration. Every field has a default, so an empty
/// file (or no file) is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub data: DataSection,
    pub site: SiteGeometry,
    pub synth: SynthSection,
    pub wavelet: WaveletSettings,
    pub lags: LagConfig,
    pub ensemble: EnsembleConfig,
    pub trainers: TrainerConfigs,
    pub evaluation: EvaluationSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 2014,
            data: DataSection::default(),
            site: SiteGeometry::default(),
            synth: SynthSection::default(),
            wavelet: WaveletSettings::default(),
            lags: LagConfig::default(),
            ensemble: EnsembleConfig::default(),
            trainers: TrainerConfigs::default(),
            evaluation: EvaluationSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    /// Measurement CSV. When absent a synthetic year is generated.
    pub path: Option<PathBuf>,
    pub schema: Schema,
    /// Spacing of the source file; inferred from the timestamps when absent.
    pub source_resolution_minutes: Option<u32>,
    /// Resample to this resolution after cleaning.
    pub resolution_minutes: Option<u32>,
    pub daylight: DaylightWindow,
    /// Neighbour days used to fill missing values.
    pub neighbors: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            path: None,
            schema: Schema::default(),
            source_resolution_minutes: None,
            resolution_minutes: None,
            daylight: DaylightWindow::default(),
            neighbors: pvnne::dataio::DEFAULT_NEIGHBORS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub start_date: NaiveDate,
    pub n_days: usize,
    pub window_days: usize,
    /// Clear / partially cloudy / cloudy percentages per window.
    pub composition: Vec<[f64; 3]>,
    pub resolution_minutes: u32,
    pub plant: PlantParams,
    pub cloud: CloudModel,
}

impl Default for SynthSection {
    fn default() -> Self {
        let d = SynthConfig::default();
        Self {
            start_date: d.start_date,
            n_days: d.n_days,
            window_days: d.window_days,
            composition: TABLE_COMPOSITION.to_vec(),
            resolution_minutes: d.resolution_minutes,
            plant: d.plant,
            cloud: d.cloud,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationSection {
    /// Plant rated peak in kW. Synthetic data uses the plant rating and
    /// measured data the largest observed output when absent.
    pub peak_power_kw: Option<f64>,
    pub train_days: usize,
    pub validation_days: usize,
    pub baseline_hidden: usize,
    /// Explicit test days; chosen per season and day kind when empty.
    pub test_days: Vec<NaiveDate>,
    /// Target day of `train` and `forecast`; the last day of data when absent.
    pub forecast_day: Option<NaiveDate>,
    pub lengths: Vec<usize>,
    pub resolutions: Vec<u32>,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            peak_power_kw: None,
            train_days: 30,
            validation_days: 5,
            baseline_hidden: 20,
            test_days: Vec::new(),
            forecast_day: None,
            lengths: vec![30, 60, 90],
            resolutions: vec![1, 15, 30, 60],
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(single_line(&e.to_string())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |m: String| CliError::Config(m);
        if self.seed > i64::MAX as u64 {
            return Err(cfg(format!("seed {} exceeds {}", self.seed, i64::MAX)));
        }
        self.data.daylight.validate().map_err(|e| cfg(e.to_string()))?;
        self.site.validate().map_err(|e| cfg(e.to_string()))?;
        self.lags.validate().map_err(|e| cfg(e.to_string()))?;
        self.ensemble.validate().map_err(|e| cfg(e.to_string()))?;
        self.synth_config().validate().map_err(|e| cfg(e.to_string()))?;
        let ev = &self.evaluation;
        if ev.train_days == 0 {
            return Err(cfg("evaluation.train_days must be positive".into()));
        }
        if ev.baseline_hidden == 0 {
            return Err(cfg("evaluation.baseline_hidden must be positive".into()));
        }
        if let Some(p) = ev.peak_power_kw {
            if !(p > 0.0 && p.is_finite()) {
                return Err(cfg(format!("evaluation.peak_power_kw must be positive, got {p}")));
            }
        }
        if ev.lengths.contains(&0) {
            return Err(cfg("evaluation.lengths must be positive".into()));
        }
        if ev.resolutions.contains(&0) {
            return Err(cfg("evaluation.resolutions must be positive".into()));
        }
        Ok(())
    }

    pub fn synth_config(&self) -> SynthConfig {
        let s = &self.synth;
        SynthConfig {
            site: self.site,
            plant: s.plant,
            cloud: s.cloud.clone(),
            start_date: s.start_date,
            n_days: s.n_days,
            window_days: s.window_days,
            composition: s.composition.clone(),
            resolution_minutes: s.resolution_minutes,
            daylight: self.data.daylight,
            seed: derive_seed(self.seed, &[SYNTH_STREAM]),
        }
    }

    /// Ensemble settings with the seed drawn from the top-level seed;
    /// `ensemble.base_seed` selects a sub-stream.
    pub fn ensemble_config(&self) -> EnsembleConfig {
        EnsembleConfig {
            base_seed: derive_seed(self.seed, &[ENSEMBLE_STREAM, self.ensemble.base_seed]),
            ..self.ensemble.clone()
        }
    }

    pub fn benchmark_config(&self, peak_power_kw: Option<f64>) -> BenchmarkConfig {
        let ev = &self.evaluation;
        BenchmarkConfig {
            train_days: ev.train_days,
            validation_days: ev.validation_days,
            peak_power_kw,
            baseline_hidden: ev.baseline_hidden,
            ensemble: self.ensemble_config(),
            trainers: self.trainers.clone(),
            wavelet: self.wavelet,
            lags: self.lags.clone(),
            site: self.site,
        }
    }
}

pub(crate) fn single_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("sed = 3").is_err());
        assert!(RunConfig::from_toml("[ensemble]\nn_structure = 3").is_err());
        assert!(RunConfig::from_toml("[data.daylight]\nstart = 6").is_err());
    }

    #[test]
    fn partial_sections_keep_defaults() {
        let cfg =
            RunConfig::from_toml("seed = 9\n[ensemble]\nmodels_per_structure = 2\n[data.daylight]\nstart_hour = 6")
                .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.ensemble.models_per_structure, 2);
        assert_eq!(cfg.ensemble.n_structures, 5);
        assert_eq!(cfg.data.daylight.start_hour, 6);
        assert_eq!(cfg.data.daylight.end_hour, 17);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::from_toml("[evaluation]\ntrain_days = 0").is_err());
        assert!(RunConfig::from_toml("[ensemble]\nhidden_schedule = [10]").is_err());
    }

    #[test]
    fn seeds_are_derived_from_the_top_level_seed() {
        let a = RunConfig::default();
        let b = RunConfig { seed: 7, ..Default::default() };
        assert_ne!(a.synth_config().seed, b.synth_config().seed);
        assert_ne!(a.ensemble_config().base_seed, b.ensemble_config().base_seed);
        assert_ne!(a.synth_config().seed, a.ensemble_config().base_seed);
    }
}
