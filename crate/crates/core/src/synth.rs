//! Synthetic PV plant and weather.
//!
//! Irradiance is the extraterrestrial horizontal profile of the day shaped by
//! a class-specific attenuation curve, then rescaled so its clearness index
//! falls inside the band of the requested day kind. PV output follows the
//! NOCT cell-temperature model and a linear temperature derating.

use chrono::{Datelike, Duration, NaiveDate, NaiveTime};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::{DataError, Dataset, DaylightWindow, SampleRecord};
use crate::seed::derive_seed;
use crate::sky::{self, DayClass, DayKind, SiteGeometry, SkyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic configuration: {0}")]
    Config(String),
    #[error("could not generate a {kind} day for {date} in {attempts} attempts")]
    Generation { date: NaiveDate, kind: DayKind, attempts: usize },
    #[error(transparent)]
    Sky(#[from] SkyError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Cell temperature `T_amb + (SI/800)(NOCT − 20)` in °C.
pub fn cell_temperature(t_amb: f64, irradiance: f64, noct: f64) -> f64 {
    t_amb + irradiance / 800.0 * (noct - 20.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantParams {
    /// Rated power of one module at STC, W.
    pub p_stc: f64,
    /// Power temperature coefficient, 1/°C.
    pub gamma: f64,
    pub noct: f64,
    pub n_series: u32,
    pub n_parallel: u32,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self { p_stc: 300.0, gamma: 0.004, noct: 45.0, n_series: 20, n_parallel: 50 }
    }
}

impl PlantParams {
    pub fn single(p_stc: f64, gamma: f64) -> Self {
        Self { p_stc, gamma, n_series: 1, n_parallel: 1, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.p_stc > 0.0) {
            return Err(SynthError::Config(format!("p_stc must be positive, got {}", self.p_stc)));
        }
        if !(self.gamma > 0.0 && self.gamma < 0.01) {
            return Err(SynthError::Config(format!("gamma {} outside (0, 0.01)", self.gamma)));
        }
        if self.n_series == 0 || self.n_parallel == 0 {
            return Err(SynthError::Config("array counts must be at least 1".into()));
        }
        Ok(())
    }

    /// Output at 1000 W/m² and 25 °C, kW.
    pub fn peak_kw(&self) -> f64 {
        self.p_stc * (self.n_series * self.n_parallel) as f64 / 1000.0
    }
}

/// Plant output in W, floored at zero.
pub fn pv_power(irradiance: f64, cell_temp: f64, plant: &PlantParams) -> f64 {
    let p = plant.p_stc * irradiance / 1000.0
        * (1.0 - plant.gamma * (cell_temp - 25.0))
        * (plant.n_series * plant.n_parallel) as f64;
    p.max(0.0)
}

/// Attenuation parameters per day kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CloudModel {
    /// Clearness-index range targeted for each kind.
    pub clear_band: (f64, f64),
    pub partial_band: (f64, f64),
    pub cloudy_band: (f64, f64),
    /// Amplitude of the smooth multiplicative ripple on clear days.
    pub clear_ripple: f64,
    /// Inclusive range of cloud passages on partially cloudy days.
    pub partial_dips: (u32, u32),
    pub partial_dip_depth: (f64, f64),
    /// Mean transmittance and ripple of the overcast layer on cloudy days.
    pub cloudy_base: f64,
    pub cloudy_ripple: f64,
    /// Relative standard deviation of sensor noise.
    pub sensor_noise: f64,
}

impl Default for CloudModel {
    fn default() -> Self {
        Self {
            clear_band: (0.55, 0.70),
            partial_band: (0.29, 0.41),
            cloudy_band: (0.10, 0.20),
            clear_ripple: 0.03,
            partial_dips: (4, 10),
            partial_dip_depth: (0.4, 0.9),
            cloudy_base: 0.3,
            cloudy_ripple: 0.1,
            sensor_noise: 0.01,
        }
    }
}

impl CloudModel {
    pub fn band(&self, kind: DayKind) -> (f64, f64) {
        match kind {
            DayKind::Clear => self.clear_band,
            DayKind::PartiallyCloudy => self.partial_band,
            DayKind::Cloudy => self.cloudy_band,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        for kind in DayKind::ALL {
            let (lo, hi) = self.band(kind);
            if !(0.0 < lo && lo <= hi) {
                return Err(SynthError::Config(format!("{kind} band ({lo}, {hi}) is not a positive interval")));
            }
        }
        if self.partial_dips.0 > self.partial_dips.1 || self.partial_dip_depth.0 > self.partial_dip_depth.1 {
            return Err(SynthError::Config("partial-cloud ranges are inverted".into()));
        }
        if !(0.0..0.5).contains(&self.sensor_noise) {
            return Err(SynthError::Config(format!("sensor noise {} outside [0, 0.5)", self.sensor_noise)));
        }
        Ok(())
    }
}

/// Monthly clear / partially cloudy / cloudy percentages of a subtropical site.
pub const TABLE_COMPOSITION: [[f64; 3]; 12] = [
    [81.0, 16.0, 3.0],
    [71.0, 26.0, 3.0],
    [87.0, 6.0, 7.0],
    [80.0, 16.0, 4.0],
    [77.0, 12.0, 11.0],
    [60.0, 26.0, 14.0],
    [77.0, 11.0, 12.0],
    [67.0, 22.0, 11.0],
    [77.0, 20.0, 3.0],
    [87.0, 13.0, 0.0],
    [87.0, 10.0, 3.0],
    [90.0, 6.0, 4.0],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub site: SiteGeometry,
    pub plant: PlantParams,
    pub cloud: CloudModel,
    pub start_date: NaiveDate,
    pub n_days: usize,
    pub window_days: usize,
    /// Clear / partial / cloudy percentages per window.
    pub composition: Vec<[f64; 3]>,
    pub resolution_minutes: u32,
    pub daylight: DaylightWindow,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            site: SiteGeometry::default(),
            plant: PlantParams::default(),
            cloud: CloudModel::default(),
            start_date: NaiveDate::from_ymd_opt(2014, 1, 1).unwrap(),
            n_days: 360,
            window_days: 30,
            composition: TABLE_COMPOSITION.to_vec(),
            resolution_minutes: 15,
            daylight: DaylightWindow::default(),
            seed: 2014,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        self.site.validate()?;
        self.plant.validate()?;
        self.cloud.validate()?;
        self.daylight.validate()?;
        if self.resolution_minutes == 0 || 1440 % self.resolution_minutes != 0 {
            return Err(SynthError::Config(format!(
                "resolution {} min does not divide a day",
                self.resolution_minutes
            )));
        }
        if self.window_days == 0 || self.n_days == 0 {
            return Err(SynthError::Config("n_days and window_days must be positive".into()));
        }
        let windows = self.n_days.div_ceil(self.window_days);
        if self.composition.len() < windows {
            return Err(SynthError::Config(format!(
                "{} composition windows given, {windows} needed",
                self.composition.len()
            )));
        }
        for (w, row) in self.composition.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(*p >= 0.0)) || (sum - 100.0).abs() > 0.5 {
                return Err(SynthError::Config(format!("window {w} percentages {row:?} do not sum to 100")));
            }
        }
        Ok(())
    }
}

/// Day of year clamped to 1..=365.
pub fn day_of_year(date: NaiveDate) -> u32 {
    date.ordinal().min(365)
}

/// Extraterrestrial irradiance on a horizontal surface at local solar hour
/// `hour`, kW/m².
pub fn extraterrestrial_horizontal(day_of_year: u32, hour: f64, site: &SiteGeometry) -> Result<f64, SkyError> {
    let i0 = sky::extraterrestrial_irradiance(day_of_year, site)?;
    let delta = sky::declination(day_of_year)?.to_radians();
    let phi = site.latitude_deg.to_radians();
    let omega = (15.0 * (hour - 12.0)).to_radians();
    let cos_z = phi.sin() * delta.sin() + phi.cos() * delta.cos() * omega.cos();
    Ok(i0 * cos_z.max(0.0))
}

/// Nominal clear-sky transmittance used for the reference clear-sky profile.
pub const CLEAR_SKY_TRANSMITTANCE: f64 = 0.75;

/// Clear-sky irradiance (W/m²) at the start of each slot of the day.
pub fn clear_sky_profile(date: NaiveDate, resolution_minutes: u32, site: &SiteGeometry) -> Result<Vec<f64>, SkyError> {
    let n = day_of_year(date);
    slot_hours(resolution_minutes)
        .map(|h| Ok(1000.0 * CLEAR_SKY_TRANSMITTANCE * extraterrestrial_horizontal(n, h, site)?))
        .collect()
}

fn slot_hours(resolution_minutes: u32) -> impl Iterator<Item = f64> {
    (0..1440 / resolution_minutes).map(move |i| (i * resolution_minutes) as f64 / 60.0)
}

/// Sum of a few random sinusoids: smooth, zero-mean, resolution independent.
struct Ripple {
    terms: Vec<(f64, f64, f64)>,
}

impl Ripple {
    fn new(rng: &mut ChaCha8Rng, amplitude: f64, cycles_per_hour: (f64, f64)) -> Self {
        let terms = (0..4)
            .map(|_| {
                (
                    amplitude * rng.random_range(0.2..=0.5),
                    rng.random_range(cycles_per_hour.0..=cycles_per_hour.1),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        Self { terms }
    }

    fn at(&self, hour: f64) -> f64 {
        self.terms.iter().map(|(a, f, p)| a * (std::f64::consts::TAU * f * hour + p).sin()).sum()
    }
}

fn attenuation(kind: DayKind, cloud: &CloudModel, rng: &mut ChaCha8Rng) -> Box<dyn Fn(f64) -> f64> {
    match kind {
        DayKind::Clear => {
            let ripple = Ripple::new(rng, cloud.clear_ripple, (0.1, 0.6));
            Box::new(move |h| (1.0 + ripple.at(h)).max(0.0))
        }
        DayKind::PartiallyCloudy => {
            let n = rng.random_range(cloud.partial_dips.0..=cloud.partial_dips.1);
            let dips: Vec<(f64, f64, f64)> = (0..n)
                .map(|_| {
                    (
                        rng.random_range(7.0..17.0),
                        rng.random_range(0.15..0.8),
                        rng.random_range(cloud.partial_dip_depth.0..=cloud.partial_dip_depth.1),
                    )
                })
                .collect();
            let ripple = Ripple::new(rng, 0.05, (0.3, 1.5));
            Box::new(move |h| {
                let shade: f64 = dips.iter().map(|(c, w, d)| 1.0 - d * (-((h - c) / w).powi(2)).exp()).product();
                (shade * (1.0 + ripple.at(h))).max(0.02)
            })
        }
        DayKind::Cloudy => {
            let base = cloud.cloudy_base;
            let ripple = Ripple::new(rng, cloud.cloudy_ripple, (0.2, 1.2));
            Box::new(move |h| (base * (1.0 + ripple.at(h))).max(0.02))
        }
    }
}

/// Smooth diurnal ambient temperature, wind speed and humidity.
struct Weather {
    t_mean: f64,
    t_amp: f64,
    wind_mean: f64,
    humidity_mean: f64,
    t_ripple: Ripple,
    wind_ripple: Ripple,
    humidity_ripple: Ripple,
}

impl Weather {
    fn new(day_of_year: u32, kind: DayKind, rng: &mut ChaCha8Rng) -> Self {
        let season = (std::f64::consts::TAU * (day_of_year as f64 - 20.0) / 365.0).cos();
        let (t_amp, wind_extra, humid_extra) = match kind {
            DayKind::Clear => (6.0, 0.0, 0.0),
            DayKind::PartiallyCloudy => (4.5, 0.8, 8.0),
            DayKind::Cloudy => (3.0, 1.5, 18.0),
        };
        Self {
            t_mean: 20.0 + 5.0 * season + rng.random_range(-2.0..2.0),
            t_amp,
            wind_mean: 2.5 + wind_extra + rng.random_range(-0.5..0.5),
            humidity_mean: 60.0 + humid_extra + rng.random_range(-5.0..5.0),
            t_ripple: Ripple::new(rng, 0.8, (0.05, 0.4)),
            wind_ripple: Ripple::new(rng, 1.0, (0.1, 0.8)),
            humidity_ripple: Ripple::new(rng, 6.0, (0.05, 0.3)),
        }
    }

    fn at(&self, hour: f64) -> (f64, f64, f64) {
        let diurnal = (std::f64::consts::TAU * (hour - 9.0) / 24.0).sin();
        let temp = self.t_mean + self.t_amp * diurnal + self.t_ripple.at(hour);
        let wind =
            (self.wind_mean + 1.5 * (std::f64::consts::TAU * (hour - 10.0) / 24.0).sin() + self.wind_ripple.at(hour))
                .max(0.0);
        let humidity = (self.humidity_mean - 15.0 * diurnal + self.humidity_ripple.at(hour)).clamp(5.0, 100.0);
        (temp, wind, humidity)
    }
}

/// One generated day with its realized classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDay {
    pub date: NaiveDate,
    pub requested: DayKind,
    pub class: DayClass,
    pub attempts: usize,
}

const MAX_ATTEMPTS: usize = 5;

fn attempt_day(
    date: NaiveDate,
    kind: DayKind,
    config: &SynthConfig,
    attempt: usize,
) -> Result<(Vec<SampleRecord>, DayClass), SynthError> {
    let n = day_of_year(date);
    let res = config.resolution_minutes;
    let seed = derive_seed(config.seed, &[date.num_days_from_ce() as u64, kind as u64, attempt as u64]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h0 = sky::extraterrestrial_insolation(n, &config.site)?;

    let shape = attenuation(kind, &config.cloud, &mut rng);
    let weather = Weather::new(n, kind, &mut rng);
    let hours: Vec<f64> = slot_hours(res).collect();
    let raw = hours
        .iter()
        .map(|&h| Ok(1000.0 * extraterrestrial_horizontal(n, h, &config.site)? * shape(h)))
        .collect::<Result<Vec<f64>, SkyError>>()?;
    let raw_kt = sky::daily_insolation(&raw, res) / h0;
    if !(raw_kt > 0.0) {
        return Err(SynthError::Generation { date, kind, attempts: attempt + 1 });
    }
    let (lo, hi) = config.cloud.band(kind);
    let scale = rng.random_range(lo..=hi) / raw_kt;

    let noise = Normal::new(0.0, config.cloud.sensor_noise).map_err(|e| SynthError::Config(e.to_string()))?;
    let midnight = date.and_time(NaiveTime::MIN);
    let mut records = Vec::with_capacity(hours.len());
    let mut measured = Vec::with_capacity(hours.len());
    for (i, &h) in hours.iter().enumerate() {
        let true_irr = raw[i] * scale;
        let (temp, wind, humidity) = weather.at(h);
        let power_kw = pv_power(true_irr, cell_temperature(temp, true_irr, config.plant.noct), &config.plant) / 1000.0;
        let irr = (true_irr * (1.0 + noise.sample(&mut rng))).max(0.0);
        let power = (power_kw * (1.0 + noise.sample(&mut rng))).max(0.0);
        let timestamp = midnight + Duration::minutes((i as u32 * res) as i64);
        let pv = if config.daylight.contains(timestamp.time()) { power } else { 0.0 };
        measured.push(irr);
        records.push(SampleRecord {
            timestamp,
            pv_power: Some(pv),
            irradiance: Some(irr),
            temperature: Some(temp),
            wind_speed: Some(wind),
            humidity: Some(humidity),
        });
    }
    let class = sky::classify_day(sky::daily_insolation(&measured, res), h0)?;
    Ok((records, class))
}

/// Generates one day of the requested kind, regenerating with fresh draws
/// until its clearness index classifies as requested.
pub fn generate_day_checked(
    date: NaiveDate,
    kind: DayKind,
    config: &SynthConfig,
) -> Result<(Vec<SampleRecord>, SyntheticDay), SynthError> {
    for attempt in 0..MAX_ATTEMPTS {
        let (records, class) = attempt_day(date, kind, config, attempt)?;
        if class.kind == kind {
            return Ok((records, SyntheticDay { date, requested: kind, class, attempts: attempt + 1 }));
        }
    }
    Err(SynthError::Generation { date, kind, attempts: MAX_ATTEMPTS })
}

pub fn generate_day(date: NaiveDate, kind: DayKind, config: &SynthConfig) -> Result<Vec<SampleRecord>, SynthError> {
    config.validate()?;
    generate_day_checked(date, kind, config).map(|(r, _)| r)
}

/// Splits `days` among the three kinds by largest remainder; ties go to the
/// clearer kind.
pub fn kind_counts(percentages: &[f64; 3], days: usize) -> [usize; 3] {
    let exact: Vec<f64> = percentages.iter().map(|p| p / 100.0 * days as f64).collect();
    let mut counts = [0usize; 3];
    for i in 0..3 {
        counts[i] = exact[i].floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut left = days.saturating_sub(counts.iter().sum());
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Kind schedule for every day: per window, exact counts shuffled.
pub fn plan_kinds(config: &SynthConfig) -> Vec<DayKind> {
    let mut kinds = Vec::with_capacity(config.n_days);
    for (w, start) in (0..config.n_days).step_by(config.window_days).enumerate() {
        let len = config.window_days.min(config.n_days - start);
        let counts = kind_counts(&config.composition[w], len);
        let mut window: Vec<DayKind> =
            DayKind::ALL.iter().zip(counts).flat_map(|(&k, c)| std::iter::repeat_n(k, c)).collect();
        window.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[u64::MAX, w as u64])));
        kinds.extend(window);
    }
    kinds
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticYear {
    pub dataset: Dataset,
    pub days: Vec<SyntheticDay>,
}

/// Generates `n_days` consecutive days with the configured composition.
pub fn generate_year(config: &SynthConfig) -> Result<SyntheticYear, SynthError> {
    config.validate()?;
    let kinds = plan_kinds(config);
    let generated: Vec<(Vec<SampleRecord>, SyntheticDay)> = kinds
        .par_iter()
        .enumerate()
        .map(|(i, &kind)| generate_day_checked(config.start_date + Duration::days(i as i64), kind, config))
        .collect::<Result<_, _>>()?;
    let mut records = Vec::with_capacity(generated.iter().map(|g| g.0.len()).sum());
    let mut days = Vec::with_capacity(generated.len());
    for (r, d) in generated {
        records.extend(r);
        days.push(d);
    }
    let dataset = Dataset::new(records, config.resolution_minutes, config.daylight)?;
    Ok(SyntheticYear { dataset, days })
}
