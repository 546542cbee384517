//! Observation records, datasets, CSV ingestion and cleaning, and the
//! supervised pattern builder.

mod clean;
mod csvio;
mod patterns;

pub use clean::{apply_night_zero, reconstruct_missing, resample, DEFAULT_NEIGHBORS};
pub use csvio::{parse_records, write_records, Schema, CSV_HEADER};
pub use patterns::{build_feature_matrix, build_patterns, DayComponents, LagConfig, Normalization, PatternSet};

use std::collections::BTreeMap;
use std::ops::Range;

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("input contains no records")]
    EmptyInput,
    #[error("schema error: {0}")]
    Schema(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("field {0} is missing for the entire dataset")]
    IrrecoverableField(Field),
    #[error("field {field} needs {needed} complete days for reconstruction, found {found}")]
    InsufficientDays { field: Field, needed: usize, found: usize },
    #[error("incomplete data on {date}: {detail}")]
    Gap { date: NaiveDate, detail: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// One timestamped observation. Absent values are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub timestamp: NaiveDateTime,
    /// kW.
    pub pv_power: Option<f64>,
    /// W/m².
    pub irradiance: Option<f64>,
    /// °C.
    pub temperature: Option<f64>,
    /// m/s.
    pub wind_speed: Option<f64>,
    /// Percent.
    pub humidity: Option<f64>,
}

impl SampleRecord {
    pub fn empty(timestamp: NaiveDateTime) -> Self {
        Self { timestamp, pv_power: None, irradiance: None, temperature: None, wind_speed: None, humidity: None }
    }

    pub fn get(&self, field: Field) -> Option<f64> {
        match field {
            Field::PvPower => self.pv_power,
            Field::Irradiance => self.irradiance,
            Field::Temperature => self.temperature,
            Field::WindSpeed => self.wind_speed,
            Field::Humidity => self.humidity,
        }
    }

    pub fn set(&mut self, field: Field, value: Option<f64>) {
        let slot = match field {
            Field::PvPower => &mut self.pv_power,
            Field::Irradiance => &mut self.irradiance,
            Field::Temperature => &mut self.temperature,
            Field::WindSpeed => &mut self.wind_speed,
            Field::Humidity => &mut self.humidity,
        };
        *slot = value;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    PvPower,
    Irradiance,
    Temperature,
    WindSpeed,
    Humidity,
}

impl Field {
    pub const ALL: [Field; 5] =
        [Field::PvPower, Field::Irradiance, Field::Temperature, Field::WindSpeed, Field::Humidity];

    /// Whether `value` is physically admissible for this field.
    pub fn admits(self, value: f64) -> bool {
        value.is_finite()
            && match self {
                Field::PvPower | Field::Irradiance | Field::WindSpeed => value >= 0.0,
                Field::Humidity => (0.0..=100.0).contains(&value),
                Field::Temperature => true,
            }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Field::PvPower => "pv_power",
            Field::Irradiance => "irradiance",
            Field::Temperature => "temperature",
            Field::WindSpeed => "wind_speed",
            Field::Humidity => "humidity",
        };
        f.write_str(s)
    }
}

/// Local hours `[start_hour, end_hour)` during which PV output is considered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DaylightWindow {
    pub start_hour: u32,
    pub end_hour: u32,
}

impl Default for DaylightWindow {
    fn default() -> Self {
        Self { start_hour: 7, end_hour: 17 }
    }
}

impl DaylightWindow {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.start_hour >= self.end_hour || self.end_hour > 24 {
            return Err(DataError::Config(format!(
                "daylight window {}..{} is not a valid hour range",
                self.start_hour, self.end_hour
            )));
        }
        Ok(())
    }

    pub fn contains(&self, t: NaiveTime) -> bool {
        (self.start_hour..self.end_hour).contains(&t.hour())
    }

    /// Number of samples inside the window at the given resolution.
    pub fn steps(&self, resolution_minutes: u32) -> usize {
        ((self.end_hour - self.start_hour) * 60 / resolution_minutes) as usize
    }

    /// Slot index (counted from midnight) of the first daylight sample.
    pub fn first_slot(&self, resolution_minutes: u32) -> usize {
        (self.start_hour * 60 / resolution_minutes) as usize
    }
}

/// Meteorological values over the daylight steps of one day.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetRows {
    pub irradiance: Vec<f64>,
    pub temperature: Vec<f64>,
    pub wind_speed: Vec<f64>,
    pub humidity: Vec<f64>,
}

impl MetRows {
    pub fn len(&self) -> usize {
        self.irradiance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.irradiance.is_empty()
    }
}

/// Complete daylight profile of one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayFrame {
    pub date: NaiveDate,
    pub pv: Vec<f64>,
    pub met: MetRows,
}

/// Evenly spaced observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<SampleRecord>,
    resolution_minutes: u32,
    daylight: DaylightWindow,
}

fn check_resolution(resolution_minutes: u32) -> Result<(), DataError> {
    if resolution_minutes == 0 || 1440 % resolution_minutes != 0 {
        return Err(DataError::Resolution(format!("{resolution_minutes} min does not divide a day evenly")));
    }
    Ok(())
}

fn slot_of(t: NaiveDateTime, resolution_minutes: u32) -> usize {
    (t.time().num_seconds_from_midnight() / 60 / resolution_minutes) as usize
}

impl Dataset {
    /// Validates spacing: consecutive timestamps must differ by exactly `resolution_minutes`.
    pub fn new(
        records: Vec<SampleRecord>,
        resolution_minutes: u32,
        daylight: DaylightWindow,
    ) -> Result<Self, DataError> {
        check_resolution(resolution_minutes)?;
        daylight.validate()?;
        let step = Duration::minutes(resolution_minutes as i64);
        for w in records.windows(2) {
            if w[1].timestamp - w[0].timestamp != step {
                return Err(DataError::Integrity(format!(
                    "records {} and {} are not {resolution_minutes} min apart",
                    w[0].timestamp, w[1].timestamp
                )));
            }
        }
        Ok(Self { records, resolution_minutes, daylight })
    }

    /// Builds a regular dataset from sorted records, inserting all-missing
    /// records where timestamps are absent.
    pub fn regularize(
        records: Vec<SampleRecord>,
        resolution_minutes: u32,
        daylight: DaylightWindow,
    ) -> Result<Self, DataError> {
        check_resolution(resolution_minutes)?;
        let step = Duration::minutes(resolution_minutes as i64);
        let mut out: Vec<SampleRecord> = Vec::with_capacity(records.len());
        for rec in records {
            if rec.timestamp.time().num_seconds_from_midnight() % (60 * resolution_minutes) != 0 {
                return Err(DataError::Resolution(format!(
                    "timestamp {} is not aligned to a {resolution_minutes}-min grid",
                    rec.timestamp
                )));
            }
            if let Some(last) = out.last() {
                if rec.timestamp <= last.timestamp {
                    return Err(DataError::Integrity(format!("timestamp {} is not increasing", rec.timestamp)));
                }
                let mut t = last.timestamp + step;
                while t < rec.timestamp {
                    out.push(SampleRecord::empty(t));
                    t += step;
                }
            }
            out.push(rec);
        }
        Self::new(out, resolution_minutes, daylight)
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<SampleRecord> {
        self.records
    }

    pub fn resolution_minutes(&self) -> u32 {
        self.resolution_minutes
    }

    pub fn daylight(&self) -> DaylightWindow {
        self.daylight
    }

    pub fn with_daylight(mut self, daylight: DaylightWindow) -> Result<Self, DataError> {
        daylight.validate()?;
        self.daylight = daylight;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn slots_per_day(&self) -> usize {
        (1440 / self.resolution_minutes) as usize
    }

    /// Samples per day inside the daylight window.
    pub fn daylight_steps(&self) -> usize {
        self.daylight.steps(self.resolution_minutes)
    }

    /// Record index range of every calendar date present, in order.
    pub fn day_ranges(&self) -> BTreeMap<NaiveDate, Range<usize>> {
        let mut map: BTreeMap<NaiveDate, Range<usize>> = BTreeMap::new();
        for (i, r) in self.records.iter().enumerate() {
            map.entry(r.timestamp.date()).and_modify(|rg| rg.end = i + 1).or_insert(i..i + 1);
        }
        map
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.day_ranges().into_keys().collect()
    }

    /// Records of one date (empty if absent).
    pub fn day(&self, date: NaiveDate) -> &[SampleRecord] {
        let start = self.records.partition_point(|r| r.timestamp.date() < date);
        let end = self.records.partition_point(|r| r.timestamp.date() <= date);
        &self.records[start..end]
    }

    /// Records covering all slots of the day, from midnight.
    pub fn is_full_day(&self, date: NaiveDate) -> bool {
        let day = self.day(date);
        day.len() == self.slots_per_day() && day[0].timestamp.time() == NaiveTime::MIN
    }

    fn daylight_records(&self, date: NaiveDate) -> Result<&[SampleRecord], DataError> {
        let day = self.day(date);
        let first = self.daylight.first_slot(self.resolution_minutes);
        let steps = self.daylight_steps();
        let start = day.iter().position(|r| slot_of(r.timestamp, self.resolution_minutes) == first);
        match start {
            Some(s) if s + steps <= day.len() => Ok(&day[s..s + steps]),
            _ => Err(DataError::Gap { date, detail: "daylight window not fully covered".into() }),
        }
    }

    /// Daylight meteorological rows; every value must be present.
    pub fn met_rows(&self, date: NaiveDate) -> Result<MetRows, DataError> {
        let recs = self.daylight_records(date)?;
        let col = |field: Field| -> Result<Vec<f64>, DataError> {
            recs.iter()
                .map(|r| {
                    r.get(field).ok_or_else(|| DataError::Gap {
                        date,
                        detail: format!("{field} missing at {}", r.timestamp.time()),
                    })
                })
                .collect()
        };
        Ok(MetRows {
            irradiance: col(Field::Irradiance)?,
            temperature: col(Field::Temperature)?,
            wind_speed: col(Field::WindSpeed)?,
            humidity: col(Field::Humidity)?,
        })
    }

    /// Daylight PV power; every value must be present.
    pub fn daylight_pv(&self, date: NaiveDate) -> Result<Vec<f64>, DataError> {
        self.daylight_records(date)?
            .iter()
            .map(|r| {
                r.pv_power.ok_or_else(|| DataError::Gap {
                    date,
                    detail: format!("pv_power missing at {}", r.timestamp.time()),
                })
            })
            .collect()
    }

    pub fn day_frame(&self, date: NaiveDate) -> Result<DayFrame, DataError> {
        Ok(DayFrame { date, pv: self.daylight_pv(date)?, met: self.met_rows(date)? })
    }

    /// Timestamps of the daylight steps of `date` (whether or not records exist).
    pub fn daylight_timestamps(&self, date: NaiveDate) -> Vec<NaiveDateTime> {
        let start = date.and_time(NaiveTime::MIN)
            + Duration::minutes(
                (self.daylight.first_slot(self.resolution_minutes) as u32 * self.resolution_minutes) as i64,
            );
        (0..self.daylight_steps())
            .map(|i| start + Duration::minutes(i as i64 * self.resolution_minutes as i64))
            .collect()
    }

    /// Full-day irradiance samples of `date` in W/m².
    pub fn day_irradiance(&self, date: NaiveDate) -> Result<Vec<f64>, DataError> {
        if !self.is_full_day(date) {
            return Err(DataError::Gap { date, detail: "day not fully covered".into() });
        }
        self.day(date)
            .iter()
            .map(|r| {
                r.irradiance.ok_or_else(|| DataError::Gap {
                    date,
                    detail: format!("irradiance missing at {}", r.timestamp.time()),
                })
            })
            .collect()
    }

    /// Sub-dataset of whole dates in `[from, to]`.
    pub fn slice_dates(&self, from: NaiveDate, to: NaiveDate) -> Dataset {
        let start = self.records.partition_point(|r| r.timestamp.date() < from);
        let end = self.records.partition_point(|r| r.timestamp.date() <= to);
        Dataset {
            records: self.records[start..end.max(start)].to_vec(),
            resolution_minutes: self.resolution_minutes,
            daylight: self.daylight,
        }
    }

    /// Count of missing values per field.
    pub fn missing_counts(&self) -> BTreeMap<Field, usize> {
        Field::ALL.iter().map(|&f| (f, self.records.iter().filter(|r| r.get(f).is_none()).count())).collect()
    }
}
