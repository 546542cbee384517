use std::io::{Read, Write};

use chrono::{DateTime, FixedOffset, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::{DataError, Field, SampleRecord};

pub const CSV_HEADER: [&str; 6] = ["timestamp", "pv_kw", "ghi_wm2", "temp_c", "wind_ms", "humidity_pct"];

/// Column names of each field in the source CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schema {
    pub timestamp: String,
    pub pv_power: String,
    pub irradiance: String,
    pub temperature: String,
    pub wind_speed: String,
    pub humidity: String,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            timestamp: CSV_HEADER[0].into(),
            pv_power: CSV_HEADER[1].into(),
            irradiance: CSV_HEADER[2].into(),
            temperature: CSV_HEADER[3].into(),
            wind_speed: CSV_HEADER[4].into(),
            humidity: CSV_HEADER[5].into(),
        }
    }
}

impl Schema {
    fn column(&self, field: Field) -> &str {
        match field {
            Field::PvPower => &self.pv_power,
            Field::Irradiance => &self.irradiance,
            Field::Temperature => &self.temperature,
            Field::WindSpeed => &self.wind_speed,
            Field::Humidity => &self.humidity,
        }
    }
}

const NAIVE_FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"];

/// Parses an ISO-8601 timestamp. Offsets are accepted and dropped, so the
/// caller sees local wall-clock time; the offset is returned for the
/// consistency check.
fn parse_timestamp(s: &str) -> Option<(NaiveDateTime, Option<FixedOffset>)> {
    let s = s.trim();
    for fmt in NAIVE_FORMATS {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some((t, None));
        }
    }
    let with_offset = DateTime::parse_from_rfc3339(s)
        .ok()
        .or_else(|| DateTime::parse_from_str(s, "%Y-%m-%dT%H:%M%:z").ok())
        .or_else(|| DateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%:z").ok());
    with_offset.map(|t| (t.naive_local(), Some(*t.offset())))
}

fn parse_value(field: Field, cell: Option<&str>) -> Option<f64> {
    let v: f64 = cell?.trim().parse().ok()?;
    field.admits(v).then_some(v)
}

/// Reads records from CSV. Output is sorted by timestamp. Numeric cells that
/// are empty, unparseable or physically inadmissible become missing.
pub fn parse_records<R: Read>(source: R, schema: &Schema) -> Result<Vec<SampleRecord>, DataError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(source);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(DataError::Schema(e.to_string())),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(DataError::EmptyInput);
    }
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let ts_col = find(&schema.timestamp)
        .ok_or_else(|| DataError::Schema(format!("header lacks timestamp column '{}'", schema.timestamp)))?;
    let mut cols = Vec::with_capacity(Field::ALL.len());
    for field in Field::ALL {
        let name = schema.column(field);
        let idx = find(name).ok_or_else(|| DataError::Schema(format!("header lacks {field} column '{name}'")))?;
        cols.push((field, idx));
    }

    let mut offset: Option<Option<FixedOffset>> = None;
    let mut records = Vec::new();
    for row in reader.records() {
        let row =
            row.map_err(|e| DataError::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let raw = row.get(ts_col).unwrap_or("");
        let (timestamp, off) = parse_timestamp(raw)
            .ok_or_else(|| DataError::Parse { line, message: format!("unparseable timestamp '{raw}'") })?;
        match offset {
            None => offset = Some(off),
            Some(prev) if prev != off => {
                return Err(DataError::Parse { line, message: format!("timestamp '{raw}' changes the UTC offset") })
            }
            _ => {}
        }
        let mut rec = SampleRecord::empty(timestamp);
        for &(field, idx) in &cols {
            rec.set(field, parse_value(field, row.get(idx)));
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(DataError::EmptyInput);
    }
    records.sort_by_key(|r| r.timestamp);
    if let Some(w) = records.windows(2).find(|w| w[0].timestamp == w[1].timestamp) {
        return Err(DataError::Integrity(format!("duplicate timestamp {}", w[0].timestamp)));
    }
    Ok(records)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes records with the canonical header. Missing values are empty cells.
pub fn write_records<W: Write>(sink: W, records: &[SampleRecord]) -> Result<(), DataError> {
    let io = |e: csv::Error| DataError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.timestamp.format("%Y-%m-%dT%H:%M:%S").to_string(),
            cell(r.pv_power),
            cell(r.irradiance),
            cell(r.temperature),
            cell(r.wind_speed),
            cell(r.humidity),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| DataError::Io(e.to_string()))
}
