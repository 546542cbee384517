//! Clearness index and day classification.
//!
//! Angles enter in degrees and are converted to radians before any
//! trigonometry; the sunrise hour angle is always in radians.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkyError {
    #[error("day of year {0} outside 1..=365")]
    DayOutOfRange(u32),
    #[error("no sunrise for latitude {latitude_deg}° and declination {declination_deg}° (polar day or night)")]
    Polar { latitude_deg: f64, declination_deg: f64 },
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("daily insolation needs complete irradiance samples")]
    MissingIrradiance,
}

/// Site latitude and the extraterrestrial irradiance model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SiteGeometry {
    pub latitude_deg: f64,
    /// kW/m².
    pub solar_constant: f64,
    /// Coefficient of the annual eccentricity correction.
    pub eccentricity_coeff: f64,
}

impl Default for SiteGeometry {
    fn default() -> Self {
        // St Lucia, Brisbane.
        Self { latitude_deg: -27.5, solar_constant: 1.367, eccentricity_coeff: 0.033 }
    }
}

impl SiteGeometry {
    pub fn validate(&self) -> Result<(), SkyError> {
        if !(self.solar_constant > 0.0) {
            return Err(SkyError::Geometry(format!("solar constant must be positive, got {}", self.solar_constant)));
        }
        if !(self.latitude_deg.abs() < 90.0) {
            return Err(SkyError::Geometry(format!(
                "latitude {} must lie strictly inside (-90, 90)",
                self.latitude_deg
            )));
        }
        Ok(())
    }
}

/// Solar declination in degrees: `23.45 sin(2π(N − 80)/365)`.
pub fn declination(day_of_year: u32) -> Result<f64, SkyError> {
    if !(1..=365).contains(&day_of_year) {
        return Err(SkyError::DayOutOfRange(day_of_year));
    }
    let n = day_of_year as f64;
    Ok(23.45 * (2.0 * std::f64::consts::PI * (n - 80.0) / 365.0).sin())
}

/// Sunrise hour angle in radians, `arccos(−tan φ tan δ)`.
pub fn sunrise_hour_angle(latitude_deg: f64, declination_deg: f64) -> Result<f64, SkyError> {
    let c = -latitude_deg.to_radians().tan() * declination_deg.to_radians().tan();
    if !c.is_finite() || c.abs() > 1.0 {
        return Err(SkyError::Polar { latitude_deg, declination_deg });
    }
    Ok(c.acos())
}

/// Extraterrestrial normal irradiance `I₀` in kW/m² for day `N`.
pub fn extraterrestrial_irradiance(day_of_year: u32, site: &SiteGeometry) -> Result<f64, SkyError> {
    if !(1..=365).contains(&day_of_year) {
        return Err(SkyError::DayOutOfRange(day_of_year));
    }
    let angle = (360.0 * day_of_year as f64 / 365.0).to_radians();
    Ok(site.solar_constant * (1.0 + site.eccentricity_coeff * angle.cos()))
}

/// Daily extraterrestrial insolation on a horizontal surface `H₀`, kWh/m².
pub fn extraterrestrial_insolation(day_of_year: u32, site: &SiteGeometry) -> Result<f64, SkyError> {
    site.validate()?;
    let delta = declination(day_of_year)?;
    let omega = sunrise_hour_angle(site.latitude_deg, delta)?;
    let i0 = extraterrestrial_irradiance(day_of_year, site)?;
    let (phi, delta) = (site.latitude_deg.to_radians(), delta.to_radians());
    Ok(24.0 * i0 / std::f64::consts::PI * (phi.cos() * delta.cos() * omega.sin() + omega * phi.sin() * delta.sin()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayKind {
    Clear,
    PartiallyCloudy,
    Cloudy,
}

impl DayKind {
    pub const ALL: [DayKind; 3] = [DayKind::Clear, DayKind::PartiallyCloudy, DayKind::Cloudy];

    pub fn as_str(self) -> &'static str {
        match self {
            DayKind::Clear => "clear",
            DayKind::PartiallyCloudy => "partially_cloudy",
            DayKind::Cloudy => "cloudy",
        }
    }

    /// Table-style abbreviation (CD, PCD, CLD).
    pub fn abbreviation(self) -> &'static str {
        match self {
            DayKind::Clear => "CD",
            DayKind::PartiallyCloudy => "PCD",
            DayKind::Cloudy => "CLD",
        }
    }
}

impl std::fmt::Display for DayKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DayKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "clear" | "cd" => Ok(DayKind::Clear),
            "partially_cloudy" | "partial" | "pcd" => Ok(DayKind::PartiallyCloudy),
            "cloudy" | "cld" => Ok(DayKind::Cloudy),
            other => Err(format!("unknown day kind '{other}'")),
        }
    }
}

/// Lower clearness-index bound of a clear day (inclusive).
pub const CLEAR_THRESHOLD: f64 = 0.45;
/// Lower clearness-index bound of a partially cloudy day (inclusive).
pub const PARTIAL_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayClass {
    pub kind: DayKind,
    pub k_t: f64,
}

/// Classifies a day by its clearness index. Boundary values go to the
/// clearer class.
pub fn classify_day(daily_insolation: f64, h0: f64) -> Result<DayClass, SkyError> {
    if !(h0 > 0.0) {
        return Err(SkyError::Geometry(format!("extraterrestrial insolation must be positive, got {h0}")));
    }
    if !(daily_insolation >= 0.0) {
        return Err(SkyError::Geometry(format!("measured insolation must be non-negative, got {daily_insolation}")));
    }
    let k_t = daily_insolation / h0;
    Ok(DayClass { kind: kind_for_index(k_t), k_t })
}

pub fn kind_for_index(k_t: f64) -> DayKind {
    if k_t >= CLEAR_THRESHOLD {
        DayKind::Clear
    } else if k_t >= PARTIAL_THRESHOLD {
        DayKind::PartiallyCloudy
    } else {
        DayKind::Cloudy
    }
}

/// Trapezoidal integral of evenly spaced irradiance samples (W/m²) in kWh/m².
pub fn daily_insolation(irradiance_wm2: &[f64], resolution_minutes: u32) -> f64 {
    let dt_hours = resolution_minutes as f64 / 60.0;
    irradiance_wm2.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt_hours).sum::<f64>() / 1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonComposition {
    /// Zero-based index of the first day in the window.
    pub start_day: usize,
    pub window_days: usize,
    /// Set when the window is shorter than requested (trailing remainder).
    pub partial: bool,
    pub clear_pct: f64,
    pub partial_pct: f64,
    pub cloudy_pct: f64,
}

/// Per-window percentages of each day kind over consecutive, non-overlapping windows.
pub fn season_composition(classes: &[DayClass], window_days: usize) -> Vec<SeasonComposition> {
    let window_days = window_days.max(1);
    classes
        .chunks(window_days)
        .enumerate()
        .map(|(w, chunk)| {
            let pct = |kind| 100.0 * chunk.iter().filter(|c| c.kind == kind).count() as f64 / chunk.len() as f64;
            SeasonComposition {
                start_day: w * window_days,
                window_days: chunk.len(),
                partial: chunk.len() < window_days,
                clear_pct: pct(DayKind::Clear),
                partial_pct: pct(DayKind::PartiallyCloudy),
                cloudy_pct: pct(DayKind::Cloudy),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declination_at_reference_days() {
        assert_eq!(declination(80).unwrap(), 0.0);
        assert!((declination(171).unwrap() - 23.45).abs() < 0.01);
        assert!((declination(354).unwrap() + 23.45).abs() < 0.01);
        assert_eq!(declination(0), Err(SkyError::DayOutOfRange(0)));
        assert_eq!(declination(366), Err(SkyError::DayOutOfRange(366)));
    }

    #[test]
    fn sunrise_angle_cases() {
        let half_pi = std::f64::consts::FRAC_PI_2;
        assert!((sunrise_hour_angle(0.0, 17.0).unwrap() - half_pi).abs() < 1e-15);
        assert!((sunrise_hour_angle(-40.0, 0.0).unwrap() - half_pi).abs() < 1e-15);
        // arccos(tan 27.5° · tan 23.45°) evaluated by hand: 1.3431
        assert!((sunrise_hour_angle(-27.5, 23.45).unwrap() - 1.3431).abs() < 5e-4);
        assert!(matches!(sunrise_hour_angle(80.0, 23.0), Err(SkyError::Polar { .. })));
    }

    #[test]
    fn extraterrestrial_values() {
        let site = SiteGeometry { latitude_deg: 0.0, ..Default::default() };
        let h0 = extraterrestrial_insolation(80, &site).unwrap();
        assert!((h0 - 10.51).abs() < 5e-3, "{h0}");
        let i0 = extraterrestrial_irradiance(1, &site).unwrap();
        assert!((i0 - 1.412).abs() < 5e-4, "{i0}");
        let flat = SiteGeometry { eccentricity_coeff: 0.0, ..site };
        for n in [1, 50, 200, 365] {
            assert_eq!(extraterrestrial_irradiance(n, &flat).unwrap(), 1.367);
        }
    }

    #[test]
    fn table_thresholds() {
        assert_eq!(classify_day(0.50, 1.0).unwrap().kind, DayKind::Clear);
        assert_eq!(classify_day(0.30, 1.0).unwrap().kind, DayKind::PartiallyCloudy);
        assert_eq!(classify_day(0.10, 1.0).unwrap().kind, DayKind::Cloudy);
        assert_eq!(classify_day(0.45, 1.0).unwrap().kind, DayKind::Clear);
        assert_eq!(classify_day(0.25, 1.0).unwrap().kind, DayKind::PartiallyCloudy);
        assert!(classify_day(1.0, 0.0).is_err());
    }

    #[test]
    fn composition_windows() {
        let mk = |kind| DayClass { kind, k_t: 0.0 };
        let mut days = vec![mk(DayKind::Clear); 27];
        days.extend([mk(DayKind::PartiallyCloudy), mk(DayKind::PartiallyCloudy), mk(DayKind::Cloudy)]);
        days.extend(vec![mk(DayKind::Clear); 10]);
        let comp = season_composition(&days, 30);
        assert_eq!(comp.len(), 2);
        assert_eq!(comp[0].clear_pct, 90.0);
        assert!((comp[0].partial_pct - 6.7).abs() < 0.05);
        assert!((comp[0].cloudy_pct - 3.3).abs() < 0.05);
        assert!(!comp[0].partial);
        assert!(comp[1].partial);
        assert_eq!((comp[1].window_days, comp[1].clear_pct), (10, 100.0));
    }

    #[test]
    fn trapezoid_of_constant_irradiance() {
        // 1000 W/m² for 10 hours at 15-min spacing = 10 kWh/m².
        let x = vec![1000.0; 41];
        assert!((daily_insolation(&x, 15) - 10.0).abs() < 1e-12);
    }
}
