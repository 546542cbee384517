//! Python bindings: synthetic data, wavelet components, trim aggregation,
//! metrics, day classification and the forecasting ensemble.

use chrono::NaiveDate;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pvnne::dataio::{parse_records, write_records, LagConfig, Schema};
use pvnne::ensemble::{self, DateSpan, EnsembleConfig, ModelLayout, TrainerConfigs, WaveletSettings};
use pvnne::evaluation;
use pvnne::sky::{self, SiteGeometry};
use pvnne::synth::{self, SynthConfig};
use pvnne::wavelet::{self, Extension, WaveletName, WaveletSpec};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn date(text: &str) -> PyResult<NaiveDate> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d").map_err(err)
}

fn wavelet_spec(name: &str, levels: usize) -> PyResult<WaveletSpec> {
    let name = match name {
        "haar" | "db1" => WaveletName::Haar,
        "db2" => WaveletName::Db2,
        "db4" => WaveletName::Db4,
        other => return Err(PyValueError::new_err(format!("unknown wavelet '{other}'"))),
    };
    WaveletSpec::new(name, levels).map_err(err)
}

fn extension(mode: &str) -> PyResult<Extension> {
    match mode {
        "symmetric" => Ok(Extension::Symmetric),
        "periodic" | "periodization" => Ok(Extension::Periodic),
        other => Err(PyValueError::new_err(format!("unknown extension '{other}'"))),
    }
}

/// Regularly spaced PV and weather samples.
#[pyclass(frozen)]
struct Dataset {
    inner: pvnne::dataio::Dataset,
}

#[pymethods]
impl Dataset {
    /// Parses CSV text with the default column names.
    #[staticmethod]
    #[pyo3(signature = (text, resolution_minutes=15))]
    fn from_csv(text: &str, resolution_minutes: u32) -> PyResult<Self> {
        let records = parse_records(text.as_bytes(), &Schema::default()).map_err(err)?;
        let inner = pvnne::dataio::Dataset::regularize(records, resolution_minutes, Default::default()).map_err(err)?;
        Ok(Self { inner })
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_records(&mut buf, self.inner.records()).map_err(err)?;
        String::from_utf8(buf).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn resolution_minutes(&self) -> u32 {
        self.inner.resolution_minutes()
    }

    fn dates(&self) -> Vec<String> {
        self.inner.dates().iter().map(|d| d.to_string()).collect()
    }

    /// PV power (kW) over the daylight window of `day`.
    fn daylight_pv(&self, day: &str) -> PyResult<Vec<f64>> {
        self.inner.daylight_pv(date(day)?).map_err(err)
    }

    fn resample(&self, minutes: u32) -> PyResult<Self> {
        Ok(Self { inner: pvnne::dataio::resample(&self.inner, minutes).map_err(err)? })
    }

    /// `(date, kind, clearness index)` for every day with complete irradiance.
    fn classify(&self) -> PyResult<Vec<(String, String, f64)>> {
        let classes = evaluation::classify_dataset(&self.inner, &SiteGeometry::default()).map_err(err)?;
        Ok(classes.into_iter().map(|(d, c)| (d.to_string(), c.kind.as_str().to_string(), c.k_t)).collect())
    }
}

/// Generates a synthetic year at the default site and plant.
#[pyfunction]
#[pyo3(signature = (seed=2014, n_days=360, resolution_minutes=15))]
fn synthetic_year(seed: u64, n_days: usize, resolution_minutes: u32) -> PyResult<Dataset> {
    let cfg = SynthConfig {
        seed,
        n_days,
        resolution_minutes,
        composition: synth::TABLE_COMPOSITION.iter().cycle().take(n_days.div_ceil(30)).copied().collect(),
        ..Default::default()
    };
    Ok(Dataset { inner: synth::generate_year(&cfg).map_err(err)?.dataset })
}

/// Full-length components `[A_L, D_1, .., D_L]` that sum to the signal.
#[pyfunction]
#[pyo3(signature = (signal, wavelet="db4", levels=3, mode="symmetric"))]
fn multiresolution(signal: Vec<f64>, wavelet: &str, levels: usize, mode: &str) -> PyResult<Vec<Vec<f64>>> {
    wavelet::multiresolution(&signal, &wavelet_spec(wavelet, levels)?, extension(mode)?).map_err(err)
}

/// `(approximation, [detail_1, .., detail_L])` coefficients.
#[pyfunction]
#[pyo3(signature = (signal, wavelet="db4", levels=3, mode="symmetric"))]
fn wavedec(signal: Vec<f64>, wavelet: &str, levels: usize, mode: &str) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = wavelet::decompose(&signal, &wavelet_spec(wavelet, levels)?, extension(mode)?).map_err(err)?;
    Ok((d.approximation, d.details))
}

#[pyfunction]
fn trim_aggregate(values: Vec<f64>, alpha: f64) -> PyResult<f64> {
    ensemble::trim_aggregate(&values, alpha).map_err(err)
}

#[pyfunction]
fn mape(actual: Vec<f64>, forecast: Vec<f64>, peak: f64) -> PyResult<f64> {
    evaluation::mape(&actual, &forecast, peak).map_err(err)
}

#[pyfunction]
fn error_variance(actual: Vec<f64>, forecast: Vec<f64>, peak: f64) -> PyResult<f64> {
    evaluation::error_variance(&actual, &forecast, peak).map_err(err)
}

#[pyfunction]
fn r_squared(actual: Vec<f64>, forecast: Vec<f64>) -> PyResult<f64> {
    evaluation::r_squared(&actual, &forecast).map_err(err)
}

/// `(kind, clearness index)` of a day from its insolation and H0 (kWh/m²).
#[pyfunction]
fn classify_day(daily_insolation: f64, h0: f64) -> PyResult<(String, f64)> {
    let c = sky::classify_day(daily_insolation, h0).map_err(err)?;
    Ok((c.kind.as_str().to_string(), c.k_t))
}

#[pyfunction]
#[pyo3(signature = (day_of_year, latitude_deg=-27.5))]
fn extraterrestrial_insolation(day_of_year: u32, latitude_deg: f64) -> PyResult<f64> {
    let site = SiteGeometry { latitude_deg, ..Default::default() };
    sky::extraterrestrial_insolation(day_of_year, &site).map_err(err)
}

#[pyfunction]
fn cell_temperature(ambient_c: f64, irradiance: f64, noct: f64) -> f64 {
    synth::cell_temperature(ambient_c, irradiance, noct)
}

/// Wavelet neural-network ensemble with trim aggregation.
#[pyclass(frozen)]
struct Ensemble {
    inner: ensemble::EnsembleModel,
}

#[pymethods]
impl Ensemble {
    /// Trains on `[train_first, train_last]` and picks alpha on `validation`.
    /// `config_json` and `trainers_json` override the default settings.
    #[staticmethod]
    #[pyo3(signature = (dataset, train_first, train_last, validation, peak_power, config_json=None, trainers_json=None))]
    #[allow(clippy::too_many_arguments)]
    fn fit(
        py: Python<'_>,
        dataset: &Dataset,
        train_first: &str,
        train_last: &str,
        validation: Vec<String>,
        peak_power: f64,
        config_json: Option<&str>,
        trainers_json: Option<&str>,
    ) -> PyResult<Self> {
        let config: EnsembleConfig = match config_json {
            Some(t) => serde_json_from(t)?,
            None => EnsembleConfig::default(),
        };
        let trainers: TrainerConfigs = match trainers_json {
            Some(t) => serde_json_from(t)?,
            None => TrainerConfigs::default(),
        };
        let span = DateSpan { first: date(train_first)?, last: date(train_last)? };
        let validation = validation.iter().map(|d| date(d)).collect::<PyResult<Vec<_>>>()?;
        let ds = &dataset.inner;
        let layout = ModelLayout {
            wavelet: Some(WaveletSettings::default()),
            lags: LagConfig::default(),
            resolution_minutes: ds.resolution_minutes(),
            daylight: ds.daylight(),
        };
        let inner = py
            .detach(|| ensemble::fit_ensemble(ds, &config, &layout, &trainers, span, &validation, peak_power))
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: ensemble::EnsembleModel::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn usable_members(&self) -> usize {
        self.inner.usable_members()
    }

    /// Trimmed-mean forecast (kW) over the daylight window of `day`.
    fn forecast(&self, dataset: &Dataset, day: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.forecast_day(&dataset.inner, date(day)?).map_err(err)?.aggregate)
    }

    /// One row per usable member.
    fn member_forecasts(&self, dataset: &Dataset, day: &str) -> PyResult<Vec<Vec<f64>>> {
        let f = self.inner.forecast_day(&dataset.inner, date(day)?).map_err(err)?;
        Ok(f.members.values.iter_rows().map(|r| r.to_vec()).collect())
    }
}

fn serde_json_from<T: serde::de::DeserializeOwned>(text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(err)
}

#[pymodule]
fn pvnne_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<Ensemble>()?;
    m.add_function(wrap_pyfunction!(synthetic_year, m)?)?;
    m.add_function(wrap_pyfunction!(multiresolution, m)?)?;
    m.add_function(wrap_pyfunction!(wavedec, m)?)?;
    m.add_function(wrap_pyfunction!(trim_aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(mape, m)?)?;
    m.add_function(wrap_pyfunction!(error_variance, m)?)?;
    m.add_function(wrap_pyfunction!(r_squared, m)?)?;
    m.add_function(wrap_pyfunction!(classify_day, m)?)?;
    m.add_function(wrap_pyfunction!(extraterrestrial_insolation, m)?)?;
    m.add_function(wrap_pyfunction!(cell_temperature, m)?)?;
    Ok(())
}
