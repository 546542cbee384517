//! Discrete wavelet transform via Mallat's two-channel filter bank.
//!
//! Analysis convolves with the decomposition low/high-pass filters and keeps
//! every second sample; synthesis is the adjoint of that operator, which for
//! orthonormal filters is also its inverse on the `[0, len)` support. Two
//! boundary modes are supported:
//!
//! * [`Extension::Symmetric`] (half-sample mirror). Produces
//!   `floor((n + taps - 1) / 2)` coefficients per band, so the transform is
//!   redundant near the edges but reconstructs exactly for any length.
//! * [`Extension::Periodic`] (periodization). Produces `ceil(n / 2)`
//!   coefficients per band and is an orthogonal transform for even lengths,
//!   which makes band energies add up to the signal energy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveletError {
    #[error("signal of length {len} is too short for {levels} decomposition levels (need at least {min})")]
    TooShort { len: usize, levels: usize, min: usize },
    #[error("signal contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("invalid wavelet spec: {0}")]
    Spec(String),
    #[error("inconsistent decomposition: {0}")]
    Integrity(String),
}

/// Mother wavelets with embedded filter taps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletName {
    Haar,
    Db2,
    Db4,
}

impl WaveletName {
    /// Reconstruction low-pass taps (the usual published Daubechies
    /// coefficients, normalized to unit energy).
    fn reconstruction_lowpass(self) -> &'static [f64] {
        match self {
            WaveletName::Haar => &[std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
            WaveletName::Db2 => &[0.48296291314453416, 0.8365163037378079, 0.2241438680420134, -0.12940952255126037],
            WaveletName::Db4 => &[
                0.2303778133088965,
                0.7148465705529157,
                0.6308807679298589,
                -0.027983769416859854,
                -0.18703481171909309,
                0.030841381835560764,
                0.0328830116668852,
                -0.010597401785069032,
            ],
        }
    }
}

impl std::str::FromStr for WaveletName {
    type Err = WaveletError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(WaveletName::Haar),
            "db2" => Ok(WaveletName::Db2),
            "db4" => Ok(WaveletName::Db4),
            other => Err(WaveletError::Spec(format!("unknown wavelet '{other}'"))),
        }
    }
}

impl std::fmt::Display for WaveletName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WaveletName::Haar => "haar",
            WaveletName::Db2 => "db2",
            WaveletName::Db4 => "db4",
        };
        f.write_str(s)
    }
}

/// Boundary handling for the analysis filter bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    #[default]
    Symmetric,
    Periodic,
}

/// Analysis filters plus the number of decomposition levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletSpec {
    pub name: WaveletName,
    /// Decomposition low-pass filter.
    pub lowpass: Vec<f64>,
    /// Decomposition high-pass filter, the alternating-sign reversal of `lowpass`.
    pub highpass: Vec<f64>,
    pub levels: usize,
}

impl WaveletSpec {
    pub fn new(name: WaveletName, levels: usize) -> Result<Self, WaveletError> {
        if levels == 0 {
            return Err(WaveletError::Spec("levels must be at least 1".into()));
        }
        let rec_lo = name.reconstruction_lowpass();
        let taps = rec_lo.len();
        let lowpass: Vec<f64> = rec_lo.iter().rev().copied().collect();
        // dec_hi[n] = (-1)^(n+1) * dec_lo[taps - 1 - n]
        let highpass: Vec<f64> = (0..taps)
            .map(|n| {
                let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
                sign * lowpass[taps - 1 - n]
            })
            .collect();
        let spec = Self { name, lowpass, highpass, levels };
        spec.check_orthonormal()?;
        Ok(spec)
    }

    pub fn db4() -> Self {
        Self::new(WaveletName::Db4, 3).expect("embedded db4 taps are orthonormal")
    }

    pub fn taps(&self) -> usize {
        self.lowpass.len()
    }

    /// Verifies unit energy, orthogonality to even shifts and the
    /// quadrature-mirror relation between the two filters.
    pub fn check_orthonormal(&self) -> Result<(), WaveletError> {
        let taps = self.lowpass.len();
        if taps == 0 || !taps.is_multiple_of(2) || self.highpass.len() != taps {
            return Err(WaveletError::Spec("filters must have equal, even length".into()));
        }
        for shift in (0..taps).step_by(2) {
            let dot: f64 = (0..taps - shift).map(|i| self.lowpass[i] * self.lowpass[i + shift]).sum();
            let expected = if shift == 0 { 1.0 } else { 0.0 };
            if (dot - expected).abs() > 1e-12 {
                return Err(WaveletError::Spec(format!("low-pass taps not orthonormal at shift {shift}: {dot}")));
            }
        }
        for n in 0..taps {
            let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            if (self.highpass[n] - sign * self.lowpass[taps - 1 - n]).abs() > 1e-15 {
                return Err(WaveletError::Spec("high-pass is not the quadrature mirror of low-pass".into()));
            }
        }
        Ok(())
    }
}

impl Default for WaveletSpec {
    fn default() -> Self {
        Self::db4()
    }
}

/// Approximation band at the coarsest level plus one detail band per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletDecomposition {
    /// A_L, the coarsest approximation.
    pub approximation: Vec<f64>,
    /// D_1 (finest) through D_L (coarsest).
    pub details: Vec<Vec<f64>>,
    pub original_length: usize,
    /// Length of the signal entering each level: `input_lengths[0]` is the
    /// original length, `input_lengths[j]` the length of A_j.
    pub input_lengths: Vec<usize>,
    pub spec: WaveletSpec,
    pub extension: Extension,
}

impl WaveletDecomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Sum of squares over every stored coefficient.
    pub fn energy(&self) -> f64 {
        let sq = |v: &Vec<f64>| v.iter().map(|x| x * x).sum::<f64>();
        sq(&self.approximation) + self.details.iter().map(sq).sum::<f64>()
    }

    /// Same bookkeeping with every band zero.
    pub fn zeroed(&self) -> Self {
        let mut out = self.clone();
        out.approximation.iter_mut().for_each(|c| *c = 0.0);
        out.details.iter_mut().flatten().for_each(|c| *c = 0.0);
        out
    }

    /// Copy keeping a single band: band 0 is A_L, band `j >= 1` is D_j.
    pub fn keep_band(&self, band: usize) -> Self {
        let mut out = self.zeroed();
        if band == 0 {
            out.approximation.clone_from(&self.approximation);
        } else {
            out.details[band - 1].clone_from(&self.details[band - 1]);
        }
        out
    }
}

fn coefficient_count(len: usize, taps: usize, extension: Extension) -> usize {
    match extension {
        Extension::Symmetric => (len + taps - 1) / 2,
        Extension::Periodic => len.div_ceil(2),
    }
}

/// Half-sample symmetric index reflection into `[0, len)`.
fn reflect(mut i: isize, len: usize) -> usize {
    let n = len as isize;
    let period = 2 * n;
    i = i.rem_euclid(period);
    if i >= n {
        (period - 1 - i) as usize
    } else {
        i as usize
    }
}

fn analysis_step(x: &[f64], spec: &WaveletSpec, extension: Extension) -> (Vec<f64>, Vec<f64>) {
    let taps = spec.taps();
    match extension {
        Extension::Symmetric => {
            let count = coefficient_count(x.len(), taps, extension);
            let mut approx = vec![0.0; count];
            let mut detail = vec![0.0; count];
            for k in 0..count {
                let mut a = 0.0;
                let mut d = 0.0;
                for j in 0..taps {
                    let idx = reflect(2 * k as isize + 1 - j as isize, x.len());
                    a += spec.lowpass[j] * x[idx];
                    d += spec.highpass[j] * x[idx];
                }
                approx[k] = a;
                detail[k] = d;
            }
            (approx, detail)
        }
        Extension::Periodic => {
            let mut padded = x.to_vec();
            if padded.len() % 2 == 1 {
                padded.push(*x.last().expect("non-empty"));
            }
            let n = padded.len() as isize;
            let half = (taps / 2) as isize;
            let count = padded.len() / 2;
            let mut approx = vec![0.0; count];
            let mut detail = vec![0.0; count];
            for k in 0..count {
                let mut a = 0.0;
                let mut d = 0.0;
                for j in 0..taps {
                    let idx = (2 * k as isize + half - j as isize).rem_euclid(n) as usize;
                    a += spec.lowpass[j] * padded[idx];
                    d += spec.highpass[j] * padded[idx];
                }
                approx[k] = a;
                detail[k] = d;
            }
            (approx, detail)
        }
    }
}

fn synthesis_step(
    approx: &[f64],
    detail: &[f64],
    out_len: usize,
    spec: &WaveletSpec,
    extension: Extension,
) -> Vec<f64> {
    let taps = spec.taps();
    match extension {
        Extension::Symmetric => {
            let mut out = vec![0.0; out_len];
            for k in 0..approx.len() {
                for j in 0..taps {
                    let m = 2 * k as isize + 1 - j as isize;
                    if m >= 0 && (m as usize) < out_len {
                        out[m as usize] += spec.lowpass[j] * approx[k] + spec.highpass[j] * detail[k];
                    }
                }
            }
            out
        }
        Extension::Periodic => {
            let n = 2 * approx.len();
            let half = (taps / 2) as isize;
            let mut out = vec![0.0; n];
            for k in 0..approx.len() {
                for j in 0..taps {
                    let m = (2 * k as isize + half - j as isize).rem_euclid(n as isize) as usize;
                    out[m] += spec.lowpass[j] * approx[k] + spec.highpass[j] * detail[k];
                }
            }
            out.truncate(out_len);
            out
        }
    }
}

/// Multi-level analysis: `spec.levels` stages, each recursing on the approximation.
pub fn decompose(
    signal: &[f64],
    spec: &WaveletSpec,
    extension: Extension,
) -> Result<WaveletDecomposition, WaveletError> {
    let min = 1usize << spec.levels;
    if signal.len() < min {
        return Err(WaveletError::TooShort { len: signal.len(), levels: spec.levels, min });
    }
    if let Some(i) = signal.iter().position(|x| !x.is_finite()) {
        return Err(WaveletError::NonFinite(i));
    }
    let mut input_lengths = Vec::with_capacity(spec.levels + 1);
    let mut details = Vec::with_capacity(spec.levels);
    let mut current = signal.to_vec();
    for _ in 0..spec.levels {
        input_lengths.push(current.len());
        let (a, d) = analysis_step(&current, spec, extension);
        details.push(d);
        current = a;
    }
    input_lengths.push(current.len());
    Ok(WaveletDecomposition {
        approximation: current,
        details,
        original_length: signal.len(),
        input_lengths,
        spec: spec.clone(),
        extension,
    })
}

/// Iterated synthesis back to a signal of `original_length` samples.
pub fn reconstruct(decomposition: &WaveletDecomposition) -> Result<Vec<f64>, WaveletError> {
    let d = decomposition;
    let levels = d.details.len();
    if levels == 0 || d.input_lengths.len() != levels + 1 {
        return Err(WaveletError::Integrity("level bookkeeping does not match band count".into()));
    }
    if d.input_lengths[0] != d.original_length {
        return Err(WaveletError::Integrity("original length disagrees with level 0 length".into()));
    }
    let taps = d.spec.taps();
    for level in 0..levels {
        let expected = coefficient_count(d.input_lengths[level], taps, d.extension);
        if d.details[level].len() != expected || d.input_lengths[level + 1] != expected {
            return Err(WaveletError::Integrity(format!(
                "detail band D{} has {} coefficients, expected {expected}",
                level + 1,
                d.details[level].len()
            )));
        }
    }
    if d.approximation.len() != d.input_lengths[levels] {
        return Err(WaveletError::Integrity(format!(
            "approximation has {} coefficients, expected {}",
            d.approximation.len(),
            d.input_lengths[levels]
        )));
    }
    let mut current = d.approximation.clone();
    for level in (0..levels).rev() {
        current = synthesis_step(&current, &d.details[level], d.input_lengths[level], &d.spec, d.extension);
    }
    Ok(current)
}

/// Splits `signal` into `levels + 1` full-length component series, one per
/// band (A_L first, then D_1..D_L), each obtained by reconstructing that band
/// alone. The components sum back to the signal.
pub fn multiresolution(
    signal: &[f64],
    spec: &WaveletSpec,
    extension: Extension,
) -> Result<Vec<Vec<f64>>, WaveletError> {
    let dec = decompose(signal, spec, extension)?;
    (0..=spec.levels).map(|band| reconstruct(&dec.keep_band(band))).collect()
}

/// Inverse of [`multiresolution`]: synthesis is linear, so reconstructing the
/// full band set equals summing the per-band reconstructions.
pub fn recombine(components: &[Vec<f64>]) -> Result<Vec<f64>, WaveletError> {
    let Some(first) = components.first() else {
        return Err(WaveletError::Integrity("no components to recombine".into()));
    };
    let len = first.len();
    if components.iter().any(|c| c.len() != len) {
        return Err(WaveletError::Integrity("component series differ in length".into()));
    }
    Ok((0..len).map(|i| components.iter().map(|c| c[i]).sum()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_filters_pass_self_check() {
        for name in [WaveletName::Haar, WaveletName::Db2, WaveletName::Db4] {
            let spec = WaveletSpec::new(name, 3).unwrap();
            let sum: f64 = spec.lowpass.iter().sum();
            assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12, "{name}: {sum}");
            let hsum: f64 = spec.highpass.iter().sum();
            assert!(hsum.abs() < 1e-12);
        }
    }

    #[test]
    fn haar_on_ones_matches_hand_convolution() {
        let spec = WaveletSpec::new(WaveletName::Haar, 1).unwrap();
        let dec = decompose(&[1.0, 1.0, 1.0, 1.0], &spec, Extension::Symmetric).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        // (1/√2)(1 + 1) = √2; detail taps cancel on a constant.
        assert_eq!(dec.approximation.len(), 2);
        for a in &dec.approximation {
            assert!((a - s2).abs() < 1e-15);
        }
        assert!(dec.details[0].iter().all(|&d| d == 0.0));
    }

    #[test]
    fn constant_signal_has_zero_details_for_haar() {
        let spec = WaveletSpec::new(WaveletName::Haar, 3).unwrap();
        let dec = decompose(&[3.5; 40], &spec, Extension::Symmetric).unwrap();
        for band in &dec.details {
            assert!(band.iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn zero_signal_gives_zero_bands() {
        let dec = decompose(&[0.0; 64], &WaveletSpec::db4(), Extension::Symmetric).unwrap();
        assert!(dec.approximation.iter().all(|&c| c == 0.0));
        assert!(dec.details.iter().flatten().all(|&c| c == 0.0));
        assert!(reconstruct(&dec.zeroed()).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn too_short_and_non_finite_are_rejected() {
        let spec = WaveletSpec::db4();
        assert!(matches!(
            decompose(&[1.0; 7], &spec, Extension::Symmetric),
            Err(WaveletError::TooShort { min: 8, .. })
        ));
        let mut x = vec![1.0; 16];
        x[5] = f64::NAN;
        assert_eq!(decompose(&x, &spec, Extension::Symmetric), Err(WaveletError::NonFinite(5)));
    }

    #[test]
    fn corrupted_bookkeeping_is_an_integrity_error() {
        let mut dec = decompose(&[1.0; 40], &WaveletSpec::db4(), Extension::Symmetric).unwrap();
        dec.details[1].pop();
        assert!(matches!(reconstruct(&dec), Err(WaveletError::Integrity(_))));
    }

    #[test]
    fn odd_lengths_round_trip_in_both_modes() {
        for ext in [Extension::Symmetric, Extension::Periodic] {
            for len in [8, 9, 10, 13, 40, 41, 97] {
                let x: Vec<f64> = (0..len).map(|i| ((i * 7 % 11) as f64).sin() + i as f64 * 0.1).collect();
                let dec = decompose(&x, &WaveletSpec::db4(), ext).unwrap();
                let y = reconstruct(&dec).unwrap();
                for (a, b) in x.iter().zip(&y) {
                    assert!((a - b).abs() < 1e-10, "{ext:?} len {len}");
                }
            }
        }
    }

    #[test]
    fn components_recombine_to_signal() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 / 6.0).sin() * 100.0 + (i % 3) as f64).collect();
        let comps = multiresolution(&x, &WaveletSpec::db4(), Extension::Symmetric).unwrap();
        assert_eq!(comps.len(), 4);
        let back = recombine(&comps).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
