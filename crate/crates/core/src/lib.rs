//! Day-ahead PV power forecasting with a wavelet-preprocessed ensemble of
//! feedforward networks.
//!
//! The pipeline: observations are ingested and cleaned ([`dataio`]), each
//! daylight PV profile is split into multiresolution components
//! ([`wavelet`]), one small network per component is trained by
//! Levenberg-Marquardt ([`neural`]) or particle swarm ([`pso`]), and the
//! recombined member forecasts are merged by a trimmed mean ([`ensemble`]).
//! [`sky`] classifies days by clearness index, [`synth`] generates a
//! synthetic plant for testing, and [`evaluation`] scores forecasts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataio;
pub mod ensemble;
pub mod evaluation;
pub mod matrix;
pub mod neural;
pub mod pso;
pub mod seed;
pub mod sky;
pub mod synth;
pub mod wavelet;

pub use matrix::Matrix;
