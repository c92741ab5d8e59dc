//! Command-line companion to `cqlab-core`: FFT-backed sine transform,
//! parallel sweeps, CSV/JSON artifacts and the acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod fft;
pub mod io;
pub mod parallel;
