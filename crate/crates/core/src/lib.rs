//! Linear Gaussian model of a two-mode Josephson mixer driven by a "blue"
//! (down-conversion) and a "red" (conversion) pump.
//!
//! In the frame rotating at `omega_a + omega_eff` and `omega_b + omega_eff`
//! the circuit behaves as two degenerate oscillators at `omega_eff` with a
//! tunable coupling. Everything here is linear: the dynamics are captured by
//! a 4×4 drift matrix, the propagating fields by a Bogoliubov scattering
//! matrix, and the states by 4×4 quadrature covariance matrices.
//!
//! Modules:
//! - [`model`]: physical parameters, drift matrix, stability, normal modes.
//! - [`spectra`]: input-output scattering, emission spectra, peak finding.
//! - [`gaussian`]: steady-state and filtered-output covariances, squeezing
//!   and entanglement measures.
//! - [`config`]: `key = value` parameter files.
//! - [`measurement`]: synthetic heterodyne records, histogram subtraction,
//!   covariance estimation and gain calibration.
//!
//! The crate is `no_std` and only needs `alloc`. All frequencies are angular
//! (rad/s); see [`units`] for conversions from ordinary MHz.

#![no_std]
// Index loops read closer to the matrix algebra; `!(x > 0.0)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod config;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod measurement;
pub mod model;
pub mod presets;
pub mod quadrature;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};
pub use gaussian::{CovarianceMatrix, Mode, SqueezingReport};
pub use measurement::{DetectionChain, HistogramGrid, PumpState, Quadrature, QuadratureRecordSet};
pub use model::{DriftMatrix, ModePair, PumpConfig, Stability, StabilityReport};
pub use spectra::{Peak, Port, ScatteringMatrix, SpectrumTrace};
