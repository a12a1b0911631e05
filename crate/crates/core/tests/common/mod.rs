#![allow(dead_code)]

use core::f64::consts::TAU;

use rand::Rng;
use uscsim_core::model::{build_drift, stability};
use uscsim_core::units::mhz_to_rad;
use uscsim_core::{gaussian::CovarianceMatrix, ModePair, PumpConfig, Stability};

/// A random configuration with a strictly stable drift matrix.
pub fn random_stable<R: Rng>(rng: &mut R) -> (ModePair, PumpConfig) {
    loop {
        let modes = ModePair::new(
            mhz_to_rad(rng.random_range(6000.0..9000.0) + 3000.0),
            mhz_to_rad(rng.random_range(4000.0..6000.0)),
            mhz_to_rad(rng.random_range(5.0..40.0)),
            mhz_to_rad(rng.random_range(5.0..40.0)),
        )
        .unwrap();
        let pumps = PumpConfig::new(
            mhz_to_rad(rng.random_range(0.0..30.0)),
            mhz_to_rad(rng.random_range(0.0..30.0)),
            mhz_to_rad(rng.random_range(0.0..40.0)),
        )
        .unwrap()
        .with_phases(rng.random_range(0.0..TAU), rng.random_range(0.0..TAU))
        .unwrap();
        let report = stability(&build_drift(&modes, &pumps)).unwrap();
        if report.classification == Stability::Stable {
            return (modes, pumps);
        }
    }
}

pub fn tmss(r: f64) -> CovarianceMatrix {
    let (c, s) = ((2.0 * r).cosh() / 4.0, (2.0 * r).sinh() / 4.0);
    CovarianceMatrix::new([[c, 0.0, s, 0.0], [0.0, c, 0.0, -s], [s, 0.0, c, 0.0], [0.0, -s, 0.0, c]]).unwrap()
}

pub fn thermal(na: f64, nb: f64) -> CovarianceMatrix {
    let (a, b) = ((2.0 * na + 1.0) / 4.0, (2.0 * nb + 1.0) / 4.0);
    CovarianceMatrix::new([[a, 0.0, 0.0, 0.0], [0.0, a, 0.0, 0.0], [0.0, 0.0, b, 0.0], [0.0, 0.0, 0.0, b]]).unwrap()
}

/// Largest entry difference relative to the largest entry of `a`.
pub fn relative_gap(a: &CovarianceMatrix, b: &CovarianceMatrix) -> f64 {
    let scale = a.entries().iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    a.max_abs_diff(b) / scale
}
