//! Device parameters and operating points of the reference experiment.

use core::f64::consts::FRAC_PI_2;

// Shadowed by inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::model::{ModePair, PumpConfig};
use crate::units::{ghz_to_rad, mhz_to_rad};

pub const OMEGA_A_GHZ: f64 = 8.477;
pub const OMEGA_B_GHZ: f64 = 6.476;
pub const KAPPA_A_MHZ: f64 = 19.0;
pub const KAPPA_B_MHZ: f64 = 22.0;
pub const OMEGA_EFF_MHZ: f64 = 26.0;

/// Blue-only coupling of the detuning scan.
pub const G_BLUE_DOUBLET_MHZ: f64 = 11.5;
/// Blue coupling held fixed during the red-pump sweep.
pub const G_BLUE_SWEEP_MHZ: f64 = 12.6;
/// Symmetric coupling of the ultrastrong operating point.
pub const G_USC_MHZ: f64 = 12.3;
/// Amplifier gain of the calibration (EPR) run.
pub const EPR_GAIN_DB: f64 = 16.0;

/// Detection-chain gains, V² per vacuum unit.
pub const GAIN_A: f64 = 4.2e-8;
pub const GAIN_B: f64 = 9.2e-8;

pub fn device_modes() -> ModePair {
    ModePair::new(ghz_to_rad(OMEGA_A_GHZ), ghz_to_rad(OMEGA_B_GHZ), mhz_to_rad(KAPPA_A_MHZ), mhz_to_rad(KAPPA_B_MHZ))
        .expect("reference device parameters are valid")
}

fn pumps(g_blue_mhz: f64, g_red_mhz: f64) -> PumpConfig {
    PumpConfig::new(mhz_to_rad(g_blue_mhz), mhz_to_rad(g_red_mhz), mhz_to_rad(OMEGA_EFF_MHZ))
        .expect("preset couplings are valid")
}

pub fn blue_doublet() -> PumpConfig {
    pumps(G_BLUE_DOUBLET_MHZ, 0.0)
}

pub fn ultrastrong() -> PumpConfig {
    pumps(G_USC_MHZ, G_USC_MHZ)
}

/// Blue coupling that gives a zero-detuning non-degenerate amplifier the
/// power gain `G = (1 + ρ²)²/(1 − ρ²)²`, `ρ = 2g/√(κ_a κ_b)`.
pub fn epr_coupling(modes: &ModePair, gain_db: f64) -> f64 {
    let g = 10f64.powf(gain_db / 10.0);
    let rho2 = (g.sqrt() - 1.0) / (g.sqrt() + 1.0);
    0.5 * (modes.kappa_a() * modes.kappa_b()).sqrt() * rho2.sqrt()
}

/// Calibration state: blue pump only, no detuning. The blue phase is set so
/// that the output correlations appear between `X_a` and `X_b`.
pub fn epr(modes: &ModePair) -> PumpConfig {
    PumpConfig::new(epr_coupling(modes, EPR_GAIN_DB), 0.0, 0.0)
        .and_then(|p| p.with_phases(FRAC_PI_2, 0.0))
        .expect("EPR preset is valid")
}
