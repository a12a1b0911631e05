//! Unit conversions and physical constants.

use core::f64::consts::PI;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;

/// Ordinary frequency in MHz to angular frequency in rad/s.
#[inline]
pub fn mhz_to_rad(f_mhz: f64) -> f64 {
    2.0 * PI * 1e6 * f_mhz
}

/// Angular frequency in rad/s to ordinary frequency in MHz.
#[inline]
pub fn rad_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

/// Ordinary frequency in GHz to angular frequency in rad/s.
#[inline]
pub fn ghz_to_rad(f_ghz: f64) -> f64 {
    mhz_to_rad(1e3 * f_ghz)
}
