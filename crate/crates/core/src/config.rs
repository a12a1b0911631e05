//! Plain-text `key = value` parameter files.
//!
//! ```text
//! # reference device, ultrastrong point
//! g_blue_mhz = 12.3
//! g_red_mhz  = 12.3
//! ```
//!
//! Frequencies are ordinary MHz, phases radians, temperature millikelvin.
//! Keys not present keep their defaults (the reference device, pumps off,
//! zero temperature). Unknown or repeated keys are errors.

use alloc::string::String;
use core::fmt::Write;

use crate::error::{domain, Result};
use crate::model::{ModePair, PumpConfig};
use crate::presets;
use crate::units::mhz_to_rad;

pub const KEYS: [&str; 10] = [
    "omega_a_mhz",
    "omega_b_mhz",
    "kappa_a_mhz",
    "kappa_b_mhz",
    "g_blue_mhz",
    "g_red_mhz",
    "omega_eff_mhz",
    "phi_blue_rad",
    "phi_red_rad",
    "temperature_mk",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub omega_a_mhz: f64,
    pub omega_b_mhz: f64,
    pub kappa_a_mhz: f64,
    pub kappa_b_mhz: f64,
    pub g_blue_mhz: f64,
    pub g_red_mhz: f64,
    pub omega_eff_mhz: f64,
    pub phi_blue_rad: f64,
    pub phi_red_rad: f64,
    pub temperature_mk: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            omega_a_mhz: 1e3 * presets::OMEGA_A_GHZ,
            omega_b_mhz: 1e3 * presets::OMEGA_B_GHZ,
            kappa_a_mhz: presets::KAPPA_A_MHZ,
            kappa_b_mhz: presets::KAPPA_B_MHZ,
            g_blue_mhz: 0.0,
            g_red_mhz: 0.0,
            omega_eff_mhz: presets::OMEGA_EFF_MHZ,
            phi_blue_rad: 0.0,
            phi_red_rad: 0.0,
            temperature_mk: 0.0,
        }
    }
}

impl SimConfig {
    /// Defaults overridden by the contents of a parameter file.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = [false; KEYS.len()];
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| domain!("line {}: expected `key = value`, got `{line}`", no + 1))?;
            let key = key.trim();
            let idx = key_index(key).ok_or_else(|| domain!("line {}: unknown key `{key}`", no + 1))?;
            if seen[idx] {
                return Err(domain!("line {}: key `{key}` given twice", no + 1));
            }
            seen[idx] = true;
            let value: f64 =
                value.trim().parse().map_err(|_| domain!("line {}: `{}` is not a number", no + 1, value.trim()))?;
            cfg.set(key, value).map_err(|e| domain!("line {}: {e}", no + 1))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(domain!("`{key}` must be finite, got {value}"));
        }
        if key == "temperature_mk" && value < 0.0 {
            return Err(domain!("temperature must be non-negative, got {value} mK"));
        }
        *self.slot(key).ok_or_else(|| domain!("unknown key `{key}`"))? = value;
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        key_index(key).map(|i| self.values()[i])
    }

    /// Values in the order of [`KEYS`].
    pub fn values(&self) -> [f64; KEYS.len()] {
        [
            self.omega_a_mhz,
            self.omega_b_mhz,
            self.kappa_a_mhz,
            self.kappa_b_mhz,
            self.g_blue_mhz,
            self.g_red_mhz,
            self.omega_eff_mhz,
            self.phi_blue_rad,
            self.phi_red_rad,
            self.temperature_mk,
        ]
    }

    /// Serialize in a form [`SimConfig::parse`] reads back exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in KEYS.iter().zip(self.values()) {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        s
    }

    pub fn modes(&self) -> Result<ModePair> {
        ModePair::new(
            mhz_to_rad(self.omega_a_mhz),
            mhz_to_rad(self.omega_b_mhz),
            mhz_to_rad(self.kappa_a_mhz),
            mhz_to_rad(self.kappa_b_mhz),
        )
    }

    pub fn pumps(&self) -> Result<PumpConfig> {
        PumpConfig::new(mhz_to_rad(self.g_blue_mhz), mhz_to_rad(self.g_red_mhz), mhz_to_rad(self.omega_eff_mhz))?
            .with_phases(self.phi_blue_rad, self.phi_red_rad)
    }

    pub fn temperature_k(&self) -> f64 {
        1e-3 * self.temperature_mk
    }

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "omega_a_mhz" => &mut self.omega_a_mhz,
            "omega_b_mhz" => &mut self.omega_b_mhz,
            "kappa_a_mhz" => &mut self.kappa_a_mhz,
            "kappa_b_mhz" => &mut self.kappa_b_mhz,
            "g_blue_mhz" => &mut self.g_blue_mhz,
            "g_red_mhz" => &mut self.g_red_mhz,
            "omega_eff_mhz" => &mut self.omega_eff_mhz,
            "phi_blue_rad" => &mut self.phi_blue_rad,
            "phi_red_rad" => &mut self.phi_red_rad,
            "temperature_mk" => &mut self.temperature_mk,
            _ => return None,
        })
    }
}

fn key_index(key: &str) -> Option<usize> {
    KEYS.iter().position(|k| *k == key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = SimConfig::parse("\n# nothing\n   \n").unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert!(cfg.pumps().unwrap().is_off());
        assert_eq!(cfg.modes().unwrap(), presets::device_modes());
    }

    #[test]
    fn parses_values_and_comments() {
        let cfg = SimConfig::parse("g_blue_mhz = 12.3  # trailing\ng_red_mhz=12.3\ntemperature_mk = 40").unwrap();
        assert_eq!(cfg.g_blue_mhz, 12.3);
        assert_eq!(cfg.g_red_mhz, 12.3);
        assert!((cfg.temperature_k() - 0.04).abs() < 1e-15);
        assert_eq!(cfg.pumps().unwrap(), presets::ultrastrong());
    }

    #[test]
    fn rejects_bad_input() {
        for text in ["g_green_mhz = 1", "g_blue_mhz 1", "g_blue_mhz = x", "g_blue_mhz = 1\ng_blue_mhz = 2", "temperature_mk = -1"] {
            assert!(matches!(SimConfig::parse(text), Err(Error::Domain(_))), "{text}");
        }
        let cfg = SimConfig::parse("kappa_a_mhz = -3").unwrap();
        assert!(cfg.modes().is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = SimConfig::default();
        cfg.set("g_blue_mhz", 0.1 + 0.2).unwrap();
        cfg.set("phi_red_rad", core::f64::consts::PI / 3.0).unwrap();
        assert_eq!(SimConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
