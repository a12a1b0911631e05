use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::sweep::{GridAxis, SweepRange};

#[derive(Debug, Parser)]
#[command(name = "uscsim", version, about = "Simulate a two-pump Josephson mixer in the ultrastrong-coupling regime")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Parameter file (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Frequency grid size.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(2..))]
    pub points: Option<u64>,
    #[arg(long, global = true, value_name = "S", default_value_t = 2024)]
    pub seed: u64,
    /// Worker threads for sweeps (default: one per core).
    #[arg(long, global = true, value_name = "K", env = "USCSIM_JOBS", value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Per-parameter overrides, applied on top of the parameter file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true, value_name = "MHZ", allow_negative_numbers = true)]
    pub omega_a_mhz: Option<f64>,
    #[arg(long, global = true, value_name = "MHZ", allow_negative_numbers = true)]
    pub omega_b_mhz: Option<f64>,
    #[arg(long, global = true, value_name = "MHZ", allow_negative_numbers = true)]
    pub kappa_a_mhz: Option<f64>,
    #[arg(long, global = true, value_name = "MHZ", allow_negative_numbers = true)]
    pub kappa_b_mhz: Option<f64>,
    #[arg(long, global = true, value_name = "MHZ", allow_negative_numbers = true)]
    pub g_blue_mhz: Option<f64>,
    #[arg(long, global = true, value_name = "MHZ", allow_negative_numbers = true)]
    pub g_red_mhz: Option<f64>,
    #[arg(long, global = true, value_name = "MHZ", allow_negative_numbers = true)]
    pub omega_eff_mhz: Option<f64>,
    #[arg(long, global = true, value_name = "RAD", allow_negative_numbers = true)]
    pub phi_blue_rad: Option<f64>,
    #[arg(long, global = true, value_name = "RAD", allow_negative_numbers = true)]
    pub phi_red_rad: Option<f64>,
    #[arg(long, global = true, value_name = "MK", allow_negative_numbers = true)]
    pub temperature_mk: Option<f64>,
}

impl Overrides {
    /// `(key, value)` pairs in parameter-file naming.
    pub fn pairs(&self) -> Vec<(&'static str, f64)> {
        [
            ("omega_a_mhz", self.omega_a_mhz),
            ("omega_b_mhz", self.omega_b_mhz),
            ("kappa_a_mhz", self.kappa_a_mhz),
            ("kappa_b_mhz", self.kappa_b_mhz),
            ("g_blue_mhz", self.g_blue_mhz),
            ("g_red_mhz", self.g_red_mhz),
            ("omega_eff_mhz", self.omega_eff_mhz),
            ("phi_blue_rad", self.phi_blue_rad),
            ("phi_red_rad", self.phi_red_rad),
            ("temperature_mk", self.temperature_mk),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emission spectra of both ports with peak lists, optionally swept.
    Spectrum(SpectrumArgs),
    /// Single-mode squeezing over a (g_blue, g_red) grid.
    SqueezeMap(SqueezeMapArgs),
    /// Frequency-resolved quadrature variance extrema of both ports.
    VarianceSpectrum(VarianceArgs),
    /// Synthetic interleaved measurement, histograms and estimates.
    Pipeline(PipelineArgs),
    /// Stability margin, drift eigenvalues and normal modes.
    Stability,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Half-width of the frequency grid around the rotating-frame origin.
    #[arg(long, value_name = "MHZ")]
    pub span_mhz: Option<f64>,
    /// Minimum peak prominence, relative to the trace maximum.
    #[arg(long, default_value_t = uscsim_core::spectra::DEFAULT_PROMINENCE)]
    pub prominence: f64,
    /// Parameter sweep `VAR=START:STOP:N` (MHz), VAR one of g_red, g_blue, omega_eff.
    #[arg(long, value_name = "SPEC")]
    pub sweep: Option<SweepRange>,
}

#[derive(Debug, Args)]
pub struct SqueezeMapArgs {
    /// g_blue axis `START:STOP:N` in MHz (default 0 to omega_eff/2, 21 points).
    #[arg(long, value_name = "AXIS", allow_hyphen_values = true)]
    pub g_blue: Option<GridAxis>,
    /// g_red axis `START:STOP:N` in MHz.
    #[arg(long, value_name = "AXIS", allow_hyphen_values = true)]
    pub g_red: Option<GridAxis>,
    /// Centre of the detection band, relative to the rotating frame.
    #[arg(long, value_name = "MHZ", default_value_t = 0.0, allow_negative_numbers = true)]
    pub center_mhz: f64,
    /// Detection bandwidth (default (kappa_a + kappa_b)/2).
    #[arg(long, value_name = "MHZ")]
    pub bandwidth_mhz: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    /// Half-width of the detuning grid.
    #[arg(long, value_name = "MHZ", conflicts_with = "sweep")]
    pub span_mhz: Option<f64>,
    /// Detuning grid as `probe_offset=START:STOP:N` (MHz).
    #[arg(long, value_name = "SPEC", allow_hyphen_values = true)]
    pub sweep: Option<SweepRange>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Interleaved on/off pairs per run.
    #[arg(long, value_name = "N", default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub pairs: u64,
    /// Chain gain of mode a, V² per vacuum unit.
    #[arg(long, default_value_t = uscsim_core::presets::GAIN_A)]
    pub gain_a: f64,
    #[arg(long, default_value_t = uscsim_core::presets::GAIN_B)]
    pub gain_b: f64,
    /// Added amplifier noise of mode a, in vacuum units.
    #[arg(long, default_value_t = 0.5)]
    pub noise_a: f64,
    #[arg(long, default_value_t = 0.7)]
    pub noise_b: f64,
    /// Histogram bins per axis.
    #[arg(long, default_value_t = uscsim_core::measurement::DEFAULT_BINS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub bins: u64,
    /// Detection bandwidth (default (kappa_a + kappa_b)/2).
    #[arg(long, value_name = "MHZ")]
    pub bandwidth_mhz: Option<f64>,
    /// Skip writing the raw record file.
    #[arg(long)]
    pub no_records: bool,
}
