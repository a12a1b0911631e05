//! Input-output scattering, emission spectra and peak finding.
//!
//! Fourier convention: `f[ω] = ∫ e^{iωt} f(t) dt`. With it the boundary
//! condition `v_out = K v − v_in` and the Langevin equation give
//! `v_out[ω] = S(ω) v_in[ω]` with `S(ω) = K (−iω − A)⁻¹ K − I`. Rows 3 and 4
//! of `S(ω)` produce `c_out†[−ω]` and `d_out†[−ω]`.

use alloc::vec::Vec;

use crate::error::{domain, numerical, Error, Result};
use crate::linalg::{self, CMat, C64, ONE};
use crate::model::{build_drift, stability, DriftMatrix, ModePair, PumpConfig, Stability, StabilityReport};

/// Default number of points of [`default_grid`].
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Default peak threshold as a fraction of the global maximum.
pub const DEFAULT_PROMINENCE: f64 = 0.05;

/// Output port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    A,
    B,
}

/// `S(ω)` mapping `(c_in, d_in, c_in†, d_in†)` to the output operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMatrix {
    omega: f64,
    entries: CMat<4>,
}

impl ScatteringMatrix {
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn entries(&self) -> &CMat<4> {
        &self.entries
    }

    /// Largest deviation from the Bogoliubov identity
    /// `Σ_{j=1,2} |S_rj|² − Σ_{j=3,4} |S_rj|² = ±1`, relative to the row's
    /// total weight `Σ_j |S_rj|²`.
    pub fn bogoliubov_residual(&self) -> f64 {
        self.entries
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let direct = row[0].norm_sqr() + row[1].norm_sqr();
                let anomalous = row[2].norm_sqr() + row[3].norm_sqr();
                let expected = if r < 2 { 1.0 } else { -1.0 };
                (direct - anomalous - expected).abs() / (direct + anomalous).max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// A drift matrix prepared for repeated evaluation of `S(ω)`.
#[derive(Debug, Clone, Copy)]
pub struct Scatterer {
    drift: DriftMatrix,
    sqrt_kappa: [f64; 4],
    report: StabilityReport,
}

impl Scatterer {
    /// Refuses unstable systems; critical ones are accepted and flagged.
    pub fn new(drift: &DriftMatrix, modes: &ModePair) -> Result<Self> {
        let report = stability(drift)?;
        if report.classification == Stability::Unstable {
            return Err(Error::Unstable { margin: report.margin });
        }
        Ok(Self { drift: *drift, sqrt_kappa: modes.sqrt_kappas(), report })
    }

    pub fn from_config(modes: &ModePair, pumps: &PumpConfig) -> Result<Self> {
        Self::new(&build_drift(modes, pumps), modes)
    }

    pub fn stability(&self) -> &StabilityReport {
        &self.report
    }

    pub fn is_critical(&self) -> bool {
        self.report.classification == Stability::Critical
    }

    /// `(−iω − A)⁻¹`.
    pub fn resolvent(&self, omega: f64) -> Result<CMat<4>> {
        let mut m = *self.drift.entries();
        for (i, row) in m.iter_mut().enumerate() {
            for z in row.iter_mut() {
                *z = -*z;
            }
            row[i] -= C64::new(0.0, omega);
        }
        linalg::inverse(&m).ok_or_else(|| numerical!("singular resolvent at omega = {omega:.6e} rad/s"))
    }

    pub fn at(&self, omega: f64) -> Result<ScatteringMatrix> {
        let r = self.resolvent(omega)?;
        let k = self.sqrt_kappa;
        let mut entries = r;
        for i in 0..4 {
            for j in 0..4 {
                entries[i][j] *= k[i] * k[j];
            }
            entries[i][i] -= ONE;
        }
        Ok(ScatteringMatrix { omega, entries })
    }
}

/// `S(ω)` for a single probe offset.
pub fn scattering_matrix(drift: &DriftMatrix, modes: &ModePair, omega: f64) -> Result<ScatteringMatrix> {
    Scatterer::new(drift, modes)?.at(omega)
}

/// Normal-ordered emitted photon flux density on one port.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    port: Port,
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl SpectrumTrace {
    pub fn new(port: Port, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(domain!("grid has {} points but {} values were given", grid.len(), values.len()));
        }
        check_grid(&grid)?;
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(domain!("spectral density must be non-negative, found {v:e}"));
        }
        Ok(Self { port, grid, values })
    }

    pub fn port(&self) -> Port {
        self.port
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Trapezoid integral over the grid, `∫ dω/2π`.
    pub fn integrated_flux(&self) -> f64 {
        let s: f64 = self
            .grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
            .sum();
        s / (2.0 * core::f64::consts::PI)
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(domain!("frequency grid must be finite"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain!("frequency grid must be strictly increasing"));
    }
    Ok(())
}

/// Spectra at both ports over a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionSpectrum {
    pub a: SpectrumTrace,
    pub b: SpectrumTrace,
    /// The system sits on the stability boundary; linewidths may vanish.
    pub critical: bool,
}

impl EmissionSpectrum {
    pub fn port(&self, port: Port) -> &SpectrumTrace {
        match port {
            Port::A => &self.a,
            Port::B => &self.b,
        }
    }
}

/// `⟨c_out†[ω] c_out[ω]⟩` for vacuum inputs: `|S_13(ω)|² + |S_14(ω)|²`, and
/// the analogue with row 2 for port B.
pub fn emission_psd(modes: &ModePair, pumps: &PumpConfig, grid: &[f64]) -> Result<EmissionSpectrum> {
    check_grid(grid)?;
    let scatterer = Scatterer::from_config(modes, pumps)?;
    let mut a = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    for &w in grid {
        let (pa, pb) = emission_at(&scatterer, w)?;
        a.push(pa);
        b.push(pb);
    }
    Ok(EmissionSpectrum {
        a: SpectrumTrace::new(Port::A, grid.to_vec(), a)?,
        b: SpectrumTrace::new(Port::B, grid.to_vec(), b)?,
        critical: scatterer.is_critical(),
    })
}

/// Emission densities `(port A, port B)` at one offset.
pub fn emission_at(scatterer: &Scatterer, omega: f64) -> Result<(f64, f64)> {
    let s = scatterer.at(omega)?;
    let e = s.entries();
    let port = |r: usize| e[r][2].norm_sqr() + e[r][3].norm_sqr();
    let (pa, pb) = (port(0), port(1));
    if !(pa.is_finite() && pb.is_finite()) {
        return Err(numerical!("emission diverges at omega = {omega:.6e} rad/s"));
    }
    Ok((pa, pb))
}

/// `points` evenly spaced offsets over `±4·ω_eff`; the span falls back to
/// `±4·κ_max` when there is no detuning.
pub fn default_grid(modes: &ModePair, pumps: &PumpConfig, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(domain!("a grid needs at least 2 points, got {points}"));
    }
    let half = if pumps.omega_eff() > 0.0 { 4.0 * pumps.omega_eff() } else { 4.0 * modes.kappa_max() };
    Ok(linspace(-half, half, points))
}

pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let last = (points - 1) as f64;
            (0..points)
                .map(|i| {
                    let t = i as f64 / last;
                    start * (1.0 - t) + stop * t
                })
                .collect()
        }
    }
}

/// A local maximum of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub omega: f64,
    pub height: f64,
}

/// Interior local maxima (strictly above the left neighbour, at least the
/// right one) whose height exceeds `min_prominence` times the global
/// maximum. Positions and heights come from the parabola through the three
/// samples around each maximum.
pub fn find_peaks(trace: &SpectrumTrace, min_prominence: f64) -> Result<Vec<Peak>> {
    if trace.is_empty() {
        return Err(domain!("cannot search an empty trace for peaks"));
    }
    if !(0.0..=1.0).contains(&min_prominence) {
        return Err(domain!("prominence must lie in [0, 1], got {min_prominence}"));
    }
    let (x, y) = (trace.grid(), trace.values());
    let top = trace.max_value();
    let mut peaks = Vec::new();
    if top <= 0.0 {
        return Ok(peaks);
    }
    let threshold = min_prominence * top;
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > threshold {
            peaks.push(refine(x[i - 1], x[i], x[i + 1], y[i - 1], y[i], y[i + 1]));
        }
    }
    Ok(peaks)
}

fn refine(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> Peak {
    // Parabola through three points in the local coordinate t = x − x1.
    let (h0, h2) = (x0 - x1, x2 - x1);
    let d0 = (y0 - y1) / h0;
    let d2 = (y2 - y1) / h2;
    let curvature = (d2 - d0) / (h2 - h0);
    if !(curvature < 0.0) {
        return Peak { omega: x1, height: y1 };
    }
    let slope = d0 - curvature * h0;
    let t = (-slope / (2.0 * curvature)).clamp(h0, h2);
    Peak { omega: x1 + t, height: y1 + slope * t + curvature * t * t }
}
