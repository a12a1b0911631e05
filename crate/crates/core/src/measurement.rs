//! Synthetic heterodyne acquisition: interleaved pump-on/pump-off quadrature
//! records, histogram subtraction, covariance estimation and gain calibration.
//!
//! A detection chain scales each mode's quadratures by `√G` and adds
//! independent Gaussian noise of variance `added_noise` (in vacuum units)
//! before amplification, so pump-off records have variance `G·(1/4 + added)`.

use alloc::vec::Vec;

// Shadowed by inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::gaussian::{symplectic_eigenvalues, CovarianceMatrix, Mode, PHYSICALITY_TOLERANCE, VACUUM_VARIANCE};
use crate::linalg::{self, RMat};

pub const DEFAULT_BINS: usize = 101;
/// Histogram half-span in pooled standard deviations.
pub const HISTOGRAM_SPAN_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionChain {
    pub gain_a: f64,
    pub gain_b: f64,
    pub added_noise_a: f64,
    pub added_noise_b: f64,
    pub seed: u64,
}

impl DetectionChain {
    pub fn new(gain_a: f64, gain_b: f64, added_noise_a: f64, added_noise_b: f64, seed: u64) -> Result<Self> {
        if !(gain_a > 0.0 && gain_b > 0.0 && gain_a.is_finite() && gain_b.is_finite()) {
            return Err(domain!("gains must be positive and finite, got {gain_a:e}, {gain_b:e}"));
        }
        if !(added_noise_a >= 0.0 && added_noise_b >= 0.0 && added_noise_a.is_finite() && added_noise_b.is_finite()) {
            return Err(domain!("added noise must be finite and non-negative"));
        }
        Ok(Self { gain_a, gain_b, added_noise_a, added_noise_b, seed })
    }

    /// Unit gain, no added noise.
    pub fn ideal(seed: u64) -> Self {
        Self { gain_a: 1.0, gain_b: 1.0, added_noise_a: 0.0, added_noise_b: 0.0, seed }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn gain(&self, mode: Mode) -> f64 {
        match mode {
            Mode::A => self.gain_a,
            Mode::B => self.gain_b,
        }
    }

    fn scale(&self) -> [f64; 4] {
        let (a, b) = (self.gain_a.sqrt(), self.gain_b.sqrt());
        [a, a, b, b]
    }

    fn noise(&self) -> [f64; 4] {
        [self.added_noise_a, self.added_noise_a, self.added_noise_b, self.added_noise_b]
    }

    /// Covariance of the recorded samples (V²) for a model state.
    pub fn recorded_covariance(&self, v: &CovarianceMatrix) -> RMat<4> {
        let (s, n) = (self.scale(), self.noise());
        core::array::from_fn(|i| {
            core::array::from_fn(|j| s[i] * s[j] * (v.get(i, j) + if i == j { n[i] } else { 0.0 }))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PumpState {
    On,
    Off,
}

impl PumpState {
    /// Sample `k` of an interleaved record is pump-on iff `k` is even.
    pub fn of_index(k: usize) -> Self {
        if k % 2 == 0 {
            PumpState::On
        } else {
            PumpState::Off
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    Xa,
    Pa,
    Xb,
    Pb,
}

impl Quadrature {
    pub const ALL: [Quadrature; 4] = [Quadrature::Xa, Quadrature::Pa, Quadrature::Xb, Quadrature::Pb];

    pub fn index(self) -> usize {
        match self {
            Quadrature::Xa => 0,
            Quadrature::Pa => 1,
            Quadrature::Xb => 2,
            Quadrature::Pb => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Quadrature::Xa => "X_a",
            Quadrature::Pa => "P_a",
            Quadrature::Xb => "X_b",
            Quadrature::Pb => "P_b",
        }
    }
}

/// Interleaved records in volts, `(X_a, P_a, X_b, P_b)` per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRecordSet {
    samples: Vec<[f64; 4]>,
    pump: Vec<PumpState>,
    chain: DetectionChain,
}

impl QuadratureRecordSet {
    /// Rebuild a record set, checking that on/off counts differ by at most one.
    pub fn from_parts(samples: Vec<[f64; 4]>, pump: Vec<PumpState>, chain: DetectionChain) -> Result<Self> {
        if samples.len() != pump.len() {
            return Err(domain!("{} samples but {} pump tags", samples.len(), pump.len()));
        }
        let on = pump.iter().filter(|p| **p == PumpState::On).count();
        let off = pump.len() - on;
        if on.abs_diff(off) > 1 {
            return Err(domain!("pump-on and pump-off counts differ by more than one ({on} vs {off})"));
        }
        Ok(Self { samples, pump, chain })
    }

    pub fn samples(&self) -> &[[f64; 4]] {
        &self.samples
    }

    pub fn pump_states(&self) -> &[PumpState] {
        &self.pump
    }

    pub fn chain(&self) -> &DetectionChain {
        &self.chain
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn count_of(&self, state: PumpState) -> usize {
        self.pump.iter().filter(|p| **p == state).count()
    }

    pub fn iter_state(&self, state: PumpState) -> impl Iterator<Item = &[f64; 4]> + '_ {
        self.samples.iter().zip(&self.pump).filter(move |(_, p)| **p == state).map(|(s, _)| s)
    }
}

/// Draw `n` interleaved samples: pump-on from the chain applied to `v_model`,
/// pump-off from the chain applied to vacuum. Deterministic in `chain.seed`.
pub fn sample_records(v_model: &CovarianceMatrix, chain: &DetectionChain, n: usize) -> Result<QuadratureRecordSet> {
    if n < 2 {
        return Err(domain!("need at least 2 samples, got {n}"));
    }
    let (nu, _) = symplectic_eigenvalues(v_model)?;
    if nu < VACUUM_VARIANCE - PHYSICALITY_TOLERANCE {
        return Err(domain!("model covariance is unphysical (smallest symplectic eigenvalue {nu:e})"));
    }
    let factor = |v: &CovarianceMatrix| {
        linalg::cholesky(&chain.recorded_covariance(v)).ok_or_else(|| domain!("recorded covariance is not positive definite"))
    };
    let l_on = factor(v_model)?;
    let l_off = factor(&CovarianceMatrix::vacuum())?;
    let mut rng = ChaCha20Rng::seed_from_u64(chain.seed);
    let mut samples = Vec::with_capacity(n);
    let mut pump = Vec::with_capacity(n);
    for k in 0..n {
        let state = PumpState::of_index(k);
        let l = if state == PumpState::On { &l_on } else { &l_off };
        let z: [f64; 4] = core::array::from_fn(|_| rng.sample(StandardNormal));
        let x = core::array::from_fn(|i| (0..=i).map(|j| l[i][j] * z[j]).sum());
        samples.push(x);
        pump.push(state);
    }
    Ok(QuadratureRecordSet { samples, pump, chain: *chain })
}

/// Signed difference of pump-on and pump-off 2-D histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramGrid {
    pub axes: (Quadrature, Quadrature),
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// `counts[i][j]` for x bin `i`, y bin `j`.
    pub counts: Vec<Vec<i64>>,
}

impl HistogramGrid {
    pub fn total(&self) -> i64 {
        self.counts.iter().flatten().sum()
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn x_center(&self, i: usize) -> f64 {
        0.5 * (self.x_edges[i] + self.x_edges[i + 1])
    }

    pub fn y_center(&self, j: usize) -> f64 {
        0.5 * (self.y_edges[j] + self.y_edges[j + 1])
    }

    /// Second moments `[[Σc x², Σc xy], [Σc xy, Σc y²]] / norm` over bin centres.
    /// With `norm` the pump-on count this estimates `Cov_on − Cov_off`.
    pub fn difference_moments(&self, norm: f64) -> [[f64; 2]; 2] {
        let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
        for (i, row) in self.counts.iter().enumerate() {
            let x = self.x_center(i);
            for (j, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let y = self.y_center(j);
                let c = c as f64;
                xx += c * x * x;
                xy += c * x * y;
                yy += c * y * y;
            }
        }
        [[xx / norm, xy / norm], [xy / norm, yy / norm]]
    }
}

/// Histogram the pump-on and pump-off samples on identical uniform bins
/// spanning ±5 pooled standard deviations about the pooled mean, and
/// subtract. Out-of-range samples land in the edge bins.
pub fn histogram_difference(records: &QuadratureRecordSet, axes: (Quadrature, Quadrature), bins: usize) -> Result<HistogramGrid> {
    if records.count() == 0 {
        return Err(domain!("record set is empty"));
    }
    if records.count_of(PumpState::On) == 0 || records.count_of(PumpState::Off) == 0 {
        return Err(domain!("record set must contain both pump states"));
    }
    if bins == 0 {
        return Err(domain!("need at least one bin"));
    }
    let (ix, iy) = (axes.0.index(), axes.1.index());
    let edges = |k: usize| -> Vec<f64> {
        let n = records.count() as f64;
        let mean = records.samples.iter().map(|s| s[k]).sum::<f64>() / n;
        let var = records.samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let half = HISTOGRAM_SPAN_SIGMAS * var.sqrt().max(f64::MIN_POSITIVE);
        crate::spectra::linspace(mean - half, mean + half, bins + 1)
    };
    let (x_edges, y_edges) = (edges(ix), edges(iy));
    let locate = |e: &[f64], v: f64| -> usize {
        let (lo, hi) = (e[0], e[bins]);
        let t = ((v - lo) / (hi - lo) * bins as f64).floor();
        if t.is_nan() || t < 0.0 {
            0
        } else {
            (t as usize).min(bins - 1)
        }
    };
    let mut counts = alloc::vec![alloc::vec![0i64; bins]; bins];
    for (s, p) in records.samples.iter().zip(&records.pump) {
        let (i, j) = (locate(&x_edges, s[ix]), locate(&y_edges, s[iy]));
        counts[i][j] += if *p == PumpState::On { 1 } else { -1 };
    }
    Ok(HistogramGrid { axes, x_edges, y_edges, counts })
}

/// Unbiased sample covariance (divisor `n − 1`) of one pump state, in V².
pub fn estimate_covariance(records: &QuadratureRecordSet, state: PumpState) -> Result<CovarianceMatrix> {
    let n = records.count_of(state);
    if n < 2 {
        return Err(domain!("need at least 2 samples of pump state {state:?}, have {n}"));
    }
    // Shift by the first sample so constant records give exactly zero.
    let shift = *records.iter_state(state).next().expect("n >= 2");
    let mut mean = [0.0; 4];
    for s in records.iter_state(state) {
        for k in 0..4 {
            mean[k] += s[k] - shift[k];
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut acc = [[0.0; 4]; 4];
    for s in records.iter_state(state) {
        let d: [f64; 4] = core::array::from_fn(|k| s[k] - shift[k] - mean[k]);
        for i in 0..4 {
            for j in i..4 {
                acc[i][j] += d[i] * d[j];
            }
        }
    }
    let mut v = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let c = acc[i][j] / (n - 1) as f64;
            v[i][j] = c;
            v[j][i] = c;
        }
    }
    CovarianceMatrix::new(v)
}

/// Per-mode least-squares gain `G` minimizing
/// `‖(on − off)_block − G·(reference − vacuum)_block‖_F`.
pub fn calibrate_gain(reference: &CovarianceMatrix, measured_on: &CovarianceMatrix, measured_off: &CovarianceMatrix) -> Result<(f64, f64)> {
    let fit = |mode: Mode| -> Result<f64> {
        let (r, on, off) = (reference.block(mode), measured_on.block(mode), measured_off.block(mode));
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                let dref = r[i][j] - if i == j { VACUUM_VARIANCE } else { 0.0 };
                num += (on[i][j] - off[i][j]) * dref;
                den += dref * dref;
            }
        }
        if den <= 1e-24 {
            return Err(domain!("reference covariance has no contrast against vacuum in mode {mode:?}"));
        }
        Ok(num / den)
    };
    Ok((fit(Mode::A)?, fit(Mode::B)?))
}

/// Result of the gain-referenced squeezing formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SqueezingEstimate {
    Valid { db: f64, argument: f64 },
    /// The off-state variance exceeded the on-state one by more than the
    /// amplified vacuum: the log argument is not positive.
    OverSubtracted { argument: f64 },
}

impl SqueezingEstimate {
    pub fn db(&self) -> Option<f64> {
        match self {
            SqueezingEstimate::Valid { db, .. } => Some(*db),
            SqueezingEstimate::OverSubtracted { .. } => None,
        }
    }

    pub fn argument(&self) -> f64 {
        match self {
            SqueezingEstimate::Valid { argument, .. } | SqueezingEstimate::OverSubtracted { argument } => *argument,
        }
    }
}

/// `r = 10·log₁₀((σ_on − σ_off)/(G·σ_vac) + 1)`.
pub fn estimate_squeezing(sigma_on: f64, sigma_off: f64, gain: f64, sigma_vac: f64) -> Result<SqueezingEstimate> {
    if !(gain > 0.0 && sigma_vac > 0.0) {
        return Err(domain!("gain and vacuum variance must be positive, got {gain:e}, {sigma_vac:e}"));
    }
    if !(sigma_on >= 0.0 && sigma_off >= 0.0) {
        return Err(domain!("variances must be non-negative, got {sigma_on:e}, {sigma_off:e}"));
    }
    let argument = (sigma_on - sigma_off) / (gain * sigma_vac) + 1.0;
    if argument > 0.0 {
        Ok(SqueezingEstimate::Valid { db: 10.0 * argument.log10(), argument })
    } else {
        Ok(SqueezingEstimate::OverSubtracted { argument })
    }
}

/// Squeezing of one mode from measured covariances: `σ_on` is the smaller
/// eigenvalue of the pump-on block, `σ_off` the mean variance of the
/// (isotropic) pump-off block.
pub fn mode_squeezing(measured_on: &CovarianceMatrix, measured_off: &CovarianceMatrix, gain: f64, mode: Mode) -> Result<SqueezingEstimate> {
    let on = measured_on.block(mode);
    let off = measured_off.block(mode);
    let (sigma_on, _) = linalg::sym2_eigenvalues(on[0][0], on[0][1], on[1][1]);
    let sigma_off = 0.5 * (off[0][0] + off[1][1]);
    estimate_squeezing(sigma_on.max(0.0), sigma_off, gain, VACUUM_VARIANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec;

    fn tmss(r: f64) -> CovarianceMatrix {
        let (c, s) = ((2.0 * r).cosh() / 4.0, (2.0 * r).sinh() / 4.0);
        CovarianceMatrix::new([[c, 0.0, s, 0.0], [0.0, c, 0.0, -s], [s, 0.0, c, 0.0], [0.0, -s, 0.0, c]]).unwrap()
    }

    #[test]
    fn chain_validation() {
        assert!(DetectionChain::new(0.0, 1.0, 0.0, 0.0, 1).is_err());
        assert!(DetectionChain::new(1.0, 1.0, -0.1, 0.0, 1).is_err());
        assert!(DetectionChain::new(1.0, 2.0, 0.5, 0.0, 1).is_ok());
    }

    #[test]
    fn interleaving_and_determinism() {
        let chain = DetectionChain::new(2.0, 3.0, 0.1, 0.2, 42).unwrap();
        let a = sample_records(&tmss(0.5), &chain, 1001).unwrap();
        let b = sample_records(&tmss(0.5), &chain, 1001).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count_of(PumpState::On), 501);
        assert_eq!(a.count_of(PumpState::Off), 500);
        assert!(a.pump_states().iter().enumerate().all(|(k, p)| *p == PumpState::of_index(k)));
        let c = sample_records(&tmss(0.5), &chain.with_seed(43), 1001).unwrap();
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn sampling_rejects_unphysical_state() {
        let bad = CovarianceMatrix::new([[0.1, 0.0, 0.0, 0.0], [0.0, 0.1, 0.0, 0.0], [0.0, 0.0, 0.25, 0.0], [0.0, 0.0, 0.0, 0.25]]).unwrap();
        assert!(sample_records(&bad, &DetectionChain::ideal(0), 10).is_err());
        assert!(sample_records(&CovarianceMatrix::vacuum(), &DetectionChain::ideal(0), 1).is_err());
    }

    #[test]
    fn from_parts_checks_interleaving() {
        let chain = DetectionChain::ideal(0);
        let s = vec![[0.0; 4]; 3];
        assert!(QuadratureRecordSet::from_parts(s.clone(), vec![PumpState::On; 3], chain).is_err());
        assert!(QuadratureRecordSet::from_parts(s, vec![PumpState::On, PumpState::Off, PumpState::On], chain).is_ok());
    }

    #[test]
    fn constant_samples_have_zero_covariance() {
        let chain = DetectionChain::ideal(0);
        let samples = vec![[0.1, -0.3, 7.0, 1e-3]; 10];
        let pump = (0..10).map(PumpState::of_index).collect();
        let r = QuadratureRecordSet::from_parts(samples, pump, chain).unwrap();
        let v = estimate_covariance(&r, PumpState::On).unwrap();
        assert!(v.entries().iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn vacuum_records_match_chain_definition() {
        let chain = DetectionChain::new(4.2e-8, 9.2e-8, 0.3, 0.7, 5).unwrap();
        let n = 200_000;
        let r = sample_records(&CovarianceMatrix::vacuum(), &chain, n).unwrap();
        let off = estimate_covariance(&r, PumpState::Off).unwrap();
        let m = (n / 2) as f64;
        for (i, want) in [4.2e-8 * 0.55, 4.2e-8 * 0.55, 9.2e-8 * 0.95, 9.2e-8 * 0.95].iter().enumerate() {
            // Standard error of a Gaussian variance estimate: σ²·√(2/(m−1)).
            let se = want * (2.0 / (m - 1.0)).sqrt();
            assert!((off.get(i, i) - want).abs() < 3.0 * se, "{i}: {} vs {want}", off.get(i, i));
        }
    }

    #[test]
    fn histogram_total_is_signed_count() {
        let r = sample_records(&tmss(0.3), &DetectionChain::ideal(9), 2001).unwrap();
        for bins in [1, 7, DEFAULT_BINS] {
            let h = histogram_difference(&r, (Quadrature::Xa, Quadrature::Xb), bins).unwrap();
            assert_eq!(h.total(), 1);
            assert_eq!(h.x_edges.len(), bins + 1);
        }
    }

    #[test]
    fn histogram_needs_both_states() {
        let chain = DetectionChain::ideal(0);
        let r = QuadratureRecordSet::from_parts(vec![[0.0; 4]], vec![PumpState::On], chain).unwrap();
        assert!(histogram_difference(&r, (Quadrature::Xa, Quadrature::Pa), 5).is_err());
        let empty = QuadratureRecordSet::from_parts(vec![], vec![], chain).unwrap();
        assert!(histogram_difference(&empty, (Quadrature::Xa, Quadrature::Pa), 5).is_err());
    }

    #[test]
    fn calibration_identity_and_contrast() {
        let epr = tmss(1.0);
        let (ga, gb) = calibrate_gain(&epr, &epr, &CovarianceMatrix::vacuum()).unwrap();
        assert_eq!((ga, gb), (1.0, 1.0));
        let vac = CovarianceMatrix::vacuum();
        assert!(calibrate_gain(&vac, &epr, &vac).is_err());
    }

    #[test]
    fn squeezing_formula() {
        assert_eq!(estimate_squeezing(0.3, 0.3, 2.0, 0.25).unwrap().db(), Some(0.0));
        let g = 4.2e-8;
        let r = estimate_squeezing(g, g + g * 0.25 / 2.0, g, 0.25).unwrap();
        assert!((r.db().unwrap() - 10.0 * 0.5f64.log10()).abs() < 1e-9);
        let over = estimate_squeezing(0.0, 1.0, 1.0, 0.25).unwrap();
        assert!(matches!(over, SqueezingEstimate::OverSubtracted { argument } if argument < 0.0));
        assert!(estimate_squeezing(0.1, 0.1, 0.0, 0.25).is_err());
    }
}
