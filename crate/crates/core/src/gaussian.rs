//! Gaussian-state covariances of the filtered outputs and the intracavity
//! fields, and the squeezing and entanglement measures derived from them.
//!
//! Quadratures are `X = (a + a†)/2`, `P = (a − a†)/2i`, ordered
//! `(X_a, P_a, X_b, P_b)`; the vacuum variance is 1/4.

use alloc::vec::Vec;

// Shadowed by inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, numerical, Error, Result};
use crate::linalg::{self, CMat, RMat, C64, ZERO};
use crate::model::{build_drift, quadrature_transform, stability, DriftMatrix, ModePair, PumpConfig, Stability};
use crate::quadrature::{integrate, integrate_real_line, QuadratureOptions};
use crate::spectra::{check_grid, Scatterer};

pub const VACUUM_VARIANCE: f64 = 0.25;
/// Slack allowed below 1/4 on symplectic eigenvalues.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-10;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

impl Mode {
    fn offset(self) -> usize {
        match self {
            Mode::A => 0,
            Mode::B => 2,
        }
    }
}

/// Real symmetric 4×4 matrix of quadrature second moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(RMat<4>);

impl CovarianceMatrix {
    /// Accepts matrices symmetric to 1e-12 and stores the symmetrized part.
    pub fn new(entries: RMat<4>) -> Result<Self> {
        if entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(domain!("covariance entries must be finite"));
        }
        let mut v = entries;
        for i in 0..4 {
            for j in i + 1..4 {
                let gap = (entries[i][j] - entries[j][i]).abs();
                if gap > SYMMETRY_TOLERANCE {
                    return Err(domain!("covariance is not symmetric: |V{i}{j} − V{j}{i}| = {gap:e}"));
                }
                let m = 0.5 * (entries[i][j] + entries[j][i]);
                v[i][j] = m;
                v[j][i] = m;
            }
        }
        Ok(Self(v))
    }

    pub fn vacuum() -> Self {
        let mut v = [[0.0; 4]; 4];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = VACUUM_VARIANCE;
        }
        Self(v)
    }

    pub fn entries(&self) -> &RMat<4> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    /// Diagonal 2×2 block of one mode.
    pub fn block(&self, mode: Mode) -> [[f64; 2]; 2] {
        let o = mode.offset();
        [[self.0[o][o], self.0[o][o + 1]], [self.0[o + 1][o], self.0[o + 1][o + 1]]]
    }

    pub fn determinant(&self) -> f64 {
        let c: CMat<4> = core::array::from_fn(|i| core::array::from_fn(|j| C64::new(self.0[i][j], 0.0)));
        // Product of eigenvalues of a real symmetric matrix.
        match linalg::eigenvalues(&c) {
            Ok(e) => e.iter().map(|z| z.re).product(),
            Err(_) => f64::NAN,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Both symplectic eigenvalues at least `1/4 − tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        matches!(symplectic_eigenvalues(self), Ok((nu, _)) if nu >= VACUUM_VARIANCE - tol)
    }

    /// Partial transpose: `P_b → −P_b`.
    pub fn partial_transpose(&self) -> Self {
        let mut v = self.0;
        for k in 0..4 {
            if k != 3 {
                v[3][k] = -v[3][k];
                v[k][3] = -v[k][3];
            }
        }
        Self(v)
    }

    pub(crate) fn from_upper(u: &[f64; 10]) -> Self {
        let mut v = [[0.0; 4]; 4];
        let mut k = 0;
        for i in 0..4 {
            for j in i..4 {
                v[i][j] = u[k];
                v[j][i] = u[k];
                k += 1;
            }
        }
        Self(v)
    }
}

fn upper(v: &RMat<4>) -> [f64; 10] {
    let mut u = [0.0; 10];
    let mut k = 0;
    for i in 0..4 {
        for j in i..4 {
            u[k] = v[i][j];
            k += 1;
        }
    }
    u
}

/// `Re ½ M(ω) J M(−ω)ᵀ` with `J` the vacuum input correlations
/// `⟨{v_in[ω], v_in[ω']ᵀ}⟩/2` in the `(c, d, c†, d†)` basis.
fn symmetrized(m_plus: &CMat<4>, m_minus: &CMat<4>) -> RMat<4> {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = ZERO;
            for k in 0..4 {
                let kj = (k + 2) % 4;
                s += m_plus[i][k] * m_minus[j][kj];
            }
            out[i][j] = 0.5 * s.re;
        }
    }
    out
}

fn output_map(scatterer: &Scatterer, omega: f64) -> Result<CMat<4>> {
    Ok(linalg::mul(&quadrature_transform(), scatterer.at(omega)?.entries()))
}

fn intracavity_map(scatterer: &Scatterer, k: &[f64; 4], omega: f64) -> Result<CMat<4>> {
    let mut r = scatterer.resolvent(omega)?;
    for row in r.iter_mut() {
        for (z, kj) in row.iter_mut().zip(k) {
            *z *= *kj;
        }
    }
    Ok(linalg::mul(&quadrature_transform(), &r))
}

/// Symmetrized spectral density matrix of the output quadratures at offset
/// `ω`. For vacuum-driven lossless scattering this is `I/4`.
pub fn output_spectral_matrix(scatterer: &Scatterer, omega: f64) -> Result<RMat<4>> {
    Ok(symmetrized(&output_map(scatterer, omega)?, &output_map(scatterer, -omega)?))
}

/// Same for the intracavity quadratures; integrates to the steady-state
/// covariance over `dω/2π`.
pub fn intracavity_spectral_matrix(scatterer: &Scatterer, k: &[f64; 4], omega: f64) -> Result<RMat<4>> {
    Ok(symmetrized(&intracavity_map(scatterer, k, omega)?, &intracavity_map(scatterer, k, -omega)?))
}

fn stable_scatterer(drift: &DriftMatrix, modes: &ModePair) -> Result<Scatterer> {
    let s = Scatterer::new(drift, modes)?;
    if s.stability().classification != Stability::Stable {
        return Err(Error::Unstable { margin: s.stability().margin });
    }
    Ok(s)
}

/// Default filter width: the mean of the two linewidths.
pub fn default_bandwidth(modes: &ModePair) -> f64 {
    0.5 * (modes.kappa_a() + modes.kappa_b())
}

/// Covariance of the outputs after a boxcar filter of width `bandwidth`
/// centred on `center` (rotating-frame offsets).
pub fn output_covariance(modes: &ModePair, pumps: &PumpConfig, center: f64, bandwidth: f64) -> Result<CovarianceMatrix> {
    if !(bandwidth > 0.0 && bandwidth.is_finite() && center.is_finite()) {
        return Err(domain!("bandwidth must be positive and finite, got {bandwidth:e}"));
    }
    let scatterer = stable_scatterer(&build_drift(modes, pumps), modes)?;
    let lo = center - 0.5 * bandwidth;
    let hi = center + 0.5 * bandwidth;
    let total = integrate(|w| output_spectral_matrix(&scatterer, w).map(|m| upper(&m)), lo, hi, QuadratureOptions::default())?;
    let mut u = total;
    for x in u.iter_mut() {
        *x /= bandwidth;
    }
    Ok(CovarianceMatrix::from_upper(&u))
}

/// The zero-bandwidth limit of [`output_covariance`] at offset `omega`:
/// the two-sideband quadrature spectrum.
pub fn narrowband_covariance(scatterer: &Scatterer, omega: f64) -> Result<CovarianceMatrix> {
    Ok(CovarianceMatrix::from_upper(&upper(&output_spectral_matrix(scatterer, omega)?)))
}

/// Steady state of `dV/dt = A_q V + V A_qᵀ + D`, `D = diag(κ_a, κ_a, κ_b, κ_b)/4`,
/// from a direct solve of the 16 linear equations.
pub fn intracavity_covariance(drift: &DriftMatrix, modes: &ModePair) -> Result<CovarianceMatrix> {
    let report = stability(drift)?;
    if report.classification != Stability::Stable {
        return Err(Error::Unstable { margin: report.margin });
    }
    let aq = drift.quadrature();
    let n = 16;
    let mut m = alloc::vec![0.0; n * n];
    for i in 0..4 {
        for j in 0..4 {
            let row = 4 * i + j;
            for k in 0..4 {
                m[row * n + 4 * k + j] += aq[i][k];
                m[row * n + 4 * i + k] += aq[j][k];
            }
        }
    }
    let d = [modes.kappa_a(), modes.kappa_a(), modes.kappa_b(), modes.kappa_b()];
    let mut rhs = alloc::vec![0.0; n];
    for i in 0..4 {
        rhs[5 * i] = -0.25 * d[i];
    }
    let x = linalg::solve_dense(m, rhs, n).map_err(|e| match e {
        Error::Numerical(msg) => numerical!("{msg}; stability margin {:.3e} rad/s", report.margin),
        other => other,
    })?;
    let mut v = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            v[i][j] = 0.5 * (x[4 * i + j] + x[4 * j + i]);
        }
    }
    Ok(CovarianceMatrix(v))
}

/// Intracavity covariance as `∫ dω/2π` of the intracavity spectral matrix;
/// an independent route to [`intracavity_covariance`].
pub fn intracavity_spectral_integral(drift: &DriftMatrix, modes: &ModePair) -> Result<CovarianceMatrix> {
    let scatterer = stable_scatterer(drift, modes)?;
    let k = modes.sqrt_kappas();
    let scale = linalg::max_abs(drift.entries());
    let opts = QuadratureOptions { rel_tol: 1e-11, abs_tol: 1e-15, max_intervals: 20_000 };
    let v = integrate_real_line(|w| intracavity_spectral_matrix(&scatterer, &k, w).map(|m| upper(&m)), scale, opts)?;
    let mut u = v;
    for x in u.iter_mut() {
        *x /= 2.0 * core::f64::consts::PI;
    }
    Ok(CovarianceMatrix::from_upper(&u))
}

/// The two distinct symplectic eigenvalues `(ν_1 ≤ ν_2)`, the moduli of the
/// eigenvalues of `iΩV`.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<(f64, f64)> {
    // With V = L Lᵀ, W = Lᵀ Ω L is antisymmetric and similar to ΩV; iW is
    // Hermitian with eigenvalues ±ν_k, which keeps degenerate spectra accurate.
    let l = linalg::cholesky(&v.0).ok_or_else(|| domain!("covariance matrix is not positive definite"))?;
    let mut w = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut x = 0.0;
            for p in [0, 2] {
                x += l[p][i] * l[p + 1][j] - l[p + 1][i] * l[p][j];
            }
            w[i][j] = C64::new(0.0, x);
        }
    }
    let mut nu = linalg::eigenvalues(&w)?.map(|z| z.re.abs());
    nu.sort_by(f64::total_cmp);
    Ok((0.5 * (nu[0] + nu[1]), 0.5 * (nu[2] + nu[3])))
}

/// Eigenvalues `(σ_min, σ_max)` of one mode's 2×2 block.
pub fn single_mode_extrema(v: &CovarianceMatrix, mode: Mode) -> (f64, f64) {
    let b = v.block(mode);
    linalg::sym2_eigenvalues(b[0][0], b[0][1], b[1][1])
}

/// `10·log₁₀(σ/σ_vac)`.
pub fn squeezing_db(sigma: f64, sigma_vac: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma_vac > 0.0) {
        return Err(domain!("variances must be positive, got σ = {sigma:e}, σ_vac = {sigma_vac:e}"));
    }
    Ok(10.0 * (sigma / sigma_vac).log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveVariances {
    pub x_minus: f64,
    pub x_plus: f64,
    pub p_minus: f64,
    pub p_plus: f64,
}

/// Variances of `X_a ∓ X_b` and `P_a ∓ P_b`.
pub fn collective_variances(v: &CovarianceMatrix) -> CollectiveVariances {
    let m = &v.0;
    let xs = m[0][0] + m[2][2];
    let ps = m[1][1] + m[3][3];
    CollectiveVariances {
        x_minus: xs - 2.0 * m[0][2],
        x_plus: xs + 2.0 * m[0][2],
        p_minus: ps - 2.0 * m[1][3],
        p_plus: ps + 2.0 * m[1][3],
    }
}

/// Logarithmic negativity in bits, `max(0, −log₂(4ν̃_−))`.
pub fn log_negativity(v: &CovarianceMatrix) -> Result<f64> {
    let (nu, _) = symplectic_eigenvalues(v)?;
    if nu < VACUUM_VARIANCE - PHYSICALITY_TOLERANCE {
        return Err(domain!("covariance is unphysical (smallest symplectic eigenvalue {nu:e} < 1/4)"));
    }
    let (nu_t, _) = symplectic_eigenvalues(&v.partial_transpose())?;
    Ok((-(4.0 * nu_t).log2()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingReport {
    pub sigma_min_a: f64,
    pub sigma_max_a: f64,
    pub sigma_min_b: f64,
    pub sigma_max_b: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub collective: CollectiveVariances,
    pub log_negativity: f64,
}

pub fn squeezing_report(v: &CovarianceMatrix) -> Result<SqueezingReport> {
    let (sigma_min_a, sigma_max_a) = single_mode_extrema(v, Mode::A);
    let (sigma_min_b, sigma_max_b) = single_mode_extrema(v, Mode::B);
    Ok(SqueezingReport {
        sigma_min_a,
        sigma_max_a,
        sigma_min_b,
        sigma_max_b,
        r_a: squeezing_db(sigma_min_a, VACUUM_VARIANCE)?,
        r_b: squeezing_db(sigma_min_b, VACUUM_VARIANCE)?,
        collective: collective_variances(v),
        log_negativity: log_negativity(v)?,
    })
}

/// Frequency-resolved single-mode extrema, in dB relative to vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceSpectrum {
    pub grid: Vec<f64>,
    pub sigma_min_db: Vec<f64>,
    pub sigma_max_db: Vec<f64>,
}

pub fn variance_spectrum(modes: &ModePair, pumps: &PumpConfig, grid: &[f64], mode: Mode) -> Result<VarianceSpectrum> {
    check_grid(grid)?;
    let scatterer = stable_scatterer(&build_drift(modes, pumps), modes)?;
    let mut lo = Vec::with_capacity(grid.len());
    let mut hi = Vec::with_capacity(grid.len());
    for &w in grid {
        let (a, b) = variance_extrema_db(&scatterer, w, mode)?;
        lo.push(a);
        hi.push(b);
    }
    Ok(VarianceSpectrum { grid: grid.to_vec(), sigma_min_db: lo, sigma_max_db: hi })
}

/// One point of [`variance_spectrum`].
pub fn variance_extrema_db(scatterer: &Scatterer, omega: f64, mode: Mode) -> Result<(f64, f64)> {
    let v = narrowband_covariance(scatterer, omega)?;
    let (a, b) = single_mode_extrema(&v, mode);
    Ok((squeezing_db(a, VACUUM_VARIANCE)?, squeezing_db(b, VACUUM_VARIANCE)?))
}

/// Stable scatterer for a configuration, or the instability margin.
pub fn prepare(modes: &ModePair, pumps: &PumpConfig) -> Result<Scatterer> {
    stable_scatterer(&build_drift(modes, pumps), modes)
}
