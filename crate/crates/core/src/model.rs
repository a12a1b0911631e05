//! Physical parameters, the rotating-frame drift matrix and its stability.
//!
//! Operator ordering throughout is `(c, d, c†, d†)`, where `c` and `d` are the
//! two resonator modes viewed in frames rotating at `omega_a + omega_eff` and
//! `omega_b + omega_eff`. The linearized Langevin equations read
//!
//! ```text
//! dc/dt = (iω_eff − κ_a/2) c − i g_R e^{iφ_R} d − i g_B e^{iφ_B} d† + √κ_a c_in
//! dd/dt = (iω_eff − κ_b/2) d − i g_R e^{−iφ_R} c − i g_B e^{iφ_B} c† + √κ_b d_in
//! ```
//!
//! with the conjugate rows following by Hermitian conjugation.

// Shadowed by inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Result};
use crate::linalg::{self, CMat, RMat, C64, I, ZERO};
use crate::units::{HBAR, K_B};

/// Minimum ratio between a mode frequency and its decay rate.
pub const MIN_QUALITY_FACTOR: f64 = 50.0;

/// Relative tolerance (in units of the largest κ) inside which a stability
/// margin is reported as critical rather than stable or unstable.
pub const CRITICAL_MARGIN_TOLERANCE: f64 = 1e-6;

/// Mode frequencies and output coupling rates of the two resonators (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePair {
    omega_a: f64,
    omega_b: f64,
    kappa_a: f64,
    kappa_b: f64,
}

impl ModePair {
    pub fn new(omega_a: f64, omega_b: f64, kappa_a: f64, kappa_b: f64) -> Result<Self> {
        let all_finite = [omega_a, omega_b, kappa_a, kappa_b].iter().all(|x| x.is_finite());
        if !all_finite {
            return Err(domain!("mode parameters must be finite"));
        }
        if !(omega_a > omega_b && omega_b > 0.0) {
            return Err(domain!("need omega_a > omega_b > 0, got {omega_a:e}, {omega_b:e}"));
        }
        if !(kappa_a > 0.0 && kappa_b > 0.0) {
            return Err(domain!("decay rates must be positive, got {kappa_a:e}, {kappa_b:e}"));
        }
        if omega_a < MIN_QUALITY_FACTOR * kappa_a || omega_b < MIN_QUALITY_FACTOR * kappa_b {
            return Err(domain!(
                "decay rates must be at least {MIN_QUALITY_FACTOR}× below the mode frequencies"
            ));
        }
        Ok(Self { omega_a, omega_b, kappa_a, kappa_b })
    }

    pub fn omega_a(&self) -> f64 {
        self.omega_a
    }

    pub fn omega_b(&self) -> f64 {
        self.omega_b
    }

    pub fn kappa_a(&self) -> f64 {
        self.kappa_a
    }

    pub fn kappa_b(&self) -> f64 {
        self.kappa_b
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_a.max(self.kappa_b)
    }

    /// Same mode frequencies with new decay rates.
    pub fn with_kappas(&self, kappa_a: f64, kappa_b: f64) -> Result<Self> {
        Self::new(self.omega_a, self.omega_b, kappa_a, kappa_b)
    }

    /// `diag(√κ_a, √κ_b, √κ_a, √κ_b)` as the diagonal of the coupling matrix.
    pub(crate) fn sqrt_kappas(&self) -> [f64; 4] {
        let (sa, sb) = (self.kappa_a.sqrt(), self.kappa_b.sqrt());
        [sa, sb, sa, sb]
    }
}

/// Pump couplings, phases and effective detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpConfig {
    g_blue: f64,
    g_red: f64,
    phi_blue: f64,
    phi_red: f64,
    omega_eff: f64,
    calibration: Option<AmplitudeCalibration>,
}

/// Raw pump amplitudes and the mixing rate that converts them to couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeCalibration {
    pub chi: f64,
    pub amp_blue: f64,
    pub amp_red: f64,
}

impl PumpConfig {
    /// Couplings given directly as rates; phases default to zero.
    pub fn new(g_blue: f64, g_red: f64, omega_eff: f64) -> Result<Self> {
        if !(g_blue.is_finite() && g_red.is_finite() && omega_eff.is_finite()) {
            return Err(domain!("pump parameters must be finite"));
        }
        if g_blue < 0.0 || g_red < 0.0 {
            return Err(domain!("couplings must be non-negative, got {g_blue:e}, {g_red:e}"));
        }
        if omega_eff < 0.0 {
            return Err(domain!("omega_eff must be non-negative, got {omega_eff:e}"));
        }
        Ok(Self { g_blue, g_red, phi_blue: 0.0, phi_red: 0.0, omega_eff, calibration: None })
    }

    /// All pumps off at the given detuning.
    pub fn off(omega_eff: f64) -> Result<Self> {
        Self::new(0.0, 0.0, omega_eff)
    }

    /// Couplings derived from raw amplitudes through `g = χ·|amplitude|`.
    pub fn from_amplitudes(chi: f64, amp_blue: f64, amp_red: f64, omega_eff: f64) -> Result<Self> {
        let (g_blue, g_red) = effective_couplings(chi, amp_blue, amp_red)?;
        let mut p = Self::new(g_blue, g_red, omega_eff)?;
        p.calibration = Some(AmplitudeCalibration { chi, amp_blue, amp_red });
        Ok(p)
    }

    pub fn with_phases(mut self, phi_blue: f64, phi_red: f64) -> Result<Self> {
        if !(phi_blue.is_finite() && phi_red.is_finite()) {
            return Err(domain!("pump phases must be finite"));
        }
        self.phi_blue = phi_blue;
        self.phi_red = phi_red;
        Ok(self)
    }

    pub fn with_g_blue(self, g_blue: f64) -> Result<Self> {
        Self::new(g_blue, self.g_red, self.omega_eff)?.with_phases(self.phi_blue, self.phi_red)
    }

    pub fn with_g_red(self, g_red: f64) -> Result<Self> {
        Self::new(self.g_blue, g_red, self.omega_eff)?.with_phases(self.phi_blue, self.phi_red)
    }

    pub fn with_omega_eff(self, omega_eff: f64) -> Result<Self> {
        Self::new(self.g_blue, self.g_red, omega_eff)?.with_phases(self.phi_blue, self.phi_red)
    }

    pub fn g_blue(&self) -> f64 {
        self.g_blue
    }

    pub fn g_red(&self) -> f64 {
        self.g_red
    }

    pub fn phi_blue(&self) -> f64 {
        self.phi_blue
    }

    pub fn phi_red(&self) -> f64 {
        self.phi_red
    }

    pub fn omega_eff(&self) -> f64 {
        self.omega_eff
    }

    pub fn calibration(&self) -> Option<AmplitudeCalibration> {
        self.calibration
    }

    pub fn is_off(&self) -> bool {
        self.g_blue == 0.0 && self.g_red == 0.0
    }
}

/// `(g_blue, g_red) = (χ·amp_blue, χ·amp_red)`.
pub fn effective_couplings(chi: f64, amp_blue: f64, amp_red: f64) -> Result<(f64, f64)> {
    if !(chi > 0.0 && chi.is_finite()) {
        return Err(domain!("chi must be positive and finite, got {chi:e}"));
    }
    if !(amp_blue >= 0.0 && amp_red >= 0.0) || !(amp_blue.is_finite() && amp_red.is_finite()) {
        return Err(domain!("pump amplitudes must be finite and non-negative, got {amp_blue:e}, {amp_red:e}"));
    }
    Ok((chi * amp_blue, chi * amp_red))
}

/// 4×4 generator of the linear Langevin dynamics in the `(c, d, c†, d†)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(CMat<4>);

impl DriftMatrix {
    /// Wrap raw entries, checking the conjugation symmetry between blocks and
    /// that the diagonal carries negative real parts.
    pub fn from_entries(entries: CMat<4>) -> Result<Self> {
        let scale = linalg::max_abs(&entries).max(f64::MIN_POSITIVE);
        for i in 0..2 {
            for j in 0..2 {
                let d1 = (entries[i + 2][j + 2] - entries[i][j].conj()).norm();
                let d2 = (entries[i + 2][j] - entries[i][j + 2].conj()).norm();
                if d1 > 1e-12 * scale || d2 > 1e-12 * scale {
                    return Err(domain!("drift matrix violates conjugation symmetry at block entry ({i}, {j})"));
                }
            }
        }
        for (i, row) in entries.iter().enumerate() {
            if !(row[i].re < 0.0) {
                return Err(domain!("drift diagonal entry {i} must have negative real part"));
            }
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &CMat<4> {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// Largest decay rate, read off the diagonal (`Re A_ii = −κ/2`).
    pub fn kappa_max(&self) -> f64 {
        (0..4).map(|i| -2.0 * self.0[i][i].re).fold(0.0, f64::max)
    }

    /// Real drift matrix acting on `(X_a, P_a, X_b, P_b)` with
    /// `X = (c + c†)/2`, `P = (c − c†)/2i`.
    pub fn quadrature(&self) -> RMat<4> {
        let t = quadrature_transform();
        // Inverse of the transform: c = X + iP, c† = X − iP.
        let mut u = [[ZERO; 4]; 4];
        u[0][0] = C64::new(1.0, 0.0);
        u[0][1] = I;
        u[1][2] = C64::new(1.0, 0.0);
        u[1][3] = I;
        u[2][0] = C64::new(1.0, 0.0);
        u[2][1] = -I;
        u[3][2] = C64::new(1.0, 0.0);
        u[3][3] = -I;
        let aq = linalg::mul(&linalg::mul(&t, &self.0), &u);
        core::array::from_fn(|i| core::array::from_fn(|j| aq[i][j].re))
    }
}

/// Matrix taking `(c, d, c†, d†)` to `(X_a, P_a, X_b, P_b)`.
pub(crate) fn quadrature_transform() -> CMat<4> {
    let h = C64::new(0.5, 0.0);
    let ih = C64::new(0.0, 0.5);
    let mut t = [[ZERO; 4]; 4];
    t[0][0] = h;
    t[0][2] = h;
    t[1][0] = -ih;
    t[1][2] = ih;
    t[2][1] = h;
    t[2][3] = h;
    t[3][1] = -ih;
    t[3][3] = ih;
    t
}

/// Drift matrix of the rotating-frame Langevin equations.
pub fn build_drift(modes: &ModePair, pumps: &PumpConfig) -> DriftMatrix {
    let we = pumps.omega_eff;
    let blue = C64::from_polar(pumps.g_blue, pumps.phi_blue);
    let red = C64::from_polar(pumps.g_red, pumps.phi_red);
    let mut a = [[ZERO; 4]; 4];
    a[0][0] = C64::new(-0.5 * modes.kappa_a, we);
    a[0][1] = -I * red;
    a[0][3] = -I * blue;
    a[1][1] = C64::new(-0.5 * modes.kappa_b, we);
    a[1][0] = -I * red.conj();
    a[1][2] = -I * blue;
    for i in 0..2 {
        for j in 0..2 {
            a[i + 2][j + 2] = a[i][j].conj();
            a[i + 2][j] = a[i][j + 2].conj();
        }
    }
    DriftMatrix(a)
}

/// Three-way classification of the linear dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    /// Margin within [`CRITICAL_MARGIN_TOLERANCE`]·κ_max of zero.
    Critical,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    pub classification: Stability,
    /// Largest real part among the drift eigenvalues (rad/s).
    pub margin: f64,
    pub eigenvalues: [C64; 4],
}

/// Eigenvalues of the drift matrix and the resulting stability verdict.
pub fn stability(drift: &DriftMatrix) -> Result<StabilityReport> {
    let mut eigenvalues = linalg::eigenvalues(drift.entries())?;
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let margin = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let tol = CRITICAL_MARGIN_TOLERANCE * drift.kappa_max();
    let classification = if margin < -tol {
        Stability::Stable
    } else if margin <= tol {
        Stability::Critical
    } else {
        Stability::Unstable
    };
    Ok(StabilityReport { stable: classification == Stability::Stable, classification, margin, eigenvalues })
}

/// Lossless normal-mode frequencies at the symmetric point `g_blue = g_red`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModes {
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// `2g ≥ omega_eff`: the lower hybrid mode has collapsed to zero frequency.
    pub collapsed: bool,
}

/// `ω± = ω_eff·√(1 ± 2g/ω_eff)`; past the collapse `omega_minus` is clamped to 0.
pub fn normal_mode_frequencies(pumps: &PumpConfig) -> Result<NormalModes> {
    let (gb, gr) = (pumps.g_blue, pumps.g_red);
    if (gb - gr).abs() > 1e-9 * gb.max(gr) {
        return Err(domain!("normal modes are defined only for g_blue = g_red (got {gb:e}, {gr:e})"));
    }
    let g = 0.5 * (gb + gr);
    let w = pumps.omega_eff;
    let upper = w * w + 2.0 * g * w;
    let lower = w * (w - 2.0 * g);
    Ok(NormalModes {
        omega_plus: upper.sqrt(),
        omega_minus: lower.max(0.0).sqrt(),
        collapsed: 2.0 * g >= w && g > 0.0,
    })
}

/// `coth(ħω_b/2k_BT) − coth(ħω_a/2k_BT)`: the change of mode-a output
/// power, in units of `ħω_a`, when a conversion pump swaps in the thermal
/// population of mode b.
pub fn thermal_asymmetry(modes: &ModePair, temperature: f64) -> Result<f64> {
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(domain!("temperature must be finite and non-negative, got {temperature:e}"));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let coth = |omega: f64| {
        let x = HBAR * omega / (2.0 * K_B * temperature);
        1.0 / x.tanh()
    };
    Ok(coth(modes.omega_b) - coth(modes.omega_a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::units::mhz_to_rad;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn mode_pair_rejects_bad_inputs() {
        assert!(ModePair::new(1.0, 2.0, 0.01, 0.01).is_err());
        assert!(ModePair::new(2.0, 1.0, 0.0, 0.01).is_err());
        assert!(ModePair::new(2.0, 1.0, 0.1, 0.01).is_err(), "Q below 50");
        assert!(ModePair::new(2.0, 1.0, 0.01, 0.01).is_ok());
        assert!(ModePair::new(f64::NAN, 1.0, 0.01, 0.01).is_err());
    }

    #[test]
    fn effective_couplings_are_linear() {
        assert_eq!(effective_couplings(3.0, 0.0, 0.0).unwrap(), (0.0, 0.0));
        let g = mhz_to_rad(12.6);
        assert_eq!(effective_couplings(1.0, g, g).unwrap(), (g, g));
        let (g1, _) = effective_couplings(0.7, 1.3, 0.0).unwrap();
        let (g2, _) = effective_couplings(0.7, 2.6, 0.0).unwrap();
        assert_eq!(g2, 2.0 * g1);
        assert!(effective_couplings(0.0, 1.0, 1.0).is_err());
        assert!(effective_couplings(1.0, -1.0, 1.0).is_err());
        let p = PumpConfig::from_amplitudes(2.0, 0.5, 0.25, 1.0).unwrap();
        assert_eq!((p.g_blue(), p.g_red()), (1.0, 0.5));
    }

    #[test]
    fn pump_config_rejects_negative_detuning() {
        assert!(PumpConfig::new(0.0, 0.0, -1.0).is_err());
        assert!(PumpConfig::new(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn drift_with_pumps_off_is_diagonal() {
        let modes = presets::device_modes();
        let we = mhz_to_rad(26.0);
        let a = build_drift(&modes, &PumpConfig::off(we).unwrap());
        let (ka, kb) = (modes.kappa_a(), modes.kappa_b());
        let diag = [C64::new(-ka / 2.0, we), C64::new(-kb / 2.0, we), C64::new(-ka / 2.0, -we), C64::new(-kb / 2.0, -we)];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { diag[i] } else { ZERO };
                assert_eq!(a.entries()[i][j], want);
            }
        }
    }

    #[test]
    fn red_pump_couples_annihilators_only() {
        let modes = presets::device_modes();
        let g = mhz_to_rad(5.0);
        let a = build_drift(&modes, &PumpConfig::new(0.0, g, mhz_to_rad(26.0)).unwrap());
        let e = a.entries();
        assert!(close(e[0][1], C64::new(0.0, -g), 1e-6));
        assert!(close(e[1][0], C64::new(0.0, -g), 1e-6));
        assert!(close(e[2][3], C64::new(0.0, g), 1e-6));
        assert!(close(e[3][2], C64::new(0.0, g), 1e-6));
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 0), (2, 1), (3, 0), (3, 1)] {
            assert_eq!(e[i][j], ZERO);
        }
    }

    #[test]
    fn blue_pump_couples_annihilators_to_creators() {
        // Hand commutators: [c, g(c†d† + cd)] = g d†, [d, g(c†d† + cd)] = g c†.
        let modes = presets::device_modes();
        let g = mhz_to_rad(7.0);
        let a = build_drift(&modes, &PumpConfig::new(g, 0.0, mhz_to_rad(26.0)).unwrap());
        let e = a.entries();
        assert!(close(e[0][3], C64::new(0.0, -g), 1e-6));
        assert!(close(e[1][2], C64::new(0.0, -g), 1e-6));
        assert!(close(e[2][1], C64::new(0.0, g), 1e-6));
        assert!(close(e[3][0], C64::new(0.0, g), 1e-6));
        for (i, j) in [(0, 1), (0, 2), (1, 0), (1, 3), (2, 3), (2, 0), (3, 2), (3, 1)] {
            assert_eq!(e[i][j], ZERO);
        }
    }

    #[test]
    fn from_entries_checks_symmetry() {
        let modes = presets::device_modes();
        let a = build_drift(&modes, &PumpConfig::new(1e6, 2e6, 3e7).unwrap());
        assert!(DriftMatrix::from_entries(*a.entries()).is_ok());
        let mut bad = *a.entries();
        bad[2][1] += C64::new(1e5, 0.0);
        assert!(DriftMatrix::from_entries(bad).is_err());
    }

    #[test]
    fn stability_pumps_off() {
        let modes = presets::device_modes();
        let r = stability(&build_drift(&modes, &PumpConfig::off(mhz_to_rad(26.0)).unwrap())).unwrap();
        assert!(r.stable);
        let want = -modes.kappa_a().min(modes.kappa_b()) / 2.0;
        assert!((r.margin - want).abs() < 1e-9 * want.abs());
    }

    #[test]
    fn blue_only_eigenvalues_match_closed_form() {
        // Equal κ, red off: λ = −κ/2 ± √(g² − ω_eff²), each twice.
        let kappa = mhz_to_rad(20.0);
        let modes = presets::device_modes().with_kappas(kappa, kappa).unwrap();
        let we = mhz_to_rad(26.0);
        for g_mhz in [5.0, 26.0, 27.5, 40.0] {
            let g = mhz_to_rad(g_mhz);
            let r = stability(&build_drift(&modes, &PumpConfig::new(g, 0.0, we).unwrap())).unwrap();
            let root = C64::new(g * g - we * we, 0.0).sqrt();
            let expected = [-kappa / 2.0 + root, -kappa / 2.0 - root];
            for z in r.eigenvalues {
                let d = expected.iter().map(|e| (z - e).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < 1e-6 * we, "g = {g_mhz} MHz: {z} not in {expected:?}");
            }
            let unstable_expected = g * g > we * we + kappa * kappa / 4.0;
            assert_eq!(r.classification == Stability::Unstable, unstable_expected, "g = {g_mhz}");
        }
    }

    #[test]
    fn reference_operating_point_is_stable() {
        let modes = presets::device_modes();
        let pumps = PumpConfig::new(mhz_to_rad(12.6), 0.0, mhz_to_rad(26.0)).unwrap();
        assert!(stability(&build_drift(&modes, &pumps)).unwrap().stable);
    }

    #[test]
    fn normal_modes() {
        let we = mhz_to_rad(26.0);
        let n0 = normal_mode_frequencies(&PumpConfig::off(we).unwrap()).unwrap();
        assert_eq!((n0.omega_plus, n0.omega_minus, n0.collapsed), (we, we, false));
        let half = normal_mode_frequencies(&PumpConfig::new(we / 2.0, we / 2.0, we).unwrap()).unwrap();
        assert_eq!(half.omega_minus, 0.0);
        assert!(half.collapsed);
        assert!(normal_mode_frequencies(&PumpConfig::new(1.0, 2.0, we).unwrap()).is_err());
    }

    #[test]
    fn normal_modes_match_lossless_dynamical_matrix() {
        // Diagonalize the lossless 4×4 dynamics numerically at g = ω_eff/4.
        let we = mhz_to_rad(26.0);
        let g = we / 4.0;
        let pumps = PumpConfig::new(g, g, we).unwrap();
        let mut a = *build_drift(&presets::device_modes(), &pumps).entries();
        for (i, row) in a.iter_mut().enumerate() {
            row[i].re = 0.0;
        }
        let eig = linalg::eigenvalues(&a).unwrap();
        let mut freqs: std::vec::Vec<f64> = eig.iter().map(|z| z.im.abs()).collect();
        freqs.sort_by(f64::total_cmp);
        let n = normal_mode_frequencies(&pumps).unwrap();
        assert!((n.omega_plus - we * 1.5f64.sqrt()).abs() < 1e-9 * we);
        assert!((n.omega_minus - we * 0.5f64.sqrt()).abs() < 1e-9 * we);
        assert!((freqs[0] - n.omega_minus).abs() < 1e-8 * we && (freqs[1] - n.omega_minus).abs() < 1e-8 * we);
        assert!((freqs[2] - n.omega_plus).abs() < 1e-8 * we && (freqs[3] - n.omega_plus).abs() < 1e-8 * we);
    }

    #[test]
    fn thermal_asymmetry_limits() {
        let modes = presets::device_modes();
        assert_eq!(thermal_asymmetry(&modes, 0.0).unwrap(), 0.0);
        assert!(thermal_asymmetry(&modes, -1.0).is_err());
        let at_100mk = thermal_asymmetry(&modes, 0.1).unwrap();
        // Direct evaluation of the two coth terms.
        let x = |w: f64| HBAR * w / (2.0 * K_B * 0.1);
        let direct = 1.0 / x(modes.omega_b()).tanh() - 1.0 / x(modes.omega_a()).tanh();
        assert!(at_100mk > 0.0);
        assert!((at_100mk - direct).abs() < 1e-15);
        let degenerate = ModePair::new(modes.omega_a(), modes.omega_a() * (1.0 - 1e-16), 1e6, 1e6).unwrap();
        assert!(thermal_asymmetry(&degenerate, 0.3).unwrap().abs() < 1e-12);
    }
}
