use proptest::prelude::*;

use uscsim_core::gaussian::{output_covariance, CovarianceMatrix, Mode, VACUUM_VARIANCE};
use uscsim_core::measurement::{
    calibrate_gain, estimate_covariance, estimate_squeezing, histogram_difference, mode_squeezing, sample_records,
    DetectionChain, PumpState, Quadrature,
};
use uscsim_core::presets;

fn epr_model() -> CovarianceMatrix {
    let modes = presets::device_modes();
    output_covariance(&modes, &presets::epr(&modes), 0.0, uscsim_core::gaussian::default_bandwidth(&modes)).unwrap()
}

fn chain(gain_a: f64, gain_b: f64, seed: u64) -> DetectionChain {
    DetectionChain::new(gain_a, gain_b, 0.5, 0.7, seed).unwrap()
}

fn rms_error(est: &CovarianceMatrix, truth: &[[f64; 4]; 4]) -> f64 {
    let s: f64 = truth.iter().enumerate().flat_map(|(i, row)| row.iter().enumerate().map(move |(j, t)| (est.get(i, j) - t).powi(2))).sum();
    (s / 16.0).sqrt()
}

#[test]
fn estimation_error_scales_as_inverse_sqrt_n() {
    let v = epr_model();
    let sizes = [10_000usize, 100_000, 1_000_000];
    let seeds = 6;
    let mut points = Vec::new();
    for &n in &sizes {
        let mut mean = 0.0;
        for seed in 0..seeds {
            let ch = DetectionChain::ideal(1000 + seed);
            let rec = sample_records(&v, &ch, n).unwrap();
            let est = estimate_covariance(&rec, PumpState::On).unwrap();
            mean += rms_error(&est, &ch.recorded_covariance(&v));
        }
        points.push(((n as f64).ln(), (mean / seeds as f64).ln()));
    }
    let k = points.len() as f64;
    let (mx, my) = (points.iter().map(|p| p.0).sum::<f64>() / k, points.iter().map(|p| p.1).sum::<f64>() / k);
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
}

#[test]
fn vacuum_on_and_off_agree() {
    let ch = chain(presets::GAIN_A, presets::GAIN_B, 7);
    let rec = sample_records(&CovarianceMatrix::vacuum(), &ch, 100_000).unwrap();
    let on = estimate_covariance(&rec, PumpState::On).unwrap();
    let off = estimate_covariance(&rec, PumpState::Off).unwrap();
    let n = rec.count_of(PumpState::On) as f64;
    for i in 0..4 {
        let var = 0.5 * (on.get(i, i) + off.get(i, i));
        // Each variance estimate has standard error var·√(2/n).
        let sigma = var * (4.0 / n).sqrt();
        assert!((on.get(i, i) - off.get(i, i)).abs() < 3.0 * sigma, "quadrature {i}");
    }
}

#[test]
fn epr_cross_correlation_within_three_sigma() {
    let v = epr_model();
    let ch = chain(presets::GAIN_A, presets::GAIN_B, 11);
    let rec = sample_records(&v, &ch, 2_000_000).unwrap();
    let est = estimate_covariance(&rec, PumpState::On).unwrap();
    let truth = ch.recorded_covariance(&v);
    let n = rec.count_of(PumpState::On) as f64;
    for (i, j) in [(0, 2), (1, 3)] {
        let sigma = ((truth[i][i] * truth[j][j] + truth[i][j].powi(2)) / n).sqrt();
        assert!((est.get(i, j) - truth[i][j]).abs() < 3.0 * sigma, "({i},{j}): {} vs {}", est.get(i, j), truth[i][j]);
    }
}

#[test]
fn histogram_total_is_count_difference() {
    for n in [2usize, 3, 1000, 1001] {
        let rec = sample_records(&epr_model(), &DetectionChain::ideal(3), n).unwrap();
        let h = histogram_difference(&rec, (Quadrature::Xa, Quadrature::Xb), 31).unwrap();
        let want = rec.count_of(PumpState::On) as i64 - rec.count_of(PumpState::Off) as i64;
        assert_eq!(h.total(), want);
    }
}

#[test]
fn pipeline_is_deterministic_in_the_seed() {
    let v = epr_model();
    let run = |seed| {
        let rec = sample_records(&v, &chain(presets::GAIN_A, presets::GAIN_B, seed), 20_000).unwrap();
        let h = histogram_difference(&rec, (Quadrature::Xa, Quadrature::Pb), 41).unwrap();
        let on = estimate_covariance(&rec, PumpState::On).unwrap();
        let off = estimate_covariance(&rec, PumpState::Off).unwrap();
        let gains = calibrate_gain(&v, &on, &off).unwrap();
        (rec, h, on, off, gains)
    };
    let (a, b, c) = (run(5), run(5), run(6));
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(a.2, b.2);
    assert_eq!(a.4, b.4);
    assert_ne!(a.0, c.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn identical_variances_give_zero_squeezing(x in 0.0..1e3f64, gain in 1e-9..1e3f64) {
        let est = estimate_squeezing(x, x, gain, VACUUM_VARIANCE).unwrap();
        prop_assert_eq!(est.db(), Some(0.0));
    }

    #[test]
    fn squeezing_does_not_depend_on_chain_gain(ga in 1e-9..1e-6f64, gb in 1e-9..1e-6f64) {
        let v = epr_model();
        let estimate = |ga: f64, gb: f64| {
            let rec = sample_records(&v, &chain(ga, gb, 99), 20_000).unwrap();
            let on = estimate_covariance(&rec, PumpState::On).unwrap();
            let off = estimate_covariance(&rec, PumpState::Off).unwrap();
            let (ca, cb) = calibrate_gain(&v, &on, &off).unwrap();
            (
                mode_squeezing(&on, &off, ca, Mode::A).unwrap().argument(),
                mode_squeezing(&on, &off, cb, Mode::B).unwrap().argument(),
            )
        };
        let (a0, b0) = estimate(1e-7, 1e-7);
        let (a1, b1) = estimate(ga, gb);
        prop_assert!((a0 - a1).abs() <= 1e-9 && (b0 - b1).abs() <= 1e-9, "{} {} vs {} {}", a0, b0, a1, b1);
    }
}
