//! Sampled moments against closed forms, each within five standard errors.

use normflate::correlation::{compute_zt, DriftPath, ExpectedZ};
use normflate::gfs::{
    build_adversarial_pair, sample_control_pair, sample_real_gfs, GfsSpec, StreamKey, TrialStreams, VarianceProfile,
};
use normflate::solver::{antisym2, asymmetry_witness, drift_direction, picard_nonlinearity};
use normflate::spectral::{zero_mode, TorusGrid};
use normflate::stats;

fn within_5se(samples: &[f64], expected: f64) -> bool {
    let se = stats::std_error(samples);
    (stats::mean(samples) - expected).abs() <= 5.0 * se.max(1e-300)
}

#[test]
fn mode_coefficients_are_circular_with_profile_variance() {
    let radius = 6;
    let grid = TorusGrid::for_radius(2, radius).unwrap();
    let profile = VarianceProfile::power(-1.0, radius as f64);
    let samples: Vec<_> = (0..3000)
        .map(|j| sample_real_gfs(&profile, grid, StreamKey::new(11, j)).unwrap())
        .collect();
    for k in [[1i64, 0], [0, 3], [-2, 5], [4, -4]] {
        let idx = grid.index_of(&k).unwrap();
        let modulus: Vec<f64> = samples.iter().map(|s| s.coeffs()[idx].norm_sqr()).collect();
        let square_re: Vec<f64> = samples.iter().map(|s| (s.coeffs()[idx] * s.coeffs()[idx]).re).collect();
        let square_im: Vec<f64> = samples.iter().map(|s| (s.coeffs()[idx] * s.coeffs()[idx]).im).collect();
        assert!(within_5se(&modulus, profile.variance(&k)), "k = {k:?}");
        assert!(within_5se(&square_re, 0.0) && within_5se(&square_im, 0.0), "k = {k:?}");
    }
}

#[test]
fn zt_mean_and_variance_match_closed_forms() {
    let radius = 8;
    let grid = TorusGrid::for_radius(2, radius).unwrap();
    let profile = VarianceProfile::power(-1.0, radius as f64);
    let ez = ExpectedZ::new(&profile, 2);
    let n = 4000;
    for t in [0.0, 0.01, 0.1] {
        let z: Vec<f64> = (0..n)
            .map(|j| compute_zt(&sample_real_gfs(&profile, grid, StreamKey::new(3, j)).unwrap(), t))
            .collect();
        assert!(within_5se(&z, ez.mean(t)), "mean at t = {t}");
        let m = stats::mean(&z);
        let dev: Vec<f64> = z.iter().map(|v| (v - m) * (v - m)).collect();
        assert!(within_5se(&dev, ez.variance(t)), "variance at t = {t}");
    }
}

/// The zero mode of `B(P_t u0, D P_t u0)` for a rotated pair averages to the
/// drift rate `H_t`; for an independent pair it averages to zero.
#[test]
fn zero_mode_forcing_of_rotated_pair_has_drift_mean() {
    let radius = 16;
    let grid = TorusGrid::for_radius(1, radius).unwrap();
    let profile = VarianceProfile::white(radius as f64);
    let spec = antisym2(1);
    let w = asymmetry_witness(&spec).unwrap();
    let drift = DriftPath::new(&profile, 1, drift_direction(&spec, w));
    let gfs = GfsSpec::uniform(grid, profile, 2);
    for t in [0.002, 0.02] {
        let (mut adv, mut ctl) = (Vec::new(), Vec::new());
        for trial in 0..2000 {
            let streams = TrialStreams::new(9, trial, 2);
            let (x, y) = build_adversarial_pair(&gfs, w.a, w.b, &streams).unwrap();
            adv.push(zero_mode(&picard_nonlinearity(&(&x + &y), t, &spec).unwrap()).unwrap());
            let (x, y) = sample_control_pair(&gfs, &streams).unwrap();
            ctl.push(zero_mode(&picard_nonlinearity(&(&x + &y), t, &spec).unwrap()).unwrap());
        }
        let h = drift.h(t);
        for c in 0..2 {
            let a: Vec<f64> = adv.iter().map(|v| v[c]).collect();
            let b: Vec<f64> = ctl.iter().map(|v| v[c]).collect();
            assert!(within_5se(&a, h[c]), "adversarial component {c} at t = {t}: {} vs {}", stats::mean(&a), h[c]);
            assert!(within_5se(&b, 0.0), "control component {c} at t = {t}");
        }
        assert!(h[0] < 0.0);
    }
}
