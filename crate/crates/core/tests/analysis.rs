//! Lineshape, peak+dip and g-factor fits against synthetic data with known
//! parameters.

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use donorspec_core::analysis::{
    fit_peak_with_dip_xy, fit_polarization_positions, fit_voigt_xy, fit_zeeman_splitting, levenberg_marquardt,
    sigma_for_fwhm, voigt_eval, voigt_fwhm, AnalysisError, LmOptions, PeakDipParams, VoigtParams,
    GAUSSIAN_FWHM_PER_SIGMA,
};

const MU_B: f64 = 57.8838;

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize + 1;
    (0..n).map(|k| lo + k as f64 * step).collect()
}

/// Half-maximum crossings located by linear interpolation on a fine grid.
fn crossing_fwhm(p: &VoigtParams) -> f64 {
    let w = voigt_fwhm(p.gaussian_sigma, p.lorentzian_gamma);
    let x = grid(p.center - 2.0 * w, p.center + 2.0 * w, w * 1e-5);
    let half = p.baseline + 0.5 * p.amplitude;
    let y: Vec<f64> = x.iter().map(|&x| voigt_eval(p, x)).collect();
    let i = y.iter().position(|&v| v >= half).unwrap();
    let j = y.iter().rposition(|&v| v >= half).unwrap();
    let left = x[i - 1] + (half - y[i - 1]) / (y[i] - y[i - 1]) * (x[i] - x[i - 1]);
    let right = x[j] + (half - y[j]) / (y[j + 1] - y[j]) * (x[j + 1] - x[j]);
    right - left
}

#[test]
fn noiseless_57_ghz_line_is_recovered() {
    // Gaussian-dominated: σ carries most of the width.
    let gamma = 4.0;
    let sigma = sigma_for_fwhm(57.0, gamma).unwrap();
    let truth = VoigtParams::new(3.0, sigma, gamma, 100.0, 5.0);
    let x = grid(-150.0, 150.0, 1.0);
    let y: Vec<f64> = x.iter().map(|&x| voigt_eval(&truth, x)).collect();
    let f = fit_voigt_xy(&x, &y, None).unwrap();
    assert!(f.converged);
    assert!(((f.fwhm - 57.0) / 57.0).abs() < 1e-3, "fwhm {}", f.fwhm);
    assert!((f.params.center - 3.0).abs() < 1e-6);
}

#[test]
fn noisy_fwhm_bias_is_below_one_percent() {
    let truth = VoigtParams::new(0.0, sigma_for_fwhm(57.0, 4.0).unwrap(), 4.0, 1.0, 0.0);
    let x = grid(-150.0, 150.0, 1.0);
    let clean: Vec<f64> = x.iter().map(|&x| voigt_eval(&truth, x)).collect();
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sum = 0.0;
    for _ in 0..50 {
        let y: Vec<f64> = clean.iter().map(|c| c + noise.sample(&mut rng)).collect();
        sum += fit_voigt_xy(&x, &y, None).unwrap().fwhm;
    }
    let bias = (sum / 50.0 - 57.0) / 57.0;
    assert!(bias.abs() < 0.01, "bias {bias}");
}

#[test]
fn pure_gaussian_drives_gamma_to_zero() {
    let truth = VoigtParams::new(0.0, 8.0, 0.0, 1.0, 0.1);
    let x = grid(-60.0, 60.0, 0.5);
    let y: Vec<f64> = x.iter().map(|&x| voigt_eval(&truth, x)).collect();
    let f = fit_voigt_xy(&x, &y, None).unwrap();
    assert!(f.params.lorentzian_gamma < 1e-3 * 8.0, "γ = {}", f.params.lorentzian_gamma);
    assert!((f.params.gaussian_sigma - 8.0).abs() < 1e-3);
}

#[test]
fn constant_counts_are_degenerate() {
    let x = grid(0.0, 10.0, 1.0);
    let y = vec![3.0; x.len()];
    assert!(matches!(fit_voigt_xy(&x, &y, None), Err(AnalysisError::DegenerateData)));
}

fn peak_dip_truth() -> PeakDipParams {
    PeakDipParams {
        peak: VoigtParams::new(0.0, 10.0, 15.0, 1.0, 0.05),
        dip: VoigtParams::new(4.0, 0.3, 0.8, -0.4, 0.0),
    }
}

fn cpt_like_grid() -> Vec<f64> {
    let mut x = grid(-120.0, 120.0, 1.0);
    x.retain(|v| (v - 4.0).abs() > 5.0);
    x.extend(grid(-1.0, 9.0, 0.05));
    x.sort_by(f64::total_cmp);
    x
}

#[test]
fn peak_with_dip_round_trip() {
    let truth = peak_dip_truth();
    let x = cpt_like_grid();
    let y: Vec<f64> = x.iter().map(|&x| truth.eval(x)).collect();
    let f = fit_peak_with_dip_xy(&x, &y).unwrap();
    assert!((f.dip_center - 4.0).abs() < 1e-4, "{}", f.dip_center);
    assert!((f.dip_fwhm - truth.dip_fwhm()).abs() < 1e-3 * truth.dip_fwhm());
    assert!((f.peak_fwhm - truth.peak_fwhm()).abs() < 1e-3 * truth.peak_fwhm());
    assert!((f.contrast - truth.contrast()).abs() < 1e-3);
    assert!(f.dip_fwhm < f.peak_fwhm);
}

#[test]
fn missing_dip_is_reported_as_such() {
    let mut truth = peak_dip_truth();
    truth.dip.amplitude = 0.0;
    let x = cpt_like_grid();
    let y: Vec<f64> = x.iter().map(|&x| truth.eval(x)).collect();
    assert!(matches!(fit_peak_with_dip_xy(&x, &y), Err(AnalysisError::DipNotFound(_))));

    // Noise alone does not produce a dip either.
    let noise = Normal::new(0.0, 0.005).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y: Vec<f64> = y.iter().map(|v| v + noise.sample(&mut rng)).collect();
    assert!(matches!(fit_peak_with_dip_xy(&x, &y), Err(AnalysisError::DipNotFound(_))));
}

#[test]
fn deepest_of_two_dips_wins() {
    let truth = peak_dip_truth();
    let shallow = VoigtParams::new(-6.0, 0.3, 0.8, -0.1, 0.0);
    let mut x = cpt_like_grid();
    x.extend(grid(-8.0, -4.0, 0.05));
    x.sort_by(f64::total_cmp);
    x.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let y: Vec<f64> = x.iter().map(|&x| truth.eval(x) + voigt_eval(&shallow, x)).collect();
    let f = fit_peak_with_dip_xy(&x, &y).unwrap();
    assert!((f.dip_center - 4.0).abs() < 0.05, "{}", f.dip_center);
}

#[test]
fn unresolved_dip_is_rejected() {
    let truth = peak_dip_truth();
    let x = grid(-120.0, 120.0, 1.0);
    let y: Vec<f64> = x.iter().map(|&x| truth.eval(x)).collect();
    match fit_peak_with_dip_xy(&x, &y) {
        Err(AnalysisError::UnresolvedDip { .. }) | Err(AnalysisError::DipNotFound(_)) => {}
        other => panic!("expected an unresolved dip, got {other:?}"),
    }
}

#[test]
fn zeeman_slope_round_trip() {
    let pts: Vec<(f64, f64)> = (0..8).map(|k| {
        let b = k as f64;
        (b, 1.97 * MU_B * b * 1e-3)
    }).collect();
    let f = fit_zeeman_splitting(&pts).unwrap();
    assert!((f.g_tot - 1.97).abs() < 1e-6);
    assert!((f.slope_uev_per_t - 114.031).abs() < 1e-3);
}

fn polarization_data(g_e: f64, g_h: f64, b: f64, phase: f64) -> Vec<Vec<(f64, f64)>> {
    let dg = g_e * MU_B * b;
    let dh = g_h * MU_B * b;
    let a = 2.0 * PI / 90.0;
    [-0.5 * dg, 0.5 * dg]
        .iter()
        .map(|&c| (0..37).map(|k| {
            let phi = k as f64 * 5.0;
            (phi, c + dh * (a * phi + phase).sin())
        }).collect())
        .collect()
}

#[test]
fn polarization_g_factors_round_trip() {
    let f = fit_polarization_positions(&polarization_data(1.91, 0.05, 7.0, 0.7), 7.0).unwrap();
    assert!(((f.g_e_perp - 1.91) / 1.91).abs() < 0.01, "{}", f.g_e_perp);
    assert!(((f.g_h_perp_lower_bound - 0.05) / 0.05).abs() < 0.01, "{}", f.g_h_perp_lower_bound);
    for p in &f.peaks {
        assert!((p.period_deg - 90.0).abs() < 1.0);
    }
}

#[test]
fn flat_positions_give_zero_hole_bound() {
    let f = fit_polarization_positions(&polarization_data(1.91, 0.0, 7.0, 0.0), 7.0).unwrap();
    assert_eq!(f.g_h_perp_lower_bound, 0.0);
    assert!(((f.g_e_perp - 1.91) / 1.91).abs() < 1e-9);
}

#[test]
fn half_turn_phase_shift_keeps_amplitude() {
    let a = fit_polarization_positions(&polarization_data(1.91, 0.05, 7.0, 0.3), 7.0).unwrap();
    let b = fit_polarization_positions(&polarization_data(1.91, 0.05, 7.0, 0.3 + PI), 7.0).unwrap();
    for (p, q) in a.peaks.iter().zip(&b.peaks) {
        assert!((p.amplitude - q.amplitude).abs() < 1e-9 * p.amplitude);
        assert!(p.amplitude >= 0.0);
    }
}

#[test]
fn narrow_angular_coverage_is_rejected() {
    let data: Vec<Vec<(f64, f64)>> = polarization_data(1.91, 0.05, 7.0, 0.0)
        .into_iter()
        .map(|p| p.into_iter().filter(|(phi, _)| *phi < 60.0).collect())
        .collect();
    assert!(matches!(
        fit_polarization_positions(&data, 7.0),
        Err(AnalysisError::InsufficientCoverage { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn voigt_is_symmetric_and_positive(
        sigma in 0.0f64..20.0,
        gamma in 0.0f64..20.0,
        c in -50.0f64..50.0,
        dx in 0.0f64..200.0,
    ) {
        prop_assume!(sigma + gamma > 1e-3);
        let p = VoigtParams::new(c, sigma, gamma, 1.0, 0.0);
        let a = voigt_eval(&p, c + dx);
        let b = voigt_eval(&p, c - dx);
        prop_assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
        // Strictly positive wherever the value is representable.
        prop_assert!(a > 0.0 || (gamma == 0.0 && dx / sigma > 30.0));
    }

    #[test]
    fn width_from_params_matches_half_maximum_crossings(sigma in 0.1f64..20.0, gamma in 0.0f64..20.0) {
        let p = VoigtParams::new(0.0, sigma, gamma, 2.0, 0.3);
        let w = p.fwhm();
        prop_assert!(((crossing_fwhm(&p) - w) / w).abs() < 1e-3);
        if gamma == 0.0 {
            prop_assert!((w - GAUSSIAN_FWHM_PER_SIGMA * sigma).abs() < 1e-12 * w);
        }
    }

    #[test]
    fn accepted_steps_never_raise_the_rms(
        sigma in 1.0f64..15.0,
        gamma in 0.0f64..15.0,
        seed in any::<u64>(),
    ) {
        let truth = VoigtParams::new(2.0, sigma, gamma, 1.0, 0.1);
        let x = grid(-80.0, 80.0, 1.0);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = x.iter().map(|&x| voigt_eval(&truth, x) + noise.sample(&mut rng)).collect();
        let f = fit_voigt_xy(&x, &y, None).unwrap();
        prop_assert!(f.rms_history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!((f.fwhm - f.params.fwhm()).abs() <= 1e-12 * f.fwhm);
    }

    #[test]
    fn noiseless_round_trip_for_any_profile(
        sigma in 0.5f64..20.0,
        gamma in 0.0f64..20.0,
        c in -10.0f64..10.0,
    ) {
        let truth = VoigtParams::new(c, sigma, gamma, 3.0, 0.2);
        let w = truth.fwhm();
        let x = grid(c - 8.0 * w, c + 8.0 * w, w / 40.0);
        let y: Vec<f64> = x.iter().map(|&x| voigt_eval(&truth, x)).collect();
        let f = fit_voigt_xy(&x, &y, None).unwrap();
        prop_assert!(((f.fwhm - w) / w).abs() < 1e-3, "{} vs {}", f.fwhm, w);
        prop_assert!((f.params.center - c).abs() < 1e-3 * w);
    }
}

#[test]
fn lm_reports_converged_only_near_a_stationary_point() {
    // Exponential fit: at convergence the scaled gradient is tiny.
    let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.2).collect();
    let y: Vec<f64> = t.iter().map(|&t| 1.0 + 2.0 * (-0.4 * t).exp() + 0.01 * (3.0 * t).sin()).collect();
    let r = |p: &[f64]| -> Vec<f64> { t.iter().zip(&y).map(|(&t, &y)| p[0] + p[1] * (-p[2] * t).exp() - y).collect() };
    let out = levenberg_marquardt(r, &[0.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &LmOptions::default()).unwrap();
    assert!(out.converged);
    assert!(out.gradient_norm < 1e-8, "{}", out.gradient_norm);
}
