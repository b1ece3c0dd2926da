//! Scan drivers checked against closed forms, rate-equation oracles and
//! symmetry relations.

use nalgebra::DMatrix;
use proptest::prelude::*;

use donorspec_core::analysis::{fit_exponential_tail, fit_peak_with_dip, fit_sinusoid, fit_voigt};
use donorspec_core::spectroscopy::presets::{self, CPT_PROBE_RABI_GHZ, CPT_SPIN_DEPHASING_GHZ};
use donorspec_core::spectroscopy::{
    simulate_cpt_scan, simulate_magneto_pl, simulate_polarization_pl, simulate_pumping_transient,
    simulate_single_laser_ple, simulate_two_laser_ple, steady_signal, two_photon_resonance_ghz, AxisKind,
    PlLinewidth, ScanAxis, ScanPlan, Spectrum,
};
use donorspec_core::spinmodel::config::ground_splitting;
use donorspec_core::spinmodel::constants::ghz_to_uev;
use donorspec_core::spinmodel::{build_level_scheme, DriveField, DriveRole, TransitionLabel, ZeemanConfig};

const MU_B: f64 = 57.8838;

/// Numeric FWHM of a comb of equal Lorentzians (FWHM `w`) at spacing `a`.
fn lorentzian_comb_fwhm(n_lines: usize, a: f64, w: f64) -> f64 {
    let offsets: Vec<f64> = (0..n_lines).map(|k| (k as f64 - 0.5 * (n_lines - 1) as f64) * a).collect();
    let f = |x: f64| -> f64 { offsets.iter().map(|o| 1.0 / (1.0 + (2.0 * (x - o) / w).powi(2))).sum() };
    let half = 0.5 * f(0.0).max(f(0.5 * a));
    // Outermost half-maximum crossing by bisection on the right side.
    let (mut lo, mut hi) = (0.0, 0.5 * n_lines as f64 * a + 20.0 * w);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * lo
}

#[test]
fn comb_oracle_limits() {
    // One line: the Lorentzian FWHM itself.
    assert!((lorentzian_comb_fwhm(1, 0.1, 0.3) - 0.3).abs() < 1e-9);
    // Wide lines swamp the comb structure.
    let w = 50.0;
    assert!((lorentzian_comb_fwhm(10, 0.1, w) - w).abs() / w < 1e-3);
}

#[test]
fn zero_field_ple_matches_target_width() {
    let plan = presets::ple_plan(presets::ple_setup(0.0), presets::PLE_RABI_GHZ);
    let s = simulate_single_laser_ple(&plan).unwrap();
    let f = fit_voigt(&s, None).unwrap();
    assert!((f.fwhm - 20.0).abs() < 0.5, "FWHM {}", f.fwhm);
}

#[test]
fn optical_pumping_suppresses_single_laser_signal_at_seven_tesla() {
    let zero = simulate_single_laser_ple(&presets::ple_plan(presets::ple_setup(0.0), presets::PLE_RABI_GHZ)).unwrap();
    let high = simulate_single_laser_ple(&presets::ple_plan(presets::ple_setup(7.0), presets::PLE_RABI_GHZ)).unwrap();
    let ratio = zero.max_count() / high.max_count();
    assert!(ratio >= 10.0, "suppression only {ratio}");
}

#[test]
fn zero_rabi_gives_zero_counts() {
    let plan = presets::ple_plan(presets::pumping_setup(), 0.0);
    let s = simulate_single_laser_ple(&plan).unwrap();
    assert!(s.counts().iter().all(|&c| c == 0.0));
    let t = simulate_pumping_transient(&presets::pumping_setup(), &presets::single_pump(0.0), 10.0, 11).unwrap();
    assert!(t.counts().iter().all(|&c| c == 0.0));
}

#[test]
fn second_laser_recovers_the_pumped_line() {
    let setup = presets::ple_setup(7.0);
    let rabi = presets::PLE_RABI_GHZ;
    let probe_alone = simulate_single_laser_ple(&presets::ple_plan(setup.clone(), rabi)).unwrap().max_count();
    let pump = DriveField::new(DriveRole::Pump, presets::TWO_LASER_PUMP_TARGET, 0.0, rabi);
    let pump_alone = steady_signal(&setup, &[pump]).unwrap();
    let on = simulate_two_laser_ple(&presets::two_laser_plan(setup.clone(), rabi, 0.0)).unwrap().max_count();
    assert!(on > probe_alone + pump_alone, "{on} vs {probe_alone} + {pump_alone}");

    let far = simulate_two_laser_ple(&presets::two_laser_plan(setup, rabi, 500.0)).unwrap().max_count();
    assert!(far < 0.1 * on, "detuned pump still recovers {far} of {on}");
}

#[test]
fn swapping_pump_and_probe_mirrors_the_spectrum() {
    let setup = presets::pumping_setup();
    let scheme = build_level_scheme(&setup.zeeman);
    let c = scheme.nominal_transition_offset_ghz(TransitionLabel::UpXdown);
    let plan = ScanPlan {
        setup: setup.clone(),
        axis: ScanAxis::new(c - 40.0, c + 40.0, 1.0),
        scanned: DriveField::new(DriveRole::Probe, TransitionLabel::UpXdown, 0.0, 0.8),
        fixed: vec![DriveField::new(DriveRole::Pump, TransitionLabel::DownXup, 0.0, 0.8)],
    };
    let swapped = ScanPlan {
        setup,
        axis: ScanAxis::new(-c - 40.0, -c + 40.0, 1.0),
        scanned: DriveField::new(DriveRole::Pump, TransitionLabel::DownXup, 0.0, 0.8),
        fixed: vec![DriveField::new(DriveRole::Probe, TransitionLabel::UpXdown, 0.0, 0.8)],
    };
    let a = simulate_two_laser_ple(&plan).unwrap();
    let b = simulate_two_laser_ple(&swapped).unwrap();
    let scale = a.max_count();
    for (k, (&x, &y)) in a.axis().iter().zip(a.counts()).enumerate() {
        let j = b.len() - 1 - k;
        assert!((b.axis()[j] + x).abs() < 1e-9);
        assert!((b.counts()[j] - y).abs() < 1e-8 * scale, "at {x}: {y} vs {}", b.counts()[j]);
    }
}

#[test]
fn dip_sits_one_ground_splitting_from_the_pump() {
    let plan = presets::cpt_plan(presets::cpt_setup(0.0), presets::CPT_PUMP_RABI_GHZ, 0.0);
    let s = simulate_cpt_scan(&plan, 0.0).unwrap();
    let f = fit_peak_with_dip(&s).unwrap();
    let scheme = build_level_scheme(&plan.setup.zeeman);
    let pump_ghz = scheme.nominal_transition_offset_ghz(presets::CPT_PUMP_TARGET);
    let sep_uev = ghz_to_uev(pump_ghz - f.dip_center);
    let dg = ground_splitting(&plan.setup.zeeman).uev;
    assert!((dg - 770.0).abs() < 1.0);
    assert!((sep_uev.abs() - dg.abs()).abs() < 1.0, "{sep_uev} µeV");
    assert!(s.warnings().is_empty(), "{:?}", s.warnings());
}

#[test]
fn dip_follows_a_detuned_pump() {
    let setup = presets::cpt_setup(20.0);
    let at = |delta: f64| {
        let plan = presets::cpt_plan(setup.clone(), presets::CPT_PUMP_RABI_GHZ, delta);
        fit_peak_with_dip(&simulate_cpt_scan(&plan, delta).unwrap()).unwrap().dip_center
    };
    let shift = at(-12.0) - at(0.0);
    assert!((shift + 12.0).abs() < 0.2, "shift {shift}");
}

#[test]
fn expected_dip_tracks_the_two_photon_condition() {
    let plan = presets::cpt_plan(presets::cpt_setup(0.0), 1.0, 7.0);
    let s = simulate_cpt_scan(&plan, 7.0).unwrap();
    let expected: f64 = s.meta["expected_dip_ghz"].parse().unwrap();
    assert!((expected - two_photon_resonance_ghz(&plan).unwrap()).abs() < 1e-9);
}

#[test]
fn weak_pump_dip_reaches_the_hyperfine_floor() {
    let pump = presets::CPT_WEAK_PUMP_RABI_GHZ;
    let setup = presets::cpt_setup(0.0);
    let plan = presets::cpt_plan(setup.clone(), pump, 0.0);
    let f = fit_peak_with_dip(&simulate_cpt_scan(&plan, 0.0).unwrap()).unwrap();
    assert!((0.9..=1.3).contains(&f.dip_fwhm), "dip FWHM {}", f.dip_fwhm);

    let gamma_o = setup.relaxation.optical_hwhm_ghz();
    let w = 2.0 * (CPT_SPIN_DEPHASING_GHZ + (pump.powi(2) + CPT_PROBE_RABI_GHZ.powi(2)) / (4.0 * gamma_o));
    let hf = &setup.ensemble.hyperfine;
    let oracle = lorentzian_comb_fwhm(hf.n_lines(), hf.spacing_mhz * 1e-3, w);
    assert!(((f.dip_fwhm - oracle) / oracle).abs() < 0.1, "fit {} vs oracle {oracle}", f.dip_fwhm);
}

#[test]
fn dip_width_and_contrast_grow_with_pump_power() {
    let setup = presets::cpt_setup(0.0);
    let fits: Vec<_> = presets::CPT_POWER_SERIES_GHZ
        .iter()
        .map(|&p| fit_peak_with_dip(&simulate_cpt_scan(&presets::cpt_plan(setup.clone(), p, 0.0), 0.0).unwrap()).unwrap())
        .collect();
    for w in fits.windows(2) {
        assert!(w[1].dip_fwhm > w[0].dip_fwhm, "{} then {}", w[0].dip_fwhm, w[1].dip_fwhm);
        assert!(w[1].contrast > w[0].contrast, "{} then {}", w[0].contrast, w[1].contrast);
    }
    let wide = presets::cpt_plan(setup, presets::CPT_WIDE_DIP_PUMP_RABI_GHZ, 0.0);
    let f = fit_peak_with_dip(&simulate_cpt_scan(&wide, 0.0).unwrap()).unwrap();
    assert!((f.dip_fwhm - 2.0).abs() < 0.2, "{}", f.dip_fwhm);
}

#[test]
fn pumping_rejects_a_shared_ground_state_pair() {
    let plan = ScanPlan {
        fixed: vec![DriveField::new(DriveRole::Pump, TransitionLabel::UpXup, 0.0, 1.0)],
        ..presets::cpt_plan(presets::cpt_setup(0.0), 1.0, 0.0)
    };
    assert!(simulate_cpt_scan(&plan, 0.0).is_err());
}

/// Slowest relaxation rate of the four-level rate equations for the given
/// drives, in 1/ns.
fn rate_equation_slowest_rate(setup: &donorspec_core::spectroscopy::ExperimentSetup, drive: &DriveField) -> f64 {
    use std::f64::consts::TAU;
    let scheme = build_level_scheme(&setup.zeeman);
    let r = &setup.relaxation;
    let photon = scheme.nominal_transition_offset_ghz(drive.target);
    let gc = TAU * r.optical_hwhm_ghz();
    let v = 0.5 * TAU * drive.rabi_ghz;
    // Index order: Up, Down, Xup, Xdown.
    let mut m = DMatrix::<f64>::zeros(4, 4);
    fn link(m: &mut DMatrix<f64>, i: usize, j: usize, k: f64) {
        m[(j, i)] += k;
        m[(i, i)] -= k;
        m[(i, j)] += k;
        m[(j, j)] -= k;
    }
    for (g, t_x, t_y) in [
        (0, TransitionLabel::UpXup, TransitionLabel::UpXdown),
        (1, TransitionLabel::DownXup, TransitionLabel::DownXdown),
    ] {
        for (x, t) in [(2, t_x), (3, t_y)] {
            let det = TAU * (photon - scheme.nominal_transition_offset_ghz(t));
            link(&mut m, g, x, 2.0 * v * v / gc / (1.0 + (det / gc).powi(2)));
        }
    }
    let gx = TAU * r.gamma_x_ghz;
    for x in [2, 3] {
        m[(0, x)] += gx * r.branch_up;
        m[(1, x)] += gx * (1.0 - r.branch_up);
        m[(x, x)] -= gx;
    }
    link(&mut m, 0, 1, TAU * r.gamma_spin_ghz);
    let mut rates: Vec<f64> = m.complex_eigenvalues().iter().map(|z| -z.re).collect();
    rates.sort_by(f64::total_cmp);
    rates[1]
}

#[test]
fn single_drive_pumps_the_signal_away_at_the_rate_equation_rate() {
    let setup = presets::pumping_setup();
    let drives = presets::single_pump(presets::PUMPING_RABI_GHZ);
    let s = simulate_pumping_transient(&setup, &drives, 200.0, 401).unwrap();
    let c = s.counts();
    let ratio = c[c.len() - 1] / s.max_count();
    assert!(ratio < 0.05, "late/early {ratio}");
    let tail = fit_exponential_tail(s.axis(), c, 20.0).unwrap();
    let oracle = rate_equation_slowest_rate(&setup, &drives[0]);
    assert!(((tail.rate - oracle) / oracle).abs() < 0.1, "fit {} vs oracle {oracle}", tail.rate);
}

#[test]
fn balanced_drives_keep_the_signal() {
    let s = simulate_pumping_transient(&presets::pumping_setup(), &presets::balanced_drives(presets::PUMPING_RABI_GHZ), 200.0, 201)
        .unwrap();
    let c = s.counts();
    let ratio = c[c.len() - 1] / s.max_count();
    assert!(ratio > 0.8, "late/early {ratio}");
    assert_eq!(s.axis_kind(), AxisKind::TimeNs);
}

#[test]
fn magneto_pl_splitting_is_linear_in_field() {
    let z = ZeemanConfig::new(1.90, 0.07, 0.0);
    let pts = simulate_magneto_pl(&z, &[0.0, 1.0, 3.5, 7.0]).unwrap();
    assert_eq!(pts[0].splitting_mev, 0.0);
    for p in &pts {
        assert!((p.splitting_mev * 1e3 - 1.97 * MU_B * p.b_field_t).abs() < 1e-9);
    }
    assert!((pts[3].splitting_mev - 0.798).abs() < 1e-3);
    assert!(simulate_magneto_pl(&z, &[-1.0]).is_err());
}

#[test]
fn polarization_positions_oscillate_with_ninety_degree_period() {
    let z = ZeemanConfig::new(1.91, 0.05, 7.0);
    let lw = PlLinewidth {
        gaussian_sigma_uev: 12.0,
        lorentzian_gamma_uev: 2.0,
    };
    let angles: Vec<f64> = (0..73).map(|k| k as f64 * 2.5).collect();
    let s = simulate_polarization_pl(&z, &angles, &lw, 0.4).unwrap();
    assert!(!s.resolved_doublet);
    let n = s.points.len() as f64;
    let mean_low = s.points.iter().map(|p| p.low_uev).sum::<f64>() / n;
    let mean_high = s.points.iter().map(|p| p.high_uev).sum::<f64>() / n;
    assert!((mean_high - mean_low - 1.91 * MU_B * 7.0).abs() < 1.0);
    let low: Vec<(f64, f64)> = s.points.iter().map(|p| (p.angle_deg, p.low_uev)).collect();
    let fit = fit_sinusoid(&low).unwrap();
    assert!((fit.period_deg - 90.0).abs() < 1.0, "period {}", fit.period_deg);
    assert!(fit.amplitude > 0.0);
    // Each maximum stays between its two components.
    let (lo, hi) = low.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    assert!(hi - lo <= s.excited_splitting_uev.abs() + 0.2, "{} vs {}", hi - lo, s.excited_splitting_uev);
}

fn small_plan(scalar: f64) -> ScanPlan {
    let mut setup = presets::pumping_setup();
    setup.detection_scalar = scalar;
    presets::ple_plan(setup, 0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csv_round_trip_preserves_values(
        start in -1e3f64..1e3,
        steps in prop::collection::vec(1e-3f64..10.0, 1..40),
        counts_seed in prop::collection::vec(0.0f64..1e6, 41),
    ) {
        let mut axis = vec![start];
        for d in &steps {
            axis.push(axis.last().unwrap() + d);
        }
        let counts = counts_seed[..axis.len()].to_vec();
        let s = Spectrum::new(axis, counts, AxisKind::DetuningGhz).unwrap().with_meta("seed", 7);
        let back = Spectrum::from_csv(&s.to_csv()).unwrap();
        prop_assert_eq!(back.len(), s.len());
        for (a, b) in s.axis().iter().zip(back.axis()) {
            prop_assert!((a - b).abs() <= 1e-11 * a.abs().max(1e-300));
        }
        for (a, b) in s.counts().iter().zip(back.counts()) {
            prop_assert!((a - b).abs() <= 1e-11 * a.abs());
        }
        prop_assert_eq!(&back.meta["seed"], "7");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn counts_scale_linearly_with_detection_scalar(k in 0.01f64..100.0) {
        let mut plan = small_plan(1.0);
        plan.axis = ScanAxis::new(plan.axis.start, plan.axis.stop, 10.0);
        let base = simulate_single_laser_ple(&plan).unwrap();
        plan.setup.detection_scalar = k;
        let scaled = simulate_single_laser_ple(&plan).unwrap();
        for (a, b) in base.counts().iter().zip(scaled.counts()) {
            prop_assert!((b - k * a).abs() <= 1e-12 * (k * a).abs().max(1e-300));
        }
    }
}
