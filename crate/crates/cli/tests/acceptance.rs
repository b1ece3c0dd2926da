//! Acceptance criteria 1 to 11. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured values, written straight to the process stderr so
//! the line survives the test harness's output capture.

use std::f64::consts::PI;
use std::io::Write as _;
use std::path::Path;
use std::process::Command;

use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use donorspec_core::analysis::{
    dip_shift_slope, fit_peak_with_dip, fit_polarization_positions, fit_voigt_xy, fit_zeeman_splitting,
    sigma_for_fwhm, voigt_eval, VoigtParams,
};
use donorspec_core::corrections::{
    apply_correction, correction_factor_for_ratio, estimate_phase, flat_modulation, synthesize_oscillation,
    BeamsplitterModel,
};
use donorspec_core::dynamics::{evolve, spectral_gap, steady_state, DensityMatrix};
use donorspec_core::spectroscopy::presets;
use donorspec_core::spectroscopy::{
    simulate_cpt_scan, simulate_single_laser_ple, simulate_two_laser_ple, steady_signal, AxisKind, Spectrum,
};
use donorspec_core::spinmodel::config::ground_splitting;
use donorspec_core::spinmodel::constants::ghz_to_uev;
use donorspec_core::spinmodel::{
    build_level_scheme, build_liouvillian, DriveField, DriveRole, ModelKind, RelaxationConfig, TransitionLabel,
    ZeemanConfig,
};

const MU_B_UEV_PER_T: f64 = 57.8838;

struct Report {
    number: u32,
    title: &'static str,
    checks: Vec<(String, bool)>,
}

impl Report {
    fn new(number: u32, title: &'static str) -> Self {
        Self {
            number,
            title,
            checks: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        self.checks.push((detail.into(), ok));
    }

    fn finish(self) {
        let pass = self.checks.iter().all(|(_, ok)| *ok);
        let details: Vec<String> = self
            .checks
            .iter()
            .map(|(d, ok)| format!("{d} [{}]", if *ok { "ok" } else { "FAIL" }))
            .collect();
        let line = format!(
            "\ncriterion {:>2}: {} ({}): {}\n",
            self.number,
            if pass { "PASS" } else { "FAIL" },
            self.title,
            details.join("; ")
        );
        let _ = std::io::stderr().write_all(line.as_bytes());
        assert!(pass, "{}", line.trim_end());
    }
}

fn cpt_fit(setup: &donorspec_core::spectroscopy::ExperimentSetup, pump_rabi: f64, delta: f64) -> donorspec_core::analysis::PeakDipFit {
    let plan = presets::cpt_plan(setup.clone(), pump_rabi, delta);
    fit_peak_with_dip(&simulate_cpt_scan(&plan, delta).unwrap()).unwrap()
}

/// Numeric FWHM of a comb of `n` equal Lorentzians (FWHM `w`) at spacing `a`.
fn lorentzian_comb_fwhm(n: usize, a: f64, w: f64) -> f64 {
    let offsets: Vec<f64> = (0..n).map(|k| (k as f64 - 0.5 * (n - 1) as f64) * a).collect();
    let f = |x: f64| -> f64 { offsets.iter().map(|o| 1.0 / (1.0 + (2.0 * (x - o) / w).powi(2))).sum() };
    let half = 0.5 * f(0.0).max(f(0.5 * a));
    let (mut lo, mut hi) = (0.0, 0.5 * n as f64 * a + 20.0 * w);
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
fn criterion_01_zeeman_closure() {
    let mut r = Report::new(1, "Zeeman closure");
    let z = ZeemanConfig::new(1.90, presets::G_H, 7.0);
    let dg_mev = ground_splitting(&z).mev();
    let oracle_mev = 1.90 * MU_B_UEV_PER_T * 7.0 * 1e-3;
    r.check((dg_mev - 0.770).abs() <= 0.001, format!("ground splitting {dg_mev:.5} meV"));
    r.check((dg_mev - oracle_mev).abs() < 1e-9, format!("g·μB·B {oracle_mev:.5} meV"));

    let plan = presets::cpt_plan(presets::cpt_setup(0.0), presets::CPT_PUMP_RABI_GHZ, 0.0);
    let s = simulate_cpt_scan(&plan, 0.0).unwrap();
    let f = fit_peak_with_dip(&s).unwrap();
    let pump = build_level_scheme(&plan.setup.zeeman).nominal_transition_offset_ghz(presets::CPT_PUMP_TARGET);
    let sep_uev = ghz_to_uev(pump - f.dip_center).abs();
    r.check(
        (sep_uev - dg_mev * 1e3).abs() < 1.0,
        format!("dip-to-pump separation {sep_uev:.3} µeV"),
    );
    r.finish();
}

#[test]
fn criterion_02_cpt_one_to_one_shift() {
    let mut r = Report::new(2, "CPT one-to-one shift");
    // Excited-only spectral diffusion as in criterion 6.
    let setup = presets::cpt_setup(20.0);
    let scans: Vec<(f64, Spectrum)> = [-20.0, -10.0, 0.0, 10.0, 20.0]
        .iter()
        .map(|&d| {
            let plan = presets::cpt_plan(setup.clone(), presets::CPT_PUMP_RABI_GHZ, d);
            (d, simulate_cpt_scan(&plan, d).unwrap())
        })
        .collect();
    let slope = dip_shift_slope(&scans).unwrap().dip.slope;
    r.check((slope - 1.0).abs() <= 0.02, format!("dip slope {slope:.4}"));
    r.finish();
}

#[test]
fn criterion_03_hyperfine_floor() {
    let mut r = Report::new(3, "hyperfine floor");
    let setup = presets::cpt_setup(0.0);
    let hf = &setup.ensemble.hyperfine;
    r.check(
        hf.n_lines() == 10 && (hf.spacing_mhz - 100.0).abs() < 1e-12,
        format!("{} lines at {} MHz", hf.n_lines(), hf.spacing_mhz),
    );
    let pump = presets::CPT_WEAK_PUMP_RABI_GHZ;
    let f = cpt_fit(&setup, pump, 0.0);
    r.check((0.9..=1.3).contains(&f.dip_fwhm), format!("dip FWHM {:.4} GHz at pump Rabi {pump}", f.dip_fwhm));
    let gamma_o = setup.relaxation.optical_hwhm_ghz();
    let w = 2.0
        * (presets::CPT_SPIN_DEPHASING_GHZ + (pump.powi(2) + presets::CPT_PROBE_RABI_GHZ.powi(2)) / (4.0 * gamma_o));
    let oracle = lorentzian_comb_fwhm(hf.n_lines(), hf.spacing_mhz * 1e-3, w);
    let rel = (f.dip_fwhm - oracle) / oracle;
    r.check(rel.abs() < 0.1, format!("comb oracle {oracle:.4} GHz ({:+.1}%)", 100.0 * rel));
    r.finish();
}

#[test]
fn criterion_04_cpt_power_law() {
    let mut r = Report::new(4, "CPT power law");
    let setup = presets::cpt_setup(0.0);
    let mut rabis = vec![presets::CPT_WEAK_PUMP_RABI_GHZ];
    rabis.extend(presets::CPT_POWER_SERIES_GHZ);
    let span = rabis[rabis.len() - 1] / rabis[0];
    r.check(span >= 10.0, format!("Rabi span {span:.1}x"));
    let fits: Vec<_> = rabis.iter().map(|&p| cpt_fit(&setup, p, 0.0)).collect();
    let widths: Vec<String> = fits.iter().map(|f| format!("{:.3}", f.dip_fwhm)).collect();
    let contrasts: Vec<String> = fits.iter().map(|f| format!("{:.3}", f.contrast)).collect();
    r.check(
        fits.windows(2).all(|w| w[1].dip_fwhm > w[0].dip_fwhm),
        format!("FWHM [{}]", widths.join(", ")),
    );
    r.check(
        fits.windows(2).all(|w| w[1].contrast > w[0].contrast),
        format!("contrast [{}]", contrasts.join(", ")),
    );
    r.check((0.9..=1.3).contains(&fits[0].dip_fwhm), "low-power FWHM on the floor");
    r.finish();
}

#[test]
fn criterion_05_optical_pumping() {
    let mut r = Report::new(5, "optical pumping");
    let setup = presets::ple_setup(presets::B_FIELD_T);
    let rabi = presets::PLE_RABI_GHZ;
    let probe_alone = simulate_single_laser_ple(&presets::ple_plan(setup.clone(), rabi)).unwrap().max_count();
    let pump = DriveField::new(DriveRole::Pump, presets::TWO_LASER_PUMP_TARGET, 0.0, rabi);
    let pump_alone = steady_signal(&setup, &[pump]).unwrap();
    let both = simulate_two_laser_ple(&presets::two_laser_plan(setup, rabi, 0.0)).unwrap().max_count();
    let ratio = both / (probe_alone + pump_alone);
    r.check(
        ratio >= 3.0,
        format!("two-laser {both:.3e} vs {probe_alone:.3e} + {pump_alone:.3e}, ratio {ratio:.1}"),
    );
    r.finish();
}

#[test]
fn criterion_06_spectral_diffusion_discriminator() {
    let mut r = Report::new(6, "spectral-diffusion discriminator");
    let narrow = cpt_fit(&presets::cpt_setup(0.0), presets::CPT_PUMP_RABI_GHZ, 0.0);
    let broad = cpt_fit(&presets::cpt_setup(20.0), presets::CPT_PUMP_RABI_GHZ, 0.0);
    r.check(broad.peak_fwhm >= 45.0, format!("peak FWHM {:.1} GHz", broad.peak_fwhm));
    let change = (broad.dip_fwhm - narrow.dip_fwhm) / narrow.dip_fwhm;
    r.check(
        change.abs() < 0.05,
        format!("dip FWHM {:.4} -> {:.4} GHz ({:+.2}%)", narrow.dip_fwhm, broad.dip_fwhm, 100.0 * change),
    );
    r.finish();
}

#[test]
fn criterion_07_gfactor_round_trips() {
    let mut r = Report::new(7, "g-factor round trips");
    let pts: Vec<(f64, f64)> = (0..15).map(|k| {
        let b = 0.5 * k as f64;
        (b, 1.97 * MU_B_UEV_PER_T * b * 1e-3)
    }).collect();
    let z = fit_zeeman_splitting(&pts).unwrap();
    r.check((z.g_tot - 1.97).abs() < 1e-4, format!("g_tot {:.6}", z.g_tot));

    let (g_e, g_h, b) = (1.91, 0.05, 7.0);
    let (dg, dh) = (g_e * MU_B_UEV_PER_T * b, g_h * MU_B_UEV_PER_T * b);
    let peaks: Vec<Vec<(f64, f64)>> = [-0.5 * dg, 0.5 * dg]
        .iter()
        .map(|&c| (0..37).map(|k| {
            let phi = 5.0 * k as f64;
            (phi, c + dh * (2.0 * PI * phi / 90.0 + 0.4).sin())
        }).collect())
        .collect();
    let p = fit_polarization_positions(&peaks, b).unwrap();
    r.check(((p.g_e_perp - g_e) / g_e).abs() < 0.01, format!("g_e⊥ {:.4}", p.g_e_perp));
    r.check(
        ((p.g_h_perp_lower_bound - g_h) / g_h).abs() < 0.01,
        format!("g_h⊥ {:.4}", p.g_h_perp_lower_bound),
    );
    let periods: Vec<String> = p.peaks.iter().map(|s| format!("{:.3}", s.period_deg)).collect();
    r.check(
        p.peaks.iter().all(|s| (s.period_deg - 90.0).abs() <= 1.0),
        format!("periods [{}] deg", periods.join(", ")),
    );
    r.finish();
}

#[test]
fn criterion_08_lineshape_round_trips() {
    let mut r = Report::new(8, "lineshape round trips");
    for (i, &target) in [2.0, 20.0, 55.0, 57.0].iter().enumerate() {
        // Same relative geometry for every width: γ = 7% of the FWHM and a
        // ±2.6 FWHM window sampled at FWHM/57.
        let gamma = 4.0 / 57.0 * target;
        let truth = VoigtParams::new(0.1 * target, sigma_for_fwhm(target, gamma).unwrap(), gamma, 1.0, 0.05);
        let step = target / 57.0;
        let x: Vec<f64> = (-150..=150).map(|k| k as f64 * step).collect();
        let clean: Vec<f64> = x.iter().map(|&x| voigt_eval(&truth, x)).collect();
        let f = fit_voigt_xy(&x, &clean, None).unwrap();
        let err = (f.fwhm - target) / target;
        r.check(err.abs() < 1e-3, format!("{target} GHz noiseless {:+.4}%", 100.0 * err));

        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let trials = 50;
        let mean = (0..trials)
            .map(|_| {
                let y: Vec<f64> = clean.iter().map(|c| c + noise.sample(&mut rng)).collect();
                fit_voigt_xy(&x, &y, None).unwrap().fwhm
            })
            .sum::<f64>()
            / trials as f64;
        let bias = (mean - target) / target;
        r.check(bias.abs() < 0.01, format!("1% noise bias {:+.3}%", 100.0 * bias));
    }
    r.finish();
}

#[test]
fn criterion_09_background_correction() {
    let mut r = Report::new(9, "background correction");
    let e0 = 3.3550;
    let x: Vec<f64> = (0..1001).map(|k| e0 + k as f64 * 2e-6).collect();
    let peak = VoigtParams::new(e0 + 1e-3, 40e-6, 20e-6, 1000.0, 100.0);
    let ideal = Spectrum::new(x.clone(), x.iter().map(|&e| voigt_eval(&peak, e)).collect(), AxisKind::EnergyEv).unwrap();
    let truth = BeamsplitterModel::default().with_phase(1.0);
    let measured = synthesize_oscillation(&ideal, &truth).unwrap();
    let windows = [(e0, e0 + 0.5e-3), (e0 + 1.5e-3, e0 + 2e-3)];
    let phase = estimate_phase(&measured, &windows, &BeamsplitterModel::default()).unwrap().phase().unwrap();
    let corrected = apply_correction(&measured, &BeamsplitterModel::default().with_phase(phase)).unwrap();
    let rms = (ideal.counts().iter().zip(corrected.counts()).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        / ideal.len() as f64)
        .sqrt();
    let rel = rms / ideal.max_count();
    r.check(rel < 0.01, format!("round-trip residual {:.3}% of peak (phase {phase:.4})", 100.0 * rel));

    let m = flat_modulation(&BeamsplitterModel::default()).unwrap();
    r.check((m - 0.18).abs() <= 0.005, format!("flat modulation {:.2}% peak to peak", 100.0 * m));

    let cf = correction_factor_for_ratio(0.58, BeamsplitterModel::default().mean_reflectance);
    r.check((cf - 0.9807).abs() <= 1e-4, format!("CF(0.58) {cf:.5}"));
    r.finish();
}

/// Random model: field, g-factors, rates and one or two drives on distinct
/// ground states.
fn random_model() -> impl Strategy<Value = (ZeemanConfig, RelaxationConfig, Vec<DriveField>, ModelKind, f64)> {
    let zeeman = (0.0f64..10.0, 0.5f64..3.0, 0.0f64..0.5).prop_map(|(b, ge, gh)| ZeemanConfig::new(ge, gh, b));
    let relax = (0.1f64..2.0, 0.0f64..=1.0, 1e-3f64..0.1, 0.0f64..5.0, 0.0f64..0.5).prop_map(|(gx, br, gs, dop, dsp)| {
        RelaxationConfig {
            gamma_x_ghz: gx,
            branch_up: br,
            gamma_spin_ghz: gs,
            gamma_deph_opt_ghz: dop,
            gamma_deph_spin_ghz: dsp,
        }
    });
    let drive = |role| {
        (0usize..4, -30.0f64..30.0, 0.0f64..3.0)
            .prop_map(move |(k, det, rabi)| DriveField::new(role, TransitionLabel::ALL[k], det, rabi))
    };
    let drives = (drive(DriveRole::Pump), drive(DriveRole::Probe), any::<bool>()).prop_map(|(p, q, two)| {
        if two && p.target.ground() != q.target.ground() {
            vec![p, q]
        } else {
            vec![p]
        }
    });
    let kind = prop_oneof![Just(ModelKind::Lambda), Just(ModelKind::Full)];
    (zeeman, relax, drives, kind, 0.0f64..20.0)
}

/// Independent tolerance check on a returned state.
fn physical(rho: &DensityMatrix) -> Result<(), String> {
    let m = rho.matrix();
    let herm = (m - m.adjoint()).camax();
    let tr = m.trace();
    let h = (m + m.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
    let min_eig = SymmetricEigen::new(h).eigenvalues.min();
    if herm > 1e-10 || (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 || min_eig < -1e-8 {
        return Err(format!("hermiticity {herm:.2e}, trace {tr}, min eigenvalue {min_eig:.2e}"));
    }
    Ok(())
}

#[test]
fn criterion_10_solver_properties() {
    let mut r = Report::new(10, "solver properties");
    let config = ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        ..ProptestConfig::default()
    };
    let mut runner = TestRunner::new_with_rng(config.clone(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let outcome = runner.run(&random_model(), |(zeeman, relax, drives, kind, t)| {
        let scheme = build_level_scheme(&zeeman);
        let l = build_liouvillian(&scheme, &drives, &relax, 0.0, kind).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let ss = steady_state(&l).map_err(|e| TestCaseError::fail(e.to_string()))?;
        physical(&ss).map_err(TestCaseError::fail)?;
        let rho = evolve(&l, &DensityMatrix::thermal_ground(kind.dim()).unwrap(), t)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        physical(&rho).map_err(TestCaseError::fail)?;
        Ok(())
    });
    r.check(
        outcome.is_ok(),
        match &outcome {
            Ok(()) => "1000 random models physical".to_string(),
            Err(e) => format!("random models: {e}"),
        },
    );

    // Long-time agreement; slow spin rates make 50/gap impractically long,
    // so this subset keeps γ_spin ≥ 0.01 GHz.
    let mut runner = TestRunner::new_with_rng(
        ProptestConfig { cases: 25, ..config },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let worst = std::cell::Cell::new(0.0f64);
    let outcome = runner.run(&random_model(), |(zeeman, mut relax, drives, kind, _)| {
        relax.gamma_spin_ghz = relax.gamma_spin_ghz.max(0.01);
        let l = build_liouvillian(&build_level_scheme(&zeeman), &drives, &relax, 0.0, kind)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let ss = steady_state(&l).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let gap = spectral_gap(&l).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let rho = evolve(&l, &DensityMatrix::thermal_ground(kind.dim()).unwrap(), 50.0 / gap)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let d = ss.trace_distance(&rho);
        worst.set(worst.get().max(d));
        prop_assert!(d < 1e-6, "trace distance {d:.2e}");
        Ok(())
    });
    r.check(
        outcome.is_ok(),
        match &outcome {
            Ok(()) => format!("steady state vs evolve at 50/gap: worst {:.1e}", worst.get()),
            Err(e) => format!("steady state vs evolve: {e}"),
        },
    );

    let relax = RelaxationConfig {
        gamma_spin_ghz: 0.0,
        ..RelaxationConfig::default()
    };
    let scheme = build_level_scheme(&ZeemanConfig::new(presets::G_E, presets::G_H, presets::B_FIELD_T));
    let mut worst_dark = 0.0f64;
    for (rp, rq, det) in [(0.8, 0.8, 0.0), (2.0, 0.5, 5.0), (0.3, 1.7, -12.0)] {
        // Equal detunings keep the two-photon resonance.
        let p = DriveField::new(DriveRole::Pump, presets::CPT_PUMP_TARGET, det, rp);
        let q = DriveField::new(DriveRole::Probe, presets::CPT_PROBE_TARGET, det, rq);
        let l = build_liouvillian(&scheme, &[p, q], &relax, 0.0, ModelKind::Lambda).unwrap();
        let ss = steady_state(&l).unwrap();
        worst_dark = worst_dark.max(ss.population(2).abs());
    }
    r.check(worst_dark < 1e-8, format!("dark-state excited population {worst_dark:.1e}"));
    r.finish();
}

fn cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_donorspec"))
        .current_dir(dir)
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

#[test]
fn criterion_11_determinism() {
    let mut r = Report::new(11, "determinism");
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let committed = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/simulate-cpt.json");
    let mut cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(committed).unwrap()).unwrap();
    cfg["noise_fraction"] = serde_json::json!(0.02);
    std::fs::write(d.join("noisy.json"), cfg.to_string()).unwrap();
    let runs: [(&str, Vec<&str>); 4] = [
        ("simulate-ple", vec!["simulate-ple", "--seed", "9"]),
        ("simulate-cpt", vec!["simulate-cpt", "--config", "noisy.json", "--seed", "9", "--pump-detuning-ghz", "3"]),
        ("simulate-polarization", vec!["simulate-polarization", "--seed", "9"]),
        ("fit-voigt", vec!["fit-voigt", "--seed", "9", "--input", "first_simulate-ple"]),
    ];
    for (name, args) in runs {
        let mut outputs = Vec::new();
        for pass in ["first", "second"] {
            let out = format!("{pass}_{name}");
            let mut a: Vec<&str> = args.clone();
            a.extend(["--out", &out]);
            let ok = cli(d, &a);
            outputs.push(if ok { std::fs::read(d.join(&out)).ok() } else { None });
        }
        let same = outputs[0].is_some() && outputs[0] == outputs[1];
        r.check(same, format!("{name} byte-identical"));
    }
    r.finish();
}
