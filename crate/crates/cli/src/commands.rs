//! One handler per subcommand. Each takes a validated configuration and
//! writes its outputs; the returned string is a one-line summary.

use std::path::Path;

use serde::{Deserialize, Serialize};

use donorspec_core::analysis::{
    dip_shift_slope, fit_peak_with_dip, fit_polarization_positions, fit_voigt, fit_zeeman_splitting, voigt_eval,
    PolarizationFit, ZeemanFit,
};
use donorspec_core::corrections::{apply_correction, estimate_phase, BeamsplitterModel, PhaseEstimate};
use donorspec_core::spectroscopy::{
    simulate_cpt_scan, simulate_magneto_pl, simulate_polarization_pl, simulate_pumping_transient,
    simulate_single_laser_ple, simulate_two_laser_ple, AxisKind, PlLinewidth, PolarizationScan, Spectrum,
};

use crate::config::{Experiment, RunConfig};
use crate::error::CliError;
use crate::output::{read_spectrum, svg_path, write_atomic, write_json, write_spectrum};
use crate::plot::{render, Series};

pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.experiment {
        Experiment::SimulatePle
        | Experiment::SimulateTwoLaser
        | Experiment::SimulateCpt
        | Experiment::SimulatePumping => simulate_spectrum(cfg),
        Experiment::SimulateMagneto => simulate_magneto(cfg),
        Experiment::SimulatePolarization => simulate_polarization(cfg),
        Experiment::FitVoigt => fit_voigt_cmd(cfg),
        Experiment::FitCpt => fit_cpt_cmd(cfg),
        Experiment::CorrectBackground => correct_background(cfg),
        Experiment::ExtractGfactors => extract_gfactors(cfg),
        Experiment::DipSlope => dip_slope(cfg),
    }
}

fn axis_label(kind: AxisKind) -> String {
    format!("{} ({})", kind.as_str(), kind.units())
}

fn maybe_plot(cfg: &RunConfig, out: &Path, title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Result<(), CliError> {
    if cfg.plot {
        write_atomic(&svg_path(out), &render(title, x_label, y_label, series))?;
    }
    Ok(())
}

fn single_input(cfg: &RunConfig) -> Result<Spectrum, CliError> {
    match cfg.inputs.as_slice() {
        [one] => read_spectrum(one),
        other => Err(CliError::Config(format!(
            "{} takes exactly one input, got {}",
            cfg.experiment,
            other.len()
        ))),
    }
}

fn missing(name: &str) -> CliError {
    CliError::Config(format!("field `{name}` is required"))
}

fn simulate_spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    let s = match cfg.experiment {
        Experiment::SimulatePle => simulate_single_laser_ple(cfg.plan.as_ref().ok_or_else(|| missing("plan"))?),
        Experiment::SimulateTwoLaser => simulate_two_laser_ple(cfg.plan.as_ref().ok_or_else(|| missing("plan"))?),
        Experiment::SimulateCpt => simulate_cpt_scan(
            cfg.plan.as_ref().ok_or_else(|| missing("plan"))?,
            cfg.pump_detuning_ghz.ok_or_else(|| missing("pump_detuning_ghz"))?,
        ),
        _ => simulate_pumping_transient(
            cfg.setup.as_ref().ok_or_else(|| missing("setup"))?,
            cfg.drives.as_deref().ok_or_else(|| missing("drives"))?,
            cfg.duration_ns.ok_or_else(|| missing("duration_ns"))?,
            cfg.n_points.ok_or_else(|| missing("n_points"))?,
        ),
    }
    .map_err(CliError::compute)?;
    let s = match cfg.noise_fraction {
        Some(f) if f > 0.0 => s.with_noise(f, cfg.seed).map_err(CliError::compute)?,
        _ => s,
    };
    for w in s.warnings() {
        eprintln!("warning: {w}");
    }
    let out = cfg.output_path();
    let s = write_spectrum(&out, s, cfg)?;
    maybe_plot(
        cfg,
        &out,
        cfg.experiment.name(),
        &axis_label(s.axis_kind()),
        "signal (arb.)",
        &[Series::data("simulated", s.axis(), s.counts())],
    )?;
    Ok(format!("wrote {} ({} points)", out.display(), s.len()))
}

fn simulate_magneto(cfg: &RunConfig) -> Result<String, CliError> {
    let z = cfg.zeeman.as_ref().ok_or_else(|| missing("zeeman"))?;
    let fields = cfg.fields_t.as_deref().ok_or_else(|| missing("fields_t"))?;
    let pts = simulate_magneto_pl(z, fields).map_err(CliError::compute)?;
    let s = Spectrum::new(
        pts.iter().map(|p| p.b_field_t).collect(),
        pts.iter().map(|p| p.splitting_mev).collect(),
        AxisKind::FieldT,
    )
    .map_err(CliError::compute)?
    .with_meta("experiment", "magneto_pl")
    .with_meta("counts_quantity", "outer_pair_splitting_mev")
    .with_meta("g_e", z.g_e)
    .with_meta("g_h", z.g_h);
    let out = cfg.output_path();
    let s = write_spectrum(&out, s, cfg)?;
    maybe_plot(
        cfg,
        &out,
        "Zeeman splitting",
        &axis_label(AxisKind::FieldT),
        "splitting (meV)",
        &[Series::data("outer pair", s.axis(), s.counts())],
    )?;
    Ok(format!("wrote {} ({} fields)", out.display(), s.len()))
}

/// JSON written by `simulate-polarization` and read by `extract-gfactors`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarizationOutput {
    pub b_field_t: f64,
    pub g_e: f64,
    pub g_h: f64,
    pub phi0_rad: f64,
    pub linewidth: PlLinewidth,
    pub scan: PolarizationScan,
}

fn simulate_polarization(cfg: &RunConfig) -> Result<String, CliError> {
    let z = cfg.zeeman.as_ref().ok_or_else(|| missing("zeeman"))?;
    let angles = cfg.angles_deg.as_deref().ok_or_else(|| missing("angles_deg"))?;
    let lw = cfg.linewidth.ok_or_else(|| missing("linewidth"))?;
    let phi0 = cfg.phi0_rad.unwrap_or(0.0);
    let scan = simulate_polarization_pl(z, angles, &lw, phi0).map_err(CliError::compute)?;
    if scan.resolved_doublet {
        eprintln!("warning: linewidth resolves the excited doublet; peak positions are not a single-line model");
    }
    let out = cfg.output_path();
    let result = PolarizationOutput {
        b_field_t: z.b_field_t,
        g_e: z.g_e,
        g_h: z.g_h,
        phi0_rad: phi0,
        linewidth: lw,
        scan,
    };
    write_json(&out, &result, cfg)?;
    let ang: Vec<f64> = result.scan.points.iter().map(|p| p.angle_deg).collect();
    let lo: Vec<f64> = result.scan.points.iter().map(|p| p.low_uev).collect();
    let hi: Vec<f64> = result.scan.points.iter().map(|p| p.high_uev).collect();
    let mut high = Series::data("high-energy peak", &ang, &hi);
    high.color = "#c0392b";
    maybe_plot(
        cfg,
        &out,
        "PL peak positions",
        "waveplate angle (deg)",
        "position − E0 (µeV)",
        &[Series::data("low-energy peak", &ang, &lo), high],
    )?;
    Ok(format!("wrote {} ({} angles)", out.display(), ang.len()))
}

fn fit_voigt_cmd(cfg: &RunConfig) -> Result<String, CliError> {
    let s = single_input(cfg)?;
    let fit = fit_voigt(&s, None).map_err(CliError::compute)?;
    let out = cfg.output_path();
    write_json(&out, &fit, cfg)?;
    let p = fit.params;
    maybe_plot(
        cfg,
        &out,
        "Voigt fit",
        &axis_label(s.axis_kind()),
        "counts",
        &[Series::data("data", s.axis(), s.counts()), Series::model("Voigt fit", s.axis(), |x| voigt_eval(&p, x))],
    )?;
    Ok(format!("FWHM {:.6} ± {:.2e} (converged: {})", fit.fwhm, fit.fwhm_uncertainty, fit.converged))
}

fn fit_cpt_cmd(cfg: &RunConfig) -> Result<String, CliError> {
    let s = single_input(cfg)?;
    let fit = fit_peak_with_dip(&s).map_err(CliError::compute)?;
    let out = cfg.output_path();
    write_json(&out, &fit, cfg)?;
    let p = fit.fit.params;
    maybe_plot(
        cfg,
        &out,
        "Peak + dip fit",
        &axis_label(s.axis_kind()),
        "counts",
        &[Series::data("data", s.axis(), s.counts()), Series::model("peak + dip fit", s.axis(), |x| p.eval(x))],
    )?;
    Ok(format!(
        "dip center {:.4} FWHM {:.4}; peak FWHM {:.3}; contrast {:.4}",
        fit.dip_center, fit.dip_fwhm, fit.peak_fwhm, fit.contrast
    ))
}

fn correct_background(cfg: &RunConfig) -> Result<String, CliError> {
    let s = single_input(cfg)?;
    let model = cfg.beamsplitter.unwrap_or_default();
    let windows: Vec<(f64, f64)> = cfg.background_windows.iter().map(|w| (w[0], w[1])).collect();
    let est = estimate_phase(&s, &windows, &model).map_err(|e| match e {
        donorspec_core::corrections::CorrectionError::Fit(m) => CliError::Compute(m),
        other => CliError::Config(other.to_string()),
    })?;
    let (corrected, summary) = match est {
        PhaseEstimate::Detected {
            phase_rad, amplitude, ..
        } => {
            let m = BeamsplitterModel { phase_rad, ..model };
            let c = apply_correction(&s, &m)
                .map_err(CliError::compute)?
                .with_meta("correction_status", "applied")
                .with_meta("correction_fit_amplitude", amplitude);
            (c, format!("phase {phase_rad:.4} rad, correction applied"))
        }
        PhaseEstimate::NoOscillation { amplitude, .. } => {
            eprintln!("warning: no oscillation detected in the background windows; counts left unchanged");
            let c = s
                .clone()
                .with_meta("correction_status", "no_oscillation")
                .with_meta("correction_fit_amplitude", amplitude);
            (c, "no oscillation detected, counts unchanged".to_string())
        }
    };
    let out = cfg.output_path();
    let corrected = write_spectrum(&out, corrected, cfg)?;
    let mut fixed = Series::data("corrected", corrected.axis(), corrected.counts());
    fixed.color = "#c0392b";
    maybe_plot(
        cfg,
        &out,
        "Background correction",
        &axis_label(s.axis_kind()),
        "counts",
        &[Series::data("measured", s.axis(), s.counts()), fixed],
    )?;
    Ok(format!("wrote {}: {summary}", out.display()))
}

#[derive(Debug, Serialize)]
struct GFactors {
    #[serde(skip_serializing_if = "Option::is_none")]
    zeeman: Option<ZeemanFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    polarization: Option<PolarizationFit>,
}

#[derive(Deserialize)]
struct PolarizationEnvelope {
    result: PolarizationOutput,
}

fn extract_gfactors(cfg: &RunConfig) -> Result<String, CliError> {
    let mut res = GFactors {
        zeeman: None,
        polarization: None,
    };
    let mut series = Vec::new();
    for path in &cfg.inputs {
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            if res.polarization.is_some() {
                return Err(CliError::Config("more than one polarization input".into()));
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read input {}: {e}", path.display())))?;
            let env: PolarizationEnvelope = serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
            })?;
            let pts = &env.result.scan.points;
            let low: Vec<(f64, f64)> = pts.iter().map(|p| (p.angle_deg, p.low_uev)).collect();
            let high: Vec<(f64, f64)> = pts.iter().map(|p| (p.angle_deg, p.high_uev)).collect();
            let fit = fit_polarization_positions(&[low, high], env.result.b_field_t).map_err(CliError::compute)?;
            res.polarization = Some(fit);
        } else {
            if res.zeeman.is_some() {
                return Err(CliError::Config("more than one magneto-PL input".into()));
            }
            let s = read_spectrum(path)?;
            if s.axis_kind() != AxisKind::FieldT {
                return Err(CliError::Config(format!(
                    "{}: expected a field_t axis, got {}",
                    path.display(),
                    s.axis_kind().as_str()
                )));
            }
            let pts: Vec<(f64, f64)> = s.axis().iter().copied().zip(s.counts().iter().copied()).collect();
            let fit = fit_zeeman_splitting(&pts).map_err(CliError::compute)?;
            let slope_mev = fit.slope_uev_per_t * 1e-3;
            series.push(Series::data("splitting", s.axis(), s.counts()));
            series.push(Series::model("g_tot fit", s.axis(), |b| slope_mev * b));
            res.zeeman = Some(fit);
        }
    }
    let out = cfg.output_path();
    write_json(&out, &res, cfg)?;
    maybe_plot(cfg, &out, "Zeeman splitting", &axis_label(AxisKind::FieldT), "splitting (meV)", &series)?;
    let mut parts = Vec::new();
    if let Some(z) = &res.zeeman {
        parts.push(format!("g_tot {:.5} ± {:.1e}", z.g_tot, z.g_tot_uncertainty));
    }
    if let Some(p) = &res.polarization {
        parts.push(format!("g_e⊥ {:.4}, g_h⊥ ≥ {:.4}", p.g_e_perp, p.g_h_perp_lower_bound));
    }
    Ok(parts.join("; "))
}

fn dip_slope(cfg: &RunConfig) -> Result<String, CliError> {
    let mut scans = Vec::new();
    for path in &cfg.inputs {
        let s = read_spectrum(path)?;
        let delta: f64 = s
            .meta
            .get("pump_detuning_ghz")
            .ok_or_else(|| CliError::Config(format!("{}: no pump_detuning_ghz metadata", path.display())))?
            .parse()
            .map_err(|e| CliError::Config(format!("{}: bad pump_detuning_ghz: {e}", path.display())))?;
        scans.push((delta, s));
    }
    let res = dip_shift_slope(&scans).map_err(CliError::compute)?;
    let out = cfg.output_path();
    write_json(&out, &res, cfg)?;
    let (a, b) = (res.dip.slope, res.dip.intercept);
    maybe_plot(
        cfg,
        &out,
        "Dip center vs pump detuning",
        "pump detuning (GHz)",
        "dip center (GHz)",
        &[
            Series::data("dip centers", &res.detunings_ghz, &res.dip_centers),
            Series::model("linear fit", &res.detunings_ghz, |x| a * x + b),
        ],
    )?;
    Ok(format!(
        "dip slope {:.4} ± {:.4}; peak slope {:.4} ± {:.4}",
        res.dip.slope, res.dip.slope_uncertainty, res.peak.slope, res.peak.slope_uncertainty
    ))
}
