//! Laser-scan and transient drivers.
//!
//! The signal proxy is Γ_X × (total D0X population) × detection scalar,
//! averaged over the ensemble. Scan positions are photon energies relative
//! to the zero-field line in GHz.

use super::plan::{ExperimentSetup, ScanPlan};
use super::{AxisKind, Spectrum, SpectroscopyError};
use crate::dynamics::{average_over, ensemble_samples, evolve_trajectory, steady_state, DensityMatrix, DynamicsError};
use crate::spinmodel::{
    build_level_scheme, build_liouvillian, DriveEnergy, DriveField, DriveRole, GroundLabel, Level, LevelScheme,
    LiouvillianModel,
};

fn emission(model: &LiouvillianModel, rho: &DensityMatrix) -> f64 {
    let pop: f64 = model.excited_indices().iter().map(|&i| rho.population(i)).sum();
    model.gamma_x_ghz * pop.max(0.0)
}

/// Retarget a drive to an absolute photon energy (GHz from E0), expressed as
/// a detuning from its target's nominal transition.
fn at_photon(scheme: &LevelScheme, d: &DriveField, photon_ghz: f64) -> DriveField {
    DriveField {
        energy: DriveEnergy::DetuningGhz(photon_ghz - scheme.nominal_transition_offset_ghz(d.target)),
        ..*d
    }
}

/// Steady-state signal of one ensemble member for each drive configuration.
fn steady_signals(
    setup: &ExperimentSetup,
    configs: &[Vec<DriveField>],
) -> Result<Vec<f64>, SpectroscopyError> {
    setup.validate()?;
    let base = build_level_scheme(&setup.zeeman);
    let samples = ensemble_samples(&setup.ensemble)?;
    let avg = average_over(&samples, |s| {
        let (exc, split) = s.scheme_shifts();
        let scheme = base.shifted(exc, split);
        configs
            .iter()
            .map(|drives| {
                if drives.iter().all(|d| d.rabi_ghz == 0.0) {
                    return Ok(0.0);
                }
                let l = build_liouvillian(&scheme, drives, &setup.relaxation, s.hf_shift_ghz, setup.model)?;
                let rho = steady_state(&l)?;
                Ok(emission(&l, &rho))
            })
            .collect::<Result<Vec<f64>, DynamicsError>>()
    })?;
    Ok(avg.into_iter().map(|v| v * setup.detection_scalar).collect())
}

/// Ensemble-averaged steady-state signal for a fixed set of drives.
pub fn steady_signal(setup: &ExperimentSetup, drives: &[DriveField]) -> Result<f64, SpectroscopyError> {
    Ok(steady_signals(setup, &[drives.to_vec()])?[0])
}

fn base_meta(s: Spectrum, setup: &ExperimentSetup, experiment: &str) -> Spectrum {
    let inh = &setup.ensemble.inhomogeneity;
    s.with_meta("experiment", experiment)
        .with_meta("b_field_t", setup.zeeman.b_field_t)
        .with_meta("g_e", setup.zeeman.g_e)
        .with_meta("g_h", setup.zeeman.g_h)
        .with_meta("model", format!("{:?}", setup.model).to_lowercase())
        .with_meta("detection_scalar", setup.detection_scalar)
        .with_meta("hyperfine_lines", setup.ensemble.hyperfine.n_lines())
        .with_meta("sigma_opt_ghz", inh.sigma_opt_ghz)
        .with_meta("ensemble_samples", setup.ensemble.hyperfine.n_lines() * inh.n_samples.max(1))
}

fn run_scan(plan: &ScanPlan, experiment: &str) -> Result<Spectrum, SpectroscopyError> {
    plan.validate()?;
    let scheme = build_level_scheme(&plan.setup.zeeman);
    let axis = plan.axis.points();
    let configs: Vec<Vec<DriveField>> = axis
        .iter()
        .map(|&x| {
            let mut drives = plan.fixed.clone();
            drives.push(at_photon(&scheme, &plan.scanned, x));
            drives
        })
        .collect();
    let counts = steady_signals(&plan.setup, &configs)?;
    let s = Spectrum::new(axis, counts, AxisKind::DetuningGhz)?;
    Ok(base_meta(s, &plan.setup, experiment).with_meta("scanned_rabi_ghz", plan.scanned.rabi_ghz))
}

/// One laser swept across the lines.
pub fn simulate_single_laser_ple(plan: &ScanPlan) -> Result<Spectrum, SpectroscopyError> {
    if !plan.fixed.is_empty() {
        return Err(SpectroscopyError::InvalidPlan("single-laser PLE takes no fixed drive".into()));
    }
    run_scan(plan, "single_laser_ple")
}

/// Probe swept with the pump held at its configured energy.
pub fn simulate_two_laser_ple(plan: &ScanPlan) -> Result<Spectrum, SpectroscopyError> {
    if plan.fixed.len() != 1 {
        return Err(SpectroscopyError::InvalidPlan("two-laser PLE needs exactly one fixed drive".into()));
    }
    let s = run_scan(plan, "two_laser_ple")?;
    Ok(s.with_meta("fixed_rabi_ghz", plan.fixed[0].rabi_ghz))
}

fn ground_offset(scheme: &LevelScheme, g: GroundLabel) -> f64 {
    scheme.nominal_offset_ghz(Level::from(g))
}

/// Probe photon energy (GHz from E0) at two-photon resonance with the
/// fixed drive, on the nominal scheme.
pub fn two_photon_resonance_ghz(plan: &ScanPlan) -> Result<f64, SpectroscopyError> {
    let pump = plan
        .fixed
        .first()
        .ok_or_else(|| SpectroscopyError::InvalidPlan("no fixed drive".into()))?;
    let scheme = build_level_scheme(&plan.setup.zeeman);
    let pump_photon = crate::spinmodel::liouvillian::drive_photon_ghz(&scheme, pump);
    Ok(pump_photon + ground_offset(&scheme, pump.target.ground()) - ground_offset(&scheme, plan.scanned.target.ground()))
}

/// Rough dip FWHM used only for the grid-resolution warning: the hyperfine
/// manifold span plus twice the power-broadened dark-resonance half width.
pub fn estimated_dip_fwhm_ghz(plan: &ScanPlan) -> f64 {
    let hf = &plan.setup.ensemble.hyperfine;
    let span = hf.spacing_mhz.abs() * 1e-3 * hf.n_lines() as f64;
    let gamma_o = plan.setup.relaxation.optical_hwhm_ghz().max(1e-12);
    let omega2: f64 = plan.fixed.iter().map(|d| d.rabi_ghz.powi(2)).sum::<f64>() + plan.scanned.rabi_ghz.powi(2);
    span.max(0.0) + 2.0 * (omega2 / (4.0 * gamma_o) + plan.setup.relaxation.gamma_deph_spin_ghz)
}

/// Two-laser scan with the pump at detuning `pump_detuning_ghz` from its
/// target. The probe must address the other ground state.
pub fn simulate_cpt_scan(plan: &ScanPlan, pump_detuning_ghz: f64) -> Result<Spectrum, SpectroscopyError> {
    if plan.fixed.len() != 1 {
        return Err(SpectroscopyError::InvalidPlan("CPT scan needs exactly one fixed (pump) drive".into()));
    }
    if plan.fixed[0].target.ground() == plan.scanned.target.ground() {
        return Err(SpectroscopyError::InvalidPlan(
            "pump and probe must address different ground states".into(),
        ));
    }
    if !pump_detuning_ghz.is_finite() {
        return Err(SpectroscopyError::InvalidPlan("pump detuning must be finite".into()));
    }
    let mut plan = plan.clone();
    plan.fixed[0].energy = DriveEnergy::DetuningGhz(pump_detuning_ghz);
    let dip = two_photon_resonance_ghz(&plan)?;
    let width = estimated_dip_fwhm_ghz(&plan);
    let step = plan.axis.max_step_within(dip - width, dip + width);
    let mut s = run_scan(&plan, "cpt_scan")?
        .with_meta("pump_detuning_ghz", pump_detuning_ghz)
        .with_meta("fixed_rabi_ghz", plan.fixed[0].rabi_ghz)
        .with_meta("expected_dip_ghz", dip);
    if dip < plan.axis.start || dip > plan.axis.stop {
        s.add_warning("two-photon resonance lies outside the scan range");
    } else if step > width / 5.0 {
        s.add_warning(&format!(
            "grid step {step:.3} GHz near the dip exceeds estimated dip width {width:.3} GHz / 5"
        ));
    }
    Ok(s)
}

/// Emission after switching the drives on at t = 0 from the unpolarized
/// ground mixture, sampled at `n_points` equally spaced times in
/// `[0, duration_ns]`.
pub fn simulate_pumping_transient(
    setup: &ExperimentSetup,
    drives: &[DriveField],
    duration_ns: f64,
    n_points: usize,
) -> Result<Spectrum, SpectroscopyError> {
    setup.validate()?;
    if !(duration_ns > 0.0) || !duration_ns.is_finite() {
        return Err(SpectroscopyError::InvalidPlan("duration must be finite and > 0".into()));
    }
    if n_points < 2 {
        return Err(SpectroscopyError::InvalidPlan("need at least two time points".into()));
    }
    let times: Vec<f64> = (0..n_points)
        .map(|k| duration_ns * k as f64 / (n_points - 1) as f64)
        .collect();
    let base = build_level_scheme(&setup.zeeman);
    let samples = ensemble_samples(&setup.ensemble)?;
    let counts = average_over(&samples, |s| {
        if drives.iter().all(|d| d.rabi_ghz == 0.0) {
            return Ok(vec![0.0; times.len()]);
        }
        let (exc, split) = s.scheme_shifts();
        let scheme = base.shifted(exc, split);
        let l = build_liouvillian(&scheme, drives, &setup.relaxation, s.hf_shift_ghz, setup.model)?;
        let rho0 = DensityMatrix::thermal_ground(l.dim())?;
        let traj = evolve_trajectory(&l, &rho0, &times)?;
        Ok(traj.iter().map(|r| emission(&l, r)).collect())
    })?;
    let counts = counts.into_iter().map(|c| c * setup.detection_scalar).collect();
    let s = Spectrum::new(times, counts, AxisKind::TimeNs)?;
    let pumps = drives.iter().filter(|d| d.role == DriveRole::Pump).count();
    Ok(base_meta(s, setup, "pumping_transient")
        .with_meta("drives", drives.len())
        .with_meta("pump_drives", pumps))
}
