//! Reference configurations for the In D0X system at 7 T and zero field.
//!
//! Rates and Rabi frequencies here are model choices tuned numerically
//! against the observed line shapes; they are not measured values.

use super::plan::{ExperimentSetup, ScanAxis, ScanPlan};
use crate::analysis::voigt::sigma_for_fwhm;
use crate::dynamics::EnsembleSpec;
use crate::spinmodel::{
    build_level_scheme, DriveField, DriveRole, HyperfineConfig, InhomogeneityConfig, ModelKind, RelaxationConfig,
    TransitionLabel, ZeemanConfig,
};

pub const G_E: f64 = 1.90;
pub const G_H: f64 = 0.07;
pub const B_FIELD_T: f64 = 7.0;

/// Extra optical dephasing for two-laser scans: single-line HWHM of 20 GHz
/// from fast excited-state spectral diffusion.
pub const CPT_OPTICAL_DEPHASING_GHZ: f64 = 19.65;
/// Ground-spin dephasing, which sets the width of each hyperfine dark line.
pub const CPT_SPIN_DEPHASING_GHZ: f64 = 0.1;
pub const CPT_PROBE_RABI_GHZ: f64 = 1.7;
/// Pump Rabi used for CPT scans unless stated otherwise.
pub const CPT_PUMP_RABI_GHZ: f64 = 2.8;
/// Pump Rabi giving a 2 GHz wide dip.
pub const CPT_WIDE_DIP_PUMP_RABI_GHZ: f64 = 8.5;
/// Weak-pump limit used for the hyperfine floor.
pub const CPT_WEAK_PUMP_RABI_GHZ: f64 = 0.5;
/// Pump Rabi series spanning a factor of 10.
pub const CPT_POWER_SERIES_GHZ: [f64; 5] = [0.9, 1.6, 2.8, 5.0, 9.0];
pub const CPT_PUMP_TARGET: TransitionLabel = TransitionLabel::DownXdown;
pub const CPT_PROBE_TARGET: TransitionLabel = TransitionLabel::UpXdown;
/// Coarse probe range either side of the probe transition, GHz.
pub const CPT_SCAN_HALF_WIDTH_GHZ: f64 = 120.0;
pub const CPT_COARSE_STEP_GHZ: f64 = 1.0;
pub const CPT_FINE_STEP_GHZ: f64 = 0.05;
pub const CPT_FINE_HALF_WIDTH_GHZ: f64 = 5.0;
/// Gauss–Hermite nodes for inhomogeneous CPT ensembles.
pub const CPT_ENSEMBLE_NODES: usize = 32;

/// Optical dephasing for single-laser PLE: 10 GHz homogeneous FWHM.
pub const PLE_OPTICAL_DEPHASING_GHZ: f64 = 4.65;
pub const PLE_RABI_GHZ: f64 = 0.3;
pub const PLE_TARGET_FWHM_GHZ: f64 = 20.0;
pub const PLE_ENSEMBLE_NODES: usize = 64;
pub const PLE_SCAN_HALF_WIDTH_GHZ: f64 = 60.0;
pub const PLE_STEP_GHZ: f64 = 1.0;

pub const TWO_LASER_PUMP_TARGET: TransitionLabel = TransitionLabel::DownXup;

pub const PUMPING_RABI_GHZ: f64 = 1.0;

pub fn zeeman(b_field_t: f64) -> ZeemanConfig {
    ZeemanConfig::new(G_E, G_H, b_field_t)
}

/// Λ-model CPT setup with the full hyperfine manifold and an optional
/// excited-only Gaussian spread.
pub fn cpt_setup(sigma_opt_ghz: f64) -> ExperimentSetup {
    let relax = RelaxationConfig {
        gamma_deph_opt_ghz: CPT_OPTICAL_DEPHASING_GHZ,
        gamma_deph_spin_ghz: CPT_SPIN_DEPHASING_GHZ,
        ..RelaxationConfig::default()
    };
    let ensemble = EnsembleSpec {
        hyperfine: HyperfineConfig::default(),
        inhomogeneity: InhomogeneityConfig {
            n_samples: if sigma_opt_ghz > 0.0 { CPT_ENSEMBLE_NODES } else { 1 },
            ..InhomogeneityConfig::excited_only(sigma_opt_ghz)
        },
    };
    ExperimentSetup::new(zeeman(B_FIELD_T), relax, ensemble, ModelKind::Lambda)
}

/// Probe scan around the probe transition with a fine window on the
/// two-photon resonance for pump detuning `pump_detuning_ghz`.
pub fn cpt_plan(setup: ExperimentSetup, pump_rabi_ghz: f64, pump_detuning_ghz: f64) -> ScanPlan {
    let scheme = build_level_scheme(&setup.zeeman);
    let c = scheme.nominal_transition_offset_ghz(CPT_PROBE_TARGET);
    let dip = c + pump_detuning_ghz;
    ScanPlan {
        setup,
        axis: ScanAxis::new(c - CPT_SCAN_HALF_WIDTH_GHZ, c + CPT_SCAN_HALF_WIDTH_GHZ, CPT_COARSE_STEP_GHZ).with_fine(
            dip,
            CPT_FINE_HALF_WIDTH_GHZ,
            CPT_FINE_STEP_GHZ,
        ),
        scanned: DriveField::new(DriveRole::Probe, CPT_PROBE_TARGET, 0.0, CPT_PROBE_RABI_GHZ),
        fixed: vec![DriveField::new(DriveRole::Pump, CPT_PUMP_TARGET, pump_detuning_ghz, pump_rabi_ghz)],
    }
}

/// Full-model single-laser PLE setup whose fitted line is 20 GHz wide at
/// zero field.
pub fn ple_setup(b_field_t: f64) -> ExperimentSetup {
    let relax = RelaxationConfig {
        gamma_deph_opt_ghz: PLE_OPTICAL_DEPHASING_GHZ,
        ..RelaxationConfig::default()
    };
    let sigma = sigma_for_fwhm(PLE_TARGET_FWHM_GHZ, relax.optical_hwhm_ghz()).unwrap_or(0.0);
    let ensemble = EnsembleSpec {
        hyperfine: HyperfineConfig::default(),
        inhomogeneity: InhomogeneityConfig {
            n_samples: PLE_ENSEMBLE_NODES,
            ..InhomogeneityConfig::excited_only(sigma)
        },
    };
    ExperimentSetup::new(zeeman(b_field_t), relax, ensemble, ModelKind::Full)
}

pub fn ple_plan(setup: ExperimentSetup, rabi_ghz: f64) -> ScanPlan {
    let scheme = build_level_scheme(&setup.zeeman);
    let c = scheme.nominal_transition_offset_ghz(TransitionLabel::UpXdown);
    ScanPlan {
        setup,
        axis: ScanAxis::new(c - PLE_SCAN_HALF_WIDTH_GHZ, c + PLE_SCAN_HALF_WIDTH_GHZ, PLE_STEP_GHZ),
        scanned: DriveField::new(DriveRole::Probe, TransitionLabel::UpXdown, 0.0, rabi_ghz),
        fixed: Vec::new(),
    }
}

/// Probe scan over |↑⟩ → |⇓↑↓⟩ with a pump on |↓⟩ → |⇑↑↓⟩ detuned by
/// `pump_detuning_ghz`; equal Rabi frequencies on both lasers.
pub fn two_laser_plan(setup: ExperimentSetup, rabi_ghz: f64, pump_detuning_ghz: f64) -> ScanPlan {
    ScanPlan {
        fixed: vec![DriveField::new(DriveRole::Pump, TWO_LASER_PUMP_TARGET, pump_detuning_ghz, rabi_ghz)],
        ..ple_plan(setup, rabi_ghz)
    }
}

/// Single emitter at 7 T in the full four-level model, for transients.
pub fn pumping_setup() -> ExperimentSetup {
    let relax = RelaxationConfig {
        gamma_deph_opt_ghz: PLE_OPTICAL_DEPHASING_GHZ,
        ..RelaxationConfig::default()
    };
    ExperimentSetup::new(zeeman(B_FIELD_T), relax, EnsembleSpec::single(), ModelKind::Full)
}

/// One resonant drive on |↓⟩ → |⇑↑↓⟩.
pub fn single_pump(rabi_ghz: f64) -> Vec<DriveField> {
    vec![DriveField::new(DriveRole::Pump, TransitionLabel::DownXup, 0.0, rabi_ghz)]
}

/// Equal resonant drives on |↓⟩ → |⇑↑↓⟩ and |↑⟩ → |⇓↑↓⟩; they are not
/// two-photon resonant, so no dark state forms.
pub fn balanced_drives(rabi_ghz: f64) -> Vec<DriveField> {
    vec![
        DriveField::new(DriveRole::Pump, TransitionLabel::DownXup, 0.0, rabi_ghz),
        DriveField::new(DriveRole::Probe, TransitionLabel::UpXdown, 0.0, rabi_ghz),
    ]
}
