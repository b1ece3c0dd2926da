//! Experiment emulation: scan drivers that turn the master-equation solver
//! into PLE, two-laser, CPT, pumping-transient and PL spectra.

pub mod plan;
pub mod pl;
pub mod presets;
pub mod scans;
pub mod spectrum;

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::spinmodel::SpinModelError;

pub use pl::{
    simulate_magneto_pl, simulate_polarization_pl, MagnetoPoint, PlLinewidth, PolarizationPoint, PolarizationScan,
};
pub use plan::{ExperimentSetup, FineWindow, ScanAxis, ScanPlan};
pub use scans::{
    estimated_dip_fwhm_ghz, simulate_cpt_scan, simulate_pumping_transient, simulate_single_laser_ple,
    simulate_two_laser_ple, steady_signal, two_photon_resonance_ghz,
};
pub use spectrum::{AxisKind, Spectrum};

#[derive(Debug, Error)]
pub enum SpectroscopyError {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("CSV: {0}")]
    Csv(String),
    #[error("invalid scan plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] SpinModelError),
}
