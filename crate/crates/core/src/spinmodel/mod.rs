//! Physical configuration of the In donor in ZnO: Zeeman and hyperfine
//! structure, laser drives, relaxation, and the Lindblad generator built
//! from them.

pub mod config;
pub mod constants;
pub mod liouvillian;
pub mod scheme;

pub use config::{
    excited_splitting, ground_splitting, DriveEnergy, DriveField, DriveRole, ExcitedLabel,
    GroundLabel, HyperfineConfig, InhomogeneityConfig, RelaxationConfig, SaturationMap, ShiftMode,
    TransitionLabel, ZeemanConfig, IN_D0X_LINE_EV,
};
pub use constants::{PhysicalConstants, Splitting};
pub use liouvillian::{build_liouvillian, LiouvillianModel, ModelKind};
pub use scheme::{build_level_scheme, Level, LevelScheme, Polarization, Transition};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinModelError {
    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("at most two drives are supported, got {0}")]
    TooManyDrives(usize),
    #[error("both drives address the {0:?} ground state; the rotating frame is ambiguous")]
    SharedGroundState(GroundLabel),
    #[error("unsupported Hilbert-space dimension {0} (expected 3 or 4)")]
    UnsupportedDimension(usize),
}

impl SpinModelError {
    pub fn invalid(field: &str, reason: impl Into<String>) -> Self {
        SpinModelError::InvalidConfig {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
