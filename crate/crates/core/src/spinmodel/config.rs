//! Configuration blocks for the donor spin model.
//!
//! Every block deserializes from JSON with unit-suffixed field names and
//! rejects unknown keys. Call `validate` before use; constructors in this
//! crate never validate implicitly.

use serde::{Deserialize, Serialize};

use super::constants::{BOHR_MAGNETON_UEV_PER_T, Splitting};
use super::SpinModelError;

/// Zero-field In D0X line position in eV.
pub const IN_D0X_LINE_EV: f64 = 3.3567;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeemanConfig {
    pub g_e: f64,
    pub g_h: f64,
    pub b_field_t: f64,
    #[serde(default = "default_e0")]
    pub e0_ev: f64,
}

fn default_e0() -> f64 {
    IN_D0X_LINE_EV
}

impl ZeemanConfig {
    pub fn new(g_e: f64, g_h: f64, b_field_t: f64) -> Self {
        Self {
            g_e,
            g_h,
            b_field_t,
            e0_ev: IN_D0X_LINE_EV,
        }
    }

    pub fn validate(&self) -> Result<(), SpinModelError> {
        if !self.g_e.is_finite() {
            return Err(SpinModelError::invalid("zeeman.g_e", "must be finite"));
        }
        if !self.g_h.is_finite() {
            return Err(SpinModelError::invalid("zeeman.g_h", "must be finite"));
        }
        if !(self.b_field_t >= 0.0) || !self.b_field_t.is_finite() {
            return Err(SpinModelError::invalid("zeeman.b_field_t", "must be finite and >= 0"));
        }
        if !(self.e0_ev > 0.0) || !self.e0_ev.is_finite() {
            return Err(SpinModelError::invalid("zeeman.e0_ev", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Electron Zeeman splitting of the D0 ground state, g_e·μ_B·B.
pub fn ground_splitting(z: &ZeemanConfig) -> Splitting {
    Splitting::from_uev(z.g_e * BOHR_MAGNETON_UEV_PER_T * z.b_field_t)
}

/// Hole Zeeman splitting of the D0X state, g_h·μ_B·B. The two bound
/// electrons form a singlet, so only the hole contributes.
pub fn excited_splitting(z: &ZeemanConfig) -> Splitting {
    Splitting::from_uev(z.g_h * BOHR_MAGNETON_UEV_PER_T * z.b_field_t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperfineConfig {
    /// Nuclear spin I (In: 9/2).
    #[serde(default = "default_nuclear_spin")]
    pub nuclear_spin: f64,
    /// Spacing between adjacent hyperfine components of the ground splitting, MHz.
    #[serde(default = "default_spacing")]
    pub spacing_mhz: f64,
    /// Weight per nuclear projection m = -I..=I; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

fn default_nuclear_spin() -> f64 {
    4.5
}

fn default_spacing() -> f64 {
    100.0
}

impl Default for HyperfineConfig {
    fn default() -> Self {
        Self {
            nuclear_spin: default_nuclear_spin(),
            spacing_mhz: default_spacing(),
            weights: None,
        }
    }
}

impl HyperfineConfig {
    /// No nuclear spin: a single unshifted line.
    pub fn none() -> Self {
        Self {
            nuclear_spin: 0.0,
            spacing_mhz: 0.0,
            weights: None,
        }
    }

    pub fn n_lines(&self) -> usize {
        (2.0 * self.nuclear_spin + 1.0).round() as usize
    }

    pub fn validate(&self) -> Result<(), SpinModelError> {
        let lines = 2.0 * self.nuclear_spin + 1.0;
        if !lines.is_finite() || lines < 1.0 || (lines - lines.round()).abs() > 1e-9 {
            return Err(SpinModelError::invalid(
                "hyperfine.nuclear_spin",
                "2I+1 must be a positive integer",
            ));
        }
        if !self.spacing_mhz.is_finite() {
            return Err(SpinModelError::invalid("hyperfine.spacing_mhz", "must be finite"));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.n_lines() {
                return Err(SpinModelError::invalid(
                    "hyperfine.weights",
                    format!("expected {} weights, got {}", self.n_lines(), w.len()),
                ));
            }
            if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(SpinModelError::invalid("hyperfine.weights", "weights must be >= 0"));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(SpinModelError::invalid(
                    "hyperfine.weights",
                    format!("weights must sum to 1 (sum = {sum})"),
                ));
            }
        }
        Ok(())
    }

    /// (shift of the ground splitting in GHz, weight) per nuclear projection,
    /// ordered m = -I..=I.
    pub fn lines(&self) -> Vec<(f64, f64)> {
        let n = self.n_lines();
        let uniform = 1.0 / n as f64;
        (0..n)
            .map(|k| {
                let m = k as f64 - self.nuclear_spin;
                let w = self.weights.as_ref().map_or(uniform, |w| w[k]);
                (m * self.spacing_mhz * 1e-3, w)
            })
            .collect()
    }
}

/// Relaxation rates. All rates are ordinary frequencies in GHz; the
/// Liouvillian multiplies them by 2π, so a rate Γ gives a Lorentzian of
/// FWHM Γ in GHz for a coherence decaying at Γ/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxationConfig {
    #[serde(default = "default_gamma_x")]
    pub gamma_x_ghz: f64,
    #[serde(default = "default_branch_up")]
    pub branch_up: f64,
    #[serde(default = "default_gamma_spin")]
    pub gamma_spin_ghz: f64,
    #[serde(default)]
    pub gamma_deph_opt_ghz: f64,
    #[serde(default)]
    pub gamma_deph_spin_ghz: f64,
}

fn default_gamma_x() -> f64 {
    0.7
}

fn default_branch_up() -> f64 {
    0.5
}

fn default_gamma_spin() -> f64 {
    1e-5
}

impl Default for RelaxationConfig {
    fn default() -> Self {
        Self {
            gamma_x_ghz: default_gamma_x(),
            branch_up: default_branch_up(),
            gamma_spin_ghz: default_gamma_spin(),
            gamma_deph_opt_ghz: 0.0,
            gamma_deph_spin_ghz: 0.0,
        }
    }
}

impl RelaxationConfig {
    pub fn validate(&self) -> Result<(), SpinModelError> {
        let rates = [
            ("relaxation.gamma_x_ghz", self.gamma_x_ghz),
            ("relaxation.gamma_spin_ghz", self.gamma_spin_ghz),
            ("relaxation.gamma_deph_opt_ghz", self.gamma_deph_opt_ghz),
            ("relaxation.gamma_deph_spin_ghz", self.gamma_deph_spin_ghz),
        ];
        for (field, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(SpinModelError::invalid(field, "rate must be finite and >= 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.branch_up) {
            return Err(SpinModelError::invalid("relaxation.branch_up", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Half width of a single optical line in GHz (Γ_X/2 plus extra dephasing).
    pub fn optical_hwhm_ghz(&self) -> f64 {
        0.5 * self.gamma_x_ghz + self.gamma_deph_opt_ghz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveRole {
    Pump,
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundLabel {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcitedLabel {
    /// |⇑↑↓⟩
    Xup,
    /// |⇓↑↓⟩
    Xdown,
}

/// An optical transition between a D0 spin state and a D0X state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionLabel {
    UpXup,
    UpXdown,
    DownXup,
    DownXdown,
}

impl TransitionLabel {
    pub const ALL: [TransitionLabel; 4] = [
        TransitionLabel::UpXup,
        TransitionLabel::UpXdown,
        TransitionLabel::DownXup,
        TransitionLabel::DownXdown,
    ];

    pub fn ground(self) -> GroundLabel {
        match self {
            TransitionLabel::UpXup | TransitionLabel::UpXdown => GroundLabel::Up,
            TransitionLabel::DownXup | TransitionLabel::DownXdown => GroundLabel::Down,
        }
    }

    pub fn excited(self) -> ExcitedLabel {
        match self {
            TransitionLabel::UpXup | TransitionLabel::DownXup => ExcitedLabel::Xup,
            TransitionLabel::UpXdown | TransitionLabel::DownXdown => ExcitedLabel::Xdown,
        }
    }

    pub fn from_parts(g: GroundLabel, e: ExcitedLabel) -> Self {
        match (g, e) {
            (GroundLabel::Up, ExcitedLabel::Xup) => TransitionLabel::UpXup,
            (GroundLabel::Up, ExcitedLabel::Xdown) => TransitionLabel::UpXdown,
            (GroundLabel::Down, ExcitedLabel::Xup) => TransitionLabel::DownXup,
            (GroundLabel::Down, ExcitedLabel::Xdown) => TransitionLabel::DownXdown,
        }
    }
}

/// Where the laser sits in energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveEnergy {
    /// Absolute photon energy in eV.
    PhotonEv(f64),
    /// Detuning in GHz from the drive's target transition.
    DetuningGhz(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveField {
    pub energy: DriveEnergy,
    pub rabi_ghz: f64,
    pub role: DriveRole,
    pub target: TransitionLabel,
}

impl DriveField {
    pub fn new(role: DriveRole, target: TransitionLabel, detuning_ghz: f64, rabi_ghz: f64) -> Self {
        Self {
            energy: DriveEnergy::DetuningGhz(detuning_ghz),
            rabi_ghz,
            role,
            target,
        }
    }

    pub fn validate(&self) -> Result<(), SpinModelError> {
        if !(self.rabi_ghz >= 0.0) || !self.rabi_ghz.is_finite() {
            return Err(SpinModelError::invalid("drive.rabi_ghz", "must be finite and >= 0"));
        }
        match self.energy {
            DriveEnergy::PhotonEv(e) if !(e > 0.0) || !e.is_finite() => {
                Err(SpinModelError::invalid("drive.energy.photon_ev", "must be finite and > 0"))
            }
            DriveEnergy::DetuningGhz(d) if !d.is_finite() => {
                Err(SpinModelError::invalid("drive.energy.detuning_ghz", "must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Optional conversion from laser power to Rabi frequency, Ω² = k·P.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaturationMap {
    pub rabi_sq_ghz2_per_uw: f64,
}

impl SaturationMap {
    pub fn rabi_ghz(&self, power_uw: f64) -> f64 {
        (self.rabi_sq_ghz2_per_uw * power_uw.max(0.0)).sqrt()
    }
}

/// Which levels a static Gaussian energy offset acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftMode {
    /// Both D0X levels move together: all optical lines shift, the
    /// two-photon condition does not.
    ExcitedOnly,
    /// The ground splitting changes by the draw (|↑⟩ +s/2, |↓⟩ −s/2).
    GroundOnly,
    /// The same draw shifts the D0X levels and the ground splitting.
    Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InhomogeneityConfig {
    #[serde(default)]
    pub sigma_opt_ghz: f64,
    #[serde(default = "default_shift_mode")]
    pub shift_mode: ShiftMode,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_shift_mode() -> ShiftMode {
    ShiftMode::ExcitedOnly
}

fn default_n_samples() -> usize {
    21
}

impl Default for InhomogeneityConfig {
    fn default() -> Self {
        Self {
            sigma_opt_ghz: 0.0,
            shift_mode: default_shift_mode(),
            n_samples: default_n_samples(),
            seed: 0,
        }
    }
}

impl InhomogeneityConfig {
    pub fn excited_only(sigma_opt_ghz: f64) -> Self {
        Self {
            sigma_opt_ghz,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SpinModelError> {
        if !(self.sigma_opt_ghz >= 0.0) || !self.sigma_opt_ghz.is_finite() {
            return Err(SpinModelError::invalid(
                "inhomogeneity.sigma_opt_ghz",
                "must be finite and >= 0",
            ));
        }
        if self.n_samples == 0 {
            return Err(SpinModelError::invalid("inhomogeneity.n_samples", "must be >= 1"));
        }
        Ok(())
    }
}
