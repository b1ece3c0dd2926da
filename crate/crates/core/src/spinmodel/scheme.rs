//! The four-level D0/D0X energy structure.
//!
//! Convention: |↑⟩ sits δg/2 above the zero-field ground energy and |↓⟩ δg/2
//! below; |⇑↑↓⟩ (`Xup`) sits δh/2 above the zero-field D0X energy and
//! |⇓↑↓⟩ (`Xdown`) δh/2 below. Transitions that conserve the spin labels
//! (↑–Xup, ↓–Xdown) are tagged V, the crossed pair H. Only magnitudes are
//! physical here; the labels are a bookkeeping choice.
//!
//! Offsets are held in GHz relative to E0 so that GHz-scale detunings never
//! pass through an eV-sized sum.

use serde::Serialize;

use super::config::{
    excited_splitting, ground_splitting, ExcitedLabel, GroundLabel, TransitionLabel, ZeemanConfig,
};
use super::constants::{ghz_to_ev, ghz_to_uev, uev_to_ghz};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Up,
    Down,
    Xup,
    Xdown,
}

impl From<GroundLabel> for Level {
    fn from(g: GroundLabel) -> Self {
        match g {
            GroundLabel::Up => Level::Up,
            GroundLabel::Down => Level::Down,
        }
    }
}

impl From<ExcitedLabel> for Level {
    fn from(e: ExcitedLabel) -> Self {
        match e {
            ExcitedLabel::Xup => Level::Xup,
            ExcitedLabel::Xdown => Level::Xdown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Polarization {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelEntry {
    pub label: Level,
    pub energy_ev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    pub label: TransitionLabel,
    pub ground: GroundLabel,
    pub excited: ExcitedLabel,
    pub energy_ev: f64,
    pub polarization: Polarization,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelScheme {
    pub e0_ev: f64,
    /// Nominal ground splitting δg in GHz (E_↑ − E_↓).
    pub ground_splitting_ghz: f64,
    /// Nominal excited splitting δh in GHz (E_Xup − E_Xdown).
    pub excited_splitting_ghz: f64,
    /// Static offset applied to both D0X levels (spectral diffusion sample).
    pub excited_shift_ghz: f64,
    /// Static change of the ground splitting (spectral diffusion sample).
    pub splitting_shift_ghz: f64,
}

/// Build the level scheme for a Zeeman configuration.
pub fn build_level_scheme(z: &ZeemanConfig) -> LevelScheme {
    LevelScheme::from_splittings(
        z.e0_ev,
        ground_splitting(z).uev,
        excited_splitting(z).uev,
    )
}

impl LevelScheme {
    /// Construct from signed splittings in µeV. Negative values describe a
    /// reversed field.
    pub fn from_splittings(e0_ev: f64, delta_g_uev: f64, delta_h_uev: f64) -> Self {
        Self {
            e0_ev,
            ground_splitting_ghz: uev_to_ghz(delta_g_uev),
            excited_splitting_ghz: uev_to_ghz(delta_h_uev),
            excited_shift_ghz: 0.0,
            splitting_shift_ghz: 0.0,
        }
    }

    /// A copy with additional static offsets; drive detunings keep referring
    /// to the nominal scheme.
    pub fn shifted(&self, excited_ghz: f64, splitting_ghz: f64) -> Self {
        let mut s = self.clone();
        s.excited_shift_ghz += excited_ghz;
        s.splitting_shift_ghz += splitting_ghz;
        s
    }

    pub fn delta_g_uev(&self) -> f64 {
        ghz_to_uev(self.ground_splitting_ghz + self.splitting_shift_ghz)
    }

    pub fn delta_h_uev(&self) -> f64 {
        ghz_to_uev(self.excited_splitting_ghz)
    }

    /// Level energy relative to E0 in GHz, including static shifts.
    pub fn offset_ghz(&self, level: Level) -> f64 {
        let dg = self.ground_splitting_ghz + self.splitting_shift_ghz;
        let dh = self.excited_splitting_ghz;
        match level {
            Level::Up => 0.5 * dg,
            Level::Down => -0.5 * dg,
            Level::Xup => 0.5 * dh + self.excited_shift_ghz,
            Level::Xdown => -0.5 * dh + self.excited_shift_ghz,
        }
    }

    /// Level energy relative to E0 in GHz, ignoring static shifts.
    pub fn nominal_offset_ghz(&self, level: Level) -> f64 {
        let dg = self.ground_splitting_ghz;
        let dh = self.excited_splitting_ghz;
        match level {
            Level::Up => 0.5 * dg,
            Level::Down => -0.5 * dg,
            Level::Xup => 0.5 * dh,
            Level::Xdown => -0.5 * dh,
        }
    }

    pub fn level_energy_ev(&self, level: Level) -> f64 {
        self.e0_ev + ghz_to_ev(self.offset_ghz(level))
    }

    /// Transition energy relative to E0 in GHz, including static shifts.
    pub fn transition_offset_ghz(&self, t: TransitionLabel) -> f64 {
        self.offset_ghz(t.excited().into()) - self.offset_ghz(t.ground().into())
    }

    /// Transition energy relative to E0 in GHz on the unshifted scheme.
    pub fn nominal_transition_offset_ghz(&self, t: TransitionLabel) -> f64 {
        self.nominal_offset_ghz(t.excited().into()) - self.nominal_offset_ghz(t.ground().into())
    }

    pub fn transition_energy_ev(&self, t: TransitionLabel) -> f64 {
        self.e0_ev + ghz_to_ev(self.transition_offset_ghz(t))
    }

    pub fn polarization(t: TransitionLabel) -> Polarization {
        match t {
            TransitionLabel::UpXup | TransitionLabel::DownXdown => Polarization::V,
            TransitionLabel::UpXdown | TransitionLabel::DownXup => Polarization::H,
        }
    }

    pub fn levels(&self) -> [LevelEntry; 4] {
        [Level::Up, Level::Down, Level::Xup, Level::Xdown].map(|label| LevelEntry {
            label,
            energy_ev: self.level_energy_ev(label),
        })
    }

    pub fn transitions(&self) -> [Transition; 4] {
        TransitionLabel::ALL.map(|label| Transition {
            label,
            ground: label.ground(),
            excited: label.excited(),
            energy_ev: self.transition_energy_ev(label),
            polarization: Self::polarization(label),
        })
    }
}
