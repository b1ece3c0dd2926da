//! Fixed physical constants and the unit conversions used throughout the crate.
//!
//! Energies that are absolute photon energies are carried in eV, level
//! splittings in µeV (or meV for reporting), and everything that enters the
//! master equation in GHz of ordinary frequency.

use serde::Serialize;

/// Bohr magneton in µeV/T.
pub const BOHR_MAGNETON_UEV_PER_T: f64 = 57.8838;

/// 1 µeV expressed as an ordinary frequency in GHz.
pub const GHZ_PER_UEV: f64 = 0.2417990;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// µeV/T
    pub mu_b: f64,
    /// GHz per µeV
    pub h_conv: f64,
}

impl PhysicalConstants {
    pub const DEFAULT: PhysicalConstants = PhysicalConstants {
        mu_b: BOHR_MAGNETON_UEV_PER_T,
        h_conv: GHZ_PER_UEV,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[inline]
pub fn uev_to_ghz(uev: f64) -> f64 {
    uev * GHZ_PER_UEV
}

#[inline]
pub fn ghz_to_uev(ghz: f64) -> f64 {
    ghz / GHZ_PER_UEV
}

#[inline]
pub fn ev_to_ghz(ev: f64) -> f64 {
    uev_to_ghz(ev * 1e6)
}

#[inline]
pub fn ghz_to_ev(ghz: f64) -> f64 {
    ghz_to_uev(ghz) * 1e-6
}

#[inline]
pub fn ghz_to_mev(ghz: f64) -> f64 {
    ghz_to_uev(ghz) * 1e-3
}

#[inline]
pub fn mev_to_ghz(mev: f64) -> f64 {
    uev_to_ghz(mev * 1e3)
}

/// A Zeeman-type energy splitting, stored in µeV.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Splitting {
    pub uev: f64,
}

impl Splitting {
    pub fn from_uev(uev: f64) -> Self {
        Self { uev }
    }

    pub fn mev(self) -> f64 {
        self.uev * 1e-3
    }

    pub fn ev(self) -> f64 {
        self.uev * 1e-6
    }

    pub fn ghz(self) -> f64 {
        uev_to_ghz(self.uev)
    }
}
