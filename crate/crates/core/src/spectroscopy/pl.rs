//! Photoluminescence peak positions: field dependence and polarization
//! dependence of the Zeeman-split D0X emission.

use serde::{Deserialize, Serialize};

use super::SpectroscopyError;
use crate::analysis::voigt::{voigt_fwhm, voigt_shape};
use crate::spinmodel::constants::GHZ_PER_UEV;
use crate::spinmodel::{build_level_scheme, TransitionLabel, ZeemanConfig};

/// Grid step for locating PL maxima, µeV.
pub const POSITION_GRID_UEV: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetoPoint {
    pub b_field_t: f64,
    /// Lowest and highest transition energies, eV.
    pub low_ev: f64,
    pub high_ev: f64,
    /// high − low, meV.
    pub splitting_mev: f64,
}

/// For each field, the outermost pair of Zeeman-split lines; their
/// separation is (|g_e| + |g_h|)·μ_B·B.
pub fn simulate_magneto_pl(zeeman: &ZeemanConfig, fields_t: &[f64]) -> Result<Vec<MagnetoPoint>, SpectroscopyError> {
    fields_t
        .iter()
        .map(|&b| {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(SpectroscopyError::InvalidPlan(format!("field must be finite and >= 0, got {b}")));
            }
            let z = ZeemanConfig { b_field_t: b, ..*zeeman };
            z.validate()?;
            let scheme = build_level_scheme(&z);
            let offs: Vec<f64> = TransitionLabel::ALL.iter().map(|&t| scheme.transition_offset_ghz(t)).collect();
            let lo = offs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = offs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(MagnetoPoint {
                b_field_t: b,
                low_ev: z.e0_ev + crate::spinmodel::constants::ghz_to_ev(lo),
                high_ev: z.e0_ev + crate::spinmodel::constants::ghz_to_ev(hi),
                splitting_mev: (hi - lo) / GHZ_PER_UEV * 1e-3,
            })
        })
        .collect()
}

/// Voigt linewidth of each PL component, µeV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlLinewidth {
    pub gaussian_sigma_uev: f64,
    pub lorentzian_gamma_uev: f64,
}

impl PlLinewidth {
    pub fn fwhm_uev(&self) -> f64 {
        voigt_fwhm(self.gaussian_sigma_uev, self.lorentzian_gamma_uev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationPoint {
    pub angle_deg: f64,
    /// Peak positions relative to E0, µeV.
    pub low_uev: f64,
    pub high_uev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationScan {
    pub points: Vec<PolarizationPoint>,
    /// True when the linewidth is below the excited splitting, outside the
    /// unresolved-doublet regime the position model assumes.
    pub resolved_doublet: bool,
    pub excited_splitting_uev: f64,
    pub ground_splitting_uev: f64,
}

fn mixture_argmax(e1: f64, e2: f64, w1: f64, w2: f64, lw: &PlLinewidth) -> f64 {
    let f = |e: f64| {
        w1 * voigt_shape(e - e1, lw.gaussian_sigma_uev, lw.lorentzian_gamma_uev)
            + w2 * voigt_shape(e - e2, lw.gaussian_sigma_uev, lw.lorentzian_gamma_uev)
    };
    // The maximum lies between the two components; the grid is anchored at
    // E0 so mirrored peaks see mirrored grids.
    let lo = (e1.min(e2) / POSITION_GRID_UEV).floor() as i64 - 1;
    let hi = (e1.max(e2) / POSITION_GRID_UEV).ceil() as i64 + 1;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in lo..=hi {
        let e = k as f64 * POSITION_GRID_UEV;
        let v = f(e);
        if v > best.0 {
            best = (v, e);
        }
    }
    best.1
}

/// Peak positions versus waveplate angle. Each PL peak mixes its two
/// excited-state components with weights cos²(2φ + φ0) (V-polarized line)
/// and sin²(2φ + φ0) (H-polarized line).
pub fn simulate_polarization_pl(
    zeeman: &ZeemanConfig,
    angles_deg: &[f64],
    linewidth: &PlLinewidth,
    phi0_rad: f64,
) -> Result<PolarizationScan, SpectroscopyError> {
    zeeman.validate()?;
    if !(linewidth.gaussian_sigma_uev >= 0.0 && linewidth.lorentzian_gamma_uev >= 0.0)
        || linewidth.fwhm_uev() <= 0.0
        || !linewidth.fwhm_uev().is_finite()
    {
        return Err(SpectroscopyError::InvalidPlan("PL linewidth must be positive and finite".into()));
    }
    if angles_deg.iter().any(|a| !a.is_finite()) || !phi0_rad.is_finite() {
        return Err(SpectroscopyError::InvalidPlan("angles must be finite".into()));
    }
    let scheme = build_level_scheme(zeeman);
    let uev = |t: TransitionLabel| scheme.transition_offset_ghz(t) / GHZ_PER_UEV;
    // Low-energy peak ends in |↑⟩, high-energy peak in |↓⟩ (for g_e > 0).
    let (up_v, up_h) = (uev(TransitionLabel::UpXup), uev(TransitionLabel::UpXdown));
    let (dn_v, dn_h) = (uev(TransitionLabel::DownXdown), uev(TransitionLabel::DownXup));
    let points = angles_deg
        .iter()
        .map(|&phi| {
            let arg = 2.0 * phi.to_radians() + phi0_rad;
            let (wv, wh) = (arg.cos().powi(2), arg.sin().powi(2));
            let a = mixture_argmax(up_v, up_h, wv, wh, linewidth);
            let b = mixture_argmax(dn_v, dn_h, wv, wh, linewidth);
            PolarizationPoint {
                angle_deg: phi,
                low_uev: a.min(b),
                high_uev: a.max(b),
            }
        })
        .collect();
    let dh = scheme.delta_h_uev();
    Ok(PolarizationScan {
        points,
        resolved_doublet: linewidth.fwhm_uev() < dh.abs(),
        excited_splitting_uev: dh,
        ground_splitting_uev: scheme.delta_g_uev(),
    })
}
