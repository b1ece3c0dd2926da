//! Oscillatory background correction for a beamsplitter whose split ratio
//! oscillates with photon energy.
//!
//! f(E) = P_A/P_B = offset + amplitude·sin(2πE/period + φ) with E in meV
//! measured from the first axis sample; the absolute energy origin only
//! shifts φ. Measured intensities are multiplied by the correction factor
//! (1 + 1/f)·mean_reflectance.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectroscopy::{AxisKind, Spectrum, SpectroscopyError};
use crate::spinmodel::constants::GHZ_PER_UEV;

/// Fitted amplitude below this fraction of the mean level counts as no
/// oscillation.
pub const MIN_RELATIVE_AMPLITUDE: f64 = 5e-3;

#[derive(Debug, Error)]
pub enum CorrectionError {
    #[error("invalid beamsplitter model: {0}")]
    InvalidModel(String),
    #[error("split ratio f = {f} at {e_mev} meV is not positive")]
    NonPositiveRatio { e_mev: f64, f: f64 },
    #[error("background mask spans {span_mev:.4} meV, less than one period ({period_mev} meV)")]
    MaskTooShort { span_mev: f64, period_mev: f64 },
    #[error("background mask selects {0} points, need at least 5")]
    TooFewPoints(usize),
    #[error("axis kind {0} has no energy scale")]
    UnsupportedAxis(&'static str),
    #[error("phase fit failed: {0}")]
    Fit(String),
    #[error(transparent)]
    Spectrum(#[from] SpectroscopyError),
}

fn default_offset() -> f64 {
    0.58
}
fn default_amplitude() -> f64 {
    0.07
}
fn default_period() -> f64 {
    0.18
}
fn default_reflectance() -> f64 {
    0.36
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamsplitterModel {
    #[serde(default = "default_offset")]
    pub offset: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_period")]
    pub period_mev: f64,
    #[serde(default)]
    pub phase_rad: f64,
    #[serde(default = "default_reflectance")]
    pub mean_reflectance: f64,
}

impl Default for BeamsplitterModel {
    fn default() -> Self {
        Self {
            offset: default_offset(),
            amplitude: default_amplitude(),
            period_mev: default_period(),
            phase_rad: 0.0,
            mean_reflectance: default_reflectance(),
        }
    }
}

impl BeamsplitterModel {
    pub fn with_phase(self, phase_rad: f64) -> Self {
        Self { phase_rad, ..self }
    }

    pub fn validate(&self) -> Result<(), CorrectionError> {
        let all_finite = [self.offset, self.amplitude, self.period_mev, self.phase_rad, self.mean_reflectance]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(CorrectionError::InvalidModel("non-finite parameter".into()));
        }
        if !(self.amplitude >= 0.0 && self.offset > self.amplitude) {
            return Err(CorrectionError::InvalidModel(format!(
                "need offset > amplitude >= 0, got offset {} amplitude {}",
                self.offset, self.amplitude
            )));
        }
        if !(self.period_mev > 0.0) {
            return Err(CorrectionError::InvalidModel("period_mev must be > 0".into()));
        }
        if !(self.mean_reflectance > 0.0) {
            return Err(CorrectionError::InvalidModel("mean_reflectance must be > 0".into()));
        }
        Ok(())
    }

    /// Split ratio at `e_mev` from the energy origin.
    pub fn ratio_f(&self, e_mev: f64) -> f64 {
        self.offset + self.amplitude * (2.0 * PI * e_mev / self.period_mev + self.phase_rad).sin()
    }

    /// (1 + 1/f)·mean_reflectance.
    pub fn correction_factor(&self, e_mev: f64) -> Result<f64, CorrectionError> {
        let f = self.ratio_f(e_mev);
        if !(f > 0.0) {
            return Err(CorrectionError::NonPositiveRatio { e_mev, f });
        }
        Ok(correction_factor_for_ratio(f, self.mean_reflectance))
    }
}

/// (1 + 1/f)·mean_reflectance for a given split ratio.
pub fn correction_factor_for_ratio(f: f64, mean_reflectance: f64) -> f64 {
    (1.0 + 1.0 / f) * mean_reflectance
}

/// Axis positions in meV from the first sample.
pub fn relative_energy_mev(s: &Spectrum) -> Result<Vec<f64>, CorrectionError> {
    let to_mev: fn(f64) -> f64 = match s.axis_kind() {
        AxisKind::EnergyEv => |x| x * 1e3,
        AxisKind::DetuningGhz => |x| x / GHZ_PER_UEV * 1e-3,
        k => return Err(CorrectionError::UnsupportedAxis(k.as_str())),
    };
    let x0 = s.axis()[0];
    Ok(s.axis().iter().map(|&x| to_mev(x - x0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum PhaseEstimate {
    Detected {
        phase_rad: f64,
        /// Fitted sine amplitude in counts.
        amplitude: f64,
        /// Mean level of the detrended background in counts.
        mean_level: f64,
        residual_rms: f64,
        n_points: usize,
    },
    /// The fitted amplitude is indistinguishable from zero; the correction
    /// should be skipped.
    NoOscillation {
        amplitude: f64,
        mean_level: f64,
        residual_rms: f64,
        n_points: usize,
    },
}

impl PhaseEstimate {
    pub fn phase(&self) -> Option<f64> {
        match self {
            PhaseEstimate::Detected { phase_rad, .. } => Some(*phase_rad),
            PhaseEstimate::NoOscillation { .. } => None,
        }
    }
}

/// Fixed-period sine fit to the background points inside `windows`
/// (inclusive axis-unit intervals). Offset, linear trend and the two
/// quadratures are fitted jointly by linear least squares.
pub fn estimate_phase(
    s: &Spectrum,
    windows: &[(f64, f64)],
    model: &BeamsplitterModel,
) -> Result<PhaseEstimate, CorrectionError> {
    model.validate()?;
    let e = relative_energy_mev(s)?;
    let idx: Vec<usize> = (0..s.len())
        .filter(|&i| {
            let x = s.axis()[i];
            windows.iter().any(|&(lo, hi)| x >= lo.min(hi) && x <= hi.max(lo))
        })
        .collect();
    if idx.len() < 5 {
        return Err(CorrectionError::TooFewPoints(idx.len()));
    }
    let emin = idx.iter().map(|&i| e[i]).fold(f64::INFINITY, f64::min);
    let emax = idx.iter().map(|&i| e[i]).fold(f64::NEG_INFINITY, f64::max);
    if emax - emin < model.period_mev {
        return Err(CorrectionError::MaskTooShort {
            span_mev: emax - emin,
            period_mev: model.period_mev,
        });
    }
    let k = 2.0 * PI / model.period_mev;
    let n = idx.len();
    let ec = 0.5 * (emin + emax);
    let design = DMatrix::from_fn(n, 4, |r, c| {
        let ei = e[idx[r]];
        match c {
            0 => 1.0,
            1 => (ei - ec) / (emax - emin),
            2 => (k * ei).sin(),
            _ => (k * ei).cos(),
        }
    });
    let y = DVector::from_iterator(n, idx.iter().map(|&i| s.counts()[i]));
    let svd = design.clone().svd(true, true);
    let coef = svd.solve(&y, 1e-12).map_err(|m| CorrectionError::Fit(m.to_string()))?;
    let resid = &y - &design * &coef;
    let dof = n.saturating_sub(4).max(1);
    let rms = (resid.norm_squared() / n as f64).sqrt();
    let s2 = resid.norm_squared() / dof as f64;
    let (a_sin, a_cos) = (coef[2], coef[3]);
    let amplitude = a_sin.hypot(a_cos);
    let mean_level = coef[0];
    // Standard error of the amplitude from the quadrature block.
    let jtj_inv = (design.transpose() * &design).try_inverse();
    let amp_se = jtj_inv.map_or(0.0, |c| {
        let v = if amplitude > 0.0 {
            let (u0, u1) = (a_sin / amplitude, a_cos / amplitude);
            s2 * (u0 * u0 * c[(2, 2)] + u1 * u1 * c[(3, 3)] + 2.0 * u0 * u1 * c[(2, 3)])
        } else {
            s2 * c[(2, 2)]
        };
        v.max(0.0).sqrt()
    });
    if amplitude <= MIN_RELATIVE_AMPLITUDE * mean_level.abs() || amplitude <= 3.0 * amp_se {
        return Ok(PhaseEstimate::NoOscillation {
            amplitude,
            mean_level,
            residual_rms: rms,
            n_points: n,
        });
    }
    // A·sin(kE + φ) = A cos φ · sin kE + A sin φ · cos kE
    Ok(PhaseEstimate::Detected {
        phase_rad: a_cos.atan2(a_sin),
        amplitude,
        mean_level,
        residual_rms: rms,
        n_points: n,
    })
}

fn factors(s: &Spectrum, model: &BeamsplitterModel) -> Result<Vec<f64>, CorrectionError> {
    model.validate()?;
    relative_energy_mev(s)?
        .iter()
        .map(|&e| model.correction_factor(e))
        .collect()
}

fn record(s: Spectrum, model: &BeamsplitterModel, op: &str) -> Spectrum {
    s.with_meta(&format!("{op}_offset"), model.offset)
        .with_meta(&format!("{op}_amplitude"), model.amplitude)
        .with_meta(&format!("{op}_period_mev"), model.period_mev)
        .with_meta(&format!("{op}_phase_rad"), model.phase_rad)
        .with_meta(&format!("{op}_mean_reflectance"), model.mean_reflectance)
}

/// counts × correction factor. Not idempotent: applying twice multiplies
/// by the factor twice.
pub fn apply_correction(s: &Spectrum, model: &BeamsplitterModel) -> Result<Spectrum, CorrectionError> {
    let cf = factors(s, model)?;
    let counts = s.counts().iter().zip(&cf).map(|(c, f)| c * f).collect();
    Ok(record(s.with_counts(counts)?, model, "correction"))
}

/// counts / correction factor: what the detector would record for the
/// given ideal spectrum.
pub fn synthesize_oscillation(ideal: &Spectrum, model: &BeamsplitterModel) -> Result<Spectrum, CorrectionError> {
    let cf = factors(ideal, model)?;
    let counts = ideal.counts().iter().zip(&cf).map(|(c, f)| c / f).collect();
    Ok(record(ideal.with_counts(counts)?, model, "oscillation"))
}

/// Peak-to-peak modulation (max − min)/mean of 1/CF over one period.
pub fn flat_modulation(model: &BeamsplitterModel) -> Result<f64, CorrectionError> {
    model.validate()?;
    let n = 100_000;
    let v = (0..n)
        .map(|k| model.correction_factor(model.period_mev * k as f64 / n as f64).map(|c| 1.0 / c))
        .collect::<Result<Vec<f64>, _>>()?;
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = v.iter().sum::<f64>() / n as f64;
    Ok((max - min) / mean)
}
