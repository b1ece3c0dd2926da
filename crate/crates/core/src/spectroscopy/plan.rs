//! Scan grids and the experiment configuration shared by all drivers.

use serde::{Deserialize, Serialize};

use super::SpectroscopyError;
use crate::dynamics::EnsembleSpec;
use crate::spinmodel::{DriveField, ModelKind, RelaxationConfig, ZeemanConfig};

/// Extra points at a finer step inside `[center − half_width, center + half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FineWindow {
    pub center: f64,
    pub half_width: f64,
    pub step: f64,
}

/// Uniform grid `start, start + step, …, ≤ stop`, optionally merged with a
/// finer window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanAxis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    #[serde(default)]
    pub fine: Option<FineWindow>,
}

/// Upper bound on the number of points per scan.
pub const MAX_SCAN_POINTS: usize = 1_000_000;

impl ScanAxis {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self {
            start,
            stop,
            step,
            fine: None,
        }
    }

    pub fn with_fine(mut self, center: f64, half_width: f64, step: f64) -> Self {
        self.fine = Some(FineWindow {
            center,
            half_width,
            step,
        });
        self
    }

    pub fn validate(&self) -> Result<(), SpectroscopyError> {
        let bad = |m: &str| Err(SpectroscopyError::InvalidPlan(m.to_string()));
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return bad("scan bounds must be finite");
        }
        if !(self.step > 0.0) {
            return bad("scan step must be > 0");
        }
        if !(self.start < self.stop) {
            return bad("scan start must be below stop");
        }
        if (self.stop - self.start) / self.step > MAX_SCAN_POINTS as f64 {
            return bad("scan has too many points");
        }
        if let Some(f) = self.fine {
            if !(f.center.is_finite() && f.half_width > 0.0 && f.half_width.is_finite()) {
                return bad("fine window needs a finite center and half_width > 0");
            }
            if !(f.step > 0.0) || !f.step.is_finite() {
                return bad("fine window step must be > 0");
            }
            if 2.0 * f.half_width / f.step > MAX_SCAN_POINTS as f64 {
                return bad("fine window has too many points");
            }
        }
        Ok(())
    }

    /// Sorted, strictly increasing sample positions.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step * (1.0 + 1e-12)).floor() as usize + 1;
        let mut pts: Vec<f64> = (0..n).map(|k| self.start + k as f64 * self.step).collect();
        if let Some(f) = self.fine {
            let lo = (f.center - f.half_width).max(self.start);
            let hi = (f.center + f.half_width).min(self.stop);
            if lo < hi {
                let m = ((hi - lo) / f.step * (1.0 + 1e-12)).floor() as usize + 1;
                let fine: Vec<f64> = (0..m).map(|k| lo + k as f64 * f.step).collect();
                // Coarse points inside the window are replaced by the fine grid.
                pts.retain(|x| *x < lo - 0.5 * f.step || *x > hi + 0.5 * f.step);
                pts.extend(fine);
            }
        }
        pts.sort_by(f64::total_cmp);
        let tol = 1e-9 * self.fine.map_or(self.step, |f| f.step.min(self.step));
        pts.dedup_by(|a, b| (*a - *b).abs() <= tol);
        pts
    }

    /// Largest spacing between neighbouring points inside `[lo, hi]`.
    pub fn max_step_within(&self, lo: f64, hi: f64) -> f64 {
        let p = self.points();
        p.windows(2)
            .filter(|w| w[1] >= lo && w[0] <= hi)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

fn default_detection() -> f64 {
    1.0
}

fn default_model() -> ModelKind {
    ModelKind::Full
}

/// Everything about the sample and the detection that does not change
/// during a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSetup {
    pub zeeman: ZeemanConfig,
    #[serde(default)]
    pub relaxation: RelaxationConfig,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default = "default_model")]
    pub model: ModelKind,
    /// Counts per (excited population × Γ_X in GHz).
    #[serde(default = "default_detection")]
    pub detection_scalar: f64,
}

impl ExperimentSetup {
    pub fn new(zeeman: ZeemanConfig, relaxation: RelaxationConfig, ensemble: EnsembleSpec, model: ModelKind) -> Self {
        Self {
            zeeman,
            relaxation,
            ensemble,
            model,
            detection_scalar: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SpectroscopyError> {
        self.zeeman.validate()?;
        self.relaxation.validate()?;
        self.ensemble.validate()?;
        if !(self.detection_scalar >= 0.0) || !self.detection_scalar.is_finite() {
            return Err(SpectroscopyError::InvalidPlan("detection_scalar must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// A laser scan: one drive swept along `axis` (photon energy relative to
/// E0, GHz) while the `fixed` drives stay put.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanPlan {
    pub setup: ExperimentSetup,
    pub axis: ScanAxis,
    /// The swept drive; its configured energy is ignored.
    pub scanned: DriveField,
    #[serde(default)]
    pub fixed: Vec<DriveField>,
}

impl ScanPlan {
    pub fn validate(&self) -> Result<(), SpectroscopyError> {
        self.setup.validate()?;
        self.axis.validate()?;
        self.scanned.validate()?;
        for d in &self.fixed {
            d.validate()?;
        }
        if self.fixed.len() > 1 {
            return Err(SpectroscopyError::InvalidPlan(format!(
                "at most one fixed drive, got {}",
                self.fixed.len()
            )));
        }
        Ok(())
    }
}
