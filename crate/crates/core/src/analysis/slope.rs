//! Linear dependence of fitted dip (and peak) centers on the pump detuning.

use serde::{Deserialize, Serialize};

use super::peakdip::fit_peak_with_dip;
use super::AnalysisError;
use crate::spectroscopy::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub slope_uncertainty: f64,
    pub intercept: f64,
    pub intercept_uncertainty: f64,
}

/// Ordinary least squares y = intercept + slope·x. Uncertainties use the
/// residual variance with n − 2 degrees of freedom (zero for n = 2).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(AnalysisError::InsufficientData { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    if sxx <= 1e-24 * scale * scale * nf {
        return Err(AnalysisError::DegenerateAbscissa("all abscissa values coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let s2 = if n > 2 {
        x.iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum::<f64>()
            / (nf - 2.0)
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        slope_uncertainty: (s2 / sxx).sqrt(),
        intercept,
        intercept_uncertainty: (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipSlope {
    pub dip: LinearFit,
    /// Slope of the fitted broad-peak (reverse spectral hole) centers.
    pub peak: LinearFit,
    pub detunings_ghz: Vec<f64>,
    pub dip_centers: Vec<f64>,
    pub peak_centers: Vec<f64>,
    pub dip_fwhms: Vec<f64>,
}

/// Fit each `(Δ, spectrum)` with the peak+dip model, then regress the
/// centers on Δ.
pub fn dip_shift_slope(scans: &[(f64, Spectrum)]) -> Result<DipSlope, AnalysisError> {
    if scans.len() < 3 {
        return Err(AnalysisError::InsufficientData {
            needed: 3,
            got: scans.len(),
        });
    }
    let deltas: Vec<f64> = scans.iter().map(|(d, _)| *d).collect();
    if deltas.iter().all(|d| *d == deltas[0]) {
        return Err(AnalysisError::DegenerateAbscissa("all pump detunings are identical".into()));
    }
    let mut dip_centers = Vec::with_capacity(scans.len());
    let mut peak_centers = Vec::with_capacity(scans.len());
    let mut dip_fwhms = Vec::with_capacity(scans.len());
    for (delta, s) in scans {
        let f = fit_peak_with_dip(s).map_err(|e| AnalysisError::Scan {
            delta_ghz: *delta,
            source: Box::new(e),
        })?;
        dip_centers.push(f.dip_center);
        peak_centers.push(f.peak_center);
        dip_fwhms.push(f.dip_fwhm);
    }
    Ok(DipSlope {
        dip: linear_fit(&deltas, &dip_centers)?,
        peak: linear_fit(&deltas, &peak_centers)?,
        detunings_ghz: deltas,
        dip_centers,
        peak_centers,
        dip_fwhms,
    })
}
