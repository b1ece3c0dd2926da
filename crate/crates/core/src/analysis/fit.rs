//! Single-peak Voigt fits.

use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmOptions};
use super::voigt::{voigt_eval, voigt_fwhm, VoigtParams, GAUSSIAN_FWHM_PER_SIGMA};
use super::AnalysisError;
use crate::spectroscopy::Spectrum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<P> {
    pub params: P,
    /// One standard deviation per parameter, from the covariance diagonal.
    pub uncertainties: P,
    /// RMS residual in data units.
    pub residual_rms: f64,
    /// FWHM of the fitted line (for peak+dip fits: of the dip).
    pub fwhm: f64,
    pub fwhm_uncertainty: f64,
    pub iterations: usize,
    pub converged: bool,
    /// ∞-norm of the scaled gradient at the returned parameters.
    pub gradient_norm: f64,
    /// RMS residual after each accepted step, in data units.
    #[serde(skip)]
    pub rms_history: Vec<f64>,
}

/// Starting point from the data: baseline from the lower wing, height and
/// center from the maximum, width from the half-maximum crossings (second
/// moment if they are not both inside the window).
pub fn initial_guess(x: &[f64], y: &[f64]) -> VoigtParams {
    let n = x.len();
    let k = (n / 20).max(1);
    let edge = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let baseline = edge(&y[..k]).min(edge(&y[n - k..]));
    let imax = (0..n).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap_or(0);
    let height = y[imax] - baseline;
    let half = baseline + 0.5 * height;
    let crossing = |range: Box<dyn Iterator<Item = usize>>| -> Option<f64> {
        let mut prev = imax;
        for i in range {
            if y[i] < half {
                let t = (y[prev] - half) / (y[prev] - y[i]);
                return Some(x[prev] + t * (x[i] - x[prev]));
            }
            prev = i;
        }
        None
    };
    let left = crossing(Box::new((0..imax).rev()));
    let right = crossing(Box::new(imax + 1..n));
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => (r - l).abs(),
        _ => {
            let w: Vec<f64> = y.iter().map(|v| (v - baseline).max(0.0)).collect();
            let sw: f64 = w.iter().sum();
            let mean = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
            let var = x.iter().zip(&w).map(|(a, b)| b * (a - mean).powi(2)).sum::<f64>() / sw;
            GAUSSIAN_FWHM_PER_SIGMA * var.sqrt()
        }
    };
    let fwhm = if fwhm > 0.0 && fwhm.is_finite() {
        fwhm
    } else {
        (x[n - 1] - x[0]).abs() / 10.0
    };
    VoigtParams {
        center: x[imax],
        gaussian_sigma: 0.8279 * fwhm / GAUSSIAN_FWHM_PER_SIGMA,
        lorentzian_gamma: 0.15 * fwhm,
        amplitude: height,
        baseline,
    }
}

pub(crate) fn data_scale(y: &[f64]) -> Result<f64, AnalysisError> {
    let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(AnalysisError::NonFinite("data".into()));
    }
    let span = hi - lo;
    if span <= 1e-14 * hi.abs().max(lo.abs()) || span == 0.0 {
        return Err(AnalysisError::DegenerateData);
    }
    Ok(span)
}

pub(crate) fn voigt_from(p: &[f64]) -> VoigtParams {
    VoigtParams {
        center: p[0],
        gaussian_sigma: p[1].abs(),
        lorentzian_gamma: p[2].abs(),
        amplitude: p[3],
        baseline: p[4],
    }
}

pub(crate) fn voigt_to(v: &VoigtParams) -> [f64; 5] {
    [v.center, v.gaussian_sigma, v.lorentzian_gamma, v.amplitude, v.baseline]
}

/// Propagate the (σ, γ) covariance block through the FWHM.
pub(crate) fn fwhm_sigma(sigma: f64, gamma: f64, cov: Option<&nalgebra::DMatrix<f64>>, is: usize, ig: usize) -> f64 {
    let Some(c) = cov else { return f64::NAN };
    let f = |s: f64, g: f64| voigt_fwhm(s, g);
    let hs = 1e-6 * sigma.max(gamma).max(1e-300);
    let ds = (f(sigma + hs, gamma) - f((sigma - hs).max(0.0), gamma)) / (sigma + hs - (sigma - hs).max(0.0));
    let dg = (f(sigma, gamma + hs) - f(sigma, (gamma - hs).max(0.0))) / (gamma + hs - (gamma - hs).max(0.0));
    let v = ds * ds * c[(is, is)] + dg * dg * c[(ig, ig)] + 2.0 * ds * dg * c[(is, ig)];
    v.max(0.0).sqrt()
}

/// Fit one Voigt peak on a constant baseline to raw samples.
pub fn fit_voigt_xy(x: &[f64], y: &[f64], init: Option<VoigtParams>) -> Result<FitResult<VoigtParams>, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 6 {
        return Err(AnalysisError::InsufficientData { needed: 6, got: x.len() });
    }
    let scale = data_scale(y)?;
    let g = init.unwrap_or_else(|| initial_guess(x, y));
    let w = voigt_fwhm(g.gaussian_sigma, g.lorentzian_gamma).max(1e-300);
    let residuals = |p: &[f64]| -> Vec<f64> {
        let v = voigt_from(p);
        x.iter().zip(y).map(|(&xi, &yi)| (voigt_eval(&v, xi) - yi) / scale).collect()
    };
    let scales = [w, w, w, scale, scale];
    let out = levenberg_marquardt(residuals, &voigt_to(&g), &scales, &LmOptions::default())?;
    let params = voigt_from(&out.params);
    let cov = out.covariance.clone();
    let unc = |k: usize| cov.as_ref().map_or(f64::NAN, |c| c[(k, k)].max(0.0).sqrt());
    Ok(FitResult {
        params,
        uncertainties: VoigtParams {
            center: unc(0),
            gaussian_sigma: unc(1),
            lorentzian_gamma: unc(2),
            amplitude: unc(3),
            baseline: unc(4),
        },
        residual_rms: out.rms * scale,
        fwhm: params.fwhm(),
        fwhm_uncertainty: fwhm_sigma(params.gaussian_sigma, params.lorentzian_gamma, cov.as_ref(), 1, 2),
        iterations: out.iterations,
        converged: out.converged,
        gradient_norm: out.gradient_norm,
        rms_history: out.rms_history.iter().map(|r| r * scale).collect(),
    })
}

/// Fit one Voigt peak to a spectrum.
pub fn fit_voigt(s: &Spectrum, init: Option<VoigtParams>) -> Result<FitResult<VoigtParams>, AnalysisError> {
    fit_voigt_xy(s.axis(), s.counts(), init)
}
