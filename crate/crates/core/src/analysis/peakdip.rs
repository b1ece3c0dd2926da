//! Broad Voigt peak with a narrow inverted Voigt dip, the empirical model for
//! two-laser spectra showing coherent population trapping.

use serde::{Deserialize, Serialize};

use super::fit::{data_scale, fit_voigt_xy, fwhm_sigma, initial_guess, voigt_from, voigt_to, FitResult};
use super::lm::{levenberg_marquardt, LmOptions};
use super::voigt::{voigt_eval, voigt_shape, VoigtParams, GAUSSIAN_FWHM_PER_SIGMA};
use super::AnalysisError;
use crate::spectroscopy::Spectrum;

/// Minimum number of samples across the dip FWHM.
pub const MIN_POINTS_ACROSS_DIP: usize = 5;

/// Dip depth, in units of the estimated noise, required to accept a candidate.
pub const DIP_SIGNIFICANCE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakDipParams {
    /// The positive peak, carrying the shared baseline.
    pub peak: VoigtParams,
    /// The dip; `amplitude` is negative and `baseline` is zero.
    pub dip: VoigtParams,
}

impl PeakDipParams {
    pub fn eval(&self, x: f64) -> f64 {
        voigt_eval(&self.peak, x)
            + self.dip.amplitude * voigt_shape(x - self.dip.center, self.dip.gaussian_sigma, self.dip.lorentzian_gamma)
    }

    pub fn dip_fwhm(&self) -> f64 {
        self.dip.fwhm()
    }

    pub fn peak_fwhm(&self) -> f64 {
        self.peak.fwhm()
    }

    /// |dip amplitude| over the peak model (baseline included) at the dip center.
    pub fn contrast(&self) -> f64 {
        self.dip.amplitude.abs() / voigt_eval(&self.peak, self.dip.center)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakDipFit {
    pub fit: FitResult<PeakDipParams>,
    pub dip_center: f64,
    pub dip_fwhm: f64,
    pub peak_center: f64,
    pub peak_fwhm: f64,
    pub contrast: f64,
}

fn from_vec(p: &[f64]) -> PeakDipParams {
    let mut dip = voigt_from(&[p[5], p[6], p[7], -p[8].abs(), 0.0]);
    dip.baseline = 0.0;
    PeakDipParams {
        peak: voigt_from(&p[..5]),
        dip,
    }
}

/// Robust noise estimate from second differences of the residual.
fn noise_level(r: &[f64]) -> f64 {
    if r.len() < 5 {
        return 0.0;
    }
    let mut d2: Vec<f64> = r.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
    d2.sort_by(f64::total_cmp);
    let med = d2[d2.len() / 2];
    let mut dev: Vec<f64> = d2.iter().map(|v| (v - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    dev[dev.len() / 2] / (0.6745 * 6f64.sqrt())
}

/// Half-depth crossings of a dip in `r` around index `i0`.
fn half_depth_width(x: &[f64], r: &[f64], i0: usize) -> (f64, f64) {
    let half = 0.5 * r[i0];
    let interp = |a: usize, b: usize| {
        let t = (half - r[a]) / (r[b] - r[a]);
        x[a] + t * (x[b] - x[a])
    };
    let mut left = x[0];
    for i in (0..i0).rev() {
        if r[i] >= half {
            left = interp(i + 1, i);
            break;
        }
    }
    let mut right = x[x.len() - 1];
    for i in i0 + 1..x.len() {
        if r[i] >= half {
            right = interp(i - 1, i);
            break;
        }
    }
    (left, right)
}

/// Joint peak + dip fit to raw samples.
pub fn fit_peak_with_dip_xy(x_in: &[f64], y_in: &[f64]) -> Result<PeakDipFit, AnalysisError> {
    if x_in.len() != y_in.len() {
        return Err(AnalysisError::LengthMismatch(x_in.len(), y_in.len()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = if x_in.len() > 1 && x_in[1] < x_in[0] {
        (x_in.iter().rev().cloned().collect(), y_in.iter().rev().cloned().collect())
    } else {
        (x_in.to_vec(), y_in.to_vec())
    };
    let n = x.len();
    if n < 15 {
        return Err(AnalysisError::InsufficientData { needed: 15, got: n });
    }
    let scale = data_scale(&y)?;

    let crude = fit_voigt_xy(&x, &y, None)?;
    let pk = crude.params;
    let (lo, hi) = (pk.center - 0.5 * crude.fwhm, pk.center + 0.5 * crude.fwhm);
    let resid: Vec<f64> = x.iter().zip(&y).map(|(&xi, &yi)| yi - voigt_eval(&pk, xi)).collect();
    let noise = noise_level(&resid);
    let threshold = (DIP_SIGNIFICANCE * noise).max(1e-9 * scale);

    let mut best: Option<(usize, f64)> = None;
    for i in 1..n - 1 {
        if x[i] < lo || x[i] > hi {
            continue;
        }
        let is_min = y[i] <= y[i - 1] && y[i] <= y[i + 1] && (y[i] < y[i - 1] || y[i] < y[i + 1]);
        if !is_min {
            continue;
        }
        let depth = voigt_eval(&pk, x[i]) - y[i];
        if best.is_none_or(|(_, d)| depth > d) {
            best = Some((i, depth));
        }
    }
    let (imin, depth) = best.ok_or_else(|| AnalysisError::DipNotFound("no local minimum inside the peak FWHM".into()))?;
    if depth <= threshold {
        return Err(AnalysisError::DipNotFound(format!(
            "deepest minimum ({depth:.3e}) is not significant against noise {noise:.3e}"
        )));
    }

    // Mask the dip and refit the peak alone.
    let (l0, r0) = half_depth_width(&x, &resid, imin);
    let w0 = (r0 - l0).max(x[(imin + 1).min(n - 1)] - x[imin.saturating_sub(1)]);
    let keep: Vec<usize> = (0..n).filter(|&i| (x[i] - x[imin]).abs() > 2.0 * w0).collect();
    let peak = if keep.len() >= 8 {
        let xs: Vec<f64> = keep.iter().map(|&i| x[i]).collect();
        let ys: Vec<f64> = keep.iter().map(|&i| y[i]).collect();
        fit_voigt_xy(&xs, &ys, Some(pk)).map(|f| f.params).unwrap_or(pk)
    } else {
        pk
    };

    // Dip guess from what the peak does not explain.
    let r2: Vec<f64> = x.iter().zip(&y).map(|(&xi, &yi)| yi - voigt_eval(&peak, xi)).collect();
    let i2 = (0..n)
        .filter(|&i| (x[i] - x[imin]).abs() <= 2.0 * w0)
        .min_by(|&a, &b| r2[a].total_cmp(&r2[b]))
        .unwrap_or(imin);
    let (l2, rr2) = half_depth_width(&x, &r2, i2);
    let fd = (rr2 - l2).max(1e-3 * w0).max(f64::MIN_POSITIVE);
    let dip0 = VoigtParams {
        center: x[i2],
        gaussian_sigma: 0.5 * fd / GAUSSIAN_FWHM_PER_SIGMA,
        lorentzian_gamma: 0.3 * fd,
        amplitude: r2[i2].min(-depth * 0.5),
        baseline: 0.0,
    };

    let mut p0 = voigt_to(&peak).to_vec();
    p0.extend_from_slice(&[dip0.center, dip0.gaussian_sigma, dip0.lorentzian_gamma, dip0.amplitude.abs()]);
    let fp = peak.fwhm().max(1e-300);
    let scales = [fp, fp, fp, scale, scale, fd, fd, fd, scale];
    let residuals = |p: &[f64]| -> Vec<f64> {
        let m = from_vec(p);
        x.iter().zip(&y).map(|(&xi, &yi)| (m.eval(xi) - yi) / scale).collect()
    };
    let out = levenberg_marquardt(residuals, &p0, &scales, &LmOptions::default())?;
    let params = from_vec(&out.params);

    let dip_fwhm = params.dip_fwhm();
    let peak_fwhm = params.peak_fwhm();
    if !(dip_fwhm < peak_fwhm) {
        return Err(AnalysisError::DipNotFound(format!(
            "fitted dip ({dip_fwhm:.4}) is not narrower than the peak ({peak_fwhm:.4})"
        )));
    }
    let support = (params.peak.center - 0.5 * peak_fwhm, params.peak.center + 0.5 * peak_fwhm);
    if params.dip.center < support.0 || params.dip.center > support.1 {
        return Err(AnalysisError::DipNotFound(format!(
            "fitted dip center {:.4} lies outside the peak FWHM interval",
            params.dip.center
        )));
    }
    let across = x
        .iter()
        .filter(|&&xi| (xi - params.dip.center).abs() <= 0.5 * dip_fwhm)
        .count();
    if across < MIN_POINTS_ACROSS_DIP {
        return Err(AnalysisError::UnresolvedDip {
            points: across,
            needed: MIN_POINTS_ACROSS_DIP,
        });
    }

    let cov = out.covariance.clone();
    let unc = |k: usize| cov.as_ref().map_or(f64::NAN, |c| c[(k, k)].max(0.0).sqrt());
    let uncertainties = PeakDipParams {
        peak: VoigtParams::new(unc(0), unc(1), unc(2), unc(3), unc(4)),
        dip: VoigtParams::new(unc(5), unc(6), unc(7), unc(8), 0.0),
    };
    let fit = FitResult {
        params,
        uncertainties,
        residual_rms: out.rms * scale,
        fwhm: dip_fwhm,
        fwhm_uncertainty: fwhm_sigma(params.dip.gaussian_sigma, params.dip.lorentzian_gamma, cov.as_ref(), 6, 7),
        iterations: out.iterations,
        converged: out.converged,
        gradient_norm: out.gradient_norm,
        rms_history: out.rms_history.iter().map(|r| r * scale).collect(),
    };
    Ok(PeakDipFit {
        dip_center: params.dip.center,
        dip_fwhm,
        peak_center: params.peak.center,
        peak_fwhm,
        contrast: params.contrast(),
        fit,
    })
}

/// Joint peak + dip fit to a spectrum.
pub fn fit_peak_with_dip(s: &Spectrum) -> Result<PeakDipFit, AnalysisError> {
    fit_peak_with_dip_xy(s.axis(), s.counts())
}

/// Peak-only guess, exposed for callers that want to seed their own fits.
pub fn peak_guess(s: &Spectrum) -> VoigtParams {
    initial_guess(s.axis(), s.counts())
}
