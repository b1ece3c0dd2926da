//! Mono-exponential tail fits to pumping transients.

use serde::{Deserialize, Serialize};

use super::fit::data_scale;
use super::lm::{levenberg_marquardt, LmOptions};
use super::AnalysisError;

/// `y(t) = offset + amplitude · exp(−rate · (t − t_start))` for t ≥ t_start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTailFit {
    pub t_start: f64,
    pub offset: f64,
    pub amplitude: f64,
    /// Decay rate in inverse axis units (1/ns for a time axis in ns).
    pub rate: f64,
    pub rate_uncertainty: f64,
    pub residual_rms: f64,
    pub converged: bool,
}

impl ExpTailFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (-self.rate * (t - self.t_start)).exp()
    }
}

/// Fit the samples with `t ≥ t_start`. The seed takes the offset from the
/// last tenth of the window and the rate from a log-linear fit.
pub fn fit_exponential_tail(t: &[f64], y: &[f64], t_start: f64) -> Result<ExpTailFit, AnalysisError> {
    if t.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(t.len(), y.len()));
    }
    let (tt, yy): (Vec<f64>, Vec<f64>) = t.iter().zip(y).filter(|(a, _)| **a >= t_start).map(|(a, b)| (a - t_start, *b)).unzip();
    let n = tt.len();
    if n < 6 {
        return Err(AnalysisError::InsufficientData { needed: 6, got: n });
    }
    let scale = data_scale(&yy)?;
    let k = (n / 10).max(1);
    let a0 = yy[n - k..].iter().sum::<f64>() / k as f64;
    let b0 = yy[0] - a0;
    // Log-linear seed on the points well above the offset.
    let pts: Vec<(f64, f64)> = tt
        .iter()
        .zip(&yy)
        .filter(|(_, v)| (**v - a0) * b0.signum() > 0.05 * b0.abs())
        .map(|(a, v)| (*a, ((v - a0) / b0).ln()))
        .collect();
    let span = tt[n - 1] - tt[0];
    let mut r0 = 3.0 / span.max(1e-300);
    if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 && sxy < 0.0 {
            r0 = -sxy / sxx;
        }
    }
    let residuals = |p: &[f64]| -> Vec<f64> {
        tt.iter()
            .zip(&yy)
            .map(|(a, v)| (p[0] + p[1] * (-p[2] * a).exp() - v) / scale)
            .collect()
    };
    let out = levenberg_marquardt(residuals, &[a0, b0, r0], &[scale, scale, r0], &LmOptions::default())?;
    let unc = out.covariance.as_ref().map_or(f64::NAN, |c| c[(2, 2)].max(0.0).sqrt());
    Ok(ExpTailFit {
        t_start,
        offset: out.params[0],
        amplitude: out.params[1],
        rate: out.params[2],
        rate_uncertainty: unc,
        residual_rms: out.rms * scale,
        converged: out.converged,
    })
}
