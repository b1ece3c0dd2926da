//! g-factor extraction: Zeeman splitting slopes and polarization-dependent
//! peak-position sinusoids.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmOptions};
use super::AnalysisError;
use crate::spinmodel::constants::BOHR_MAGNETON_UEV_PER_T;

/// Minimum number of polarization angles per peak.
pub const MIN_ANGLES: usize = 8;
/// Minimum angular span per peak, degrees.
pub const MIN_SPAN_DEG: f64 = 90.0;
/// Seed period of the position oscillation, degrees.
pub const SEED_PERIOD_DEG: f64 = 90.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanFit {
    pub g_tot: f64,
    pub g_tot_uncertainty: f64,
    pub slope_uev_per_t: f64,
    pub n_points: usize,
}

/// Unweighted fit of `(B in T, splitting in meV)` through the origin.
pub fn fit_zeeman_splitting(points: &[(f64, f64)]) -> Result<ZeemanFit, AnalysisError> {
    fit_zeeman_splitting_weighted(points, &vec![1.0; points.len()])
}

/// Weighted least-squares line through the origin; g_tot = slope / μ_B.
pub fn fit_zeeman_splitting_weighted(points: &[(f64, f64)], weights: &[f64]) -> Result<ZeemanFit, AnalysisError> {
    if points.len() != weights.len() {
        return Err(AnalysisError::LengthMismatch(points.len(), weights.len()));
    }
    if points.iter().any(|(b, s)| !b.is_finite() || !s.is_finite()) || weights.iter().any(|w| !w.is_finite() || *w < 0.0)
    {
        return Err(AnalysisError::NonFinite("Zeeman points or weights".into()));
    }
    let first = points.first().map(|p| p.0).unwrap_or(0.0);
    if !points.iter().any(|p| p.0 != first) {
        return Err(AnalysisError::DegenerateAbscissa("fewer than two distinct field values".into()));
    }
    let sbb: f64 = points.iter().zip(weights).map(|((b, _), w)| w * b * b).sum();
    let sbs: f64 = points.iter().zip(weights).map(|((b, s), w)| w * b * s).sum();
    if sbb <= 0.0 {
        return Err(AnalysisError::DegenerateAbscissa("all weighted fields are zero".into()));
    }
    let slope_mev = sbs / sbb;
    let n = points.len();
    let chi2: f64 = points
        .iter()
        .zip(weights)
        .map(|((b, s), w)| w * (s - slope_mev * b).powi(2))
        .sum();
    let slope_var = if n > 1 { chi2 / (n - 1) as f64 / sbb } else { 0.0 };
    let slope_uev = 1e3 * slope_mev;
    Ok(ZeemanFit {
        g_tot: slope_uev / BOHR_MAGNETON_UEV_PER_T,
        g_tot_uncertainty: 1e3 * slope_var.sqrt() / BOHR_MAGNETON_UEV_PER_T,
        slope_uev_per_t: slope_uev,
        n_points: n,
    })
}

/// `E(φ) = center + amplitude · sin(a φ + b)` with φ in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub center: f64,
    /// Non-negative; the sign is absorbed into `phase_rad`.
    pub amplitude: f64,
    pub angular_frequency_rad_per_deg: f64,
    /// Wrapped into (−π, π].
    pub phase_rad: f64,
    pub period_deg: f64,
    pub residual_rms: f64,
    pub converged: bool,
}

impl SinusoidFit {
    pub fn eval(&self, phi_deg: f64) -> f64 {
        self.center + self.amplitude * (self.angular_frequency_rad_per_deg * phi_deg + self.phase_rad).sin()
    }
}

fn wrap_phase(b: f64) -> f64 {
    let w = (b + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI { w + 2.0 * PI } else { w }
}

/// Sinusoid fit seeded at a 90° period; the period itself is left free.
pub fn fit_sinusoid(points: &[(f64, f64)]) -> Result<SinusoidFit, AnalysisError> {
    let n = points.len();
    if points.iter().any(|(p, e)| !p.is_finite() || !e.is_finite()) {
        return Err(AnalysisError::NonFinite("polarization points".into()));
    }
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let span = if n > 0 { hi - lo } else { 0.0 };
    if n < MIN_ANGLES || span < MIN_SPAN_DEG {
        return Err(AnalysisError::InsufficientCoverage { angles: n, span_deg: span });
    }
    let a0 = 2.0 * PI / SEED_PERIOD_DEG;

    // Linear seed at the nominal period: E = c + s·sin(a0φ) + k·cos(a0φ).
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => (a0 * points[i].0).sin(),
        _ => (a0 * points[i].0).cos(),
    });
    let rhs = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let sol = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| AnalysisError::NonConvergence(e.to_string()))?;
    let (c0, s0, k0) = (sol[0], sol[1], sol[2]);
    let d0 = s0.hypot(k0);
    let b0 = k0.atan2(s0);

    let emax = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(1.0);
    let spread = points.iter().map(|p| (p.1 - c0).abs()).fold(0.0, f64::max);
    let flat = |center: f64, rms: f64| SinusoidFit {
        center,
        amplitude: 0.0,
        angular_frequency_rad_per_deg: a0,
        phase_rad: 0.0,
        period_deg: SEED_PERIOD_DEG,
        residual_rms: rms,
        converged: true,
    };
    if spread <= 1e-12 * emax {
        return Ok(flat(c0, 0.0));
    }

    let scale = spread;
    let residuals = |p: &[f64]| -> Vec<f64> {
        points
            .iter()
            .map(|(phi, e)| (p[0] + p[1] * (p[2] * phi + p[3]).sin() - e) / scale)
            .collect()
    };
    let scales = [scale, scale.max(d0), a0, 1.0];
    let out = levenberg_marquardt(residuals, &[c0, d0, a0, b0], &scales, &LmOptions::default())?;
    let (mut c, mut d, mut a, mut b) = (out.params[0], out.params[1], out.params[2], out.params[3]);
    if a < 0.0 {
        // sin(−|a|φ + b) = sin(|a|φ − b + π)
        a = -a;
        b = PI - b;
    }
    if d < 0.0 {
        d = -d;
        b += PI;
    }
    if !c.is_finite() || !d.is_finite() || a == 0.0 {
        c = c0;
        d = 0.0;
    }
    Ok(SinusoidFit {
        center: c,
        amplitude: d,
        angular_frequency_rad_per_deg: a,
        phase_rad: wrap_phase(b),
        period_deg: 2.0 * PI / a,
        residual_rms: out.rms * scale,
        converged: out.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationFit {
    pub peaks: Vec<SinusoidFit>,
    pub g_e_perp: f64,
    /// max ΔE_excited / (μ_B B); the measured oscillation can only
    /// underestimate the excited splitting.
    pub g_h_perp_lower_bound: f64,
}

/// One sinusoid per peak from `(φ in degrees, position in µeV)` samples.
/// g_e⊥ comes from the spread of the fitted centers.
pub fn fit_polarization_positions(peaks: &[Vec<(f64, f64)>], b_field_t: f64) -> Result<PolarizationFit, AnalysisError> {
    if peaks.len() < 2 {
        return Err(AnalysisError::InsufficientData {
            needed: 2,
            got: peaks.len(),
        });
    }
    if !(b_field_t.is_finite() && b_field_t > 0.0) {
        return Err(AnalysisError::InvalidInput(format!("field must be positive, got {b_field_t} T")));
    }
    let fits = peaks.iter().map(|p| fit_sinusoid(p)).collect::<Result<Vec<_>, _>>()?;
    let zeeman = BOHR_MAGNETON_UEV_PER_T * b_field_t;
    let hi = fits.iter().map(|f| f.center).fold(f64::NEG_INFINITY, f64::max);
    let lo = fits.iter().map(|f| f.center).fold(f64::INFINITY, f64::min);
    let dmax = fits.iter().map(|f| f.amplitude).fold(0.0, f64::max);
    Ok(PolarizationFit {
        g_e_perp: (hi - lo) / zeeman,
        g_h_perp_lower_bound: dmax / zeeman,
        peaks: fits,
    })
}
