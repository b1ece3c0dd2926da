//! Voigt lineshapes.
//!
//! `gaussian_sigma` is the Gaussian standard deviation and
//! `lorentzian_gamma` the Lorentzian half width at half maximum. Profiles
//! are parametrized by peak height above a constant baseline, which keeps
//! amplitude and width uncorrelated in fits.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::faddeeva::faddeeva;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// FWHM of a Gaussian per unit standard deviation, 2√(2 ln 2).
pub const GAUSSIAN_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoigtParams {
    pub center: f64,
    pub gaussian_sigma: f64,
    pub lorentzian_gamma: f64,
    /// Peak height above the baseline; negative for a dip.
    pub amplitude: f64,
    pub baseline: f64,
}

impl VoigtParams {
    pub fn new(center: f64, gaussian_sigma: f64, lorentzian_gamma: f64, amplitude: f64, baseline: f64) -> Self {
        Self {
            center,
            gaussian_sigma,
            lorentzian_gamma,
            amplitude,
            baseline,
        }
    }

    pub fn fwhm(&self) -> f64 {
        voigt_fwhm(self.gaussian_sigma, self.lorentzian_gamma)
    }
}

/// Area-normalized Voigt profile at offset `x` from the center.
pub fn voigt_profile(x: f64, sigma: f64, gamma: f64) -> f64 {
    let sigma = sigma.abs();
    let gamma = gamma.abs();
    if sigma == 0.0 && gamma == 0.0 {
        return if x == 0.0 { f64::INFINITY } else { 0.0 };
    }
    if gamma == 0.0 {
        return (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt());
    }
    if sigma == 0.0 {
        return gamma / (PI * (x * x + gamma * gamma));
    }
    let z = Complex64::new(x, gamma) / (sigma * SQRT_2);
    faddeeva(z).re / (sigma * (2.0 * PI).sqrt())
}

/// Profile divided by its peak value, so the maximum is 1.
pub fn voigt_shape(x: f64, sigma: f64, gamma: f64) -> f64 {
    let sigma = sigma.abs();
    let gamma = gamma.abs();
    if sigma == 0.0 && gamma == 0.0 {
        return if x == 0.0 { 1.0 } else { 0.0 };
    }
    if gamma == 0.0 {
        return (-0.5 * (x / sigma).powi(2)).exp();
    }
    if sigma == 0.0 {
        return gamma * gamma / (x * x + gamma * gamma);
    }
    let s = sigma * SQRT_2;
    let peak = faddeeva(Complex64::new(0.0, gamma / s)).re;
    faddeeva(Complex64::new(x / s, gamma / s)).re / peak
}

/// baseline + amplitude · shape(x − center).
pub fn voigt_eval(p: &VoigtParams, x: f64) -> f64 {
    p.baseline + p.amplitude * voigt_shape(x - p.center, p.gaussian_sigma, p.lorentzian_gamma)
}

/// Full width at half maximum, by bisection on the half-maximum crossing.
pub fn voigt_fwhm(sigma: f64, gamma: f64) -> f64 {
    let sigma = sigma.abs();
    let gamma = gamma.abs();
    if gamma == 0.0 {
        return GAUSSIAN_FWHM_PER_SIGMA * sigma;
    }
    if sigma == 0.0 {
        return 2.0 * gamma;
    }
    // The Voigt FWHM never exceeds the sum of the component widths.
    let mut lo = 0.0;
    let mut hi = 0.5 * (GAUSSIAN_FWHM_PER_SIGMA * sigma + 2.0 * gamma) * 1.001;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if voigt_shape(mid, sigma, gamma) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo + hi
}

/// Olivero–Longbothum approximation (worst-case error 0.024%).
pub fn olivero_longbothum_fwhm(sigma: f64, gamma: f64) -> f64 {
    let fg = GAUSSIAN_FWHM_PER_SIGMA * sigma.abs();
    let fl = 2.0 * gamma.abs();
    0.5346 * fl + (0.2166 * fl * fl + fg * fg).sqrt()
}

/// Gaussian σ that, combined with the given Lorentzian HWHM, gives the
/// requested Voigt FWHM. `None` if the Lorentzian alone is already wider.
pub fn sigma_for_fwhm(target_fwhm: f64, gamma: f64) -> Option<f64> {
    if 2.0 * gamma.abs() > target_fwhm {
        return None;
    }
    let mut lo = 0.0;
    let mut hi = target_fwhm / GAUSSIAN_FWHM_PER_SIGMA;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if voigt_fwhm(mid, gamma) < target_fwhm {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Gaussian closed form, for reference.
pub fn gaussian(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Lorentzian closed form, for reference.
pub fn lorentzian(x: f64, gamma: f64) -> f64 {
    gamma / (PI * (x * x + gamma * gamma))
}
