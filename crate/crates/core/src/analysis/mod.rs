//! Fitting machinery: Voigt lineshapes, single-peak and peak+dip fits,
//! g-factor extraction from Zeeman and polarization data, dip-shift slopes
//! and exponential transient tails.

pub mod faddeeva;
pub mod fit;
pub mod gfactor;
pub mod lm;
pub mod peakdip;
pub mod slope;
pub mod transient;
pub mod voigt;

use thiserror::Error;

pub use fit::{fit_voigt, fit_voigt_xy, initial_guess, FitResult};
pub use gfactor::{
    fit_polarization_positions, fit_sinusoid, fit_zeeman_splitting, fit_zeeman_splitting_weighted, PolarizationFit,
    SinusoidFit, ZeemanFit,
};
pub use lm::{levenberg_marquardt, LmOptions, LmOutcome};
pub use peakdip::{fit_peak_with_dip, fit_peak_with_dip_xy, PeakDipFit, PeakDipParams};
pub use slope::{dip_shift_slope, linear_fit, DipSlope, LinearFit};
pub use transient::{fit_exponential_tail, ExpTailFit};
pub use voigt::{
    olivero_longbothum_fwhm, sigma_for_fwhm, voigt_eval, voigt_fwhm, voigt_profile, voigt_shape, VoigtParams,
    GAUSSIAN_FWHM_PER_SIGMA,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("length mismatch: {0} abscissa values vs {1} ordinates")]
    LengthMismatch(usize, usize),
    #[error("degenerate data: the ordinate is constant")]
    DegenerateData,
    #[error("dip not found: {0}")]
    DipNotFound(String),
    #[error("dip unresolved: {points} samples across the dip FWHM, need {needed}")]
    UnresolvedDip { points: usize, needed: usize },
    #[error("degenerate abscissa: {0}")]
    DegenerateAbscissa(String),
    #[error("insufficient angular coverage: {angles} angles spanning {span_deg:.1} deg (need 8 spanning 90 deg)")]
    InsufficientCoverage { angles: usize, span_deg: f64 },
    #[error("fit did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("scan at pump detuning {delta_ghz} GHz: {source}")]
    Scan {
        delta_ghz: f64,
        #[source]
        source: Box<AnalysisError>,
    },
}
