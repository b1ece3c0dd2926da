//! Master-equation solvers: time evolution, stationary states and ensemble
//! averages.

pub mod density;
pub mod ensemble;
pub mod evolve;
pub mod quadrature;
pub mod steady;

pub use density::DensityMatrix;
pub use ensemble::{
    average_over, ensemble_average, ensemble_average_scalar, ensemble_samples, EnsembleSample,
    EnsembleSpec,
};
pub use evolve::{evolve, evolve_trajectory, evolve_with, spectral_gap, EvolveOptions};
pub use steady::steady_state;

use thiserror::Error;

use crate::spinmodel::SpinModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] SpinModelError),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("state dimension {state} does not match model dimension {model}")]
    DimensionMismatch { model: usize, state: usize },
    #[error("invalid duration {0} ns")]
    InvalidDuration(f64),
    #[error(
        "step size underflow ({step_ns:.3e} ns at t = {time_ns:.3e} ns); stiff configuration with rate ratio {rate_ratio:.3e}"
    )]
    StepUnderflow { step_ns: f64, time_ns: f64, rate_ratio: f64 },
    #[error(
        "step budget of {steps} exhausted at t = {time_ns:.3e} ns; stiff configuration with rate ratio {rate_ratio:.3e}"
    )]
    StepBudgetExceeded { steps: usize, time_ns: f64, rate_ratio: f64 },
    #[error("trace drift {drift:.3e} in one step at t = {time_ns:.3e} ns")]
    TraceDrift { drift: f64, time_ns: f64 },
    #[error("degenerate steady state (LU pivot ratio {pivot_ratio:.3e})")]
    DegenerateSteadyState { pivot_ratio: f64 },
    #[error("steady-state residual {residual:.3e} exceeds {bound:.3e}")]
    SteadyResidual { residual: f64, bound: f64 },
    #[error("eigenvalue computation failed")]
    EigenFailure,
    #[error(
        "ensemble sample {index} (hyperfine shift {hf_shift_ghz} GHz, optical shift {optical_shift_ghz} GHz): {source}"
    )]
    Sample {
        index: usize,
        hf_shift_ghz: f64,
        optical_shift_ghz: f64,
        source: Box<DynamicsError>,
    },
    #[error("kernel returned {got} values, expected {expected}")]
    KernelLength { expected: usize, got: usize },
    #[error("ensemble has no samples")]
    EmptyEnsemble,
}
