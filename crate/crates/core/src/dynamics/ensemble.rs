//! Averaging a signal over frozen nuclear projections and static optical
//! shifts.
//!
//! Each sample fixes one hyperfine shift of the ground splitting and one
//! Gaussian energy offset. Samples are evaluated in parallel and reduced in
//! their fixed enumeration order, so results do not depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::gaussian_nodes;
use super::DynamicsError;
use crate::spinmodel::{HyperfineConfig, InhomogeneityConfig, ShiftMode, SpinModelError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default)]
    pub hyperfine: HyperfineConfig,
    #[serde(default)]
    pub inhomogeneity: InhomogeneityConfig,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            hyperfine: HyperfineConfig::default(),
            inhomogeneity: InhomogeneityConfig::default(),
        }
    }
}

impl EnsembleSpec {
    /// A single unshifted emitter.
    pub fn single() -> Self {
        Self {
            hyperfine: HyperfineConfig::none(),
            inhomogeneity: InhomogeneityConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SpinModelError> {
        self.hyperfine.validate()?;
        self.inhomogeneity.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleSample {
    pub index: usize,
    /// Shift of the ground splitting from the nuclear projection, GHz.
    pub hf_shift_ghz: f64,
    /// Gaussian offset drawn for this sample, GHz.
    pub optical_shift_ghz: f64,
    pub shift_mode: ShiftMode,
    pub weight: f64,
}

impl EnsembleSample {
    /// (offset of both D0X levels, change of the ground splitting) in GHz.
    pub fn scheme_shifts(&self) -> (f64, f64) {
        let s = self.optical_shift_ghz;
        match self.shift_mode {
            ShiftMode::ExcitedOnly => (s, 0.0),
            ShiftMode::GroundOnly => (0.0, s),
            ShiftMode::Common => (s, s),
        }
    }
}

/// Enumerate samples: hyperfine lines outermost, optical nodes innermost.
pub fn ensemble_samples(spec: &EnsembleSpec) -> Result<Vec<EnsembleSample>, DynamicsError> {
    spec.validate()?;
    let inh = &spec.inhomogeneity;
    let nodes = gaussian_nodes(inh.n_samples, inh.sigma_opt_ghz, inh.seed);
    let mut out = Vec::new();
    for (hf, wh) in spec.hyperfine.lines() {
        for &(s, ws) in &nodes {
            out.push(EnsembleSample {
                index: out.len(),
                hf_shift_ghz: hf,
                optical_shift_ghz: s,
                shift_mode: inh.shift_mode,
                weight: wh * ws,
            });
        }
    }
    Ok(out)
}

/// Weighted mean of a vector-valued kernel over all samples.
pub fn ensemble_average<F>(spec: &EnsembleSpec, kernel: F) -> Result<Vec<f64>, DynamicsError>
where
    F: Fn(&EnsembleSample) -> Result<Vec<f64>, DynamicsError> + Sync,
{
    average_over(&ensemble_samples(spec)?, kernel)
}

/// Weighted mean over an explicit sample list.
pub fn average_over<F>(samples: &[EnsembleSample], kernel: F) -> Result<Vec<f64>, DynamicsError>
where
    F: Fn(&EnsembleSample) -> Result<Vec<f64>, DynamicsError> + Sync,
{
    let results: Vec<Result<Vec<f64>, DynamicsError>> = samples
        .par_iter()
        .map(|s| {
            kernel(s).map_err(|e| DynamicsError::Sample {
                index: s.index,
                hf_shift_ghz: s.hf_shift_ghz,
                optical_shift_ghz: s.optical_shift_ghz,
                source: Box::new(e),
            })
        })
        .collect();
    let mut acc: Option<Vec<f64>> = None;
    for (s, r) in samples.iter().zip(results) {
        let v = r?;
        match acc.as_mut() {
            None => acc = Some(v.iter().map(|x| s.weight * x).collect()),
            Some(a) => {
                if a.len() != v.len() {
                    return Err(DynamicsError::KernelLength {
                        expected: a.len(),
                        got: v.len(),
                    });
                }
                for (ai, xi) in a.iter_mut().zip(&v) {
                    *ai += s.weight * xi;
                }
            }
        }
    }
    acc.ok_or(DynamicsError::EmptyEnsemble)
}

/// Scalar convenience wrapper around [`ensemble_average`].
pub fn ensemble_average_scalar<F>(spec: &EnsembleSpec, kernel: F) -> Result<f64, DynamicsError>
where
    F: Fn(&EnsembleSample) -> Result<f64, DynamicsError> + Sync,
{
    Ok(ensemble_average(spec, |s| kernel(s).map(|x| vec![x]))?[0])
}
