//! Sampled one-dimensional spectra and their CSV form.
//!
//! CSV layout: `# key=value` comment lines carrying the metadata, an
//! `axis,counts` header, then one row per sample with 12 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SpectroscopyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Photon energy relative to the zero-field line, GHz.
    DetuningGhz,
    /// Absolute photon energy, eV.
    EnergyEv,
    /// Time after switching on the drives, ns.
    TimeNs,
    /// Magnetic field, T.
    FieldT,
}

impl AxisKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisKind::DetuningGhz => "detuning_ghz",
            AxisKind::EnergyEv => "energy_ev",
            AxisKind::TimeNs => "time_ns",
            AxisKind::FieldT => "field_t",
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            AxisKind::DetuningGhz => "GHz",
            AxisKind::EnergyEv => "eV",
            AxisKind::TimeNs => "ns",
            AxisKind::FieldT => "T",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [AxisKind::DetuningGhz, AxisKind::EnergyEv, AxisKind::TimeNs, AxisKind::FieldT]
            .into_iter()
            .find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    axis: Vec<f64>,
    counts: Vec<f64>,
    axis_kind: AxisKind,
    pub meta: BTreeMap<String, String>,
}

impl Spectrum {
    /// Validates: at least two samples, equal lengths, strictly monotone
    /// finite axis, finite non-negative counts.
    pub fn new(axis: Vec<f64>, counts: Vec<f64>, axis_kind: AxisKind) -> Result<Self, SpectroscopyError> {
        if axis.len() != counts.len() {
            return Err(SpectroscopyError::InvalidSpectrum(format!(
                "axis has {} samples but counts has {}",
                axis.len(),
                counts.len()
            )));
        }
        if axis.len() < 2 {
            return Err(SpectroscopyError::InvalidSpectrum("fewer than two samples".into()));
        }
        if axis.iter().any(|x| !x.is_finite()) {
            return Err(SpectroscopyError::InvalidSpectrum("non-finite axis value".into()));
        }
        let increasing = axis[1] > axis[0];
        let monotone = axis
            .windows(2)
            .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
        if !monotone {
            return Err(SpectroscopyError::InvalidSpectrum("axis is not strictly monotone".into()));
        }
        if let Some(c) = counts.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(SpectroscopyError::InvalidSpectrum(format!("invalid count {c}")));
        }
        let mut meta = BTreeMap::new();
        meta.insert("axis_kind".to_string(), axis_kind.as_str().to_string());
        meta.insert("units".to_string(), axis_kind.units().to_string());
        Ok(Self {
            axis,
            counts,
            axis_kind,
            meta,
        })
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn axis_kind(&self) -> AxisKind {
        self.axis_kind
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    /// Same axis and metadata with new counts.
    pub fn with_counts(&self, counts: Vec<f64>) -> Result<Self, SpectroscopyError> {
        let mut s = Spectrum::new(self.axis.clone(), counts, self.axis_kind)?;
        s.meta = self.meta.clone();
        Ok(s)
    }

    /// Multiply every count by `factor` (≥ 0).
    pub fn scaled(&self, factor: f64) -> Result<Self, SpectroscopyError> {
        self.with_counts(self.counts.iter().map(|c| c * factor).collect())
    }

    /// Add zero-mean Gaussian noise with standard deviation
    /// `fraction × max count`, clipping negative results to zero.
    /// Deterministic for a given seed.
    pub fn with_noise(&self, fraction: f64, seed: u64) -> Result<Self, SpectroscopyError> {
        if !(fraction >= 0.0) || !fraction.is_finite() {
            return Err(SpectroscopyError::InvalidSpectrum(format!("noise fraction {fraction} must be >= 0")));
        }
        let sd = fraction * self.max_count();
        if sd == 0.0 {
            return Ok(self.clone());
        }
        let normal = Normal::new(0.0, sd).map_err(|e| SpectroscopyError::InvalidSpectrum(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = self.counts.iter().map(|c| (c + normal.sample(&mut rng)).max(0.0)).collect();
        Ok(self
            .with_counts(counts)?
            .with_meta("noise_fraction", fraction)
            .with_meta("noise_seed", seed))
    }

    /// Append a warning to the `warnings` metadata entry.
    pub fn add_warning(&mut self, w: &str) {
        let entry = self.meta.entry("warnings".to_string()).or_default();
        if !entry.is_empty() {
            entry.push(';');
        }
        entry.push_str(w);
    }

    pub fn warnings(&self) -> Vec<&str> {
        self.meta
            .get("warnings")
            .map(|w| w.split(';').filter(|s| !s.is_empty()).collect())
            .unwrap_or_default()
    }

    pub fn argmax(&self) -> usize {
        self.counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    pub fn max_count(&self) -> f64 {
        self.counts[self.argmax()]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let v = v.replace(['\n', '\r'], " ");
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("axis,counts\n");
        for (x, y) in self.axis.iter().zip(&self.counts) {
            let _ = writeln!(out, "{x:.11e},{y:.11e}");
        }
        out
    }

    /// Parse the CSV form. The column header line is optional; a missing
    /// `axis_kind` entry defaults to a GHz detuning axis.
    pub fn from_csv(text: &str) -> Result<Self, SpectroscopyError> {
        let mut meta = BTreeMap::new();
        let mut axis = Vec::new();
        let mut counts = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if line.eq_ignore_ascii_case("axis,counts") {
                continue;
            }
            let (a, c) = line.split_once(',').ok_or_else(|| {
                SpectroscopyError::Csv(format!("line {}: expected two comma-separated values", lineno + 1))
            })?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| SpectroscopyError::Csv(format!("line {}: {e}", lineno + 1)))
            };
            axis.push(parse(a)?);
            counts.push(parse(c)?);
        }
        let kind = match meta.get("axis_kind") {
            Some(k) => AxisKind::parse(k)
                .ok_or_else(|| SpectroscopyError::Csv(format!("unknown axis_kind `{k}`")))?,
            None => AxisKind::DetuningGhz,
        };
        let mut s = Spectrum::new(axis, counts, kind)?;
        s.meta.extend(meta);
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Spectrum::new(vec![0.0, 1.0], vec![1.0, 2.0], AxisKind::TimeNs).is_ok());
        assert!(Spectrum::new(vec![1.0, 0.0, -1.0], vec![1.0, 2.0, 0.0], AxisKind::TimeNs).is_ok());
        assert!(Spectrum::new(vec![0.0], vec![1.0], AxisKind::TimeNs).is_err());
        assert!(Spectrum::new(vec![0.0, 0.0], vec![1.0, 1.0], AxisKind::TimeNs).is_err());
        assert!(Spectrum::new(vec![0.0, 1.0, 0.5], vec![1.0, 1.0, 1.0], AxisKind::TimeNs).is_err());
        assert!(Spectrum::new(vec![0.0, 1.0], vec![1.0, -1e-3], AxisKind::TimeNs).is_err());
        assert!(Spectrum::new(vec![0.0, 1.0], vec![1.0], AxisKind::TimeNs).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let s = Spectrum::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 1.0], AxisKind::TimeNs).unwrap();
        let a = s.with_noise(0.1, 3).unwrap();
        assert_eq!(a, s.with_noise(0.1, 3).unwrap());
        assert_ne!(a.counts(), s.with_noise(0.1, 4).unwrap().counts());
        assert_eq!(s.with_noise(0.0, 3).unwrap(), s);
    }

    #[test]
    fn csv_round_trip() {
        let s = Spectrum::new(
            vec![-1.5, 0.123456789012345, 2.0e5],
            vec![0.0, 3.3333333333333, 1e-20],
            AxisKind::DetuningGhz,
        )
        .unwrap()
        .with_meta("seed", 42);
        let t = Spectrum::from_csv(&s.to_csv()).unwrap();
        assert_eq!(t.meta, s.meta);
        for (a, b) in s.axis().iter().zip(t.axis()) {
            assert!((a - b).abs() <= 1e-11 * a.abs());
        }
        for (a, b) in s.counts().iter().zip(t.counts()) {
            assert!((a - b).abs() <= 1e-11 * a.abs());
        }
        assert_eq!(t.to_csv(), s.to_csv());
    }

    #[test]
    fn warnings_accumulate() {
        let mut s = Spectrum::new(vec![0.0, 1.0], vec![1.0, 2.0], AxisKind::TimeNs).unwrap();
        s.add_warning("a");
        s.add_warning("b");
        assert_eq!(s.warnings(), vec!["a", "b"]);
    }
}
