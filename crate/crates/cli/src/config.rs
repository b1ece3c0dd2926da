//! Run configuration: one JSON document per invocation, validated against
//! the subcommand before anything is computed.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use donorspec_core::corrections::BeamsplitterModel;
use donorspec_core::spectroscopy::presets;
use donorspec_core::spectroscopy::{ExperimentSetup, PlLinewidth, ScanPlan};
use donorspec_core::spinmodel::{build_level_scheme, DriveEnergy, DriveField, ZeemanConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SimulatePle,
    SimulateTwoLaser,
    SimulateCpt,
    SimulatePumping,
    SimulateMagneto,
    SimulatePolarization,
    FitVoigt,
    FitCpt,
    CorrectBackground,
    ExtractGfactors,
    DipSlope,
}

impl Experiment {
    #[cfg(test)]
    pub const ALL: [Experiment; 11] = [
        Experiment::SimulatePle,
        Experiment::SimulateTwoLaser,
        Experiment::SimulateCpt,
        Experiment::SimulatePumping,
        Experiment::SimulateMagneto,
        Experiment::SimulatePolarization,
        Experiment::FitVoigt,
        Experiment::FitCpt,
        Experiment::CorrectBackground,
        Experiment::ExtractGfactors,
        Experiment::DipSlope,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SimulatePle => "simulate-ple",
            Experiment::SimulateTwoLaser => "simulate-two-laser",
            Experiment::SimulateCpt => "simulate-cpt",
            Experiment::SimulatePumping => "simulate-pumping",
            Experiment::SimulateMagneto => "simulate-magneto",
            Experiment::SimulatePolarization => "simulate-polarization",
            Experiment::FitVoigt => "fit-voigt",
            Experiment::FitCpt => "fit-cpt",
            Experiment::CorrectBackground => "correct-background",
            Experiment::ExtractGfactors => "extract-gfactors",
            Experiment::DipSlope => "dip-slope",
        }
    }

    /// Extension of the primary output file.
    pub fn output_extension(self) -> &'static str {
        match self {
            Experiment::SimulatePle
            | Experiment::SimulateTwoLaser
            | Experiment::SimulateCpt
            | Experiment::SimulatePumping
            | Experiment::SimulateMagneto
            | Experiment::CorrectBackground => "csv",
            _ => "json",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Experiment::SimulatePle | Experiment::SimulateTwoLaser => &["plan"],
            Experiment::SimulateCpt => &["plan", "pump_detuning_ghz"],
            Experiment::SimulatePumping => &["setup", "drives", "duration_ns", "n_points"],
            Experiment::SimulateMagneto => &["zeeman", "fields_t"],
            Experiment::SimulatePolarization => &["zeeman", "angles_deg", "linewidth"],
            Experiment::FitVoigt | Experiment::FitCpt | Experiment::ExtractGfactors | Experiment::DipSlope => {
                &["inputs"]
            }
            Experiment::CorrectBackground => &["inputs", "background_windows"],
        }
    }

    fn allowed(self) -> &'static [&'static str] {
        match self {
            Experiment::SimulatePle | Experiment::SimulateTwoLaser => &["plan", "noise_fraction"],
            Experiment::SimulateCpt => &["plan", "pump_detuning_ghz", "noise_fraction"],
            Experiment::SimulatePumping => &["setup", "drives", "duration_ns", "n_points", "noise_fraction"],
            Experiment::SimulateMagneto => &["zeeman", "fields_t"],
            Experiment::SimulatePolarization => &["zeeman", "angles_deg", "linewidth", "phi0_rad"],
            Experiment::FitVoigt | Experiment::FitCpt | Experiment::ExtractGfactors | Experiment::DipSlope => {
                &["inputs"]
            }
            Experiment::CorrectBackground => &["inputs", "background_windows", "beamsplitter"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// All blocks are optional at the type level; which ones must or may be
/// present depends on `experiment` (see [`RunConfig::validate`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Seeds the count noise and any Monte Carlo ensemble sampling.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub plot: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<ScanPlan>,
    /// Pump detuning from its target transition for CPT scans, GHz.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_detuning_ghz: Option<f64>,
    /// Standard deviation of additive Gaussian count noise relative to the
    /// peak count; negative draws are clipped to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup: Option<ExperimentSetup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drives: Option<Vec<DriveField>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeeman: Option<ZeemanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields_t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles_deg: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linewidth: Option<PlLinewidth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beamsplitter: Option<BeamsplitterModel>,
    /// Background windows `[lo, hi]` in axis units.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub background_windows: Vec<[f64; 2]>,
}

/// Overrides taken from command-line flags.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub plot: bool,
    pub b_field_t: Option<f64>,
    pub pump_detuning_ghz: Option<f64>,
    pub background_windows: Vec<[f64; 2]>,
    pub inputs: Vec<PathBuf>,
}

impl RunConfig {
    fn empty(experiment: Experiment) -> Self {
        Self {
            experiment,
            seed: 0,
            plot: false,
            out: None,
            plan: None,
            pump_detuning_ghz: None,
            noise_fraction: None,
            setup: None,
            drives: None,
            duration_ns: None,
            n_points: None,
            zeeman: None,
            fields_t: None,
            angles_deg: None,
            linewidth: None,
            phi0_rad: None,
            inputs: Vec::new(),
            beamsplitter: None,
            background_windows: Vec::new(),
        }
    }

    /// Built-in configuration used when no `--config` is given.
    pub fn preset(experiment: Experiment) -> Self {
        let mut c = Self::empty(experiment);
        match experiment {
            Experiment::SimulatePle => {
                c.plan = Some(presets::ple_plan(presets::ple_setup(0.0), presets::PLE_RABI_GHZ));
            }
            Experiment::SimulateTwoLaser => {
                c.plan = Some(presets::two_laser_plan(
                    presets::ple_setup(presets::B_FIELD_T),
                    presets::PLE_RABI_GHZ,
                    0.0,
                ));
            }
            Experiment::SimulateCpt => {
                c.plan = Some(presets::cpt_plan(
                    presets::cpt_setup(0.0),
                    presets::CPT_WIDE_DIP_PUMP_RABI_GHZ,
                    0.0,
                ));
                c.pump_detuning_ghz = Some(0.0);
            }
            Experiment::SimulatePumping => {
                c.setup = Some(presets::pumping_setup());
                c.drives = Some(presets::single_pump(presets::PUMPING_RABI_GHZ));
                c.duration_ns = Some(200.0);
                c.n_points = Some(401);
            }
            Experiment::SimulateMagneto => {
                c.zeeman = Some(presets::zeeman(0.0));
                c.fields_t = Some((0..=14).map(|k| 0.5 * k as f64).collect());
            }
            Experiment::SimulatePolarization => {
                c.zeeman = Some(ZeemanConfig::new(1.91, 0.05, presets::B_FIELD_T));
                c.angles_deg = Some((0..=36).map(|k| 5.0 * k as f64).collect());
                c.linewidth = Some(PlLinewidth {
                    gaussian_sigma_uev: 12.0,
                    lorentzian_gamma_uev: 2.0,
                });
                c.phi0_rad = Some(0.0);
            }
            Experiment::CorrectBackground => {
                c.beamsplitter = Some(BeamsplitterModel::default());
            }
            Experiment::FitVoigt | Experiment::FitCpt | Experiment::ExtractGfactors | Experiment::DipSlope => {}
        }
        c
    }

    /// Parse a config file, reporting the line and column of any problem.
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!(
                "{}: line {}, column {}: {e}",
                origin.display(),
                e.line(),
                e.column()
            ))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text, path)
    }

    fn present(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut mark = |name: &'static str, on: bool| {
            if on {
                v.push(name);
            }
        };
        mark("plan", self.plan.is_some());
        mark("pump_detuning_ghz", self.pump_detuning_ghz.is_some());
        mark("noise_fraction", self.noise_fraction.is_some());
        mark("setup", self.setup.is_some());
        mark("drives", self.drives.is_some());
        mark("duration_ns", self.duration_ns.is_some());
        mark("n_points", self.n_points.is_some());
        mark("zeeman", self.zeeman.is_some());
        mark("fields_t", self.fields_t.is_some());
        mark("angles_deg", self.angles_deg.is_some());
        mark("linewidth", self.linewidth.is_some());
        mark("phi0_rad", self.phi0_rad.is_some());
        mark("inputs", !self.inputs.is_empty());
        mark("beamsplitter", self.beamsplitter.is_some());
        mark("background_windows", !self.background_windows.is_empty());
        v
    }

    /// Apply command-line overrides on top of the file (or preset) values.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
            if let Some(p) = self.plan.as_mut() {
                p.setup.ensemble.inhomogeneity.seed = seed;
            }
            if let Some(s) = self.setup.as_mut() {
                s.ensemble.inhomogeneity.seed = seed;
            }
        }
        self.plot |= o.plot;
        if let Some(b) = o.b_field_t {
            let mut hit = false;
            if let Some(p) = self.plan.as_mut() {
                // Keep the scan window on the scanned transition.
                let before = build_level_scheme(&p.setup.zeeman).nominal_transition_offset_ghz(p.scanned.target);
                p.setup.zeeman.b_field_t = b;
                let shift = build_level_scheme(&p.setup.zeeman).nominal_transition_offset_ghz(p.scanned.target) - before;
                p.axis.start += shift;
                p.axis.stop += shift;
                if let Some(fine) = p.axis.fine.as_mut() {
                    fine.center += shift;
                }
                hit = true;
            }
            if let Some(s) = self.setup.as_mut() {
                s.zeeman.b_field_t = b;
                hit = true;
            }
            if let Some(z) = self.zeeman.as_mut() {
                z.b_field_t = b;
                if self.experiment == Experiment::SimulateMagneto {
                    self.fields_t = Some(vec![b]);
                }
                hit = true;
            }
            if !hit {
                return Err(CliError::Config(format!("--b-field has no effect on {}", self.experiment)));
            }
        }
        if let Some(delta) = o.pump_detuning_ghz {
            self.set_pump_detuning(delta)?;
        }
        if !o.background_windows.is_empty() {
            self.background_windows = o.background_windows.clone();
        }
        if !o.inputs.is_empty() {
            self.inputs = o.inputs.clone();
        }
        Ok(())
    }

    /// Move the pump to detuning `delta`; for CPT scans the fine window
    /// follows the two-photon resonance.
    fn set_pump_detuning(&mut self, delta: f64) -> Result<(), CliError> {
        if !delta.is_finite() {
            return Err(CliError::Config("--pump-detuning-ghz must be finite".into()));
        }
        let plan = match (self.experiment, self.plan.as_mut()) {
            (Experiment::SimulateCpt | Experiment::SimulateTwoLaser, Some(p)) => p,
            _ => {
                return Err(CliError::Config(format!(
                    "--pump-detuning-ghz has no effect on {}",
                    self.experiment
                )))
            }
        };
        let pump = plan
            .fixed
            .first_mut()
            .ok_or_else(|| CliError::Config("plan.fixed: no pump drive to detune".into()))?;
        let old = match (self.experiment, pump.energy) {
            (Experiment::SimulateCpt, _) => self.pump_detuning_ghz.unwrap_or(0.0),
            (_, DriveEnergy::DetuningGhz(d)) => d,
            (_, DriveEnergy::PhotonEv(_)) => {
                return Err(CliError::Config(
                    "--pump-detuning-ghz needs the pump energy given as detuning_ghz".into(),
                ))
            }
        };
        pump.energy = DriveEnergy::DetuningGhz(delta);
        if self.experiment == Experiment::SimulateCpt {
            if let Some(fine) = plan.axis.fine.as_mut() {
                fine.center += delta - old;
            }
            self.pump_detuning_ghz = Some(delta);
        }
        Ok(())
    }

    /// Check the block layout for `experiment` and every block's own
    /// invariants. Errors name the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        let present = self.present();
        for req in self.experiment.required() {
            if !present.contains(req) {
                return Err(CliError::Config(format!("field `{req}` is required for {}", self.experiment)));
            }
        }
        for p in &present {
            if !self.experiment.allowed().contains(p) {
                return Err(CliError::Config(format!("field `{p}` is not used by {}", self.experiment)));
            }
        }
        let field = |name: &str, e: &dyn fmt::Display| CliError::Config(format!("{name}: {e}"));
        if let Some(p) = &self.plan {
            p.validate().map_err(|e| field("plan", &e))?;
        }
        if let Some(s) = &self.setup {
            s.validate().map_err(|e| field("setup", &e))?;
        }
        if let Some(z) = &self.zeeman {
            z.validate().map_err(|e| field("zeeman", &e))?;
        }
        for (i, d) in self.drives.iter().flatten().enumerate() {
            d.validate().map_err(|e| field(&format!("drives[{i}]"), &e))?;
        }
        if let Some(d) = self.duration_ns {
            if !(d > 0.0 && d.is_finite()) {
                return Err(CliError::Config("duration_ns: must be finite and > 0".into()));
            }
        }
        if let Some(n) = self.n_points {
            if n < 2 {
                return Err(CliError::Config("n_points: must be >= 2".into()));
            }
        }
        if let Some(f) = self.noise_fraction {
            if !(f >= 0.0 && f.is_finite()) {
                return Err(CliError::Config("noise_fraction: must be finite and >= 0".into()));
            }
        }
        if let Some(f) = &self.fields_t {
            if f.len() < 2 || f.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(CliError::Config(
                    "fields_t: need at least two strictly increasing fields".into(),
                ));
            }
        }
        if let Some(a) = &self.angles_deg {
            if a.is_empty() || a.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Config("angles_deg: need finite angles".into()));
            }
        }
        if let Some(b) = &self.beamsplitter {
            b.validate().map_err(|e| field("beamsplitter", &e))?;
        }
        for (i, w) in self.background_windows.iter().enumerate() {
            if !(w[0].is_finite() && w[1].is_finite() && w[0] < w[1]) {
                return Err(CliError::Config(format!("background_windows[{i}]: need finite lo < hi")));
            }
        }
        if self.experiment == Experiment::DipSlope && self.inputs.len() < 3 {
            return Err(CliError::Config("inputs: dip-slope needs at least three scans".into()));
        }
        Ok(())
    }

    /// SHA-256 of the resolved configuration's canonical JSON, ignoring
    /// where the outputs go.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.plot = false;
        let canonical = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn output_path(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.{}", self.experiment, self.experiment.output_extension())))
    }
}

/// Parse `lo:hi`.
pub fn parse_window(s: &str) -> Result<[f64; 2], String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound `{lo}`: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound `{hi}`: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("need finite lo < hi, got {lo}:{hi}"));
    }
    Ok([lo, hi])
}
