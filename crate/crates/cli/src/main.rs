//! `donorspec`: simulate donor-bound-exciton spectroscopy and reduce the
//! resulting spectra.
//!
//! Exit status: 0 on success, 2 for usage or configuration errors, 3 when a
//! simulation or fit fails, 1 for I/O failures while writing outputs.

mod commands;
mod config;
mod error;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_window, Experiment, Overrides, RunConfig};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "donorspec", version, arg_required_else_help = true, about = "Donor-bound-exciton spin spectroscopy simulations and fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON run configuration; built-in defaults are used when absent.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (CSV for spectra, JSON for fit results).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for count noise and Monte Carlo ensemble sampling.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Also write an SVG plot next to the output.
    #[arg(long)]
    plot: bool,
}

#[derive(Args, Debug, Clone, Default)]
struct FieldArgs {
    /// Magnetic field in tesla.
    #[arg(long = "b-field", value_name = "T", allow_negative_numbers = true)]
    b_field: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct InputArgs {
    /// Input spectrum or result file; repeat for several.
    #[arg(long = "input", value_name = "PATH")]
    inputs: Vec<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct SimArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    field: FieldArgs,
}

#[derive(Args, Debug, Clone, Default)]
struct PumpArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    field: FieldArgs,
    /// Pump detuning from its target transition, GHz.
    #[arg(long = "pump-detuning-ghz", value_name = "GHZ", allow_negative_numbers = true)]
    pump_detuning_ghz: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args, Debug, Clone, Default)]
struct CorrectArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
    /// Background window `lo:hi` in axis units; repeat for several.
    #[arg(long = "background-window", value_name = "LO:HI", value_parser = parse_window, allow_hyphen_values = true)]
    background_windows: Vec<[f64; 2]>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-laser PLE scan.
    SimulatePle(SimArgs),
    /// Probe scan with a fixed pump laser.
    SimulateTwoLaser(PumpArgs),
    /// Coherent population trapping scan around the two-photon resonance.
    SimulateCpt(PumpArgs),
    /// Emission transient after switching the drives on.
    SimulatePumping(SimArgs),
    /// Outer-pair Zeeman splitting versus field.
    SimulateMagneto(SimArgs),
    /// PL peak positions versus waveplate angle.
    SimulatePolarization(SimArgs),
    /// Voigt fit of a single line.
    FitVoigt(FitArgs),
    /// Voigt peak with a narrow negative Voigt dip.
    FitCpt(FitArgs),
    /// Beamsplitter oscillation correction.
    CorrectBackground(CorrectArgs),
    /// g-factors from magneto-PL and polarization data.
    ExtractGfactors(FitArgs),
    /// Dip-center shift versus pump detuning over several CPT scans.
    DipSlope(FitArgs),
}

impl Command {
    fn resolve(self) -> (Experiment, Common, Overrides) {
        let base = |c: &Common| Overrides {
            out: c.out.clone(),
            seed: c.seed,
            plot: c.plot,
            ..Default::default()
        };
        let sim = |e, a: SimArgs| {
            let o = Overrides {
                b_field_t: a.field.b_field,
                ..base(&a.common)
            };
            (e, a.common, o)
        };
        let pump = |e, a: PumpArgs| {
            let o = Overrides {
                b_field_t: a.field.b_field,
                pump_detuning_ghz: a.pump_detuning_ghz,
                ..base(&a.common)
            };
            (e, a.common, o)
        };
        let fit = |e, a: FitArgs| {
            let o = Overrides {
                inputs: a.input.inputs,
                ..base(&a.common)
            };
            (e, a.common, o)
        };
        match self {
            Command::SimulatePle(a) => sim(Experiment::SimulatePle, a),
            Command::SimulateTwoLaser(a) => pump(Experiment::SimulateTwoLaser, a),
            Command::SimulateCpt(a) => pump(Experiment::SimulateCpt, a),
            Command::SimulatePumping(a) => sim(Experiment::SimulatePumping, a),
            Command::SimulateMagneto(a) => sim(Experiment::SimulateMagneto, a),
            Command::SimulatePolarization(a) => sim(Experiment::SimulatePolarization, a),
            Command::FitVoigt(a) => fit(Experiment::FitVoigt, a),
            Command::FitCpt(a) => fit(Experiment::FitCpt, a),
            Command::CorrectBackground(a) => {
                let o = Overrides {
                    inputs: a.input.inputs,
                    background_windows: a.background_windows,
                    ..base(&a.common)
                };
                (Experiment::CorrectBackground, a.common, o)
            }
            Command::ExtractGfactors(a) => fit(Experiment::ExtractGfactors, a),
            Command::DipSlope(a) => fit(Experiment::DipSlope, a),
        }
    }
}

fn execute(command: Command) -> Result<String, CliError> {
    let (experiment, common, overrides) = command.resolve();
    let mut cfg = match &common.config {
        Some(path) => {
            let c = RunConfig::load(path)?;
            if c.experiment != experiment {
                return Err(CliError::Config(format!(
                    "{}: field `experiment` is {} but the subcommand is {experiment}",
                    path.display(),
                    c.experiment
                )));
            }
            c
        }
        None => RunConfig::preset(experiment),
    };
    cfg.apply(&overrides)?;
    cfg.validate()?;
    commands::run(&cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
