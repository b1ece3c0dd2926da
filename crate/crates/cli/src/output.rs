//! Output files: written to a temporary sibling and renamed into place, so
//! a failed run never leaves a partial file behind.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use donorspec_core::spectroscopy::Spectrum;

use crate::config::RunConfig;
use crate::error::CliError;

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Attach the run provenance and write the spectrum as CSV.
pub fn write_spectrum(path: &Path, s: Spectrum, cfg: &RunConfig) -> Result<Spectrum, CliError> {
    let s = s
        .with_meta("config_hash", cfg.hash())
        .with_meta("seed", cfg.seed)
        .with_meta("generator", concat!("donorspec ", env!("CARGO_PKG_VERSION")));
    write_atomic(path, &s.to_csv())?;
    Ok(s)
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    experiment: &'a str,
    config_hash: String,
    seed: u64,
    result: &'a T,
}

/// Write `result` wrapped with the run provenance as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, result: &T, cfg: &RunConfig) -> Result<(), CliError> {
    let env = Envelope {
        experiment: cfg.experiment.name(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        result,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, &text)
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read input {}: {e}", path.display())))?;
    Spectrum::from_csv(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn svg_path(out: &Path) -> PathBuf {
    out.with_extension("svg")
}
