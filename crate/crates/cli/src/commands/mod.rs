//! The four subcommands. Each takes an already-loaded configuration and an
//! output directory and writes its files deterministically.

mod fit;
mod model;
mod report;
mod synth;

pub use fit::{cmd_fit, FIT_REPORT_FILE};
pub use model::{cmd_model, model_rows, MODEL_HEADER};
pub use report::{cmd_report, comparison, ComparisonRow};
pub use synth::{cmd_synth, MANIFEST_FILE};

use std::fs;
use std::path::Path;

use crate::formats::{sha256_hex, write_bytes, OutputFile};
use crate::CliError;

pub(crate) fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))
}

/// Writes `bytes` under `dir` and records its digest.
pub(crate) fn emit(dir: &Path, name: &str, bytes: &[u8], files: &mut Vec<OutputFile>) -> Result<(), CliError> {
    write_bytes(&dir.join(name), bytes)?;
    files.push(OutputFile { name: name.to_owned(), sha256: sha256_hex(bytes) });
    Ok(())
}
