use std::path::{Path, PathBuf};

use tlsbrillouin_core::constants::{angular_to_hz, hz_to_angular};
use tlsbrillouin_core::dissipation::{total_linewidth, LinewidthBreakdown};
use tlsbrillouin_core::tls::{DriveState, PhononMode};

use super::{emit, ensure_dir};
use crate::config::RunConfig;
use crate::formats::{csv_bytes, version, write_json, CsvCell, OutputManifest};
use crate::grid::GridSpec;
use crate::CliError;

pub const MODEL_HEADER: [&str; 9] = [
    "temperature_k",
    "intensity_w_m2",
    "frequency_hz",
    "gamma_res_hz",
    "gamma_rel_hz",
    "gamma_bg_hz",
    "gamma_total_hz",
    "freq_shift_res_hz",
    "within_validity",
];

/// (T, J, f [Hz], breakdown) with T outermost and f innermost.
pub fn model_rows(cfg: &RunConfig, grid: &GridSpec) -> Result<Vec<(f64, f64, f64, LinewidthBreakdown)>, CliError> {
    let r = cfg.resolve()?;
    let m = r.model;
    let freqs = grid.frequencies.clone().unwrap_or_else(|| vec![angular_to_hz(m.brillouin_omega)]);
    let mut rows = Vec::with_capacity(grid.temperatures.len() * grid.intensities.len() * freqs.len());
    for &t in &grid.temperatures {
        for &j in &grid.intensities {
            for &f in &freqs {
                let omega = hz_to_angular(f);
                let drive = DriveState::new(t, j, omega)?;
                let b = total_linewidth(
                    &PhononMode::longitudinal(omega),
                    &drive,
                    &m.material,
                    &m.ensemble,
                    &m.jc,
                    m.shift_reference_temperature,
                );
                rows.push((t, j, f, b));
            }
        }
    }
    Ok(rows)
}

/// Writes `model.csv` and `model_manifest.json`; returns the CSV path.
pub fn cmd_model(cfg: &RunConfig, grid_spec: &str, out: &Path) -> Result<PathBuf, CliError> {
    let grid = GridSpec::parse(grid_spec)?;
    let rows = model_rows(cfg, &grid)?;
    ensure_dir(out)?;
    let bytes = csv_bytes(
        &MODEL_HEADER,
        rows.iter().map(|(t, j, f, b)| {
            vec![
                CsvCell::Num(*t),
                CsvCell::Num(*j),
                CsvCell::Num(*f),
                CsvCell::Num(angular_to_hz(b.gamma_res)),
                CsvCell::Num(angular_to_hz(b.gamma_rel)),
                CsvCell::Num(angular_to_hz(b.gamma_bg)),
                CsvCell::Num(angular_to_hz(b.total)),
                CsvCell::Num(angular_to_hz(b.freq_shift_res)),
                CsvCell::Bool(b.within_validity),
            ]
        }),
    );
    let mut files = Vec::new();
    emit(out, "model.csv", &bytes, &mut files)?;
    write_json(
        &out.join("model_manifest.json"),
        &OutputManifest {
            version: version(),
            config_sha256: cfg.sha256(),
            command: "model".into(),
            grid: Some(grid_spec.to_owned()),
            files,
        },
    )?;
    Ok(out.join("model.csv"))
}
