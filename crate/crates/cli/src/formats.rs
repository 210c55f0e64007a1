//! On-disk formats. Every JSON file carries the producing version and the
//! config hash; CSV files are listed with their digests in the directory
//! manifest so they stay plain tables.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tlsbrillouin_core::constants::{angular_to_hz, hz_to_angular, C_LIGHT, TWO_PI};
use tlsbrillouin_core::sbs::OpticalDrive;
use tlsbrillouin_core::synth::BgsTrace;

use crate::CliError;

pub const TRACE_HEADER: [&str; 2] = ["detuning_hz", "gain_w"];

pub fn version() -> String {
    format!("tlsbrillouin {}", env!("CARGO_PKG_VERSION"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(bytes).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| io_err(path, e))?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)?;
    Ok(bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

/// Rows of numbers rendered with shortest round-trip formatting.
pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<CsvCell>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(CsvCell::render)).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub enum CsvCell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl CsvCell {
    fn render(&self) -> String {
        match self {
            CsvCell::Num(v) => format!("{v:e}"),
            CsvCell::Int(v) => v.to_string(),
            CsvCell::Bool(v) => v.to_string(),
            CsvCell::Text(s) => s.clone(),
        }
    }
}

pub fn trace_csv(trace: &BgsTrace) -> Vec<u8> {
    csv_bytes(
        &TRACE_HEADER,
        trace
            .detuning_grid
            .iter()
            .zip(&trace.gain)
            .map(|(&w, &g)| vec![CsvCell::Num(angular_to_hz(w)), CsvCell::Num(g)]),
    )
}

/// Parses a `detuning_hz,gain_w` table into (angular detuning, gain).
pub fn parse_trace_csv(bytes: &[u8]) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().collect::<Vec<_>>() != TRACE_HEADER {
        return Err(format!("expected header {}", TRACE_HEADER.join(",")));
    }
    let (mut grid, mut gain) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != 2 {
            return Err(format!("row {}: expected 2 fields", i + 1));
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1));
        let (w, g) = (parse(&rec[0])?, parse(&rec[1])?);
        if !(w.is_finite() && g.is_finite()) {
            return Err(format!("row {}: non-finite value", i + 1));
        }
        grid.push(hz_to_angular(w));
        gain.push(g);
    }
    Ok((grid, gain))
}

/// Per-trace metadata written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSidecar {
    pub temperature_k: f64,
    pub pump_w: f64,
    pub probe_w: f64,
    pub length_m: f64,
    pub seed: u64,
    pub pump_wavelength_m: f64,
    /// Self-consistent peak acoustic intensity; absent for external data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_intensity_w_m2: Option<f64>,
    #[serde(default)]
    pub noise_sigma_w: f64,
    #[serde(default)]
    pub setting: usize,
    #[serde(default)]
    pub timestamp_index: u64,
    pub version: String,
    pub config_sha256: String,
}

impl TraceSidecar {
    pub fn from_trace(trace: &BgsTrace, config_sha256: &str) -> Self {
        Self {
            temperature_k: trace.temperature,
            pump_w: trace.drive.pump_power,
            probe_w: trace.drive.stokes_power,
            length_m: trace.drive.fiber_length,
            seed: trace.seed,
            pump_wavelength_m: TWO_PI * C_LIGHT / trace.drive.pump_omega,
            peak_intensity_w_m2: Some(trace.peak_intensity),
            noise_sigma_w: trace.noise_sigma,
            setting: trace.setting,
            timestamp_index: trace.timestamp_index,
            version: version(),
            config_sha256: config_sha256.to_owned(),
        }
    }

    /// Rebuilds a trace; the drive detuning is set to the grid centre since
    /// only its ratio to the Stokes frequency enters downstream.
    pub fn into_trace(&self, grid: Vec<f64>, gain: Vec<f64>) -> Result<BgsTrace, String> {
        let pump_omega = TWO_PI * C_LIGHT / self.pump_wavelength_m;
        let mid = 0.5 * (grid.first().copied().unwrap_or(0.0) + grid.last().copied().unwrap_or(0.0));
        let drive =
            OpticalDrive::new(self.pump_w, self.probe_w, pump_omega, mid, self.length_m).map_err(|e| e.to_string())?;
        let trace = BgsTrace {
            temperature: self.temperature_k,
            detuning_grid: grid,
            gain,
            drive,
            seed: self.seed,
            timestamp_index: self.timestamp_index,
            setting: self.setting,
            peak_intensity: self.peak_intensity_w_m2.unwrap_or(f64::NAN),
            noise_sigma: self.noise_sigma_w,
        };
        trace.validate().map_err(|e| e.to_string())?;
        Ok(trace)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub csv: String,
    pub sidecar: String,
    pub temperature_k: f64,
    pub pump_w: f64,
    pub probe_w: f64,
    pub seed: u64,
    pub setting: usize,
    pub timestamp_index: u64,
    pub csv_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: String,
    pub config_sha256: String,
    pub base_seed: u64,
    pub trace_count: usize,
    pub traces: Vec<ManifestEntry>,
}

/// Digest list for directories of derived outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputManifest {
    pub version: String,
    pub config_sha256: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    pub files: Vec<OutputFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRecord {
    pub center_k: f64,
    pub setting: usize,
    pub trace_count: usize,
    pub mean_temperature_k: f64,
    pub omega_hz: f64,
    pub omega_sigma_hz: f64,
    pub gamma_hz: f64,
    pub gamma_sigma_hz: f64,
    pub peak_w: f64,
    pub peak_sigma_w: f64,
    pub intensity_w_m2: f64,
    pub residual_norm_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureRecord {
    pub center_k: f64,
    pub temperature_k: f64,
    pub p_gamma2_j_m3: f64,
    pub j_c_w_m2: f64,
    pub j_c_sigma_w_m2: f64,
    pub gamma0_hz: f64,
    pub gamma0_sigma_hz: f64,
    pub flat_direction: bool,
    pub t1t2_s2: f64,
    pub sqrt_t1t2_s: f64,
    pub t1_s: f64,
    pub t2_s: f64,
    pub omega_hz: f64,
    pub omega_sigma_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalRecord {
    pub p_gamma2_j_m3: f64,
    pub p_gamma2_sigma_j_m3: f64,
    pub flat_direction: bool,
    pub a_w_m2_k_b: Option<f64>,
    pub a_sigma_w_m2_k_b: Option<f64>,
    pub b: Option<f64>,
    pub b_sigma: Option<f64>,
    pub beta_hz_k3: Option<f64>,
    pub gamma_bg_hz: Option<f64>,
    pub gamma_bg_sigma_hz: Option<f64>,
    pub gamma_l_ev: Option<f64>,
    pub gamma_l_sigma_ev: Option<f64>,
    pub density_of_states_per_j_m3: Option<f64>,
    pub density_of_states_sigma_per_j_m3: Option<f64>,
    /// The per-temperature row closest to the reference temperature.
    pub reference_temperature_k: Option<f64>,
    pub j_c_at_reference_w_m2: Option<f64>,
    pub sqrt_t1t2_at_reference_s: Option<f64>,
    pub t1_at_reference_s: Option<f64>,
    pub t2_at_reference_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stage_errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub temperature_k: f64,
    pub measured_hz: f64,
    pub measured_sigma_hz: f64,
    pub predicted_hz: f64,
    pub predicted_sigma_hz: f64,
    pub discrepancy_hz: f64,
    pub uncertainty_hz: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTable {
    pub reference_temperature_k: f64,
    pub coverage_factor: f64,
    pub rows: Vec<ShiftRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    /// What failed: a trace file, a bin, a temperature, or the campaign.
    pub item: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub version: String,
    pub config_sha256: String,
    pub dataset_manifest_sha256: String,
    pub traces_used: usize,
    pub per_bin: Vec<BinRecord>,
    pub per_temperature: Vec<TemperatureRecord>,
    pub global: Option<GlobalRecord>,
    pub freq_shift: Option<ShiftTable>,
    pub flagged: Vec<Flag>,
}
