use std::fs;
use std::path::Path;

use rayon::prelude::*;
use tlsbrillouin_core::constants::{angular_to_hz, ELECTRON_VOLT};
use tlsbrillouin_core::fit::{fit_bin, fit_campaign, BinObservation, CampaignFit, SHIFT_COVERAGE_FACTOR};
use tlsbrillouin_core::synth::{bin_traces, BgsTrace, BinnedTrace};

use super::synth::MANIFEST_FILE;
use super::{emit, ensure_dir};
use crate::config::RunConfig;
use crate::formats::{
    csv_bytes, parse_trace_csv, read_json, sha256_hex, version, write_json, BinRecord, CsvCell, DatasetManifest,
    FitReport, Flag, GlobalRecord, ManifestEntry, OutputManifest, ShiftRecord, ShiftTable, TemperatureRecord,
    TraceSidecar, TRACE_HEADER,
};
use crate::CliError;

pub const FIT_REPORT_FILE: &str = "fit_report.json";

fn load_trace(dataset: &Path, entry: &ManifestEntry) -> Result<BgsTrace, String> {
    let bytes = fs::read(dataset.join(&entry.csv)).map_err(|e| format!("unreadable: {e}"))?;
    if sha256_hex(&bytes) != entry.csv_sha256 {
        return Err("content does not match the manifest digest".into());
    }
    let (grid, gain) = parse_trace_csv(&bytes)?;
    let sidecar: TraceSidecar = read_json(&dataset.join(&entry.sidecar)).map_err(|e| e.to_string())?;
    sidecar.into_trace(grid, gain)
}

/// Keeps the traces on the most common detuning grid; the rest are flagged.
fn common_grid(traces: Vec<(String, BgsTrace)>, flagged: &mut Vec<Flag>) -> Vec<BgsTrace> {
    let mut counts: Vec<(&Vec<f64>, usize)> = Vec::new();
    for (_, t) in &traces {
        match counts.iter_mut().find(|(g, _)| **g == t.detuning_grid) {
            Some(c) => c.1 += 1,
            None => counts.push((&t.detuning_grid, 1)),
        }
    }
    // Ties resolve to the grid seen first.
    let Some(best) = counts.iter().rev().max_by_key(|c| c.1).map(|c| c.0.clone()) else {
        return Vec::new();
    };
    let mut kept = Vec::with_capacity(traces.len());
    for (name, t) in traces {
        if t.detuning_grid == best {
            kept.push(t);
        } else {
            flagged.push(Flag { item: name, reason: "detuning grid differs from the dataset's common grid".into() });
        }
    }
    kept
}

fn bin_label(bin: &BinnedTrace) -> String {
    format!("bin {:.4} K setting {}", bin.center, bin.setting)
}

fn bin_record(
    bin: &BinnedTrace,
    obs: &BinObservation,
    cfg_material: &tlsbrillouin_core::tls::MaterialParams,
) -> BinRecord {
    let f = &obs.fit;
    BinRecord {
        center_k: bin.center,
        setting: bin.setting,
        trace_count: bin.count,
        mean_temperature_k: bin.mean_temperature,
        omega_hz: angular_to_hz(f.omega_hat),
        omega_sigma_hz: angular_to_hz(f.omega_sigma()),
        gamma_hz: angular_to_hz(f.gamma_hat),
        gamma_sigma_hz: angular_to_hz(f.gamma_sigma()),
        peak_w: f.peak_hat,
        peak_sigma_w: f.peak_sigma(),
        intensity_w_m2: obs.peak_intensity(cfg_material),
        residual_norm_w: f.residual_norm,
    }
}

fn campaign_records(
    campaign: &CampaignFit,
    reference_k: f64,
) -> (Vec<TemperatureRecord>, GlobalRecord, ShiftTable, Vec<Flag>) {
    let per_temperature: Vec<TemperatureRecord> = campaign
        .per_temperature
        .iter()
        .map(|r| TemperatureRecord {
            center_k: r.center,
            temperature_k: r.temperature,
            p_gamma2_j_m3: r.saturation.p_gamma2,
            j_c_w_m2: r.saturation.j_c,
            j_c_sigma_w_m2: r.saturation.j_c_sigma(),
            gamma0_hz: angular_to_hz(r.saturation.gamma0),
            gamma0_sigma_hz: angular_to_hz(r.saturation.gamma0_sigma()),
            flat_direction: r.saturation.flat_direction,
            t1t2_s2: r.times.t1t2,
            sqrt_t1t2_s: r.times.t1t2.sqrt(),
            t1_s: r.times.t1,
            t2_s: r.times.t2,
            omega_hz: angular_to_hz(r.omega_hat),
            omega_sigma_hz: angular_to_hz(r.omega_sigma),
        })
        .collect();
    let mut flags: Vec<Flag> = campaign
        .skipped
        .iter()
        .map(|s| Flag { item: format!("temperature {:.4} K", s.center), reason: s.reason.to_string() })
        .collect();
    let mut stage_errors = Vec::new();
    let pl = campaign.powerlaw.as_ref().map_err(|e| stage_errors.push(format!("power law: {e}"))).ok();
    let bg = campaign.background.as_ref().map_err(|e| stage_errors.push(format!("background: {e}"))).ok();
    let tls = campaign.tls.as_ref().map_err(|e| stage_errors.push(format!("tls parameters: {e}"))).ok();
    let reference = per_temperature
        .iter()
        .min_by(|a, b| (a.temperature_k - reference_k).abs().total_cmp(&(b.temperature_k - reference_k).abs()));
    for e in &stage_errors {
        flags.push(Flag { item: "campaign".into(), reason: e.clone() });
    }
    let global = GlobalRecord {
        p_gamma2_j_m3: campaign.p_gamma2,
        p_gamma2_sigma_j_m3: campaign.p_gamma2_sigma,
        flat_direction: campaign.flat_direction,
        a_w_m2_k_b: pl.map(|p| p.a),
        a_sigma_w_m2_k_b: pl.map(|p| p.a_sigma()),
        b: pl.map(|p| p.b),
        b_sigma: pl.map(|p| p.b_sigma()),
        beta_hz_k3: bg.map(|b| angular_to_hz(b.beta)),
        gamma_bg_hz: bg.map(|b| angular_to_hz(b.gamma_bg)),
        gamma_bg_sigma_hz: bg.map(|b| angular_to_hz(b.gamma_bg_sigma())),
        gamma_l_ev: tls.map(|t| t.gamma_l / ELECTRON_VOLT),
        gamma_l_sigma_ev: tls.map(|t| t.gamma_l_sigma / ELECTRON_VOLT),
        density_of_states_per_j_m3: tls.map(|t| t.density_of_states),
        density_of_states_sigma_per_j_m3: tls.map(|t| t.density_of_states_sigma),
        reference_temperature_k: reference.map(|r| r.temperature_k),
        j_c_at_reference_w_m2: reference.map(|r| r.j_c_w_m2),
        sqrt_t1t2_at_reference_s: reference.map(|r| r.sqrt_t1t2_s),
        t1_at_reference_s: reference.map(|r| r.t1_s),
        t2_at_reference_s: reference.map(|r| r.t2_s),
        stage_errors,
    };
    let shift = ShiftTable {
        reference_temperature_k: campaign.shift.reference_temperature,
        coverage_factor: SHIFT_COVERAGE_FACTOR,
        rows: campaign
            .shift
            .rows
            .iter()
            .map(|r| ShiftRecord {
                temperature_k: r.temperature,
                measured_hz: angular_to_hz(r.measured),
                measured_sigma_hz: angular_to_hz(r.measured_sigma),
                predicted_hz: angular_to_hz(r.predicted),
                predicted_sigma_hz: angular_to_hz(r.predicted_sigma),
                discrepancy_hz: angular_to_hz(r.discrepancy),
                uncertainty_hz: angular_to_hz(r.uncertainty),
                consistent: r.consistent(),
            })
            .collect(),
    };
    (per_temperature, global, shift, flags)
}

/// Fits a dataset written by `synth` (or any directory with the same
/// manifest layout) and writes every stage to `out`:
/// `binned/*.csv`, `lorentzian.csv`, `saturation.csv`, `shift.csv`,
/// `fit_report.json` and `fit_manifest.json`.
///
/// Unreadable or corrupted traces and failed bins are flagged and skipped.
/// The run fails only when more than half of the bins fail; the report is
/// still written first.
pub fn cmd_fit(dataset: &Path, cfg: &RunConfig, out: &Path) -> Result<FitReport, CliError> {
    let resolved = cfg.resolve()?;
    let model = resolved.model;
    let manifest_bytes = fs::read(dataset.join(MANIFEST_FILE))
        .map_err(|e| CliError::Dataset(format!("{}: {e}", dataset.join(MANIFEST_FILE).display())))?;
    let manifest: DatasetManifest =
        serde_json::from_slice(&manifest_bytes).map_err(|e| CliError::Dataset(format!("manifest: {e}")))?;

    let loaded: Vec<(String, Result<BgsTrace, String>)> =
        manifest.traces.par_iter().map(|e| (e.csv.clone(), load_trace(dataset, e))).collect();
    let mut flagged = Vec::new();
    let mut good = Vec::with_capacity(loaded.len());
    for (name, r) in loaded {
        match r {
            Ok(t) => good.push((name, t)),
            Err(reason) => flagged.push(Flag { item: name, reason }),
        }
    }
    let traces = common_grid(good, &mut flagged);
    let traces_used = traces.len();
    let bins = bin_traces(&traces, resolved.bin_width)?;
    if bins.is_empty() {
        return Err(CliError::Dataset("no usable traces".into()));
    }

    ensure_dir(&out.join("binned"))?;
    let mut files = Vec::new();
    for bin in &bins {
        let name = format!("binned/bin_{:07.0}mK_s{}.csv", bin.center * 1e3, bin.setting);
        let bytes = csv_bytes(
            &TRACE_HEADER,
            bin.detuning_grid
                .iter()
                .zip(&bin.gain)
                .map(|(&w, &g)| vec![CsvCell::Num(angular_to_hz(w)), CsvCell::Num(g)]),
        );
        emit(out, &name, &bytes, &mut files)?;
    }

    let fitted: Vec<_> = bins.par_iter().map(|b| fit_bin(b, &resolved.pipeline)).collect();
    let mut observations = Vec::new();
    let mut per_bin = Vec::new();
    let mut failed = 0;
    for (bin, r) in bins.iter().zip(fitted) {
        match r {
            Ok(obs) => {
                per_bin.push(bin_record(bin, &obs, &model.material));
                observations.push(obs);
            }
            Err(e) => {
                failed += 1;
                flagged.push(Flag { item: bin_label(bin), reason: e.to_string() });
            }
        }
    }
    let lorentzian_csv = csv_bytes(
        &[
            "center_k",
            "setting",
            "trace_count",
            "mean_temperature_k",
            "omega_hz",
            "omega_sigma_hz",
            "gamma_hz",
            "gamma_sigma_hz",
            "peak_w",
            "peak_sigma_w",
            "intensity_w_m2",
            "residual_norm_w",
        ],
        per_bin.iter().map(|r| {
            vec![
                CsvCell::Num(r.center_k),
                CsvCell::Int(r.setting as u64),
                CsvCell::Int(r.trace_count as u64),
                CsvCell::Num(r.mean_temperature_k),
                CsvCell::Num(r.omega_hz),
                CsvCell::Num(r.omega_sigma_hz),
                CsvCell::Num(r.gamma_hz),
                CsvCell::Num(r.gamma_sigma_hz),
                CsvCell::Num(r.peak_w),
                CsvCell::Num(r.peak_sigma_w),
                CsvCell::Num(r.intensity_w_m2),
                CsvCell::Num(r.residual_norm_w),
            ]
        }),
    );
    emit(out, "lorentzian.csv", &lorentzian_csv, &mut files)?;

    let too_many = 2 * failed > bins.len();
    let campaign = if too_many {
        None
    } else {
        match fit_campaign(&observations, &model.mode(), &model.material, &model.ensemble, &resolved.pipeline) {
            Ok(c) => Some(c),
            Err(e) => {
                flagged.push(Flag { item: "campaign".into(), reason: e.to_string() });
                None
            }
        }
    };
    let (per_temperature, global, freq_shift) = match &campaign {
        Some(c) => {
            let (pt, g, s, flags) = campaign_records(c, cfg.shift_reference_k);
            flagged.extend(flags);
            (pt, Some(g), Some(s))
        }
        None => (Vec::new(), None, None),
    };

    let saturation_csv = csv_bytes(
        &[
            "center_k",
            "temperature_k",
            "p_gamma2_j_m3",
            "j_c_w_m2",
            "j_c_sigma_w_m2",
            "gamma0_hz",
            "gamma0_sigma_hz",
            "flat_direction",
            "t1t2_s2",
            "sqrt_t1t2_s",
            "t1_s",
            "t2_s",
            "omega_hz",
            "omega_sigma_hz",
        ],
        per_temperature.iter().map(|r| {
            vec![
                CsvCell::Num(r.center_k),
                CsvCell::Num(r.temperature_k),
                CsvCell::Num(r.p_gamma2_j_m3),
                CsvCell::Num(r.j_c_w_m2),
                CsvCell::Num(r.j_c_sigma_w_m2),
                CsvCell::Num(r.gamma0_hz),
                CsvCell::Num(r.gamma0_sigma_hz),
                CsvCell::Bool(r.flat_direction),
                CsvCell::Num(r.t1t2_s2),
                CsvCell::Num(r.sqrt_t1t2_s),
                CsvCell::Num(r.t1_s),
                CsvCell::Num(r.t2_s),
                CsvCell::Num(r.omega_hz),
                CsvCell::Num(r.omega_sigma_hz),
            ]
        }),
    );
    emit(out, "saturation.csv", &saturation_csv, &mut files)?;
    let shift_rows = freq_shift.as_ref().map_or(&[][..], |s| &s.rows[..]);
    let shift_csv = csv_bytes(
        &[
            "temperature_k",
            "measured_hz",
            "measured_sigma_hz",
            "predicted_hz",
            "predicted_sigma_hz",
            "discrepancy_hz",
            "uncertainty_hz",
            "consistent",
        ],
        shift_rows.iter().map(|r| {
            vec![
                CsvCell::Num(r.temperature_k),
                CsvCell::Num(r.measured_hz),
                CsvCell::Num(r.measured_sigma_hz),
                CsvCell::Num(r.predicted_hz),
                CsvCell::Num(r.predicted_sigma_hz),
                CsvCell::Num(r.discrepancy_hz),
                CsvCell::Num(r.uncertainty_hz),
                CsvCell::Bool(r.consistent),
            ]
        }),
    );
    emit(out, "shift.csv", &shift_csv, &mut files)?;

    let report = FitReport {
        version: version(),
        config_sha256: cfg.sha256(),
        dataset_manifest_sha256: sha256_hex(&manifest_bytes),
        traces_used,
        per_bin,
        per_temperature,
        global,
        freq_shift,
        flagged,
    };
    let report_bytes = write_json(&out.join(FIT_REPORT_FILE), &report)?;
    files.push(crate::formats::OutputFile { name: FIT_REPORT_FILE.into(), sha256: sha256_hex(&report_bytes) });
    write_json(
        &out.join("fit_manifest.json"),
        &OutputManifest { version: version(), config_sha256: cfg.sha256(), command: "fit".into(), grid: None, files },
    )?;
    if too_many {
        return Err(CliError::TooManyFailures { failed, total: bins.len() });
    }
    Ok(report)
}
