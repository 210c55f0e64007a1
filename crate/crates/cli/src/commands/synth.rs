use std::path::Path;

use rayon::prelude::*;

use super::{emit, ensure_dir};
use crate::config::RunConfig;
use crate::formats::{trace_csv, version, write_json, DatasetManifest, ManifestEntry, TraceSidecar};
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRACE_DIR: &str = "traces";

/// Synthesizes the configured sweep into `out`: one CSV and sidecar per
/// trace under `traces/`, the effective `config.json`, and `manifest.json`.
///
/// Traces are generated in parallel; every trace has its own seed stream and
/// files are written in timestamp order, so the output bytes do not depend
/// on the thread count.
pub fn cmd_synth(cfg: &RunConfig, out: &Path) -> Result<DatasetManifest, CliError> {
    let resolved = cfg.resolve()?;
    let plan = resolved.plan.ok_or_else(|| CliError::Config("synth needs a `sweep` section".into()))?;
    let hash = cfg.sha256();
    let grid = plan.grid()?;
    let specs = plan.trace_specs();
    let traces = specs.par_iter().map(|s| plan.synth(s, &grid)).collect::<Result<Vec<_>, _>>()?;

    let trace_dir = out.join(TRACE_DIR);
    ensure_dir(&trace_dir)?;
    let mut files = Vec::new();
    emit(out, "config.json", format!("{}\n", cfg.canonical_json()).as_bytes(), &mut files)?;
    let mut entries = Vec::with_capacity(traces.len());
    for trace in &traces {
        let stem = format!("trace_{:06}", trace.timestamp_index);
        let csv = trace_csv(trace);
        let mut digests = Vec::new();
        emit(&trace_dir, &format!("{stem}.csv"), &csv, &mut digests)?;
        write_json(&trace_dir.join(format!("{stem}.json")), &TraceSidecar::from_trace(trace, &hash))?;
        entries.push(ManifestEntry {
            csv: format!("{TRACE_DIR}/{stem}.csv"),
            sidecar: format!("{TRACE_DIR}/{stem}.json"),
            temperature_k: trace.temperature,
            pump_w: trace.drive.pump_power,
            probe_w: trace.drive.stokes_power,
            seed: trace.seed,
            setting: trace.setting,
            timestamp_index: trace.timestamp_index,
            csv_sha256: digests.remove(0).sha256,
        });
    }
    let manifest = DatasetManifest {
        version: version(),
        config_sha256: hash,
        base_seed: cfg.seed,
        trace_count: entries.len(),
        traces: entries,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}
