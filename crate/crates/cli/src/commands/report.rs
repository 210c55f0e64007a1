use std::fmt::Write as _;
use std::path::Path;

use super::fit::FIT_REPORT_FILE;
use crate::formats::{csv_bytes, read_json, write_bytes, CsvCell, FitReport};
use crate::CliError;

/// One fitted parameter next to the published value it should reproduce.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub parameter: &'static str,
    pub unit: &'static str,
    pub fitted: Option<f64>,
    pub sigma: Option<f64>,
    pub reference: f64,
}

impl ComparisonRow {
    pub fn ratio(&self) -> Option<f64> {
        self.fitted.map(|f| f / self.reference)
    }
}

/// Published values for 44 wt% Ge-doped silica.
mod published {
    pub const A: f64 = 0.9;
    pub const B: f64 = 2.6;
    pub const J_C_1P1K: f64 = 1.2;
    pub const P_GAMMA2: f64 = 1.6e7;
    pub const DENSITY_OF_STATES: f64 = 23e44;
    pub const GAMMA_L_EV: f64 = 0.5;
    pub const SQRT_T1T2: f64 = 10e-9;
    pub const T1: f64 = 79e-9;
    pub const T2: f64 = 1.3e-9;
}

pub fn comparison(report: &FitReport) -> Vec<ComparisonRow> {
    let g = report.global.as_ref();
    let pick = |f: fn(&crate::formats::GlobalRecord) -> Option<f64>| g.and_then(f);
    let row = |parameter, unit, fitted, sigma, reference| ComparisonRow { parameter, unit, fitted, sigma, reference };
    let ref_row = g
        .and_then(|g| g.reference_temperature_k)
        .and_then(|t| report.per_temperature.iter().find(|r| r.temperature_k == t));
    vec![
        row("a", "W m^-2 K^-b", pick(|g| g.a_w_m2_k_b), pick(|g| g.a_sigma_w_m2_k_b), published::A),
        row("b", "1", pick(|g| g.b), pick(|g| g.b_sigma), published::B),
        row(
            "J_c at reference temperature",
            "W m^-2",
            pick(|g| g.j_c_at_reference_w_m2),
            ref_row.map(|r| r.j_c_sigma_w_m2),
            published::J_C_1P1K,
        ),
        row("P gamma_L^2", "J m^-3", g.map(|g| g.p_gamma2_j_m3), g.map(|g| g.p_gamma2_sigma_j_m3), published::P_GAMMA2),
        row(
            "P",
            "J^-1 m^-3",
            pick(|g| g.density_of_states_per_j_m3),
            pick(|g| g.density_of_states_sigma_per_j_m3),
            published::DENSITY_OF_STATES,
        ),
        row("gamma_L", "eV", pick(|g| g.gamma_l_ev), pick(|g| g.gamma_l_sigma_ev), published::GAMMA_L_EV),
        row("sqrt(T1 T2)", "s", pick(|g| g.sqrt_t1t2_at_reference_s), None, published::SQRT_T1T2),
        row("T1", "s", pick(|g| g.t1_at_reference_s), None, published::T1),
        row("T2", "s", pick(|g| g.t2_at_reference_s), None, published::T2),
    ]
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.4e}"))
}

fn markdown(rows: &[ComparisonRow], report: &FitReport) -> String {
    let mut s = String::new();
    let t = report.global.as_ref().and_then(|g| g.reference_temperature_k);
    let _ = writeln!(s, "| parameter | unit | fitted | sigma | published | fitted/published |");
    let _ = writeln!(s, "|---|---|---|---|---|---|");
    for r in rows {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {:.4e} | {} |",
            r.parameter,
            r.unit,
            fmt_opt(r.fitted),
            fmt_opt(r.sigma),
            r.reference,
            r.ratio().map_or_else(|| "n/a".to_owned(), |q| format!("{q:.3}")),
        );
    }
    if let Some(t) = t {
        let _ = writeln!(s, "\nReference-temperature rows use the fitted bin at {t:.4} K.");
    }
    if !report.flagged.is_empty() {
        let _ = writeln!(s, "\n{} item(s) flagged during fitting; see {FIT_REPORT_FILE}.", report.flagged.len());
    }
    s
}

/// Reads `fit_report.json` from `fit_dir`, writes `comparison.csv` and
/// `comparison.md` next to it, and returns the markdown table.
pub fn cmd_report(fit_dir: &Path) -> Result<String, CliError> {
    let report: FitReport = read_json(&fit_dir.join(FIT_REPORT_FILE))?;
    let rows = comparison(&report);
    let csv = csv_bytes(
        &["parameter", "unit", "fitted", "sigma", "published", "ratio"],
        rows.iter().map(|r| {
            let opt = |v: Option<f64>| v.map_or(CsvCell::Text(String::new()), CsvCell::Num);
            vec![
                CsvCell::Text(r.parameter.to_owned()),
                CsvCell::Text(r.unit.to_owned()),
                opt(r.fitted),
                opt(r.sigma),
                CsvCell::Num(r.reference),
                opt(r.ratio()),
            ]
        }),
    );
    write_bytes(&fit_dir.join("comparison.csv"), &csv)?;
    let md = markdown(&rows, &report);
    write_bytes(&fit_dir.join("comparison.md"), md.as_bytes())?;
    Ok(md)
}
