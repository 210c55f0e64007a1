//! Run configuration: JSON with unit-suffixed keys. Frequencies are ordinary
//! Hz in the file and become angular exactly once, in [`RunConfig::resolve`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tlsbrillouin_core::bloch::RelaxationTimes;
use tlsbrillouin_core::constants::{hz_to_angular, optical_angular_frequency, ELECTRON_VOLT};
use tlsbrillouin_core::dissipation::JcSource;
use tlsbrillouin_core::fit::{PipelineSettings, SaturationMode};
use tlsbrillouin_core::synth::{ModelBundle, NoiseModel, PowerSetting, SweepPlan, TemperatureLadder};
use tlsbrillouin_core::tls::{MaterialParams, PowerLaw, TlsEnsemble};

use crate::CliError;

/// Minimum spectra per 100 mK; fewer leave per-bin fits noise-dominated.
pub const MIN_TRACES_PER_100MK: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Base seed for every random draw. Required: there is no clock seeding.
    pub seed: u64,
    pub material: MaterialSpec,
    pub ensemble: EnsembleSpec,
    /// Exactly one source of the critical intensity.
    pub critical_intensity: Option<CriticalIntensitySpec>,
    #[serde(default = "default_pump_wavelength")]
    pub pump_wavelength_m: f64,
    /// Overrides the phase-matched Brillouin frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brillouin_frequency_hz: Option<f64>,
    #[serde(default = "default_shift_reference")]
    pub shift_reference_k: f64,
    #[serde(default = "default_true")]
    pub center_drift: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub fit: FitSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_pump_wavelength() -> f64 {
    1548.963e-9
}
fn default_shift_reference() -> f64 {
    1.09
}
fn default_true() -> bool {
    true
}

/// A named preset with optional field overrides, or a fully inline set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_kg_m3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_longitudinal_m_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_transverse_m_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_eff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_ref_per_w_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_ref_linewidth_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_area_m2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_length_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_of_states_per_j_m3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_l_ev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_t_ev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_bg_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum CriticalIntensitySpec {
    PowerLaw { a_w_m2_k_b: f64, b: f64 },
    FixedWM2(f64),
    Times { t1_s: f64, t2_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum NoiseSpec {
    None,
    SigmaW(f64),
    Snr(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum LadderSpec {
    Continuous,
    Stepped { bin_width_k: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSpec {
    pub pump_w: f64,
    pub probe_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub t_start_k: f64,
    pub t_end_k: f64,
    pub traces_per_100mk: usize,
    pub power_settings: Vec<PowerSpec>,
    pub noise: NoiseSpec,
    #[serde(default = "default_ladder")]
    pub ladder: LadderSpec,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_half_width")]
    pub grid_half_width_linewidths: f64,
}

fn default_ladder() -> LadderSpec {
    LadderSpec::Continuous
}
fn default_grid_points() -> usize {
    401
}
fn default_half_width() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaturationSpec {
    Shared,
    PerTemperature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    #[serde(default = "default_bin_width")]
    pub bin_width_k: f64,
    #[serde(default = "default_saturation")]
    pub saturation: SaturationSpec,
    #[serde(default = "default_true")]
    pub weighted: bool,
    /// γ_T²/γ_L² assumed when inverting the relaxation background.
    #[serde(default = "default_transverse_ratio")]
    pub transverse_ratio: f64,
}

fn default_bin_width() -> f64 {
    0.1
}
fn default_saturation() -> SaturationSpec {
    SaturationSpec::Shared
}
fn default_transverse_ratio() -> f64 {
    0.5
}

impl Default for FitSpec {
    fn default() -> Self {
        Self {
            bin_width_k: default_bin_width(),
            saturation: default_saturation(),
            weighted: true,
            transverse_ratio: default_transverse_ratio(),
        }
    }
}

/// Everything the library needs, in SI and angular units.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub model: ModelBundle,
    pub plan: Option<SweepPlan>,
    pub pipeline: PipelineSettings,
    pub bin_width: f64,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be finite and strictly positive, got {v}")))
    }
}

impl MaterialSpec {
    fn resolve(&self) -> Result<MaterialParams, CliError> {
        let base = match self.preset.as_deref() {
            Some("ge-doped-silica-44wt") => Some(MaterialParams::ge_doped_silica()),
            Some("vitreous-silica") => Some(MaterialParams::vitreous_silica()),
            Some(other) => return Err(invalid(format!("unknown material preset `{other}`"))),
            None => None,
        };
        let pick = |name: &str, v: Option<f64>, preset: Option<f64>| {
            v.or(preset).ok_or_else(|| invalid(format!("material.{name} is required without a preset")))
        };
        let b = base.as_ref();
        let m = MaterialParams {
            density: pick("density_kg_m3", self.density_kg_m3, b.map(|m| m.density))?,
            v_longitudinal: pick("v_longitudinal_m_s", self.v_longitudinal_m_s, b.map(|m| m.v_longitudinal))?,
            v_transverse: pick("v_transverse_m_s", self.v_transverse_m_s, b.map(|m| m.v_transverse))?,
            n_eff: pick("n_eff", self.n_eff, b.map(|m| m.n_eff))?,
            gain_ref: pick("gain_ref_per_w_m", self.gain_ref_per_w_m, b.map(|m| m.gain_ref))?,
            gain_ref_linewidth: match self.gain_ref_linewidth_hz {
                Some(hz) => hz_to_angular(hz),
                None => pick("gain_ref_linewidth_hz", None, b.map(|m| m.gain_ref_linewidth))?,
            },
            mode_area: pick("mode_area_m2", self.mode_area_m2, b.map(|m| m.mode_area))?,
            fiber_length: pick("fiber_length_m", self.fiber_length_m, b.map(|m| m.fiber_length))?,
        };
        m.validate().map_err(|e| invalid(format!("material: {e}")))?;
        Ok(m)
    }
}

impl EnsembleSpec {
    fn resolve(&self) -> Result<TlsEnsemble, CliError> {
        let base = match self.preset.as_deref() {
            Some("ge-doped-silica-44wt") => Some(TlsEnsemble::ge_doped_silica()),
            Some("vitreous-silica") => Some(TlsEnsemble::vitreous_silica()),
            Some(other) => return Err(invalid(format!("unknown ensemble preset `{other}`"))),
            None => None,
        };
        let b = base.as_ref();
        let required = |name: &str| invalid(format!("ensemble.{name} is required without a preset"));
        let e = TlsEnsemble {
            density_of_states: self
                .density_of_states_per_j_m3
                .or(b.map(|e| e.density_of_states))
                .ok_or_else(|| required("density_of_states_per_j_m3"))?,
            gamma_l: self
                .gamma_l_ev
                .map(|ev| ev * ELECTRON_VOLT)
                .or(b.map(|e| e.gamma_l))
                .ok_or_else(|| required("gamma_l_ev"))?,
            gamma_t: self.gamma_t_ev.map(|ev| ev * ELECTRON_VOLT).or(b.and_then(|e| e.gamma_t)),
            // The power law here only seeds presets; the run uses `critical_intensity`.
            jc_power_law: b.map_or(PowerLaw { a: 0.9, b: 2.6 }, |e| e.jc_power_law),
            gamma_bg: self
                .gamma_bg_hz
                .map(hz_to_angular)
                .or(b.map(|e| e.gamma_bg))
                .ok_or_else(|| required("gamma_bg_hz"))?,
        };
        Ok(e)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    /// Canonical bytes: the effective configuration re-serialized in field order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let material = self.material.resolve()?;
        let mut ensemble = self.ensemble.resolve()?;
        let jc = match &self.critical_intensity {
            None => return Err(invalid("critical_intensity: exactly one of power_law, fixed_w_m2, times is required")),
            Some(CriticalIntensitySpec::PowerLaw { a_w_m2_k_b, b }) => {
                let law = PowerLaw { a: positive("critical_intensity.power_law.a_w_m2_k_b", *a_w_m2_k_b)?, b: *b };
                if !b.is_finite() {
                    return Err(invalid("critical_intensity.power_law.b must be finite"));
                }
                ensemble.jc_power_law = law;
                JcSource::PowerLaw(law)
            }
            Some(CriticalIntensitySpec::FixedWM2(j)) => JcSource::Fixed(positive("critical_intensity.fixed_w_m2", *j)?),
            Some(CriticalIntensitySpec::Times { t1_s, t2_s }) => JcSource::Times(
                RelaxationTimes::new(*t1_s, *t2_s).map_err(|e| invalid(format!("critical_intensity.times: {e}")))?,
            ),
        };
        ensemble.validate().map_err(|e| invalid(format!("ensemble: {e}")))?;
        let pump_omega = optical_angular_frequency(positive("pump_wavelength_m", self.pump_wavelength_m)?);
        let mut model = ModelBundle::new(material, ensemble, jc, pump_omega);
        if let Some(f) = self.brillouin_frequency_hz {
            model.brillouin_omega = hz_to_angular(positive("brillouin_frequency_hz", f)?);
        }
        model.shift_reference_temperature = positive("shift_reference_k", self.shift_reference_k)?;
        model.center_drift = self.center_drift;
        model.validate().map_err(|e| invalid(format!("model: {e}")))?;

        let plan = self.sweep.as_ref().map(|s| s.resolve(model, self.seed)).transpose()?;
        let pipeline = PipelineSettings {
            saturation: match self.fit.saturation {
                SaturationSpec::Shared => SaturationMode::Shared,
                SaturationSpec::PerTemperature => SaturationMode::PerTemperature,
            },
            weighted: self.fit.weighted,
            shift_reference_temperature: self.shift_reference_k,
            transverse_ratio: self.fit.transverse_ratio,
        };
        if !(self.fit.transverse_ratio >= 0.0 && self.fit.transverse_ratio.is_finite()) {
            return Err(invalid("fit.transverse_ratio must be finite and non-negative"));
        }
        Ok(Resolved { model, plan, pipeline, bin_width: positive("fit.bin_width_k", self.fit.bin_width_k)? })
    }
}

impl SweepSpec {
    fn resolve(&self, model: ModelBundle, seed: u64) -> Result<SweepPlan, CliError> {
        if self.traces_per_100mk < MIN_TRACES_PER_100MK {
            return Err(invalid(format!(
                "sweep.traces_per_100mk must be at least {MIN_TRACES_PER_100MK}, got {}",
                self.traces_per_100mk
            )));
        }
        let plan = SweepPlan {
            t_start: self.t_start_k,
            t_end: self.t_end_k,
            traces_per_100mk: self.traces_per_100mk,
            power_settings: self
                .power_settings
                .iter()
                .map(|p| PowerSetting { pump_power: p.pump_w, probe_power: p.probe_w })
                .collect(),
            noise: match self.noise {
                NoiseSpec::None => NoiseModel::None,
                NoiseSpec::SigmaW(sigma) => NoiseModel::Absolute { sigma },
                NoiseSpec::Snr(snr) => NoiseModel::PeakRelative { snr },
            },
            model,
            ladder: match self.ladder {
                LadderSpec::Continuous => TemperatureLadder::Continuous,
                LadderSpec::Stepped { bin_width_k } => TemperatureLadder::Stepped { bin_width: bin_width_k },
            },
            grid_points: self.grid_points,
            grid_half_width_linewidths: self.grid_half_width_linewidths,
            base_seed: seed,
        };
        plan.validate().map_err(|e| invalid(format!("sweep: {e}")))?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "seed": 1,
        "material": {"preset": "ge-doped-silica-44wt"},
        "ensemble": {"preset": "ge-doped-silica-44wt"},
        "critical_intensity": {"power_law": {"a_w_m2_k_b": 0.9, "b": 2.6}}
    }"#;

    #[test]
    fn presets_resolve_and_hz_becomes_angular_once() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.model.material, MaterialParams::ge_doped_silica());
        assert_eq!(r.model.ensemble.gamma_bg, hz_to_angular(650e3));
        let text = MINIMAL.replace(
            r#""ensemble": {"preset": "ge-doped-silica-44wt"}"#,
            r#""ensemble": {"preset": "ge-doped-silica-44wt", "gamma_bg_hz": 1e3}"#,
        );
        let r = RunConfig::from_json(&text).unwrap().resolve().unwrap();
        assert_eq!(r.model.ensemble.gamma_bg, hz_to_angular(1e3));
    }

    #[test]
    fn seed_and_critical_intensity_are_required() {
        assert!(RunConfig::from_json(&MINIMAL.replace(r#""seed": 1,"#, "")).is_err());
        let none =
            MINIMAL.replace(r#""critical_intensity": {"power_law": {"a_w_m2_k_b": 0.9, "b": 2.6}}"#, r#""fit": {}"#);
        let err = RunConfig::from_json(&none).unwrap_err().to_string();
        assert!(err.contains("exactly one"), "{err}");
        let two = MINIMAL.replace(
            r#"{"power_law": {"a_w_m2_k_b": 0.9, "b": 2.6}}"#,
            r#"{"power_law": {"a_w_m2_k_b": 0.9, "b": 2.6}, "fixed_w_m2": 1.2}"#,
        );
        assert!(RunConfig::from_json(&two).is_err());
    }

    #[test]
    fn unknown_keys_and_presets_are_rejected() {
        assert!(RunConfig::from_json(&MINIMAL.replace(r#""seed": 1,"#, r#""seed": 1, "colour": 3,"#)).is_err());
        assert!(RunConfig::from_json(&MINIMAL.replacen("ge-doped-silica-44wt", "quartz", 1)).is_err());
    }

    #[test]
    fn hash_tracks_effective_content() {
        let a = RunConfig::from_json(MINIMAL).unwrap();
        let mut b = a.clone();
        assert_eq!(a.sha256(), b.sha256());
        b.seed = 2;
        assert_ne!(a.sha256(), b.sha256());
    }
}
