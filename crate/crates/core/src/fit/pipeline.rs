//! Campaign-level inversion: per-bin Lorentzian fits are grouped by
//! temperature and pushed through the saturation, power-law, background,
//! frequency-shift and relaxation-time stages.
//!
//! Each bin fit is independent ([`fit_bin`]), so callers may run them in
//! parallel and hand the successful ones to [`fit_campaign`].

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::background::{
    extract_times, fit_background, tls_parameters_from_background, BackgroundFit, ExtractedTimes, TlsParameters,
};
use super::lorentzian::{fit_lorentzian, LorentzianFit};
use super::powerlaw::{fit_powerlaw, PowerLawFit};
use super::saturation::{fit_saturation, fit_saturation_shared, SaturationFit, SaturationPoint, TemperatureGroup};
use super::shift::{compare_freq_shift, ShiftComparison, ShiftObservation};
use crate::dissipation::DEFAULT_SHIFT_REFERENCE_K;
use crate::sbs::{phonon_intensity, scaled_gain, OpticalDrive};
use crate::synth::BinnedTrace;
use crate::tls::{MaterialParams, PhononMode, TlsEnsemble};
use crate::{Error, Result};

/// How Pγ² is shared across temperatures in the saturation stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SaturationMode {
    /// One Pγ² for the whole sweep.
    #[default]
    Shared,
    /// Independent (Pγ², J_c, Γ0) at every temperature; needs ≥ 5 settings.
    PerTemperature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineSettings {
    pub saturation: SaturationMode,
    /// Weight Lorentzian and saturation fits by the known noise level.
    pub weighted: bool,
    /// Temperature the frequency shift is referenced to [K].
    pub shift_reference_temperature: f64,
    /// γ_T²/γ_L² assumed when inverting the relaxation background.
    pub transverse_ratio: f64,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            saturation: SaturationMode::Shared,
            weighted: true,
            shift_reference_temperature: DEFAULT_SHIFT_REFERENCE_K,
            transverse_ratio: 0.5,
        }
    }
}

/// One fitted bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinObservation {
    /// Bin centre [K].
    pub center: f64,
    pub setting: usize,
    /// Mean temperature of the averaged traces [K].
    pub temperature: f64,
    /// Peak acoustic intensity if known from acquisition metadata [W/m²].
    pub intensity: Option<f64>,
    pub drive: OpticalDrive,
    pub fit: LorentzianFit,
}

impl BinObservation {
    /// The recorded peak intensity, or the one implied by the fitted line.
    pub fn peak_intensity(&self, material: &MaterialParams) -> f64 {
        self.intensity.unwrap_or_else(|| {
            let (omega, gamma) = (self.fit.omega_hat, self.fit.gamma_hat);
            let g_b = scaled_gain(material.gain_ref, material.gain_ref_linewidth, gamma);
            phonon_intensity(&self.drive.at_detuning(omega), omega, gamma, material, g_b)
        })
    }
}

/// Fits the Lorentzian of one averaged bin.
pub fn fit_bin(bin: &BinnedTrace, settings: &PipelineSettings) -> Result<BinObservation> {
    let sigma: Option<Vec<f64>> =
        (settings.weighted && bin.noise_sigma > 0.0).then(|| alloc::vec![bin.noise_sigma; bin.gain.len()]);
    let fit = fit_lorentzian(&bin.detuning_grid, &bin.gain, sigma.as_deref())?;
    Ok(BinObservation {
        center: bin.center,
        setting: bin.setting,
        temperature: bin.mean_temperature,
        intensity: Some(bin.mean_peak_intensity).filter(|j| *j > 0.0),
        drive: bin.drive,
        fit,
    })
}

/// Results at one temperature bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureResult {
    /// Bin centre [K].
    pub center: f64,
    /// Mean temperature over the bin's traces [K].
    pub temperature: f64,
    pub saturation: SaturationFit,
    pub times: ExtractedTimes,
    /// Inverse-variance mean of the fitted centres [rad/s].
    pub omega_hat: f64,
    pub omega_sigma: f64,
}

/// A temperature bin left out of the saturation stage.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedTemperature {
    pub center: f64,
    pub reason: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignFit {
    pub p_gamma2: f64,
    pub p_gamma2_sigma: f64,
    pub per_temperature: Vec<TemperatureResult>,
    pub skipped: Vec<SkippedTemperature>,
    /// J_c = a·T^b over the bins whose J_c is identifiable.
    pub powerlaw: Result<PowerLawFit>,
    /// Γ0 = β·T³ + Γ_BG.
    pub background: Result<BackgroundFit>,
    /// γ_L and P from the background and Pγ².
    pub tls: Result<TlsParameters>,
    pub shift: ShiftComparison,
    pub flat_direction: bool,
}

struct Bin {
    center: f64,
    temperature: f64,
    points: Vec<SaturationPoint>,
    omega_hat: f64,
    omega_sigma: f64,
}

fn group_bins(observations: &[BinObservation], material: &MaterialParams, weighted: bool) -> Vec<Bin> {
    let mut sorted: Vec<&BinObservation> = observations.iter().collect();
    sorted.sort_by(|a, b| a.center.total_cmp(&b.center).then(a.setting.cmp(&b.setting)));
    let mut bins: Vec<Bin> = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let center = sorted[start].center;
        let end = start + sorted[start..].iter().take_while(|o| o.center == center).count();
        let members = &sorted[start..end];
        let n = members.len() as f64;
        let temperature = members.iter().map(|o| o.temperature).sum::<f64>() / n;
        let points = members
            .iter()
            .map(|o| SaturationPoint {
                intensity: o.peak_intensity(material),
                gamma: o.fit.gamma_hat,
                gamma_sigma: weighted.then(|| o.fit.gamma_sigma()).filter(|s| *s > 0.0),
            })
            .collect();
        // Inverse-variance mean of the centres, plain mean if any σ is zero.
        let sigmas: Vec<f64> = members.iter().map(|o| o.fit.omega_sigma()).collect();
        let (omega_hat, omega_sigma) = if sigmas.iter().all(|s| *s > 0.0) {
            let w: Vec<f64> = sigmas.iter().map(|s| 1.0 / (s * s)).collect();
            let total: f64 = w.iter().sum();
            let mean = members.iter().zip(&w).map(|(o, w)| w * o.fit.omega_hat).sum::<f64>() / total;
            (mean, total.sqrt().recip())
        } else {
            (members.iter().map(|o| o.fit.omega_hat).sum::<f64>() / n, 0.0)
        };
        bins.push(Bin { center, temperature, points, omega_hat, omega_sigma });
        start = end;
    }
    bins
}

/// Runs every stage after the per-bin Lorentzian fits.
///
/// `ensemble` supplies the deformation potential for the relaxation-time
/// extraction; when the background inversion succeeds its γ_L replaces the
/// configured one.
pub fn fit_campaign(
    observations: &[BinObservation],
    mode: &PhononMode,
    material: &MaterialParams,
    ensemble: &TlsEnsemble,
    settings: &PipelineSettings,
) -> Result<CampaignFit> {
    let bins = group_bins(observations, material, settings.weighted);
    let required = match settings.saturation {
        SaturationMode::Shared => 3,
        SaturationMode::PerTemperature => super::saturation::MIN_POINTS,
    };
    let mut skipped = Vec::new();
    let mut usable = Vec::new();
    for bin in bins {
        if bin.points.len() < required {
            skipped.push(SkippedTemperature {
                center: bin.center,
                reason: Error::InsufficientData { required, actual: bin.points.len() },
            });
        } else {
            usable.push(bin);
        }
    }
    if usable.is_empty() {
        return Err(Error::InsufficientData { required: 1, actual: 0 });
    }

    let (p_gamma2, p_gamma2_sigma, fits, flat) = match settings.saturation {
        SaturationMode::Shared => {
            let groups: Vec<TemperatureGroup> = usable
                .iter()
                .map(|b| TemperatureGroup { temperature: b.temperature, points: b.points.clone() })
                .collect();
            let shared = fit_saturation_shared(&groups, mode, material)?;
            let fits: Vec<Option<SaturationFit>> = shared.per_temperature.into_iter().map(Some).collect();
            (shared.p_gamma2, shared.p_gamma2_sigma, fits, shared.flat_direction)
        }
        SaturationMode::PerTemperature => {
            let mut fits = Vec::with_capacity(usable.len());
            for b in &usable {
                match fit_saturation(b.temperature, &b.points, mode, material) {
                    Ok(f) => fits.push(Some(f)),
                    Err(reason) => {
                        skipped.push(SkippedTemperature { center: b.center, reason });
                        fits.push(None);
                    }
                }
            }
            // Inverse-variance mean of the per-temperature Pγ².
            let (mut num, mut den, mut plain) = (0.0, 0.0, Vec::new());
            for f in fits.iter().flatten().filter(|f| !f.flat_direction) {
                plain.push(f.p_gamma2);
                let s = f.p_gamma2_sigma();
                if s > 0.0 {
                    num += f.p_gamma2 / (s * s);
                    den += 1.0 / (s * s);
                }
            }
            if plain.is_empty() {
                return Err(Error::DegenerateData("no temperature pins the saturation law"));
            }
            let (p, s) = if den > 0.0 && den.is_finite() {
                (num / den, den.sqrt().recip())
            } else {
                (super::median(&plain), 0.0)
            };
            let flat = fits.iter().flatten().any(|f| f.flat_direction);
            (p, s, fits, flat)
        }
    };

    let pinned: Vec<(&Bin, &SaturationFit)> =
        usable.iter().zip(&fits).filter_map(|(b, f)| f.as_ref().map(|f| (b, f))).collect();

    let powerlaw = fit_powerlaw(
        &pinned.iter().filter(|(_, f)| !f.flat_direction).map(|(b, f)| (b.temperature, f.j_c)).collect::<Vec<_>>(),
    );
    let background = fit_background(
        &pinned
            .iter()
            .map(|(b, f)| (b.temperature, f.gamma0, settings.weighted.then(|| f.gamma0_sigma()).filter(|s| *s > 0.0)))
            .collect::<Vec<_>>(),
    );
    let tls = background.as_ref().map_err(Clone::clone).and_then(|bg| {
        tls_parameters_from_background(
            bg.beta,
            bg.beta_sigma(),
            p_gamma2,
            p_gamma2_sigma,
            material,
            settings.transverse_ratio,
        )
    });
    let extraction_ensemble = match &tls {
        Ok(p) => TlsEnsemble {
            density_of_states: p.density_of_states,
            gamma_l: p.gamma_l,
            gamma_t: Some(p.gamma_t),
            ..*ensemble
        },
        Err(_) => *ensemble,
    };

    let per_temperature: Vec<TemperatureResult> = pinned
        .iter()
        .map(|(b, f)| TemperatureResult {
            center: b.center,
            temperature: b.temperature,
            saturation: **f,
            times: extract_times(f, material, &extraction_ensemble, mode, b.temperature),
            omega_hat: b.omega_hat,
            omega_sigma: b.omega_sigma,
        })
        .collect();

    let shift_obs: Vec<ShiftObservation> = usable
        .iter()
        .map(|b| ShiftObservation { temperature: b.temperature, omega_hat: b.omega_hat, omega_sigma: b.omega_sigma })
        .collect();
    let shift =
        compare_freq_shift(&shift_obs, settings.shift_reference_temperature, p_gamma2, p_gamma2_sigma, mode, material)?;

    skipped.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(CampaignFit {
        p_gamma2,
        p_gamma2_sigma,
        per_temperature,
        skipped,
        powerlaw,
        background,
        tls,
        shift,
        flat_direction: flat,
    })
}
