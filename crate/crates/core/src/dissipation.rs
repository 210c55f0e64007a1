//! Ensemble phonon dissipation: resonant (saturable) and relaxation absorption,
//! the resonant frequency shift, the background floor, and derived figures of merit.
//!
//! Each closed form has a quadrature twin that integrates the single-TLS
//! physics over the TLS distribution, so the approximations behind the closed
//! forms can be measured rather than assumed.

use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::bloch::{tls_susceptibility, CounterRotating, RelaxationTimes};
use crate::constants::{HBAR, K_B};
use crate::numerics::{
    digamma_half_plus_imag, quad2d_adaptive, quad_adaptive, sech_squared, tanh, QuadratureResult, QuadratureSettings,
    Rectangle,
};
use crate::tls::{
    golden_rule_rate, DriveState, MaterialParams, PhononMode, Polarization, PowerLaw, TlsEnsemble, TlsState,
};
use crate::{Error, Result};

/// Temperature above which the low-temperature TLS theory is not trusted [K].
pub const MODEL_VALIDITY_LIMIT_K: f64 = 10.0;

/// Reference temperature for frequency shifts used throughout the sweep [K].
pub const DEFAULT_SHIFT_REFERENCE_K: f64 = 1.09;

/// Strain-coupling strength πPγ²Ω/(ρv²) [rad/s], the T → 0 resonant rate.
pub fn resonant_strength(mode: &PhononMode, material: &MaterialParams, ensemble: &TlsEnsemble) -> f64 {
    let v = material.sound_speed(mode.polarization);
    PI * ensemble.p_gamma2(mode.polarization) * mode.omega / (material.density * v * v)
}

/// Weak-field resonant absorption Γ^res = πPγ²Ω/(ρv²)·tanh(ħΩ/2k_BT).
pub fn gamma_res_weak(mode: &PhononMode, temperature: f64, material: &MaterialParams, ensemble: &TlsEnsemble) -> f64 {
    resonant_strength(mode, material, ensemble) * tanh(mode.energy() / (2.0 * K_B * temperature))
}

/// Critical intensity J_c = ħ²ρv³/(2γ²T1T2) [W/m²].
pub fn critical_intensity(
    material: &MaterialParams,
    ensemble: &TlsEnsemble,
    times: &RelaxationTimes,
    polarization: Polarization,
) -> f64 {
    let v = material.sound_speed(polarization);
    let g = ensemble.deformation_potential(polarization);
    HBAR * HBAR * material.density * v * v * v / (2.0 * g * g * times.t1 * times.t2)
}

/// Inverse of [`critical_intensity`]: the T1T2 product [s²] implied by J_c.
pub fn t1t2_from_critical_intensity(
    j_c: f64,
    material: &MaterialParams,
    ensemble: &TlsEnsemble,
    polarization: Polarization,
) -> f64 {
    let v = material.sound_speed(polarization);
    let g = ensemble.deformation_potential(polarization);
    HBAR * HBAR * material.density * v * v * v / (2.0 * g * g * j_c)
}

/// Where the critical intensity comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JcSource {
    /// Explicit relaxation times.
    Times(RelaxationTimes),
    /// Empirical J_c = a·Tᵇ.
    PowerLaw(PowerLaw),
    /// A fixed value [W/m²].
    Fixed(f64),
}

impl JcSource {
    pub fn critical_intensity(
        &self,
        temperature: f64,
        material: &MaterialParams,
        ensemble: &TlsEnsemble,
        polarization: Polarization,
    ) -> f64 {
        match self {
            JcSource::Times(times) => critical_intensity(material, ensemble, times, polarization),
            JcSource::PowerLaw(law) => law.eval(temperature),
            JcSource::Fixed(j_c) => *j_c,
        }
    }
}

/// Resonant-absorption suppression factor √(1 + J/J_c).
pub fn suppression_factor(intensity: f64, j_c: f64) -> f64 {
    (1.0 + intensity / j_c).sqrt()
}

/// Saturated resonant absorption Γ^res(J) = Γ^res_weak/√(1 + J/J_c).
pub fn gamma_res_strong(
    mode: &PhononMode,
    temperature: f64,
    intensity: f64,
    j_c: f64,
    material: &MaterialParams,
    ensemble: &TlsEnsemble,
) -> f64 {
    gamma_res_weak(mode, temperature, material, ensemble) / suppression_factor(intensity, j_c)
}

/// Resonant absorption by direct integration of the single-TLS susceptibility
/// over splittings E ∈ (0, ∞): Γ = −2P ∫ Re χ(E) dE.
///
/// The power-broadened Lorentzian is mapped onto a finite interval with
/// E = ħ(ω + w·tan θ), w = √(1 + J/J_c)/T2, so the peak sits at θ = 0 with
/// unit width whatever ωT2 is. No energy cutoff is applied.
pub fn gamma_res_integral_oracle(
    mode: &PhononMode,
    drive: &DriveState,
    times: &RelaxationTimes,
    material: &MaterialParams,
    ensemble: &TlsEnsemble,
    counter_rotating: CounterRotating,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult> {
    let j_c = critical_intensity(material, ensemble, times, mode.polarization);
    let width = suppression_factor(drive.intensity, j_c) / times.t2;
    let omega = drive.omega;
    let lower = (-omega / width).atan();
    let density = ensemble.density_of_states;
    let r = quad_adaptive(
        |theta| {
            let (s, c) = theta.sin_cos();
            if c <= 0.0 {
                return 0.0;
            }
            let energy = HBAR * (omega + width * s / c);
            if energy <= 0.0 {
                return 0.0;
            }
            let jacobian = HBAR * width / (c * c);
            let chi = tls_susceptibility(energy, drive, times, material, mode, ensemble, counter_rotating);
            -2.0 * density * chi.re * jacobian
        },
        lower,
        FRAC_PI_2,
        settings,
    )?;
    Ok(r)
}

/// Resonant frequency shift Δω^res(T) − Δω^res(T0) [rad/s]:
/// −(Pγ²Ω/ρv²)·[ln(ħΩ/k_BT) − ReΨ(½ + ħΩ/2πik_BT)], referenced to T0.
///
/// Intensity-independent, so it takes no drive.
pub fn freq_shift_res(
    mode: &PhononMode,
    temperature: f64,
    reference_temperature: f64,
    material: &MaterialParams,
    ensemble: &TlsEnsemble,
) -> f64 {
    ensemble.p_gamma2(mode.polarization) * freq_shift_per_p_gamma2(mode, temperature, reference_temperature, material)
}

/// [`freq_shift_res`] per unit Pγ² [rad·s⁻¹ per J·m⁻³].
pub fn freq_shift_per_p_gamma2(
    mode: &PhononMode,
    temperature: f64,
    reference_temperature: f64,
    material: &MaterialParams,
) -> f64 {
    if temperature == reference_temperature {
        return 0.0;
    }
    let v = material.sound_speed(mode.polarization);
    let strength = mode.omega / (material.density * v * v);
    let bracket = |t: f64| {
        let x = mode.energy() / (K_B * t);
        x.ln() - digamma_half_plus_imag(x / (2.0 * PI))
    };
    -strength * (bracket(temperature) - bracket(reference_temperature))
}

/// Relaxation absorption
/// Γ^rel = (π³/24)·(Pγ_η²/ρ²v_η²ħ⁴)·(Σ_η′ γ_η′²/v_η′⁵)·(k_BT)³.
pub fn gamma_rel_closed(
    temperature: f64,
    polarization: Polarization,
    material: &MaterialParams,
    ensemble: &TlsEnsemble,
) -> f64 {
    let v = material.sound_speed(polarization);
    let kt = K_B * temperature;
    let hbar2 = HBAR * HBAR;
    PI * PI * PI / 24.0 * ensemble.p_gamma2(polarization)
        / (material.density * material.density * v * v * hbar2 * hbar2)
        * ensemble.bath_coupling(material)
        * kt
        * kt
        * kt
}

/// Energy window and lower tunneling cutoff for the relaxation integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationWindow {
    /// Upper limit of both Δ and Δ₀, in units of k_BT.
    pub e_max_kt: f64,
    /// Lower limit of Δ₀, in units of k_BT.
    pub delta0_min_kt: f64,
}

impl Default for RelaxationWindow {
    fn default() -> Self {
        Self { e_max_kt: 40.0, delta0_min_kt: 1e-9 }
    }
}

/// Relaxation absorption by 2-D quadrature over the TLS distribution:
/// (Pγ²/ρv²k_BT) ∫∫ dΔ dΔ₀ (Δ²/Δ₀E²)(1/τ) sech²(E/2k_BT),
/// with Δ ∈ [0, E_max], Δ₀ integrated in ln Δ₀, and 1/τ the golden-rule rate.
pub fn gamma_rel_integral_oracle(
    temperature: f64,
    polarization: Polarization,
    material: &MaterialParams,
    ensemble: &TlsEnsemble,
    window: RelaxationWindow,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult> {
    if !(window.e_max_kt > 0.0 && window.delta0_min_kt > 0.0 && window.delta0_min_kt < window.e_max_kt) {
        return Err(Error::invalid("window", "need 0 < delta0_min < e_max"));
    }
    let kt = K_B * temperature;
    let v = material.sound_speed(polarization);
    let prefactor = ensemble.p_gamma2(polarization) / (material.density * v * v * kt);
    // Work in units of k_BT and rescale at the end; Δ in x, ln Δ₀ in y.
    let region = Rectangle { x: (0.0, window.e_max_kt), y: (window.delta0_min_kt.ln(), window.e_max_kt.ln()) };
    let r = quad2d_adaptive(
        |x, u| {
            let y = u.exp();
            let e2 = x * x + y * y;
            let state = TlsState { delta: x * kt, delta0: y * kt };
            let rate = golden_rule_rate(&state, material, ensemble, temperature);
            x * x / e2 * rate * sech_squared(0.5 * e2.sqrt())
        },
        region,
        settings,
    )?;
    // dΔ dΔ₀/Δ₀ = k_BT dx du.
    Ok(QuadratureResult {
        value: r.value * prefactor * kt,
        error_estimate: r.error_estimate * prefactor * kt,
        evaluations: r.evaluations,
    })
}

/// Decomposition of the acoustic linewidth (all rates FWHM, rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinewidthBreakdown {
    pub gamma_res: f64,
    pub gamma_rel: f64,
    pub gamma_bg: f64,
    pub total: f64,
    /// Resonant frequency shift relative to the reference temperature.
    pub freq_shift_res: f64,
    /// False above [`MODEL_VALIDITY_LIMIT_K`], where the TLS picture is not trusted.
    pub within_validity: bool,
}

/// Γ(T, J) = Γ^res(J) + Γ^rel(T) + Γ^BG for the mode, plus the resonant shift.
pub fn total_linewidth(
    mode: &PhononMode,
    drive: &DriveState,
    material: &MaterialParams,
    ensemble: &TlsEnsemble,
    j_c: &JcSource,
    reference_temperature: f64,
) -> LinewidthBreakdown {
    let t = drive.temperature;
    let jc = j_c.critical_intensity(t, material, ensemble, mode.polarization);
    let gamma_res = gamma_res_strong(mode, t, drive.intensity, jc, material, ensemble);
    let gamma_rel = gamma_rel_closed(t, mode.polarization, material, ensemble);
    let gamma_bg = ensemble.gamma_bg;
    LinewidthBreakdown {
        gamma_res,
        gamma_rel,
        gamma_bg,
        total: gamma_res + gamma_rel + gamma_bg,
        freq_shift_res: freq_shift_res(mode, t, reference_temperature, material, ensemble),
        within_validity: t <= MODEL_VALIDITY_LIMIT_K,
    }
}

/// Rayleigh-type floor scaled as ω⁴ from a reference point.
pub fn rayleigh_floor(omega: f64, omega_ref: f64, gamma_ref: f64) -> f64 {
    let r2 = (omega / omega_ref) * (omega / omega_ref);
    gamma_ref * r2 * r2
}

/// Mechanical quality factor Ω/Γ.
pub fn quality_factor(omega: f64, gamma: f64) -> f64 {
    omega / gamma
}

/// Amplitude decay length v/Γ [m].
pub fn decay_length(sound_speed: f64, gamma: f64) -> f64 {
    sound_speed / gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz_to_angular;

    fn setup() -> (MaterialParams, TlsEnsemble, PhononMode) {
        (
            MaterialParams::ge_doped_silica(),
            TlsEnsemble::ge_doped_silica(),
            PhononMode::longitudinal(hz_to_angular(9.188e9)),
        )
    }

    #[test]
    fn weak_resonant_rate_at_table_inputs() {
        let (m, e, mode) = setup();
        let g = gamma_res_weak(&mode, 1.1, &m, &e) / hz_to_angular(1.0);
        assert!((g / 1.512e6 - 1.0).abs() < 2e-3, "{g}");
        let ratio = gamma_res_weak(&mode, 4.2, &m, &e) / gamma_res_weak(&mode, 1.1, &m, &e);
        assert!((ratio - 0.265).abs() < 2e-3, "{ratio}");
        assert!(gamma_res_weak(&mode, 1e7, &m, &e) < 1e-6 * gamma_res_weak(&mode, 1.1, &m, &e));
    }

    #[test]
    fn saturation_law() {
        let (m, e, mode) = setup();
        let weak = gamma_res_weak(&mode, 1.1, &m, &e);
        assert_eq!(gamma_res_strong(&mode, 1.1, 0.0, 1.2, &m, &e), weak);
        let at_jc = gamma_res_strong(&mode, 1.1, 1.2, 1.2, &m, &e);
        assert!((at_jc * core::f64::consts::SQRT_2 / weak - 1.0).abs() < 1e-12);
        assert!((suppression_factor(2024.0, 1.0) - 45.0).abs() < 1e-12);
    }

    #[test]
    fn critical_intensity_scalings() {
        let (m, e, _) = setup();
        let times = RelaxationTimes::new(1e-7, 1e-9).unwrap();
        let base = critical_intensity(&m, &e, &times, Polarization::Longitudinal);
        let doubled = TlsEnsemble { gamma_l: 2.0 * e.gamma_l, ..e };
        let quarter = critical_intensity(&m, &doubled, &times, Polarization::Longitudinal);
        assert!((quarter / base - 0.25).abs() < 1e-14);
        let t1t2 = t1t2_from_critical_intensity(base, &m, &e, Polarization::Longitudinal);
        assert!((t1t2 / 1e-16 - 1.0).abs() < 1e-12);
        let law = JcSource::PowerLaw(e.jc_power_law);
        let jc2 = law.critical_intensity(2.0, &m, &e, Polarization::Longitudinal);
        assert!((jc2 - 5.457).abs() < 1e-3);
    }

    #[test]
    fn relaxation_closed_form_is_cubic() {
        let (m, e, _) = setup();
        let a = gamma_rel_closed(1.1, Polarization::Longitudinal, &m, &e);
        let b = gamma_rel_closed(2.2, Polarization::Longitudinal, &m, &e);
        assert!((b / a - 8.0).abs() < 1e-12);
    }

    #[test]
    fn relaxation_oracle_matches_closed_form() {
        let (m, e, _) = setup();
        let settings = QuadratureSettings::with_rel_tol(1e-6);
        let t = 1.1;
        let oracle =
            gamma_rel_integral_oracle(t, Polarization::Longitudinal, &m, &e, RelaxationWindow::default(), &settings)
                .unwrap();
        let closed = gamma_rel_closed(t, Polarization::Longitudinal, &m, &e);
        assert!((oracle.value / closed - 1.0).abs() < 1e-3, "{}", oracle.value / closed);
    }

    #[test]
    fn shift_vanishes_at_reference() {
        let (m, e, mode) = setup();
        assert_eq!(freq_shift_res(&mode, 1.09, 1.09, &m, &e), 0.0);
        let s = freq_shift_res(&mode, 4.0, 1.09, &m, &e);
        assert!(s > 0.0 && s < hz_to_angular(1e7));
    }

    #[test]
    fn figures_of_merit() {
        let omega = hz_to_angular(9.188e9);
        let gamma = hz_to_angular(650e3);
        assert!((quality_factor(omega, gamma) - 14135.4).abs() < 0.1);
        assert!((decay_length(4760.0, gamma) - 1.1655e-3).abs() < 1e-6);
        let r = rayleigh_floor(hz_to_angular(4.6e9), hz_to_angular(9.2e9), hz_to_angular(200e3));
        assert!((r / hz_to_angular(12.5e3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn breakdown_is_additive_and_saturates() {
        let (m, e, mode) = setup();
        let source = JcSource::PowerLaw(e.jc_power_law);
        let mut last = f64::INFINITY;
        for k in -3..=8 {
            let drive = DriveState::new(1.5, 10f64.powi(k), mode.omega).unwrap();
            let b = total_linewidth(&mode, &drive, &m, &e, &source, 1.09);
            assert_eq!(b.total, b.gamma_res + b.gamma_rel + b.gamma_bg);
            assert!(b.total < last);
            last = b.total;
        }
        let floor = gamma_rel_closed(1.5, Polarization::Longitudinal, &m, &e) + e.gamma_bg;
        assert!((last - floor) / floor < 1e-3);
        let hot = DriveState::new(300.0, 0.0, mode.omega).unwrap();
        assert!(!total_linewidth(&mode, &hot, &m, &e, &source, 1.09).within_validity);
    }
}
