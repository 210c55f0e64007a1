//! Backward stimulated Brillouin scattering: phase matching, the weak-signal
//! Stokes gain spectrum and the acoustic intensity it drives.

use crate::constants::C_LIGHT;
use crate::tls::MaterialParams;
use crate::{Error, Result};

/// Products g_B·P_p·L above this are outside the weak-signal regime.
pub const WEAK_SIGNAL_WARNING: f64 = 0.1;

/// Pump and probe fields. The Stokes (probe) frequency is ω_S = ω_p − ω_IM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalDrive {
    /// Pump power P_p [W].
    pub pump_power: f64,
    /// Stokes probe power P_S [W].
    pub stokes_power: f64,
    /// Pump angular frequency ω_p [rad/s].
    pub pump_omega: f64,
    /// Pump–probe detuning ω_IM [rad/s].
    pub detuning: f64,
    /// Interaction length L [m].
    pub fiber_length: f64,
}

impl OpticalDrive {
    pub fn new(pump_power: f64, stokes_power: f64, pump_omega: f64, detuning: f64, fiber_length: f64) -> Result<Self> {
        if !(pump_power >= 0.0 && pump_power.is_finite()) {
            return Err(Error::invalid("pump_power", "must be finite and non-negative"));
        }
        if !(stokes_power >= 0.0 && stokes_power.is_finite()) {
            return Err(Error::invalid("stokes_power", "must be finite and non-negative"));
        }
        if !(detuning > 0.0 && detuning < pump_omega && pump_omega.is_finite()) {
            return Err(Error::invalid("detuning", "must lie strictly between 0 and the pump frequency"));
        }
        if !(fiber_length > 0.0 && fiber_length.is_finite()) {
            return Err(Error::invalid("fiber_length", "must be finite and strictly positive"));
        }
        Ok(Self { pump_power, stokes_power, pump_omega, detuning, fiber_length })
    }

    pub fn stokes_omega(&self) -> f64 {
        self.pump_omega - self.detuning
    }

    /// The same drive at a different detuning.
    pub fn at_detuning(&self, detuning: f64) -> Self {
        Self { detuning, ..*self }
    }
}

/// Brillouin frequency Ω = 2nvω_p/c of the longitudinal mode, valid for Ω ≪ ω_p.
pub fn brillouin_frequency(material: &MaterialParams, pump_omega: f64) -> f64 {
    2.0 * material.n_eff * material.v_longitudinal * pump_omega / C_LIGHT
}

/// Energy and momentum mismatch (ω_p − ω_S − Ω, k_p + k_S − q) of a
/// backward-scattering triple.
pub fn phase_match_residual(omega_p: f64, omega_s: f64, omega: f64, k_p: f64, k_s: f64, q: f64) -> (f64, f64) {
    (omega_p - omega_s - omega, k_p + k_s - q)
}

/// An exactly phase-matched triple under linear dispersion k = nω/c, q = Ω/v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatchedTriple {
    pub omega_p: f64,
    pub omega_s: f64,
    pub omega: f64,
    pub k_p: f64,
    pub k_s: f64,
    pub q: f64,
}

/// Solves Ω/v = n(2ω_p − Ω)/c exactly; differs from [`brillouin_frequency`]
/// by the factor 1/(1 + nv/c).
pub fn phase_matched_triple(material: &MaterialParams, pump_omega: f64) -> PhaseMatchedTriple {
    let n = material.n_eff;
    let v = material.v_longitudinal;
    let omega = 2.0 * n * v * pump_omega / (C_LIGHT + n * v);
    let omega_s = pump_omega - omega;
    PhaseMatchedTriple {
        omega_p: pump_omega,
        omega_s,
        omega,
        k_p: n * pump_omega / C_LIGHT,
        k_s: n * omega_s / C_LIGHT,
        q: omega / v,
    }
}

/// Unit-peak Lorentzian (Γ/2)²/((Ω − ω_IM)² + (Γ/2)²).
pub fn gain_profile(detuning: f64, omega: f64, gamma: f64) -> f64 {
    let hw = 0.5 * gamma;
    let d = omega - detuning;
    hw * hw / (d * d + hw * hw)
}

/// Power transferred to the Stokes beam,
/// ΔP_S = g_B·P_p·P_S·L·(Γ/2)²/((Ω − ω_IM)² + (Γ/2)²) [W].
pub fn stokes_gain(drive: &OpticalDrive, omega: f64, gamma: f64, g_b: f64) -> f64 {
    g_b * drive.pump_power * drive.stokes_power * drive.fiber_length * gain_profile(drive.detuning, omega, gamma)
}

/// Weak-signal figure g_B·P_p·L; keep well below [`WEAK_SIGNAL_WARNING`].
pub fn weak_signal_margin(drive: &OpticalDrive, g_b: f64) -> f64 {
    g_b * drive.pump_power * drive.fiber_length
}

/// Peak gain rescaled to a new linewidth at fixed electrostrictive coupling:
/// g_B = g_ref·Γ_ref/Γ.
pub fn scaled_gain(gain_ref: f64, gamma_ref: f64, gamma: f64) -> f64 {
    gain_ref * gamma_ref / gamma
}

/// Steady-state acoustic intensity
/// J = (v/Γ)(ω_IM/ω_S)(1/A)·g_B·L(ω_IM)·P_p·P_S [W/m²],
/// with L the unit-peak gain profile.
pub fn phonon_intensity(drive: &OpticalDrive, omega: f64, gamma: f64, material: &MaterialParams, g_b: f64) -> f64 {
    material.v_longitudinal / gamma * (drive.detuning / drive.stokes_omega()) / material.mode_area
        * g_b
        * gain_profile(drive.detuning, omega, gamma)
        * drive.pump_power
        * drive.stokes_power
}
