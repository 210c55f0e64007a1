//! Material and tunneling-state ensemble parameters, single-TLS energetics,
//! equilibrium populations and golden-rule lifetimes.

use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::constants::{hz_to_angular, ELECTRON_VOLT, HBAR, K_B};
use crate::numerics::{bose_occupation, coth, tanh};
use crate::{Error, Result};

/// Acoustic polarization of a phonon branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Longitudinal,
    Transverse,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::Longitudinal, Polarization::Transverse];
}

/// The host medium and fiber geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Mass density ρ [kg/m³].
    pub density: f64,
    /// Longitudinal sound speed [m/s].
    pub v_longitudinal: f64,
    /// Transverse (shear) sound speed [m/s].
    pub v_transverse: f64,
    /// Effective optical index.
    pub n_eff: f64,
    /// Peak Brillouin gain g_B [1/(W·m)] at linewidth `gain_ref_linewidth`.
    pub gain_ref: f64,
    /// FWHM [rad/s] at which `gain_ref` applies.
    pub gain_ref_linewidth: f64,
    /// Acoustic mode area [m²].
    pub mode_area: f64,
    /// Length of the fiber under test [m].
    pub fiber_length: f64,
}

impl MaterialParams {
    /// 44 wt% Ge-doped silica core of UHNA-3 fiber.
    ///
    /// The shear speed is the core estimate interpolated between silica and
    /// germania; the gain reference linewidth (30 MHz) is a room-temperature
    /// assumption used only to rescale g_B at cryogenic linewidths.
    pub fn ge_doped_silica() -> Self {
        Self {
            density: 2666.0,
            v_longitudinal: 4760.0,
            v_transverse: 3092.0,
            n_eff: 1.496,
            gain_ref: 0.6,
            gain_ref_linewidth: hz_to_angular(30e6),
            mode_area: 1.6e-12,
            fiber_length: 0.022,
        }
    }

    /// Bulk vitreous silica. Optical and geometric fields reuse the UHNA-3 values.
    pub fn vitreous_silica() -> Self {
        Self { density: 2202.0, v_longitudinal: 5944.0, v_transverse: 3764.0, n_eff: 1.444, ..Self::ge_doped_silica() }
    }

    pub fn sound_speed(&self, polarization: Polarization) -> f64 {
        match polarization {
            Polarization::Longitudinal => self.v_longitudinal,
            Polarization::Transverse => self.v_transverse,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("density", self.density),
            ("v_longitudinal", self.v_longitudinal),
            ("v_transverse", self.v_transverse),
            ("n_eff", self.n_eff),
            ("gain_ref", self.gain_ref),
            ("gain_ref_linewidth", self.gain_ref_linewidth),
            ("mode_area", self.mode_area),
            ("fiber_length", self.fiber_length),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(name, "must be finite and strictly positive"));
            }
        }
        if self.v_transverse >= self.v_longitudinal {
            return Err(Error::invalid("v_transverse", "must be below the longitudinal speed"));
        }
        Ok(())
    }
}

/// Critical-intensity power law J_c(T) = a·Tᵇ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    /// Prefactor a [W·m⁻²·K⁻ᵇ].
    pub a: f64,
    /// Exponent b.
    pub b: f64,
}

impl PowerLaw {
    pub fn eval(&self, temperature: f64) -> f64 {
        self.a * temperature.powf(self.b)
    }
}

/// The defect half of the model: TLS spectral density and deformation potentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsEnsemble {
    /// TLS spectral density P [J⁻¹·m⁻³].
    pub density_of_states: f64,
    /// Longitudinal deformation potential γ_L [J].
    pub gamma_l: f64,
    /// Transverse deformation potential γ_T [J]; `None` means γ_T² = γ_L²/2.
    pub gamma_t: Option<f64>,
    pub jc_power_law: PowerLaw,
    /// Constant background dissipation Γ^BG [rad/s].
    pub gamma_bg: f64,
}

impl TlsEnsemble {
    /// Fitted parameters for 44 wt% Ge-doped silica at 9.188 GHz.
    /// P is chosen so that Pγ_L² = 1.6×10⁷ J/m³ with γ_L = 0.5 eV.
    pub fn ge_doped_silica() -> Self {
        let gamma_l = 0.5 * ELECTRON_VOLT;
        Self {
            density_of_states: 1.6e7 / (gamma_l * gamma_l),
            gamma_l,
            gamma_t: None,
            jc_power_law: PowerLaw { a: 0.9, b: 2.6 },
            gamma_bg: hz_to_angular(650e3),
        }
    }

    /// Literature values for vitreous silica. The power law and background
    /// are carried over from the Ge-doped fit; no silica values exist for them.
    pub fn vitreous_silica() -> Self {
        Self { density_of_states: 6.85e44, gamma_l: 0.86 * ELECTRON_VOLT, ..Self::ge_doped_silica() }
    }

    pub fn deformation_potential(&self, polarization: Polarization) -> f64 {
        match polarization {
            Polarization::Longitudinal => self.gamma_l,
            Polarization::Transverse => self.gamma_t.unwrap_or(self.gamma_l * core::f64::consts::FRAC_1_SQRT_2),
        }
    }

    /// Pγ_η² [J/m³].
    pub fn p_gamma2(&self, polarization: Polarization) -> f64 {
        let g = self.deformation_potential(polarization);
        self.density_of_states * g * g
    }

    /// Σ_η γ_η²/v_η⁵, the phonon-bath coupling shared by lifetimes and relaxation absorption.
    pub fn bath_coupling(&self, material: &MaterialParams) -> f64 {
        Polarization::ALL
            .iter()
            .map(|&pol| {
                let g = self.deformation_potential(pol);
                let v = material.sound_speed(pol);
                g * g / (v * v * v * v * v)
            })
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("density_of_states", self.density_of_states),
            ("gamma_l", self.gamma_l),
            ("jc_power_law.a", self.jc_power_law.a),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(name, "must be finite and strictly positive"));
            }
        }
        if let Some(g) = self.gamma_t {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::invalid("gamma_t", "must be finite and strictly positive"));
            }
        }
        if !(self.gamma_bg >= 0.0 && self.gamma_bg.is_finite()) {
            return Err(Error::invalid("gamma_bg", "must be finite and non-negative"));
        }
        if !self.jc_power_law.b.is_finite() {
            return Err(Error::invalid("jc_power_law.b", "must be finite"));
        }
        Ok(())
    }
}

/// A single tunneling state: asymmetry Δ and tunneling energy Δ₀ [J].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsState {
    pub delta: f64,
    pub delta0: f64,
}

impl TlsState {
    pub fn new(delta: f64, delta0: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::invalid("delta", "must be finite"));
        }
        if !(delta0 > 0.0 && delta0.is_finite()) {
            return Err(Error::invalid("delta0", "must be finite and strictly positive"));
        }
        Ok(Self { delta, delta0 })
    }

    /// Symmetric state (Δ = 0) whose splitting equals `energy`.
    pub fn symmetric(energy: f64) -> Self {
        Self { delta: 0.0, delta0: energy }
    }

    pub fn energy(&self) -> f64 {
        tls_energy(self)
    }
}

/// A single acoustic mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononMode {
    /// Angular frequency Ω [rad/s].
    pub omega: f64,
    pub polarization: Polarization,
}

impl PhononMode {
    pub fn new(omega: f64, polarization: Polarization) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid("omega", "must be finite and strictly positive"));
        }
        Ok(Self { omega, polarization })
    }

    pub fn longitudinal(omega: f64) -> Self {
        Self { omega, polarization: Polarization::Longitudinal }
    }

    /// Wavevector magnitude q = Ω/v [1/m].
    pub fn wavevector(&self, material: &MaterialParams) -> f64 {
        self.omega / material.sound_speed(self.polarization)
    }

    /// Phonon energy ħΩ [J].
    pub fn energy(&self) -> f64 {
        HBAR * self.omega
    }
}

/// Bath temperature, acoustic intensity and drive frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveState {
    /// Temperature [K].
    pub temperature: f64,
    /// Acoustic intensity J [W/m²].
    pub intensity: f64,
    /// Drive angular frequency ω [rad/s].
    pub omega: f64,
}

impl DriveState {
    pub fn new(temperature: f64, intensity: f64, omega: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::invalid("temperature", "must be finite and strictly positive"));
        }
        if !(intensity >= 0.0 && intensity.is_finite()) {
            return Err(Error::invalid("intensity", "must be finite and non-negative"));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid("omega", "must be finite and strictly positive"));
        }
        Ok(Self { temperature, intensity, omega })
    }

    /// Strain amplitude |ξ⁽⁺⁾| from J = 2ρv³|ξ⁽⁺⁾|².
    pub fn strain_amplitude(&self, material: &MaterialParams, polarization: Polarization) -> f64 {
        let v = material.sound_speed(polarization);
        (self.intensity / (2.0 * material.density * v * v * v)).sqrt()
    }
}

/// Acoustic intensity J = 2ρv³|ξ⁽⁺⁾|² carried by a strain amplitude.
pub fn intensity_from_strain(strain: f64, material: &MaterialParams, polarization: Polarization) -> f64 {
    let v = material.sound_speed(polarization);
    2.0 * material.density * v * v * v * strain * strain
}

/// Level splitting E = √(Δ² + Δ₀²).
pub fn tls_energy(state: &TlsState) -> f64 {
    state.delta.hypot(state.delta0)
}

/// Amplitudes on the localized left/right well states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellAmplitudes {
    pub left: f64,
    pub right: f64,
}

/// Energy eigenstates of the two-level Hamiltonian ½[[Δ, Δ₀], [Δ₀, −Δ]] written
/// in the (right, left) well basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsEigenbasis {
    /// Upper state, energy +E/2.
    pub excited: WellAmplitudes,
    /// Lower state, energy −E/2.
    pub ground: WellAmplitudes,
}

/// Eigenvectors in half-angle form, which avoids the cancellation in
/// E ± Δ when |Δ| ≫ Δ₀. With tan φ = Δ₀/Δ:
/// |e⟩ = sin(φ/2)|L⟩ + cos(φ/2)|R⟩ and |g⟩ = cos(φ/2)|L⟩ − sin(φ/2)|R⟩.
pub fn tls_eigenvectors(state: &TlsState) -> Result<TlsEigenbasis> {
    if !(state.delta0 > 0.0) {
        return Err(Error::invalid("delta0", "eigenbasis is undefined for zero tunneling"));
    }
    let phi = state.delta0.atan2(state.delta);
    let (s, c) = (0.5 * phi).sin_cos();
    Ok(TlsEigenbasis { excited: WellAmplitudes { left: s, right: c }, ground: WellAmplitudes { left: c, right: -s } })
}

/// Thermal-equilibrium inversion w₀ = P_e − P_g = −tanh(E/2k_BT).
pub fn equilibrium_inversion(energy: f64, temperature: f64) -> f64 {
    -tanh(energy / (2.0 * K_B * temperature))
}

fn rate_prefactor(energy: f64, delta0: f64, material: &MaterialParams, ensemble: &TlsEnsemble) -> f64 {
    ensemble.bath_coupling(material) * energy * delta0 * delta0
        / (2.0 * PI * material.density * (HBAR * HBAR) * (HBAR * HBAR))
}

/// Golden-rule upward and downward rates (C_{g→e}, C_{e→g}) [1/s].
pub fn transition_rates(
    state: &TlsState,
    material: &MaterialParams,
    ensemble: &TlsEnsemble,
    temperature: f64,
) -> (f64, f64) {
    let energy = tls_energy(state);
    let prefactor = rate_prefactor(energy, state.delta0, material, ensemble);
    let n = bose_occupation(energy / (K_B * temperature));
    (prefactor * n, prefactor * (n + 1.0))
}

/// Excited-state decay rate 1/τ = Σ_η (γ_η²/v_η⁵)·E Δ₀²/(2πρħ⁴)·coth(E/2k_BT) [1/s].
pub fn golden_rule_rate(state: &TlsState, material: &MaterialParams, ensemble: &TlsEnsemble, temperature: f64) -> f64 {
    let energy = tls_energy(state);
    rate_prefactor(energy, state.delta0, material, ensemble) * coth(energy / (2.0 * K_B * temperature))
}

/// Shortest lifetime at splitting `energy`, reached when Δ₀ = E.
pub fn min_lifetime(energy: f64, material: &MaterialParams, ensemble: &TlsEnsemble, temperature: f64) -> f64 {
    1.0 / golden_rule_rate(&TlsState::symmetric(energy), material, ensemble, temperature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TWO_PI;

    fn ge() -> (MaterialParams, TlsEnsemble) {
        (MaterialParams::ge_doped_silica(), TlsEnsemble::ge_doped_silica())
    }

    #[test]
    fn energy_examples() {
        assert_eq!(tls_energy(&TlsState::symmetric(7.5)), 7.5);
        assert_eq!(tls_energy(&TlsState { delta: 3.0, delta0: 4.0 }), 5.0);
        let e = tls_energy(&TlsState { delta: 1e-24, delta0: 1e-24 });
        assert!((e / 1.414_213_562_373_095e-24 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvectors_match_explicit_forms() {
        let state = TlsState { delta: 3.0, delta0: 4.0 };
        let basis = tls_eigenvectors(&state).unwrap();
        let (d, d0, e) = (3.0f64, 4.0f64, 5.0f64);
        let ne = d0 / (2.0 * e * (e + d)).sqrt();
        let ng = d0 / (2.0 * e * (e - d)).sqrt();
        assert!((basis.excited.left - ne).abs() < 1e-15);
        assert!((basis.excited.right - ne * (d + e) / d0).abs() < 1e-15);
        assert!((basis.ground.left - ng).abs() < 1e-15);
        assert!((basis.ground.right - ng * (d - e) / d0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_well_gives_even_superpositions() {
        let basis = tls_eigenvectors(&TlsState::symmetric(1.0)).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        for a in [basis.excited.left, basis.excited.right, basis.ground.left, basis.ground.right] {
            assert!((a.abs() - h).abs() < 1e-15);
        }
    }

    #[test]
    fn strongly_asymmetric_ground_state_localizes() {
        // Δ > 0 raises the right well, so the ground state sits on the left.
        let basis = tls_eigenvectors(&TlsState { delta: 1e6, delta0: 1.0 }).unwrap();
        assert!(basis.ground.left.abs() > 1.0 - 1e-12);
        let basis = tls_eigenvectors(&TlsState { delta: -1e6, delta0: 1.0 }).unwrap();
        assert!(basis.ground.right.abs() > 1.0 - 1e-12);
    }

    #[test]
    fn zero_tunneling_rejected() {
        assert!(tls_eigenvectors(&TlsState { delta: 1.0, delta0: 0.0 }).is_err());
        assert!(TlsState::new(1.0, 0.0).is_err());
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(equilibrium_inversion(1e-23, 1e-6), -1.0);
        let t = 1.3;
        let e = 2.0 * K_B * t;
        assert!((equilibrium_inversion(e, t) + 0.761_594_155_955_764_9).abs() < 1e-15);
        let e = HBAR * TWO_PI * 9.188e9;
        assert!((equilibrium_inversion(e, 1.1) + 0.1978).abs() < 5e-5);
        assert!(equilibrium_inversion(e, 1e9).abs() < 1e-9);
    }

    #[test]
    fn rate_vanishes_without_tunneling() {
        let (m, ens) = ge();
        let e = HBAR * TWO_PI * 9.188e9;
        let state = TlsState { delta: e, delta0: 1e-12 * e };
        let full = golden_rule_rate(&TlsState::symmetric(e), &m, &ens, 1.1);
        assert!(golden_rule_rate(&state, &m, &ens, 1.1) < 1e-20 * full);
    }

    #[test]
    fn min_lifetime_inverts_rate() {
        let (m, ens) = ge();
        for &f in &[0.68e9, 9.188e9] {
            let e = HBAR * TWO_PI * f;
            let tau = min_lifetime(e, &m, &ens, 1.1);
            let rate = golden_rule_rate(&TlsState::symmetric(e), &m, &ens, 1.1);
            assert!((tau * rate - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_temperature_ratio_is_coth() {
        let (m, ens) = ge();
        let e = HBAR * TWO_PI * 9.188e9;
        let t = 1.1;
        let ratio = min_lifetime(e, &m, &ens, 1e-4) / min_lifetime(e, &m, &ens, t);
        assert!((ratio - coth(e / (2.0 * K_B * t))).abs() < 1e-12 * ratio);
    }

    #[test]
    fn default_transverse_potential() {
        let ens = TlsEnsemble::ge_doped_silica();
        let gt = ens.deformation_potential(Polarization::Transverse);
        assert!((gt * gt / (ens.gamma_l * ens.gamma_l) - 0.5).abs() < 1e-15);
        let explicit = TlsEnsemble { gamma_t: Some(0.3 * ELECTRON_VOLT), ..ens };
        assert_eq!(explicit.deformation_potential(Polarization::Transverse), 0.3 * ELECTRON_VOLT);
    }

    #[test]
    fn presets_validate() {
        for m in [MaterialParams::ge_doped_silica(), MaterialParams::vitreous_silica()] {
            m.validate().unwrap();
        }
        for e in [TlsEnsemble::ge_doped_silica(), TlsEnsemble::vitreous_silica()] {
            e.validate().unwrap();
        }
        let p = TlsEnsemble::ge_doped_silica().p_gamma2(Polarization::Longitudinal);
        assert!((p / 1.6e7 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_material_rejected() {
        let m = MaterialParams { v_transverse: 5000.0, ..MaterialParams::ge_doped_silica() };
        assert!(m.validate().is_err());
        let m = MaterialParams { density: -1.0, ..MaterialParams::ge_doped_silica() };
        assert!(m.validate().is_err());
    }

    #[test]
    fn strain_and_intensity_round_trip() {
        let m = MaterialParams::ge_doped_silica();
        let drive = DriveState::new(1.1, 1.2, 5.77e10).unwrap();
        let xi = drive.strain_amplitude(&m, Polarization::Longitudinal);
        let j = intensity_from_strain(xi, &m, Polarization::Longitudinal);
        assert!((j / 1.2 - 1.0).abs() < 1e-14);
        assert!(DriveState::new(0.0, 1.0, 1.0).is_err());
        assert!(DriveState::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn mode_wavevector_consistent() {
        let m = MaterialParams::ge_doped_silica();
        let mode = PhononMode::new(5.77e10, Polarization::Longitudinal).unwrap();
        assert_eq!(mode.wavevector(&m) * m.v_longitudinal, mode.omega);
        assert!(PhononMode::new(0.0, Polarization::Transverse).is_err());
    }
}
