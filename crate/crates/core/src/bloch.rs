//! Driven steady states of a single TLS.
//!
//! A TLS of splitting E is driven by a strain wave of amplitude |ξ⁽⁺⁾| at
//! angular frequency ω. The rotating-frame coherences S_x⁺, S_y⁺ and the
//! inversion s_z relax with T2 and T1 respectively; the steady state fixes the
//! complex susceptibility that the TLS presents to the phonon.

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use nalgebra::{Matrix5, Vector5};

use crate::constants::HBAR;
use crate::tls::{equilibrium_inversion, min_lifetime, DriveState, MaterialParams, PhononMode, TlsEnsemble};
use crate::{Error, Result};

/// Phenomenological relaxation times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationTimes {
    /// Inversion relaxation T1 [s].
    pub t1: f64,
    /// Dephasing T2 [s].
    pub t2: f64,
}

impl RelaxationTimes {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(t1 > 0.0 && t1.is_finite()) {
            return Err(Error::invalid("t1", "must be finite and strictly positive"));
        }
        if !(t2 > 0.0 && t2.is_finite()) {
            return Err(Error::invalid("t2", "must be finite and strictly positive"));
        }
        Ok(Self { t1, t2 })
    }

    /// T1 taken as the minimum golden-rule lifetime at `energy`.
    pub fn with_min_lifetime(
        energy: f64,
        t2: f64,
        material: &MaterialParams,
        ensemble: &TlsEnsemble,
        temperature: f64,
    ) -> Result<Self> {
        Self::new(min_lifetime(energy, material, ensemble, temperature), t2)
    }

    /// Splits a T1T2 product into times with T1 = τ_min at `energy`.
    pub fn from_product(
        t1t2: f64,
        energy: f64,
        material: &MaterialParams,
        ensemble: &TlsEnsemble,
        temperature: f64,
    ) -> Result<Self> {
        let t1 = min_lifetime(energy, material, ensemble, temperature);
        Self::new(t1, t1t2 / t1)
    }
}

/// Whether the Σ = E/ħ + ω (counter-rotating) Lorentzian is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CounterRotating {
    #[default]
    Retain,
    /// Keep only the resonant δ term, as the closed-form saturation law does.
    Drop,
}

/// Steady state of the driven Bloch equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSolution {
    pub s_z: f64,
    pub s_x_plus: Complex64,
    pub s_y_plus: Complex64,
    /// δ = E/ħ − ω [rad/s].
    pub detuning_delta: f64,
    /// Σ = E/ħ + ω [rad/s].
    pub detuning_sigma: f64,
    /// Largest residual of the steady-state equations, each relative to the
    /// magnitude of its largest term.
    pub max_relative_residual: f64,
}

fn detunings(energy: f64, omega: f64) -> (f64, f64) {
    let eps = energy / HBAR;
    (eps - omega, eps + omega)
}

/// Saturation parameter 4M²T1T2|ξ|²/ħ², equal to J/J_c when M = γ.
fn saturation_parameter(times: &RelaxationTimes, coupling: f64, strain: f64) -> f64 {
    let r = 2.0 * coupling * strain / HBAR;
    r * r * times.t1 * times.t2
}

/// Nonequilibrium inversion
/// s_z = w₀ / (1 + (4M²T1T2/ħ²)|ξ|²[(1 + δ²T2²)⁻¹ + (1 + Σ²T2²)⁻¹]).
pub fn saturated_inversion(
    energy: f64,
    drive: &DriveState,
    times: &RelaxationTimes,
    coupling: f64,
    strain_amplitude: f64,
    counter_rotating: CounterRotating,
) -> f64 {
    let w0 = equilibrium_inversion(energy, drive.temperature);
    let (delta, sigma) = detunings(energy, drive.omega);
    let resonant = 1.0 / (1.0 + (delta * times.t2).powi(2));
    let anti = match counter_rotating {
        CounterRotating::Retain => 1.0 / (1.0 + (sigma * times.t2).powi(2)),
        CounterRotating::Drop => 0.0,
    };
    w0 / (1.0 + saturation_parameter(times, coupling, strain_amplitude) * (resonant + anti))
}

/// Solves the four steady-state Bloch equations as a real 5×5 system in
/// (s_z, Re S_x⁺, Im S_x⁺, Re S_y⁺, Im S_y⁺):
///
/// ```text
/// 0       = −(s_z − w₀)/T1 + (4/ħ) M ξ Re S_y⁺
/// −iω S_y⁺ = −S_y⁺/T2 + (E/ħ) S_x⁺ − (2/ħ) M ξ s_z
/// −iω S_x⁺ = −S_x⁺/T2 − (E/ħ) S_y⁺
/// ```
///
/// The rows are scaled by T1 or T2 so every coefficient is dimensionless.
pub fn bloch_steady_state(
    energy: f64,
    drive: &DriveState,
    times: &RelaxationTimes,
    coupling: f64,
    strain_amplitude: f64,
) -> Result<BlochSolution> {
    let w0 = equilibrium_inversion(energy, drive.temperature);
    let (delta, sigma) = detunings(energy, drive.omega);
    let (t1, t2) = (times.t1, times.t2);
    let eps = energy / HBAR * t2;
    let w = drive.omega * t2;
    let drive_t1 = 4.0 * coupling * strain_amplitude / HBAR * t1;
    let drive_t2 = 2.0 * coupling * strain_amplitude / HBAR * t2;

    #[rustfmt::skip]
    let a = Matrix5::new(
        -1.0,     0.0,  0.0, drive_t1, 0.0,
        drive_t2, -eps, 0.0, 1.0,      w,
        0.0,      0.0,  -eps, -w,      1.0,
        0.0,      1.0,  w,   eps,      0.0,
        0.0,      -w,   1.0, 0.0,      eps,
    );
    let b = Vector5::new(-w0, 0.0, 0.0, 0.0, 0.0);
    let x = a.lu().solve(&b).ok_or(Error::SingularSystem)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }

    let mut max_relative_residual: f64 = 0.0;
    for row in 0..5 {
        let mut sum = -b[row];
        let mut scale = b[row].abs();
        for col in 0..5 {
            let term = a[(row, col)] * x[col];
            sum += term;
            scale = scale.max(term.abs());
        }
        if scale > 0.0 {
            max_relative_residual = max_relative_residual.max(sum.abs() / scale);
        }
    }

    Ok(BlochSolution {
        s_z: x[0],
        s_x_plus: Complex64::new(x[1], x[2]),
        s_y_plus: Complex64::new(x[3], x[4]),
        detuning_delta: delta,
        detuning_sigma: sigma,
        max_relative_residual,
    })
}

/// Closed-form coherences for a given inversion:
/// S_x⁺ = i(Mξ s_z T2/ħ)[1/(1 + iδT2) − 1/(1 − iΣT2)] and
/// S_y⁺ = −(Mξ s_z T2/ħ)[1/(1 + iδT2) + 1/(1 − iΣT2)].
pub fn steady_coherences(
    s_z: f64,
    energy: f64,
    omega: f64,
    t2: f64,
    coupling: f64,
    strain_amplitude: f64,
) -> (Complex64, Complex64) {
    let (delta, sigma) = detunings(energy, omega);
    let one = Complex64::new(1.0, 0.0);
    let resonant = one / Complex64::new(1.0, delta * t2);
    let anti = one / Complex64::new(1.0, -sigma * t2);
    let scale = coupling * strain_amplitude * s_z * t2 / HBAR;
    (Complex64::new(0.0, scale) * (resonant - anti), -(resonant + anti) * scale)
}

/// Complex rate −iΔω − Γ/2 contributed by TLSs of splitting `energy`, per unit
/// spectral density per unit energy [rad·s⁻¹ per J⁻¹m⁻³ per J]. Multiplying by
/// 2P and integrating over E gives the ensemble shift and dissipation.
///
/// The coupling is taken at Δ₀ = E, so M equals the deformation potential of
/// the mode's polarization.
pub fn tls_susceptibility(
    energy: f64,
    drive: &DriveState,
    times: &RelaxationTimes,
    material: &MaterialParams,
    mode: &PhononMode,
    ensemble: &TlsEnsemble,
    counter_rotating: CounterRotating,
) -> Complex64 {
    let coupling = ensemble.deformation_potential(mode.polarization);
    let strain = drive.strain_amplitude(material, mode.polarization);
    let s_z = saturated_inversion(energy, drive, times, coupling, strain, counter_rotating);
    let (delta, sigma) = detunings(energy, drive.omega);
    let q = mode.wavevector(material);
    let one = Complex64::new(1.0, 0.0);
    let resonant = one / Complex64::new(1.0, times.t2 * delta);
    let anti = match counter_rotating {
        CounterRotating::Retain => one / Complex64::new(1.0, -times.t2 * sigma),
        CounterRotating::Drop => Complex64::new(0.0, 0.0),
    };
    let prefactor = coupling * coupling * q * q * times.t2 / (2.0 * HBAR * mode.omega * material.density);
    (resonant - anti) * (prefactor * s_z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz_to_angular;
    use crate::tls::{intensity_from_strain, Polarization};

    const OMEGA: f64 = 2.0 * core::f64::consts::PI * 9.188e9;

    fn times_for(omega_t2: f64) -> RelaxationTimes {
        let t2 = omega_t2 / OMEGA;
        RelaxationTimes::new(50.0 * t2, t2).unwrap()
    }

    /// Strain that puts a resonant TLS at J/J_c = `ratio`.
    fn strain_for_ratio(ratio: f64, times: &RelaxationTimes, coupling: f64) -> f64 {
        (ratio / (times.t1 * times.t2)).sqrt() * HBAR / (2.0 * coupling)
    }

    #[test]
    fn zero_strain_is_equilibrium() {
        let drive = DriveState::new(1.1, 0.0, OMEGA).unwrap();
        let times = times_for(1e3);
        let e = HBAR * OMEGA;
        let sol = bloch_steady_state(e, &drive, &times, 1e-19, 0.0).unwrap();
        let w0 = equilibrium_inversion(e, 1.1);
        assert_eq!(sol.s_z, w0);
        assert_eq!(sol.s_x_plus.norm(), 0.0);
        assert_eq!(sol.s_y_plus.norm(), 0.0);
        assert_eq!(saturated_inversion(e, &drive, &times, 1e-19, 0.0, CounterRotating::Retain), w0);
    }

    #[test]
    fn critical_drive_halves_inversion() {
        let drive = DriveState::new(1.1, 0.0, OMEGA).unwrap();
        let e = HBAR * OMEGA;
        let w0 = equilibrium_inversion(e, 1.1);
        let coupling = 0.5 * crate::constants::ELECTRON_VOLT;
        for (ratio, expected) in [(1.0, 0.5), (3.0, 0.25), (100.0, 1.0 / 101.0)] {
            let times = times_for(1e4);
            let xi = strain_for_ratio(ratio, &times, coupling);
            let dropped = saturated_inversion(e, &drive, &times, coupling, xi, CounterRotating::Drop);
            assert!((dropped / w0 - expected).abs() < 1e-14);
            let kept = saturated_inversion(e, &drive, &times, coupling, xi, CounterRotating::Retain);
            assert!((kept / w0 / expected - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn linear_solve_matches_closed_forms() {
        let e = HBAR * OMEGA * 1.0003;
        let drive = DriveState::new(0.8, 0.0, OMEGA).unwrap();
        let times = times_for(3e3);
        let coupling = 0.5 * crate::constants::ELECTRON_VOLT;
        let xi = strain_for_ratio(2.0, &times, coupling);
        let sol = bloch_steady_state(e, &drive, &times, coupling, xi).unwrap();
        let s_z = saturated_inversion(e, &drive, &times, coupling, xi, CounterRotating::Retain);
        assert!((sol.s_z / s_z - 1.0).abs() < 1e-12);
        let (sx, sy) = steady_coherences(s_z, e, OMEGA, times.t2, coupling, xi);
        assert!((sol.s_x_plus - sx).norm() < 1e-10 * sx.norm());
        assert!((sol.s_y_plus - sy).norm() < 1e-10 * sy.norm());
        assert!(sol.max_relative_residual < 1e-10);
    }

    #[test]
    fn susceptibility_is_dissipative_and_real_on_resonance() {
        let material = MaterialParams::ge_doped_silica();
        let ensemble = TlsEnsemble::ge_doped_silica();
        let mode = PhononMode::longitudinal(OMEGA);
        let times = times_for(1e4);
        let drive = DriveState::new(1.1, 1e-14, OMEGA).unwrap();
        let e0 = HBAR * OMEGA;
        let chi0 = tls_susceptibility(e0, &drive, &times, &material, &mode, &ensemble, CounterRotating::Drop);
        assert!(chi0.re < 0.0);
        assert!(chi0.im.abs() < 1e-12 * chi0.re.abs());
        // Half width at δT2 = ±1.
        for sign in [-1.0, 1.0] {
            let e = e0 + sign * HBAR / times.t2;
            let chi = tls_susceptibility(e, &drive, &times, &material, &mode, &ensemble, CounterRotating::Drop);
            // The thermal factor drifts slightly across the line; divide it out.
            let thermal = equilibrium_inversion(e, 1.1) / equilibrium_inversion(e0, 1.1);
            assert!((chi.re / chi0.re / thermal - 0.5).abs() < 1e-6);
        }
        // Antisymmetric dispersion about resonance.
        let up = tls_susceptibility(
            e0 + 3.0 * HBAR / times.t2,
            &drive,
            &times,
            &material,
            &mode,
            &ensemble,
            CounterRotating::Drop,
        );
        let down = tls_susceptibility(
            e0 - 3.0 * HBAR / times.t2,
            &drive,
            &times,
            &material,
            &mode,
            &ensemble,
            CounterRotating::Drop,
        );
        assert!((up.im + down.im).abs() < 1e-3 * up.im.abs());
    }

    #[test]
    fn stronger_drive_always_saturates_more() {
        let drive = DriveState::new(2.0, 0.0, OMEGA).unwrap();
        let times = times_for(1e3);
        let e = HBAR * hz_to_angular(9.19e9);
        let mut last = f64::INFINITY;
        for k in 0..20 {
            let xi = 1e-10 * 2f64.powi(k);
            let s = saturated_inversion(e, &drive, &times, 1e-19, xi, CounterRotating::Retain).abs();
            assert!(s < last);
            last = s;
        }
    }

    #[test]
    fn saturation_parameter_is_intensity_ratio() {
        let m = MaterialParams::ge_doped_silica();
        let coupling = 0.5 * crate::constants::ELECTRON_VOLT;
        let times = times_for(1e3);
        let xi = 3e-9;
        let j = intensity_from_strain(xi, &m, Polarization::Longitudinal);
        let v = m.v_longitudinal;
        let jc = HBAR * HBAR * m.density * v * v * v / (2.0 * coupling * coupling * times.t1 * times.t2);
        assert!((saturation_parameter(&times, coupling, xi) / (j / jc) - 1.0).abs() < 1e-13);
    }
}
