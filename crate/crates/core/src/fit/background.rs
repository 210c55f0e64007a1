//! Splitting the intensity-independent linewidth Γ0(T) = βT³ + Γ^BG into the
//! relaxation term and the floor, and turning fitted quantities back into TLS
//! parameters and relaxation times.

use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::SaturationFit;
use crate::constants::{HBAR, K_B};
use crate::dissipation::t1t2_from_critical_intensity;
use crate::tls::{min_lifetime, MaterialParams, PhononMode, TlsEnsemble};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundFit {
    /// Cubic relaxation coefficient β [rad·s⁻¹·K⁻³].
    pub beta: f64,
    /// Constant floor Γ^BG [rad/s].
    pub gamma_bg: f64,
    /// Covariance of (β, Γ^BG).
    pub covariance: [[f64; 2]; 2],
}

impl BackgroundFit {
    pub fn beta_sigma(&self) -> f64 {
        self.covariance[0][0].max(0.0).sqrt()
    }
    pub fn gamma_bg_sigma(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }
}

/// Weighted linear least squares of Γ0 on T³ from
/// (temperature, Γ0, σ(Γ0)) triples. Without σ the fit is unweighted and the
/// covariance is scaled by the residual variance.
pub fn fit_background(points: &[(f64, f64, Option<f64>)]) -> Result<BackgroundFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData { required: 3, actual: points.len() });
    }
    let absolute = points.iter().all(|p| p.2.is_some());
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, g, s) in points {
        if !(t > 0.0 && g.is_finite()) {
            return Err(Error::invalid("points", "need positive temperatures and finite rates"));
        }
        let w = match (absolute, s) {
            (true, Some(s)) if s > 0.0 => 1.0 / (s * s),
            (true, _) => return Err(Error::invalid("sigma", "must be strictly positive")),
            _ => 1.0,
        };
        let x = t * t * t;
        sw += w;
        sx += w * x;
        sy += w * g;
        sxx += w * x * x;
        sxy += w * x * g;
    }
    let det = sw * sxx - sx * sx;
    if !(det > 0.0) {
        return Err(Error::DegenerateData("temperatures do not separate the cubic term"));
    }
    let beta = (sw * sxy - sx * sy) / det;
    let gamma_bg = (sxx * sy - sx * sxy) / det;
    let scale = if absolute {
        1.0
    } else {
        let ssr: f64 = points
            .iter()
            .map(|&(t, g, _)| {
                let r = g - beta * t * t * t - gamma_bg;
                r * r
            })
            .sum();
        ssr / (points.len() - 2) as f64
    };
    Ok(BackgroundFit {
        beta,
        gamma_bg,
        covariance: [[scale * sw / det, -scale * sx / det], [-scale * sx / det, scale * sxx / det]],
    })
}

/// Spectral density and deformation potentials recovered from the fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsParameters {
    /// γ_L [J].
    pub gamma_l: f64,
    pub gamma_l_sigma: f64,
    /// γ_T [J].
    pub gamma_t: f64,
    /// P [J⁻¹·m⁻³].
    pub density_of_states: f64,
    pub density_of_states_sigma: f64,
}

/// Inverts β = (π³/24)·(Pγ_L²/ρ²v_L²ħ⁴)·γ_L²(1/v_L⁵ + r/v_T⁵)·k_B³ for γ_L,
/// where r = γ_T²/γ_L², then P = Pγ_L²/γ_L².
///
/// Uncertainties are propagated to first order, treating β and Pγ_L² as
/// independent.
pub fn tls_parameters_from_background(
    beta: f64,
    beta_sigma: f64,
    p_gamma2: f64,
    p_gamma2_sigma: f64,
    material: &MaterialParams,
    transverse_ratio: f64,
) -> Result<TlsParameters> {
    if !(beta > 0.0 && p_gamma2 > 0.0 && transverse_ratio >= 0.0) {
        return Err(Error::DegenerateData("relaxation coefficient must be positive"));
    }
    let (vl, vt) = (material.v_longitudinal, material.v_transverse);
    let fifth = |v: f64| v * v * v * v * v;
    let bath = 1.0 / fifth(vl) + transverse_ratio / fifth(vt);
    let hbar2 = HBAR * HBAR;
    let c = PI * PI * PI / 24.0 * (K_B * K_B * K_B) / (material.density * material.density * vl * vl * hbar2 * hbar2)
        * bath;
    let gamma_l2 = beta / (c * p_gamma2);
    let gamma_l = gamma_l2.sqrt();
    let rb = beta_sigma / beta;
    let rp = p_gamma2_sigma / p_gamma2;
    let density = p_gamma2 / gamma_l2;
    Ok(TlsParameters {
        gamma_l,
        gamma_l_sigma: 0.5 * gamma_l * (rb * rb + rp * rp).sqrt(),
        gamma_t: gamma_l * transverse_ratio.sqrt(),
        density_of_states: density,
        density_of_states_sigma: density * (rb * rb + 4.0 * rp * rp).sqrt(),
    })
}

/// Relaxation times implied by a saturation fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractedTimes {
    /// T1T2 = ħ²ρv³/(2γ²J_c) [s²].
    pub t1t2: f64,
    pub t1t2_sigma: f64,
    /// T1 taken as τ_min at E = ħΩ [s].
    pub t1: f64,
    /// T2 = T1T2/τ_min [s].
    pub t2: f64,
}

pub fn extract_times(
    sat: &SaturationFit,
    material: &MaterialParams,
    ensemble: &TlsEnsemble,
    mode: &PhononMode,
    temperature: f64,
) -> ExtractedTimes {
    let t1t2 = t1t2_from_critical_intensity(sat.j_c, material, ensemble, mode.polarization);
    let t1 = min_lifetime(mode.energy(), material, ensemble, temperature);
    ExtractedTimes { t1t2, t1t2_sigma: t1t2 * sat.j_c_sigma() / sat.j_c, t1, t2: t1t2 / t1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::gamma_rel_closed;
    use crate::tls::Polarization;

    #[test]
    fn background_round_trip_recovers_deformation_potential() {
        let m = MaterialParams::ge_doped_silica();
        let e = TlsEnsemble::ge_doped_silica();
        let pts: alloc::vec::Vec<(f64, f64, Option<f64>)> = [1.15, 1.95, 2.85, 3.75, 4.15]
            .iter()
            .map(|&t| (t, gamma_rel_closed(t, Polarization::Longitudinal, &m, &e) + e.gamma_bg, None))
            .collect();
        let fit = fit_background(&pts).unwrap();
        assert!((fit.gamma_bg / e.gamma_bg - 1.0).abs() < 1e-9);
        let params = tls_parameters_from_background(fit.beta, 0.0, 1.6e7, 0.0, &m, 0.5).unwrap();
        assert!((params.gamma_l / e.gamma_l - 1.0).abs() < 1e-9);
        assert!((params.density_of_states / e.density_of_states - 1.0).abs() < 1e-9);
    }

    #[test]
    fn times_scale_inversely_with_coupling_squared() {
        let m = MaterialParams::ge_doped_silica();
        let e = TlsEnsemble::ge_doped_silica();
        let mode = PhononMode::longitudinal(2.0 * PI * 9.188e9);
        let sat = SaturationFit {
            temperature: 1.1,
            p_gamma2: 1.6e7,
            j_c: 1.2,
            gamma0: 4e6,
            covariance: [[0.0; 3]; 3],
            flat_direction: false,
        };
        let a = extract_times(&sat, &m, &e, &mode, 1.1);
        let doubled = TlsEnsemble { gamma_l: 2.0 * e.gamma_l, ..e };
        let b = extract_times(&sat, &m, &doubled, &mode, 1.1);
        assert!((b.t1t2 / a.t1t2 - 0.25).abs() < 1e-14);
        assert!((a.t2 * a.t1 / a.t1t2 - 1.0).abs() < 1e-14);
    }
}
