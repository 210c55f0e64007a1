//! Measured versus predicted temperature drift of the Brillouin frequency.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dissipation::freq_shift_per_p_gamma2;
use crate::tls::{MaterialParams, PhononMode};
use crate::{Error, Result};

/// A fitted line centre at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftObservation {
    pub temperature: f64,
    /// Ω̂ [rad/s].
    pub omega_hat: f64,
    /// Standard error of Ω̂ [rad/s].
    pub omega_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRow {
    pub temperature: f64,
    /// Ω̂(T) − Ω̂(T_ref) [rad/s].
    pub measured: f64,
    pub measured_sigma: f64,
    /// Δω^res(T) − Δω^res(T_ref) [rad/s].
    pub predicted: f64,
    pub predicted_sigma: f64,
    /// measured − predicted [rad/s].
    pub discrepancy: f64,
    /// Combined standard uncertainty of the discrepancy [rad/s].
    pub uncertainty: f64,
}

/// Coverage factor applied to the combined standard uncertainty when judging
/// whether a row agrees with the prediction (≈ 99.7% two-sided for Gaussian errors).
pub const SHIFT_COVERAGE_FACTOR: f64 = 3.0;

impl ShiftRow {
    /// |discrepancy| ≤ k·uncertainty with k = [`SHIFT_COVERAGE_FACTOR`].
    pub fn consistent(&self) -> bool {
        self.discrepancy.abs() <= SHIFT_COVERAGE_FACTOR * self.uncertainty
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftComparison {
    /// The observed temperature closest to the requested reference.
    pub reference_temperature: f64,
    pub rows: Vec<ShiftRow>,
}

/// Δω^res(T) − Δω^res(T0) for each temperature, at a given Pγ².
pub fn predict_freq_shift(
    temperatures: &[f64],
    reference_temperature: f64,
    p_gamma2: f64,
    mode: &PhononMode,
    material: &MaterialParams,
) -> Vec<(f64, f64)> {
    temperatures
        .iter()
        .map(|&t| (t, p_gamma2 * freq_shift_per_p_gamma2(mode, t, reference_temperature, material)))
        .collect()
}

/// Compares measured centre drift with the resonant-shift prediction.
///
/// Both sides are referenced to the observation nearest `reference_temperature`,
/// so that row is zero on both sides by construction. The prediction uses the
/// fitted Pγ²; its uncertainty enters the combined uncertainty.
pub fn compare_freq_shift(
    observations: &[ShiftObservation],
    reference_temperature: f64,
    p_gamma2: f64,
    p_gamma2_sigma: f64,
    mode: &PhononMode,
    material: &MaterialParams,
) -> Result<ShiftComparison> {
    let reference = observations
        .iter()
        .min_by(|a, b| {
            (a.temperature - reference_temperature).abs().total_cmp(&(b.temperature - reference_temperature).abs())
        })
        .ok_or(Error::InsufficientData { required: 1, actual: 0 })?;
    let rel_p = if p_gamma2 != 0.0 { p_gamma2_sigma / p_gamma2 } else { 0.0 };
    let rows = observations
        .iter()
        .map(|o| {
            if o.temperature == reference.temperature {
                return ShiftRow {
                    temperature: o.temperature,
                    measured: 0.0,
                    measured_sigma: 0.0,
                    predicted: 0.0,
                    predicted_sigma: 0.0,
                    discrepancy: 0.0,
                    uncertainty: 0.0,
                };
            }
            let measured = o.omega_hat - reference.omega_hat;
            // Two centres near 10¹¹ rad/s cannot differ more finely than a few ulps.
            let resolution = 4.0 * f64::EPSILON * o.omega_hat.abs().max(reference.omega_hat.abs());
            let measured_sigma = o.omega_sigma.hypot(reference.omega_sigma).max(resolution);
            let predicted = p_gamma2 * freq_shift_per_p_gamma2(mode, o.temperature, reference.temperature, material);
            let predicted_sigma = (predicted * rel_p).abs();
            ShiftRow {
                temperature: o.temperature,
                measured,
                measured_sigma,
                predicted,
                predicted_sigma,
                discrepancy: measured - predicted,
                uncertainty: measured_sigma.hypot(predicted_sigma),
            }
        })
        .collect();
    Ok(ShiftComparison { reference_temperature: reference.temperature, rows })
}
