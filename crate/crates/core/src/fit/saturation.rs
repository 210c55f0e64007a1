//! Saturation fits of linewidth against acoustic intensity,
//! Γ(J) = πPγ²Ω/(ρv²)·tanh(ħΩ/2k_BT)/√(1 + J/J_c) + Γ0.
//!
//! Parameters are fitted as logarithms, so all three stay positive.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::lm::{levenberg_marquardt, LeastSquares, LmSettings};
use super::{median, Covariance3};
use crate::constants::K_B;
use crate::numerics::tanh;
use crate::tls::{MaterialParams, PhononMode};
use crate::{Error, Result};

/// Minimum points in a single-temperature saturation fit.
pub const MIN_POINTS: usize = 5;

/// One measured linewidth at a known peak intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationPoint {
    /// Acoustic intensity J [W/m²].
    pub intensity: f64,
    /// Fitted FWHM Γ̂ [rad/s].
    pub gamma: f64,
    /// Standard error of Γ̂ [rad/s]; `None` fits unweighted.
    pub gamma_sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationFit {
    pub temperature: f64,
    /// Pγ² [J/m³].
    pub p_gamma2: f64,
    /// J_c [W/m²].
    pub j_c: f64,
    /// Γ0 [rad/s].
    pub gamma0: f64,
    /// Covariance of (Pγ², J_c, Γ0).
    pub covariance: Covariance3,
    /// Set when the data cannot pin all three parameters (e.g. the intensities
    /// all sit far below or far above J_c).
    pub flat_direction: bool,
}

impl SaturationFit {
    pub fn p_gamma2_sigma(&self) -> f64 {
        self.covariance[0][0].max(0.0).sqrt()
    }
    pub fn j_c_sigma(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }
    pub fn gamma0_sigma(&self) -> f64 {
        self.covariance[2][2].max(0.0).sqrt()
    }
}

/// Γ^res per unit Pγ² at temperature `t`: πΩ/(ρv²)·tanh(ħΩ/2k_BT).
pub fn resonant_rate_per_p_gamma2(mode: &PhononMode, material: &MaterialParams, t: f64) -> f64 {
    let v = material.sound_speed(mode.polarization);
    core::f64::consts::PI * mode.omega / (material.density * v * v) * tanh(mode.energy() / (2.0 * K_B * t))
}

/// Model linewidth for given parameters.
pub fn saturation_model(strength: f64, p_gamma2: f64, j_c: f64, gamma0: f64, intensity: f64) -> f64 {
    strength * p_gamma2 / (1.0 + intensity / j_c).sqrt() + gamma0
}

/// A block of points measured at one temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureGroup {
    pub temperature: f64,
    pub points: Vec<SaturationPoint>,
}

/// Parameters: [ln Pγ², (ln J_c, ln Γ0) per group]. Residuals are divided by
/// σ when given, else by a common linewidth scale.
struct SharedProblem<'a> {
    groups: &'a [TemperatureGroup],
    strengths: Vec<f64>,
    scale: f64,
    n: usize,
}

impl SharedProblem<'_> {
    fn weight(&self, p: &SaturationPoint) -> f64 {
        1.0 / p.gamma_sigma.unwrap_or(self.scale)
    }
}

impl LeastSquares for SharedProblem<'_> {
    fn residual_count(&self) -> usize {
        self.n
    }

    fn residuals(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        let pg = x[0].exp();
        let mut k = 0;
        for (g, group) in self.groups.iter().enumerate() {
            let (jc, g0) = (x[1 + 2 * g].exp(), x[2 + 2 * g].exp());
            for p in &group.points {
                let model = saturation_model(self.strengths[g], pg, jc, g0, p.intensity);
                out[k] = (model - p.gamma) * self.weight(p);
                k += 1;
            }
        }
    }

    fn jacobian(&self, x: &DVector<f64>, out: &mut DMatrix<f64>) {
        out.fill(0.0);
        let pg = x[0].exp();
        let mut k = 0;
        for (g, group) in self.groups.iter().enumerate() {
            let (jc, g0) = (x[1 + 2 * g].exp(), x[2 + 2 * g].exp());
            for p in &group.points {
                let w = self.weight(p);
                let u = 1.0 + p.intensity / jc;
                let res = self.strengths[g] * pg / u.sqrt();
                out[(k, 0)] = w * res;
                // ∂/∂ln J_c of (1 + J/J_c)^(-1/2) = ½ (J/J_c) (1 + J/J_c)^(-3/2).
                out[(k, 1 + 2 * g)] = w * res * 0.5 * (p.intensity / jc) / u;
                out[(k, 2 + 2 * g)] = w * g0;
                k += 1;
            }
        }
    }
}

fn check_points(points: &[SaturationPoint]) -> Result<()> {
    for p in points {
        if !(p.intensity > 0.0 && p.intensity.is_finite()) {
            return Err(Error::invalid("intensity", "must be finite and strictly positive"));
        }
        if !(p.gamma > 0.0 && p.gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be finite and strictly positive"));
        }
        if let Some(s) = p.gamma_sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid("gamma_sigma", "must be finite and strictly positive"));
            }
        }
    }
    Ok(())
}

fn decade_span(points: &[SaturationPoint]) -> f64 {
    let (lo, hi) =
        points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.intensity), hi.max(p.intensity)));
    (hi / lo).log10()
}

/// Intensities further than this factor below (above) J_c on every point leave
/// J_c (the amplitude/floor split) unconstrained.
const SATURATION_CONTRAST: f64 = 20.0;

fn outside_contrast(points: &[SaturationPoint], j_c: f64) -> bool {
    points.iter().all(|p| p.intensity * SATURATION_CONTRAST < j_c)
        || points.iter().all(|p| p.intensity > SATURATION_CONTRAST * j_c)
}

/// Conditioning below which a fit that ran out of iterations is reported as
/// unidentifiable rather than failed.
const STALL_CONDITIONING: f64 = 1e-6;

struct SharedOutcome {
    p_gamma2: f64,
    per_group: Vec<(f64, f64)>,
    covariance: DMatrix<f64>,
    flat: bool,
}

fn run_shared(
    groups: &[TemperatureGroup],
    mode: &PhononMode,
    material: &MaterialParams,
    x0: DVector<f64>,
) -> Result<SharedOutcome> {
    let n: usize = groups.iter().map(|g| g.points.len()).sum();
    let all: Vec<f64> = groups.iter().flat_map(|g| g.points.iter().map(|p| p.gamma)).collect();
    let problem = SharedProblem {
        groups,
        strengths: groups.iter().map(|g| resonant_rate_per_p_gamma2(mode, material, g.temperature)).collect(),
        scale: median(&all),
        n,
    };
    let absolute = groups.iter().all(|g| g.points.iter().all(|p| p.gamma_sigma.is_some()));
    let out = levenberg_marquardt(&problem, x0, &LmSettings::default());
    let x = &out.params;
    let values: Vec<f64> = x.iter().map(|v| v.exp()).collect();
    let dof = n.saturating_sub(x.len()).max(1) as f64;
    // With known σ the covariance is absolute; otherwise it stays scaled by
    // the residual variance, converted from the weight scale back to rad/s.
    let unscale = if absolute { dof / out.sum_squares.max(f64::MIN_POSITIVE) } else { 1.0 };
    let covariance =
        DMatrix::from_fn(x.len(), x.len(), |i, j| out.covariance[(i, j)] * unscale * values[i] * values[j]);
    let per_group: Vec<(f64, f64)> = (0..groups.len()).map(|g| (values[1 + 2 * g], values[2 + 2 * g])).collect();
    let contrast = groups.iter().zip(&per_group).any(|(g, &(jc, _))| outside_contrast(&g.points, jc));
    // A long shallow valley stalls the step test before the conditioning
    // reaches the strict threshold; treat a stall there as a flat direction.
    let stalled_in_valley = !out.converged && out.conditioning < STALL_CONDITIONING;
    let flat = out.flat_direction() || contrast || stalled_in_valley;
    if !out.converged && !flat {
        return Err(Error::FitNotConverged { iterations: out.iterations });
    }
    Ok(SharedOutcome { p_gamma2: values[0], per_group, covariance, flat })
}

/// Single-temperature fit of (Pγ², J_c, Γ0).
///
/// Initial guess: Γ0 ← min Γ̂, amplitude ← max Γ̂ − min Γ̂, J_c ← geometric
/// median of the intensities.
pub fn fit_saturation(
    temperature: f64,
    points: &[SaturationPoint],
    mode: &PhononMode,
    material: &MaterialParams,
) -> Result<SaturationFit> {
    if points.len() < MIN_POINTS {
        return Err(Error::InsufficientData { required: MIN_POINTS, actual: points.len() });
    }
    check_points(points)?;
    if decade_span(points) < 1.0 {
        return Err(Error::DegenerateData("intensities must span at least one decade"));
    }
    let (lo, hi) = points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.gamma), hi.max(p.gamma)));
    let amplitude = (hi - lo).max(1e-3 * hi);
    let strength = resonant_rate_per_p_gamma2(mode, material, temperature);
    let ln_j: Vec<f64> = points.iter().map(|p| p.intensity.ln()).collect();
    let x0 = DVector::from_vec(alloc::vec![(amplitude / strength).ln(), median(&ln_j), lo.ln()]);
    let group = [TemperatureGroup { temperature, points: points.to_vec() }];
    let out = run_shared(&group, mode, material, x0)?;
    let (j_c, gamma0) = out.per_group[0];
    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = out.covariance[(i, j)];
        }
    }
    Ok(SaturationFit { temperature, p_gamma2: out.p_gamma2, j_c, gamma0, covariance, flat_direction: out.flat })
}

/// Saturation fits across temperatures that share one Pγ².
#[derive(Debug, Clone, PartialEq)]
pub struct SharedSaturationFit {
    pub p_gamma2: f64,
    pub p_gamma2_sigma: f64,
    /// Per-temperature (J_c, Γ0) with the shared Pγ²; each covariance is the
    /// marginal over (Pγ², J_c, Γ0).
    pub per_temperature: Vec<SaturationFit>,
    pub flat_direction: bool,
}

/// Profiles J_c on a log grid, solving the remaining linear problem for
/// (amplitude, Γ0) at each trial value; returns (J_c, amplitude, Γ0).
fn profile_initial_guess(points: &[SaturationPoint]) -> (f64, f64, f64) {
    let (jmin, jmax) =
        points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.intensity), hi.max(p.intensity)));
    let (a_lo, a_hi) = ((jmin / 100.0).ln(), (jmax * 100.0).ln());
    let mut best = (f64::INFINITY, (jmin * jmax).sqrt(), 0.0, 0.0);
    let steps = 80;
    for k in 0..=steps {
        let jc = (a_lo + (a_hi - a_lo) * k as f64 / steps as f64).exp();
        // Linear least squares of Γ on u = (1 + J/J_c)^(-1/2).
        let n = points.len() as f64;
        let (mut su, mut sg, mut suu, mut sug) = (0.0, 0.0, 0.0, 0.0);
        for p in points {
            let u = 1.0 / (1.0 + p.intensity / jc).sqrt();
            su += u;
            sg += p.gamma;
            suu += u * u;
            sug += u * p.gamma;
        }
        let det = n * suu - su * su;
        if det.abs() < 1e-300 {
            continue;
        }
        let amp = (n * sug - su * sg) / det;
        let g0 = (sg - amp * su) / n;
        if !(amp > 0.0 && g0 > 0.0) {
            continue;
        }
        let ssr: f64 = points
            .iter()
            .map(|p| {
                let r = amp / (1.0 + p.intensity / jc).sqrt() + g0 - p.gamma;
                r * r
            })
            .sum();
        if ssr < best.0 {
            best = (ssr, jc, amp, g0);
        }
    }
    if best.0.is_finite() {
        (best.1, best.2, best.3)
    } else {
        let lo = points.iter().map(|p| p.gamma).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p.gamma).fold(0.0, f64::max);
        (best.1, (hi - lo).max(1e-3 * hi), lo)
    }
}

/// Fits every temperature block with one common Pγ² and per-block (J_c, Γ0).
///
/// Each block needs at least three points; the pooled intensities must span
/// at least one decade.
pub fn fit_saturation_shared(
    groups: &[TemperatureGroup],
    mode: &PhononMode,
    material: &MaterialParams,
) -> Result<SharedSaturationFit> {
    if groups.is_empty() {
        return Err(Error::InsufficientData { required: 1, actual: 0 });
    }
    for g in groups {
        if g.points.len() < 3 {
            return Err(Error::InsufficientData { required: 3, actual: g.points.len() });
        }
        check_points(&g.points)?;
    }
    let pooled: Vec<SaturationPoint> = groups.iter().flat_map(|g| g.points.iter().copied()).collect();
    if decade_span(&pooled) < 1.0 {
        return Err(Error::DegenerateData("intensities must span at least one decade"));
    }

    let mut x0 = alloc::vec![0.0];
    let mut p_guesses = Vec::with_capacity(groups.len());
    for g in groups {
        let (jc, amp, g0) = profile_initial_guess(&g.points);
        p_guesses.push(amp / resonant_rate_per_p_gamma2(mode, material, g.temperature));
        x0.push(jc.ln());
        x0.push(g0.ln());
    }
    x0[0] = median(&p_guesses).ln();
    let out = run_shared(groups, mode, material, DVector::from_vec(x0))?;

    let per_temperature = groups
        .iter()
        .enumerate()
        .map(|(g, group)| {
            let idx = [0, 1 + 2 * g, 2 + 2 * g];
            let mut covariance = [[0.0; 3]; 3];
            for (i, row) in covariance.iter_mut().enumerate() {
                for (j, c) in row.iter_mut().enumerate() {
                    *c = out.covariance[(idx[i], idx[j])];
                }
            }
            let (j_c, gamma0) = out.per_group[g];
            SaturationFit {
                temperature: group.temperature,
                p_gamma2: out.p_gamma2,
                j_c,
                gamma0,
                covariance,
                flat_direction: outside_contrast(&group.points, j_c),
            }
        })
        .collect();
    Ok(SharedSaturationFit {
        p_gamma2: out.p_gamma2,
        p_gamma2_sigma: out.covariance[(0, 0)].max(0.0).sqrt(),
        per_temperature,
        flat_direction: out.flat,
    })
}
