//! Least-squares fit of a single Lorentzian gain line.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::lm::{levenberg_marquardt, LeastSquares, LmSettings};
use super::{median, Covariance3};
use crate::{Error, Result};

/// Minimum number of samples in a spectrum.
pub const MIN_SAMPLES: usize = 7;

/// Fitted line: g(ω) = peak·(Γ/2)²/((ω − Ω)² + (Γ/2)²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    /// Centre Ω̂ [rad/s].
    pub omega_hat: f64,
    /// FWHM Γ̂ [rad/s].
    pub gamma_hat: f64,
    /// Peak gain [W].
    pub peak_hat: f64,
    /// Covariance of (Ω̂, Γ̂, peak).
    pub covariance: Covariance3,
    /// √Σ residual² [W].
    pub residual_norm: f64,
    pub iterations: usize,
}

impl LorentzianFit {
    pub fn omega_sigma(&self) -> f64 {
        self.covariance[0][0].max(0.0).sqrt()
    }

    pub fn gamma_sigma(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }

    pub fn peak_sigma(&self) -> f64 {
        self.covariance[2][2].max(0.0).sqrt()
    }
}

pub fn lorentzian(x: f64, center: f64, fwhm: f64, peak: f64) -> f64 {
    let h = 0.5 * fwhm;
    let d = x - center;
    peak * h * h / (d * d + h * h)
}

/// Works in shifted and scaled coordinates so that every parameter is O(1).
struct Problem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    w: Option<&'a [f64]>,
}

impl LeastSquares for Problem<'_> {
    fn residual_count(&self) -> usize {
        self.x.len()
    }

    fn residuals(&self, p: &DVector<f64>, out: &mut DVector<f64>) {
        for (i, (&x, &y)) in self.x.iter().zip(self.y).enumerate() {
            let w = self.w.map_or(1.0, |w| w[i]);
            out[i] = w * (lorentzian(x, p[0], p[1], p[2]) - y);
        }
    }

    fn jacobian(&self, p: &DVector<f64>, out: &mut DMatrix<f64>) {
        let (c, a) = (p[0], p[2]);
        let h = 0.5 * p[1];
        for (i, &x) in self.x.iter().enumerate() {
            let w = self.w.map_or(1.0, |w| w[i]);
            let d = x - c;
            let den = d * d + h * h;
            let shape = h * h / den;
            out[(i, 0)] = w * a * 2.0 * d * shape / den;
            out[(i, 1)] = w * a * h * d * d / (den * den);
            out[(i, 2)] = w * shape;
        }
    }
}

/// Half-maximum crossing by linear interpolation, walking from `peak` in
/// direction `dir`.
fn half_max_crossing(x: &[f64], y: &[f64], peak: usize, half: f64, dir: isize) -> Option<f64> {
    let mut i = peak as isize;
    loop {
        let j = i + dir;
        if j < 0 || j as usize >= x.len() {
            return None;
        }
        let (yi, yj) = (y[i as usize], y[j as usize]);
        if yj <= half {
            let (xi, xj) = (x[i as usize], x[j as usize]);
            let f = if yi == yj { 0.5 } else { (yi - half) / (yi - yj) };
            return Some(xi + f * (xj - xi));
        }
        i = j;
    }
}

/// Fits a Lorentzian to (ω, gain) samples. `sigma`, when given, weights each
/// sample by 1/σᵢ and makes the covariance absolute rather than rescaled.
///
/// A peak must rise more than three median absolute deviations above the
/// baseline.
///
/// Initial guess: the largest sample for centre and peak, and the distance
/// between half-maximum crossings for the width.
pub fn fit_lorentzian(detuning: &[f64], gain: &[f64], sigma: Option<&[f64]>) -> Result<LorentzianFit> {
    if detuning.len() != gain.len() || sigma.is_some_and(|s| s.len() != gain.len()) {
        return Err(Error::GridMismatch);
    }
    if detuning.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData { required: MIN_SAMPLES, actual: detuning.len() });
    }
    if detuning.iter().chain(gain).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("non-finite samples"));
    }
    if detuning.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::DegenerateData("detuning grid must be strictly increasing"));
    }
    if let Some(s) = sigma {
        if s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("sigma", "must be finite and strictly positive"));
        }
    }

    let (imax, &ymax) = gain.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    // On a window cut close to the line the median sits on the line itself,
    // so the outer tenth of the samples also bids for the baseline.
    let centre = median(gain);
    let mad = median(&gain.iter().map(|g| (g - centre).abs()).collect::<Vec<_>>());
    let edge = (gain.len() / 10).max(1);
    let wings = (gain[..edge].iter().sum::<f64>() + gain[gain.len() - edge..].iter().sum::<f64>()) / (2 * edge) as f64;
    let base = centre.min(wings);
    if !(ymax - base > 3.0 * mad) || !(ymax > 0.0) {
        return Err(Error::DegenerateData("no peak stands out from the baseline"));
    }

    let x_ref = 0.5 * (detuning[0] + detuning[detuning.len() - 1]);
    let x_scale = 0.5 * (detuning[detuning.len() - 1] - detuning[0]);
    let x: Vec<f64> = detuning.iter().map(|d| (d - x_ref) / x_scale).collect();
    let y: Vec<f64> = gain.iter().map(|g| g / ymax).collect();
    let w: Option<Vec<f64>> = sigma.map(|s| s.iter().map(|s| ymax / s).collect());

    let half = 0.5;
    let width = match (half_max_crossing(&x, &y, imax, half, -1), half_max_crossing(&x, &y, imax, half, 1)) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (x[imax] - l),
        (None, Some(r)) => 2.0 * (r - x[imax]),
        (None, None) => x[x.len() - 1] - x[0],
    };
    let width = if width > 0.0 { width } else { 2.0 * (x[1] - x[0]) };

    let problem = Problem { x: &x, y: &y, w: w.as_deref() };
    let x0 = DVector::from_vec(alloc::vec![x[imax], width, 1.0]);
    let out = levenberg_marquardt(&problem, x0, &LmSettings::default());
    if !out.converged {
        return Err(Error::FitNotConverged { iterations: out.iterations });
    }
    let p = &out.params;
    let gamma = p[1].abs();
    if !(gamma > 0.0) {
        return Err(Error::DegenerateData("fitted width collapsed to zero"));
    }

    // Weighted residuals are already in units of σ; only rescale when unweighted.
    let variance_scale = if sigma.is_some() {
        let dof = (x.len() - 3) as f64;
        dof / out.sum_squares.max(f64::MIN_POSITIVE)
    } else {
        1.0
    };
    let scale = [x_scale, x_scale, ymax];
    let sign = [1.0, p[1].signum(), 1.0];
    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = out.covariance[(i, j)] * variance_scale * scale[i] * scale[j] * sign[i] * sign[j];
        }
    }
    let residual_norm = if sigma.is_some() {
        let mut r = DVector::zeros(x.len());
        Problem { x: &x, y: &y, w: None }.residuals(p, &mut r);
        r.norm() * ymax
    } else {
        out.sum_squares.sqrt() * ymax
    };

    Ok(LorentzianFit {
        omega_hat: x_ref + x_scale * p[0],
        gamma_hat: x_scale * gamma,
        peak_hat: ymax * p[2],
        covariance,
        residual_norm,
        iterations: out.iterations,
    })
}
