//! J_c(T) = a·Tᵇ by linear least squares in (ln T, ln J_c).

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::tls::PowerLaw;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Prefactor a [W·m⁻²·K⁻ᵇ].
    pub a: f64,
    /// Exponent b.
    pub b: f64,
    /// Covariance of (a, b), propagated from that of (ln a, b).
    pub covariance: [[f64; 2]; 2],
    /// RMS residual in ln J_c.
    pub log_residual_rms: f64,
}

impl PowerLawFit {
    pub fn law(&self) -> PowerLaw {
        PowerLaw { a: self.a, b: self.b }
    }
    pub fn a_sigma(&self) -> f64 {
        self.covariance[0][0].max(0.0).sqrt()
    }
    pub fn b_sigma(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }
}

/// Fits (temperature [K], J_c [W/m²]) pairs. Input order does not matter:
/// the points are sorted before any sums are formed.
pub fn fit_powerlaw(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData { required: 3, actual: points.len() });
    }
    if points.iter().any(|&(t, j)| !(t > 0.0 && j > 0.0 && t.is_finite() && j.is_finite())) {
        return Err(Error::invalid("points", "temperatures and intensities must be finite and positive"));
    }
    let mut logs: Vec<(f64, f64)> = points.iter().map(|&(t, j)| (t.ln(), j.ln())).collect();
    logs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));

    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateData("all temperatures coincide"));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let ln_a = my - b * mx;
    let ssr: f64 = logs
        .iter()
        .map(|p| {
            let r = p.1 - ln_a - b * p.0;
            r * r
        })
        .sum();
    let s2 = ssr / (n - 2.0);
    let var_b = s2 / sxx;
    let var_ln_a = s2 * (1.0 / n + mx * mx / sxx);
    let cov_ln_a_b = -s2 * mx / sxx;
    let a = ln_a.exp();
    Ok(PowerLawFit {
        a,
        b,
        covariance: [[a * a * var_ln_a, a * cov_ln_a_b], [a * cov_ln_a_b, var_b]],
        log_residual_rms: (ssr / n).sqrt(),
    })
}
