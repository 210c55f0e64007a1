use num_complex::Complex64;

/// B₂ₖ/(2k) for k = 1..8, the coefficients of the asymptotic series
/// ψ(z) ~ ln z − 1/(2z) − Σ B₂ₖ/(2k z²ᵏ).
const ASYMPTOTIC: [f64; 8] =
    [1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0, 1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0, -3617.0 / 8160.0];

/// Shift |z| above this before switching to the asymptotic series.
const ASYMPTOTIC_RADIUS: f64 = 10.0;

/// Digamma of a complex argument with positive real part.
///
/// Upward recurrence ψ(z) = ψ(z + 1) − 1/z until |z| ≥ 10, then the asymptotic
/// series. Returns NaN for Re z ≤ 0, which this crate never needs.
pub fn digamma_complex(z: Complex64) -> Complex64 {
    if !(z.re > 0.0) {
        return Complex64::new(f64::NAN, f64::NAN);
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < ASYMPTOTIC_RADIUS {
        shift -= w.inv();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut power = inv2;
    for &c in &ASYMPTOTIC {
        series += power * c;
        power *= inv2;
    }
    shift + w.ln() - inv * 0.5 - series
}

/// Real digamma for x > 0.
pub fn digamma(x: f64) -> f64 {
    digamma_complex(Complex64::new(x, 0.0)).re
}

/// Re ψ(½ + ix), the special function behind the resonant frequency shift.
///
/// Even in `x`; equals ψ(½) = −γ − 2 ln 2 at the origin and approaches ln|x|
/// for large |x|.
pub fn digamma_half_plus_imag(x: f64) -> f64 {
    if !x.is_finite() {
        return if x.is_nan() { x } else { f64::INFINITY };
    }
    digamma_complex(Complex64::new(0.5, x.abs())).re
}
