#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Arguments beyond this magnitude saturate `tanh` to ±1 and `coth` to sign(x).
pub const HYPERBOLIC_CLAMP: f64 = 700.0;

/// tanh evaluated through `expm1` so that small arguments keep full relative precision.
pub fn tanh(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    if x.abs() > HYPERBOLIC_CLAMP {
        return x.signum();
    }
    let t = (-2.0 * x.abs()).exp_m1();
    let value = -t / (2.0 + t);
    if x < 0.0 {
        -value
    } else {
        value
    }
}

/// coth(x) = 1/tanh(x); infinite at zero.
pub fn coth(x: f64) -> f64 {
    if x.abs() > HYPERBOLIC_CLAMP {
        return x.signum();
    }
    1.0 / tanh(x)
}

/// sech²(x), written with a decaying exponential so it never overflows.
pub fn sech_squared(x: f64) -> f64 {
    let e = (-2.0 * x.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Bose–Einstein occupation 1/(eˣ − 1) for x > 0.
pub fn bose_occupation(x: f64) -> f64 {
    if x > HYPERBOLIC_CLAMP {
        return 0.0;
    }
    1.0 / x.exp_m1()
}
