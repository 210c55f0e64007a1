//! CODATA 2018 physical constants and a few mathematical ones.

/// Reduced Planck constant [J·s].
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant [J/K].
pub const K_B: f64 = 1.380_649e-23;

/// Speed of light in vacuum [m/s].
pub const C_LIGHT: f64 = 299_792_458.0;

/// One electronvolt [J].
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Converts an ordinary frequency [Hz] to angular frequency [rad/s].
#[inline]
pub fn hz_to_angular(hz: f64) -> f64 {
    TWO_PI * hz
}

/// Converts an angular frequency [rad/s] to ordinary frequency [Hz].
#[inline]
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / TWO_PI
}

/// Angular frequency of light with vacuum wavelength `lambda` [m].
#[inline]
pub fn optical_angular_frequency(lambda: f64) -> f64 {
    TWO_PI * C_LIGHT / lambda
}
