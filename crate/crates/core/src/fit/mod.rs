//! Inverse problem: spectra → (Ω̂, Γ̂) → (Pγ², J_c, Γ0) → (a, b), plus the
//! background split, relaxation-time extraction and frequency-shift check.

mod background;
pub mod lm;
mod lorentzian;
mod pipeline;
mod powerlaw;
mod saturation;
mod shift;

use alloc::vec::Vec;

pub use background::{
    extract_times, fit_background, tls_parameters_from_background, BackgroundFit, ExtractedTimes, TlsParameters,
};
pub use lorentzian::{fit_lorentzian, lorentzian, LorentzianFit, MIN_SAMPLES};
pub use pipeline::{
    fit_bin, fit_campaign, BinObservation, CampaignFit, PipelineSettings, SaturationMode, SkippedTemperature,
    TemperatureResult,
};
pub use powerlaw::{fit_powerlaw, PowerLawFit};
pub use saturation::{
    fit_saturation, fit_saturation_shared, resonant_rate_per_p_gamma2, saturation_model, SaturationFit,
    SaturationPoint, SharedSaturationFit, TemperatureGroup,
};
pub use shift::{
    compare_freq_shift, predict_freq_shift, ShiftComparison, ShiftObservation, ShiftRow, SHIFT_COVERAGE_FACTOR,
};

/// Row-major 3×3 covariance.
pub type Covariance3 = [[f64; 3]; 3];

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
