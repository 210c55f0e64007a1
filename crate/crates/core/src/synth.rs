//! Synthetic Brillouin gain campaigns: a slow temperature ladder, an intensity
//! sweep at every step, additive Gaussian noise, and temperature binning.
//!
//! Every trace draws from its own ChaCha8 stream derived from the base seed and
//! the trace's timestamp index, so any subset of traces can be regenerated (or
//! generated in parallel) bit-for-bit.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dissipation::{freq_shift_res, total_linewidth, JcSource, LinewidthBreakdown, DEFAULT_SHIFT_REFERENCE_K};
use crate::sbs::{brillouin_frequency, phonon_intensity, scaled_gain, stokes_gain, OpticalDrive};
use crate::tls::{DriveState, MaterialParams, PhononMode, TlsEnsemble};
use crate::{Error, Result};

/// Iteration cap for the self-consistent linewidth.
pub const MAX_FIXED_POINT_ITERATIONS: usize = 200;

/// Relative residual accepted for the self-consistent linewidth.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-10;

/// Everything needed to synthesize spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelBundle {
    pub material: MaterialParams,
    pub ensemble: TlsEnsemble,
    pub jc: JcSource,
    pub pump_omega: f64,
    /// Brillouin frequency at the shift reference temperature [rad/s].
    pub brillouin_omega: f64,
    /// Temperature at which the centre equals `brillouin_omega` [K].
    pub shift_reference_temperature: f64,
    /// Whether the centre follows the resonant frequency shift with temperature.
    pub center_drift: bool,
}

impl ModelBundle {
    /// Bundle with the centre fixed by phase matching at `pump_omega`.
    pub fn new(material: MaterialParams, ensemble: TlsEnsemble, jc: JcSource, pump_omega: f64) -> Self {
        Self {
            material,
            ensemble,
            jc,
            pump_omega,
            brillouin_omega: brillouin_frequency(&material, pump_omega),
            shift_reference_temperature: DEFAULT_SHIFT_REFERENCE_K,
            center_drift: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.ensemble.validate()?;
        if !(self.pump_omega > 0.0 && self.pump_omega.is_finite()) {
            return Err(Error::invalid("pump_omega", "must be finite and strictly positive"));
        }
        if !(self.brillouin_omega > 0.0 && self.brillouin_omega < self.pump_omega) {
            return Err(Error::invalid("brillouin_omega", "must lie between 0 and the pump frequency"));
        }
        if !(self.shift_reference_temperature > 0.0) {
            return Err(Error::invalid("shift_reference_temperature", "must be strictly positive"));
        }
        match self.jc {
            JcSource::Fixed(j) if !(j > 0.0) => Err(Error::invalid("jc", "must be strictly positive")),
            _ => Ok(()),
        }
    }

    /// The probed longitudinal mode at the reference Brillouin frequency.
    pub fn mode(&self) -> PhononMode {
        PhononMode::longitudinal(self.brillouin_omega)
    }

    /// Gain-spectrum centre at temperature `t` [rad/s].
    pub fn center(&self, t: f64) -> f64 {
        if !self.center_drift {
            return self.brillouin_omega;
        }
        self.brillouin_omega
            + freq_shift_res(&self.mode(), t, self.shift_reference_temperature, &self.material, &self.ensemble)
    }

    pub fn linewidth(&self, t: f64, intensity: f64) -> LinewidthBreakdown {
        let drive = DriveState { temperature: t, intensity, omega: self.brillouin_omega };
        total_linewidth(
            &self.mode(),
            &drive,
            &self.material,
            &self.ensemble,
            &self.jc,
            self.shift_reference_temperature,
        )
    }

    /// Peak Brillouin gain at linewidth `gamma`.
    pub fn gain_coefficient(&self, gamma: f64) -> f64 {
        scaled_gain(self.material.gain_ref, self.material.gain_ref_linewidth, gamma)
    }
}

/// Optical powers of one intensity setting [W].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSetting {
    pub pump_power: f64,
    pub probe_power: f64,
}

/// A self-consistent operating point at the gain peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// FWHM [rad/s].
    pub gamma: f64,
    /// Acoustic intensity at the peak [W/m²].
    pub peak_intensity: f64,
    /// Gain-spectrum centre [rad/s].
    pub center: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves Γ = Γ(T, J(Γ)) with J the peak intensity driven at linewidth Γ.
///
/// J falls as Γ grows while Γ(T, J) rises with it less steeply than the
/// identity, so the root is unique and bracketed by [Γ(T, ∞), Γ(T, 0)].
pub fn self_consistent_linewidth(
    temperature: f64,
    power: PowerSetting,
    fiber_length: f64,
    model: &ModelBundle,
) -> Result<OperatingPoint> {
    let center = model.center(temperature);
    let drive = OpticalDrive {
        pump_power: power.pump_power,
        stokes_power: power.probe_power,
        pump_omega: model.pump_omega,
        detuning: center,
        fiber_length,
    };
    let intensity_at =
        |gamma: f64| phonon_intensity(&drive, center, gamma, &model.material, model.gain_coefficient(gamma));
    let residual = |gamma: f64| gamma - model.linewidth(temperature, intensity_at(gamma)).total;

    let weak = model.linewidth(temperature, 0.0).total;
    let floor = model.linewidth(temperature, f64::INFINITY).total;
    let (mut lo, mut hi) = (floor, weak);
    if !(lo > 0.0 && hi.is_finite()) {
        return Err(Error::invalid("linewidth", "model linewidth must be finite and positive"));
    }
    let mut gamma = hi;
    let mut rel = residual(hi).abs() / hi;
    let mut iterations = 0;
    while rel > FIXED_POINT_TOLERANCE * 1e-3 && hi - lo > 4.0 * f64::EPSILON * hi {
        if iterations >= MAX_FIXED_POINT_ITERATIONS {
            return Err(Error::FixedPointNotConverged { iterations, residual: rel });
        }
        iterations += 1;
        gamma = 0.5 * (lo + hi);
        let r = residual(gamma);
        rel = r.abs() / gamma;
        if r > 0.0 {
            hi = gamma;
        } else {
            lo = gamma;
        }
    }
    if rel > FIXED_POINT_TOLERANCE {
        return Err(Error::FixedPointNotConverged { iterations, residual: rel });
    }
    Ok(OperatingPoint { gamma, peak_intensity: intensity_at(gamma), center, iterations, relative_residual: rel })
}

/// Additive gain noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// No noise.
    None,
    /// Fixed standard deviation [W].
    Absolute { sigma: f64 },
    /// Standard deviation = noiseless peak gain / `snr`.
    PeakRelative { snr: f64 },
}

impl NoiseModel {
    pub fn sigma(&self, peak_gain: f64) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::Absolute { sigma } => sigma,
            NoiseModel::PeakRelative { snr } => peak_gain / snr,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Absolute { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                Err(Error::invalid("noise.sigma", "must be finite and non-negative"))
            }
            NoiseModel::PeakRelative { snr } if !(snr > 0.0) => {
                Err(Error::invalid("noise.snr", "must be strictly positive"))
            }
            _ => Ok(()),
        }
    }
}

/// One Brillouin gain spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct BgsTrace {
    /// Temperature [K].
    pub temperature: f64,
    /// Pump–probe detunings ω_IM [rad/s], strictly increasing.
    pub detuning_grid: Vec<f64>,
    /// Stokes power gain ΔP_S [W].
    pub gain: Vec<f64>,
    /// Optical drive; its detuning is the gain-spectrum centre.
    pub drive: OpticalDrive,
    /// Seed of this trace's noise stream.
    pub seed: u64,
    pub timestamp_index: u64,
    /// Index into the plan's power settings.
    pub setting: usize,
    /// Self-consistent acoustic intensity at the gain peak [W/m²].
    pub peak_intensity: f64,
    /// Standard deviation of the additive noise [W].
    pub noise_sigma: f64,
}

impl BgsTrace {
    pub fn validate(&self) -> Result<()> {
        if self.detuning_grid.len() != self.gain.len() {
            return Err(Error::GridMismatch);
        }
        if self.detuning_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::DegenerateData("detuning grid must be strictly increasing"));
        }
        if self.gain.iter().chain(&self.detuning_grid).any(|v| !v.is_finite()) {
            return Err(Error::DegenerateData("trace contains non-finite samples"));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid("temperature", "must be finite and strictly positive"));
        }
        Ok(())
    }
}

/// `points` evenly spaced detunings on [center − half_width, center + half_width].
pub fn detuning_grid(center: f64, half_width: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InsufficientData { required: 2, actual: points });
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::invalid("half_width", "must be finite and strictly positive"));
    }
    let n = (points - 1) as f64;
    Ok((0..points).map(|i| center + half_width * (2.0 * i as f64 / n - 1.0)).collect())
}

/// Per-trace seed: the first word of the ChaCha8 stream `timestamp_index`
/// under `base_seed`.
pub fn trace_seed(base_seed: u64, timestamp_index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(timestamp_index);
    rng.next_u64()
}

/// One spectrum at temperature `temperature` on `grid`, using the powers and
/// fiber length of `drive` (its detuning is ignored).
pub fn synth_trace(
    temperature: f64,
    drive: &OpticalDrive,
    model: &ModelBundle,
    grid: &[f64],
    noise: NoiseModel,
    seed: u64,
) -> Result<BgsTrace> {
    noise.validate()?;
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::invalid("temperature", "must be finite and strictly positive"));
    }
    let power = PowerSetting { pump_power: drive.pump_power, probe_power: drive.stokes_power };
    let op = self_consistent_linewidth(temperature, power, drive.fiber_length, model)?;
    let g_b = model.gain_coefficient(op.gamma);
    let drive = OpticalDrive { pump_omega: model.pump_omega, detuning: op.center, ..*drive };
    let peak = g_b * drive.pump_power * drive.stokes_power * drive.fiber_length;
    let sigma = noise.sigma(peak);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gain = grid
        .iter()
        .map(|&w| {
            let clean = stokes_gain(&drive.at_detuning(w), op.center, op.gamma, g_b);
            if sigma > 0.0 {
                let z: f64 = StandardNormal.sample(&mut rng);
                clean + sigma * z
            } else {
                clean
            }
        })
        .collect();
    let trace = BgsTrace {
        temperature,
        detuning_grid: grid.to_vec(),
        gain,
        drive,
        seed,
        timestamp_index: 0,
        setting: 0,
        peak_intensity: op.peak_intensity,
        noise_sigma: sigma,
    };
    trace.validate()?;
    Ok(trace)
}

/// How temperatures advance along the warm-up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemperatureLadder {
    /// Evenly spaced midpoints of the sweep range.
    Continuous,
    /// As `Continuous`, but each temperature snapped to the centre of its bin,
    /// so traces sharing a bin are taken at one temperature.
    Stepped { bin_width: f64 },
}

/// A warm-up campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub t_start: f64,
    pub t_end: f64,
    /// Temperature steps per 100 mK; each step visits every power setting.
    pub traces_per_100mk: usize,
    pub power_settings: Vec<PowerSetting>,
    pub noise: NoiseModel,
    pub model: ModelBundle,
    pub ladder: TemperatureLadder,
    pub grid_points: usize,
    /// Grid half-width in units of the widest expected linewidth.
    pub grid_half_width_linewidths: f64,
    pub base_seed: u64,
}

/// Temperature, setting and ordinal of one planned trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSpec {
    pub temperature: f64,
    pub setting: usize,
    pub timestamp_index: u64,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_start > 0.0 && self.t_start < self.t_end && self.t_end.is_finite()) {
            return Err(Error::invalid("t_start", "need 0 < t_start < t_end"));
        }
        if self.traces_per_100mk == 0 {
            return Err(Error::invalid("traces_per_100mk", "must be positive"));
        }
        if self.power_settings.is_empty() {
            return Err(Error::invalid("power_settings", "need at least one setting"));
        }
        for p in &self.power_settings {
            if !(p.pump_power >= 0.0 && p.probe_power >= 0.0 && p.pump_power.is_finite() && p.probe_power.is_finite()) {
                return Err(Error::invalid("power_settings", "powers must be finite and non-negative"));
            }
        }
        if self.grid_points < 7 {
            return Err(Error::InsufficientData { required: 7, actual: self.grid_points });
        }
        if !(self.grid_half_width_linewidths > 0.0) {
            return Err(Error::invalid("grid_half_width_linewidths", "must be strictly positive"));
        }
        if let TemperatureLadder::Stepped { bin_width } = self.ladder {
            if !(bin_width > 0.0) {
                return Err(Error::invalid("bin_width", "must be strictly positive"));
            }
        }
        self.noise.validate()?;
        self.model.validate()
    }

    /// Number of temperature steps.
    pub fn steps(&self) -> usize {
        let n = ((self.t_end - self.t_start) / 0.1 * self.traces_per_100mk as f64).round();
        (n as usize).max(1)
    }

    pub fn temperatures(&self) -> Vec<f64> {
        let n = self.steps();
        let dt = (self.t_end - self.t_start) / n as f64;
        (0..n)
            .map(|i| {
                let t = self.t_start + (i as f64 + 0.5) * dt;
                match self.ladder {
                    TemperatureLadder::Continuous => t,
                    TemperatureLadder::Stepped { bin_width } => bin_center(t, bin_width),
                }
            })
            .collect()
    }

    /// All traces in acquisition order: temperature step, then setting.
    pub fn trace_specs(&self) -> Vec<TraceSpec> {
        let settings = self.power_settings.len();
        self.temperatures()
            .into_iter()
            .enumerate()
            .flat_map(|(step, temperature)| {
                (0..settings).map(move |setting| TraceSpec {
                    temperature,
                    setting,
                    timestamp_index: (step * settings + setting) as u64,
                })
            })
            .collect()
    }

    /// The common detuning grid: centred on the reference Brillouin frequency
    /// and wide enough for the broadest line of the sweep.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let widest = self.model.linewidth(self.t_start, 0.0).total;
        detuning_grid(self.model.brillouin_omega, self.grid_half_width_linewidths * widest, self.grid_points)
    }

    /// Generates one planned trace.
    pub fn synth(&self, spec: &TraceSpec, grid: &[f64]) -> Result<BgsTrace> {
        let power = self.power_settings.get(spec.setting).ok_or(Error::invalid("setting", "index out of range"))?;
        let drive = OpticalDrive {
            pump_power: power.pump_power,
            stokes_power: power.probe_power,
            pump_omega: self.model.pump_omega,
            detuning: self.model.brillouin_omega,
            fiber_length: self.model.material.fiber_length,
        };
        let seed = trace_seed(self.base_seed, spec.timestamp_index);
        let mut trace = synth_trace(spec.temperature, &drive, &self.model, grid, self.noise, seed)?;
        trace.timestamp_index = spec.timestamp_index;
        trace.setting = spec.setting;
        Ok(trace)
    }
}

/// Runs a whole campaign serially.
pub fn synth_sweep(plan: &SweepPlan) -> Result<Vec<BgsTrace>> {
    plan.validate()?;
    let grid = plan.grid()?;
    plan.trace_specs().iter().map(|s| plan.synth(s, &grid)).collect()
}

fn bin_index(t: f64, width: f64) -> i64 {
    // The nudge keeps temperatures that sit on an edge up to rounding in the upper bin.
    (t / width + 1e-9).floor() as i64
}

/// Centre of the bin containing `t`: (⌊t/w⌋ + ½)·w.
pub fn bin_center(t: f64, width: f64) -> f64 {
    (bin_index(t, width) as f64 + 0.5) * width
}

/// The average of the traces of one power setting falling in one temperature bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedTrace {
    pub center: f64,
    pub setting: usize,
    pub count: usize,
    pub mean_temperature: f64,
    pub mean_peak_intensity: f64,
    pub detuning_grid: Vec<f64>,
    pub gain: Vec<f64>,
    /// Noise standard deviation of the averaged gain [W].
    pub noise_sigma: f64,
    pub drive: OpticalDrive,
}

/// Groups traces by (temperature bin, power setting) and averages their gain.
/// Bins are returned in increasing temperature, then setting; empty bins are omitted.
pub fn bin_traces(traces: &[BgsTrace], bin_width: f64) -> Result<Vec<BinnedTrace>> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::invalid("bin_width", "must be finite and strictly positive"));
    }
    let Some(first) = traces.first() else {
        return Ok(Vec::new());
    };
    for t in traces {
        t.validate()?;
        if t.detuning_grid != first.detuning_grid {
            return Err(Error::GridMismatch);
        }
    }
    let mut order: Vec<(i64, usize, usize)> =
        traces.iter().enumerate().map(|(i, t)| (bin_index(t.temperature, bin_width), t.setting, i)).collect();
    order.sort_unstable();

    let mut out = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let (bin, setting, _) = order[start];
        let end = start + order[start..].iter().take_while(|o| o.0 == bin && o.1 == setting).count();
        let members = &order[start..end];
        let n = members.len() as f64;
        let mut gain = alloc::vec![0.0; first.gain.len()];
        let (mut t_sum, mut j_sum, mut var_sum) = (0.0, 0.0, 0.0);
        for &(_, _, i) in members {
            let tr = &traces[i];
            for (g, x) in gain.iter_mut().zip(&tr.gain) {
                *g += x;
            }
            t_sum += tr.temperature;
            j_sum += tr.peak_intensity;
            var_sum += tr.noise_sigma * tr.noise_sigma;
        }
        for g in &mut gain {
            *g /= n;
        }
        out.push(BinnedTrace {
            center: (bin as f64 + 0.5) * bin_width,
            setting,
            count: members.len(),
            mean_temperature: t_sum / n,
            mean_peak_intensity: j_sum / n,
            detuning_grid: first.detuning_grid.clone(),
            gain,
            noise_sigma: var_sum.sqrt() / n,
            drive: traces[members[0].2].drive,
        });
        start = end;
    }
    Ok(out)
}
