//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol·|I|)`. Subdivision order depends only on
//! the integrand values, so results are reproducible bit for bit.

// Nodes and weights are tabulated to more digits than f64 holds.
#![allow(clippy::excessive_precision)]

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_450_000,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 0.0, max_subdivisions: 2000 }
    }
}

impl QuadratureSettings {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 || self.abs_tol > 0.0) {
            return Err(Error::invalid("tolerance", "rel_tol or abs_tol must be positive"));
        }
        if self.rel_tol < 0.0 || self.abs_tol < 0.0 {
            return Err(Error::invalid("tolerance", "tolerances must be non-negative"));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Axis-aligned integration rectangle `[x.0, x.1] × [y.0, y.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn gauss_kronrod_21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = WGK[10] * f_center;
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let error = rescale_error((kronrod - gauss) * half, res_abs * scale, res_asc * scale);
    Segment { a, b, value: kronrod * half, error }
}

/// Integrates `f` over the finite interval `[a, b]`.
///
/// Non-convergence is an error carrying the best estimate reached.
pub fn quad_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult> {
    settings.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("interval", "bounds must be finite"));
    }
    if a == b {
        return Ok(QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 0 });
    }

    let first = gauss_kronrod_21(&mut f, a, b);
    let mut evaluations = 21;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    heap.push(first);

    let mut subdivisions = 0;
    while error > settings.target(value) && value.is_finite() {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        // Interval no longer resolvable in floating point.
        if !(mid > worst.a.min(worst.b) && mid < worst.a.max(worst.b))
            || (worst.b - worst.a).abs() <= 1e3 * f64::EPSILON * worst.a.abs().max(worst.b.abs())
        {
            frozen.push(worst);
            continue;
        }
        if subdivisions >= settings.max_subdivisions {
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod_21(&mut f, worst.a, mid);
        let right = gauss_kronrod_21(&mut f, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum in a fixed order to shed the drift of the running totals.
    let mut segments = heap.into_vec();
    segments.extend(frozen);
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = segments.iter().map(|s| s.value).sum();
    let error_estimate: f64 = segments.iter().map(|s| s.error).sum();

    if !value.is_finite() {
        return Err(Error::QuadratureNotConverged { value, error_estimate, evaluations });
    }
    if error_estimate > settings.target(value) {
        return Err(Error::QuadratureNotConverged { value, error_estimate, evaluations });
    }
    Ok(QuadratureResult { value, error_estimate, evaluations })
}

/// Integrates `f` over `[a, ∞)` through the map x = a + t/(1 − t), t ∈ [0, 1).
pub fn quad_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult> {
    quad_adaptive(
        |t| {
            let s = 1.0 - t;
            let y = f(a + t / s) / (s * s);
            if y.is_finite() {
                y
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        settings,
    )
}

/// Iterated 2-D integral: the inner y-integral is itself adaptive and is
/// solved ten times tighter than the outer tolerance.
pub fn quad2d_adaptive<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    region: Rectangle,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult> {
    settings.validate()?;
    let inner_settings = QuadratureSettings {
        rel_tol: settings.rel_tol * 0.1,
        abs_tol: settings.abs_tol * 0.1 / (region.x.1 - region.x.0).abs().max(f64::MIN_POSITIVE),
        max_subdivisions: settings.max_subdivisions,
    };
    let mut inner_evaluations = 0usize;
    let mut inner_error = 0.0f64;
    let mut failure: Option<Error> = None;

    let outer = quad_adaptive(
        |x| {
            if failure.is_some() {
                return 0.0;
            }
            match quad_adaptive(|y| f(x, y), region.y.0, region.y.1, &inner_settings) {
                Ok(r) => {
                    inner_evaluations += r.evaluations;
                    inner_error = inner_error.max(r.error_estimate);
                    r.value
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        region.x.0,
        region.x.1,
        settings,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outer = outer?;
    Ok(QuadratureResult {
        value: outer.value,
        error_estimate: outer.error_estimate + inner_error * (region.x.1 - region.x.0).abs(),
        evaluations: inner_evaluations,
    })
}
