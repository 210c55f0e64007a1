//! Saturated resonant absorption: the √(1 + J/J_c) closed form against direct
//! integration of the driven single-TLS susceptibility over splittings.

use tlsbrillouin_core::bloch::{CounterRotating, RelaxationTimes};
use tlsbrillouin_core::constants::hz_to_angular;
use tlsbrillouin_core::dissipation::{critical_intensity, gamma_res_integral_oracle, gamma_res_strong, gamma_res_weak};
use tlsbrillouin_core::numerics::QuadratureSettings;
use tlsbrillouin_core::tls::{min_lifetime, DriveState, MaterialParams, PhononMode, TlsEnsemble};

struct Setup {
    material: MaterialParams,
    ensemble: TlsEnsemble,
    mode: PhononMode,
}

fn setup() -> Setup {
    Setup {
        material: MaterialParams::ge_doped_silica(),
        ensemble: TlsEnsemble::ge_doped_silica(),
        mode: PhononMode::longitudinal(hz_to_angular(9.188e9)),
    }
}

/// Times with T2 = ωT2/ω and T1 = τ_min, floored at T2/2 so that T2 ≤ 2T1.
fn times(s: &Setup, omega_t2: f64, t: f64) -> RelaxationTimes {
    let t2 = omega_t2 / s.mode.omega;
    let t1 = min_lifetime(s.mode.energy(), &s.material, &s.ensemble, t).max(0.5 * t2);
    RelaxationTimes::new(t1, t2).unwrap()
}

/// Relative deviation of the quadrature from the closed form.
fn deviation(s: &Setup, omega_t2: f64, t: f64, j_over_jc: f64) -> f64 {
    let times = times(s, omega_t2, t);
    let j_c = critical_intensity(&s.material, &s.ensemble, &times, s.mode.polarization);
    let j = j_over_jc * j_c;
    let drive = DriveState::new(t, j, s.mode.omega).unwrap();
    let settings = QuadratureSettings::with_rel_tol(1e-9);
    let oracle = gamma_res_integral_oracle(
        &s.mode,
        &drive,
        &times,
        &s.material,
        &s.ensemble,
        CounterRotating::Retain,
        &settings,
    )
    .unwrap();
    let closed = gamma_res_strong(&s.mode, t, j, j_c, &s.material, &s.ensemble);
    oracle.value / closed - 1.0
}

fn grid() -> Vec<(f64, f64)> {
    let temps: Vec<f64> = (0..10).map(|i| 0.3 + (4.2 - 0.3) * i as f64 / 9.0).collect();
    let ratios: Vec<f64> = (0..10).map(|i| 100.0 * i as f64 / 9.0).collect();
    temps.iter().flat_map(|&t| ratios.iter().map(move |&r| (t, r))).collect()
}

#[test]
fn closed_form_holds_on_grid_at_large_omega_t2() {
    let s = setup();
    for omega_t2 in [1e3, 1e4] {
        for (t, r) in grid() {
            let d = deviation(&s, omega_t2, t, r);
            assert!(d.abs() < 0.01, "ωT2 = {omega_t2}, T = {t}, J/J_c = {r}: {d:e}");
        }
    }
}

#[test]
fn weak_field_limit_is_tight() {
    let s = setup();
    for t in [0.3, 1.1, 4.2] {
        let d = deviation(&s, 1e4, t, 0.0);
        assert!(d.abs() < 5e-3, "T = {t}: {d:e}");
        let times = times(&s, 1e4, t);
        let drive = DriveState::new(t, 0.0, s.mode.omega).unwrap();
        let oracle = gamma_res_integral_oracle(
            &s.mode,
            &drive,
            &times,
            &s.material,
            &s.ensemble,
            CounterRotating::Drop,
            &QuadratureSettings::with_rel_tol(1e-9),
        )
        .unwrap();
        let weak = gamma_res_weak(&s.mode, t, &s.material, &s.ensemble);
        assert!((oracle.value / weak - 1.0).abs() < 5e-3);
    }
}

#[test]
fn closed_form_breaks_down_at_small_omega_t2() {
    let s = setup();
    let worst = grid().into_iter().map(|(t, r)| deviation(&s, 10.0, t, r).abs()).fold(0.0, f64::max);
    assert!(worst > 0.01, "largest deviation at ωT2 = 10 is only {worst:e}");
}
