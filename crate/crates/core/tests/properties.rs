//! Structural invariants, checked on random inputs.

use proptest::prelude::*;

use tlsbrillouin_core::constants::{hz_to_angular, optical_angular_frequency, HBAR, K_B};
use tlsbrillouin_core::dissipation::{gamma_res_weak, total_linewidth, JcSource};
use tlsbrillouin_core::fit::{fit_lorentzian, fit_powerlaw, lorentzian};
use tlsbrillouin_core::numerics::digamma_half_plus_imag;
use tlsbrillouin_core::sbs::{phonon_intensity, stokes_gain, OpticalDrive};
use tlsbrillouin_core::tls::{
    equilibrium_inversion, golden_rule_rate, tls_eigenvectors, tls_energy, transition_rates, DriveState,
    MaterialParams, PhononMode, TlsEnsemble, TlsState,
};

const MEV: f64 = 1.602_176_634e-22;

fn ge() -> (MaterialParams, TlsEnsemble) {
    (MaterialParams::ge_doped_silica(), TlsEnsemble::ge_doped_silica())
}

#[test]
fn energy_is_euclidean_norm_on_many_pairs() {
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    for _ in 0..100_000 {
        let delta = (unit() - 0.5) * 10f64.powf(-30.0 + 12.0 * unit());
        let delta0 = 10f64.powf(-30.0 + 12.0 * unit());
        let e = tls_energy(&TlsState { delta, delta0 });
        assert!((e / delta.hypot(delta0) - 1.0).abs() <= 1e-14);
    }
}

proptest! {
    #[test]
    fn eigenvectors_are_orthonormal_and_diagonalize(delta in -5.0f64..5.0, log_d0 in -6.0f64..1.0) {
        let state = TlsState { delta: delta * MEV, delta0: 10f64.powf(log_d0) * MEV };
        let basis = tls_eigenvectors(&state).unwrap();
        let (e, g) = (basis.excited, basis.ground);
        prop_assert!((e.left * e.left + e.right * e.right - 1.0).abs() < 1e-12);
        prop_assert!((g.left * g.left + g.right * g.right - 1.0).abs() < 1e-12);
        prop_assert!((e.left * g.left + e.right * g.right).abs() < 1e-12);
        // H = ½[[Δ, Δ₀], [Δ₀, −Δ]] on (right, left).
        let energy = tls_energy(&state);
        let h = |v: (f64, f64)| {
            (
                0.5 * (state.delta * v.0 + state.delta0 * v.1),
                0.5 * (state.delta0 * v.0 - state.delta * v.1),
            )
        };
        let he = h((e.right, e.left));
        let hg = h((g.right, g.left));
        let tol = 1e-12 * energy;
        prop_assert!((he.0 - 0.5 * energy * e.right).abs() < tol && (he.1 - 0.5 * energy * e.left).abs() < tol);
        prop_assert!((hg.0 + 0.5 * energy * g.right).abs() < tol && (hg.1 + 0.5 * energy * g.left).abs() < tol);
    }

    #[test]
    fn equilibrium_inversion_is_minus_tanh(log_e in -4.0f64..2.0, t in 0.001f64..300.0) {
        let energy = 10f64.powf(log_e) * MEV;
        let w0 = equilibrium_inversion(energy, t);
        let x = energy / (2.0 * K_B * t);
        prop_assert!((w0 + x.tanh()).abs() <= 1e-14 * x.tanh().abs().max(1e-300) + 1e-300);
        // Formally odd: −w0(E) = tanh(−E/2kT) · (−1).
        prop_assert!((w0 - (-x).tanh()).abs() <= 1e-15);
    }

    #[test]
    fn golden_rule_rate_scales_as_tunneling_squared(log_e in -3.0f64..1.0, frac in 0.001f64..1.0, t in 0.01f64..10.0) {
        let (m, ens) = ge();
        let energy = 10f64.powf(log_e) * MEV;
        let delta0 = frac * energy;
        let delta = (energy * energy - delta0 * delta0).max(0.0).sqrt();
        let rate = golden_rule_rate(&TlsState { delta, delta0 }, &m, &ens, t);
        let sym = golden_rule_rate(&TlsState::symmetric(energy), &m, &ens, t);
        prop_assert!((rate / (frac * frac * sym) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transition_rates_obey_detailed_balance(log_e in -3.0f64..0.5, frac in 0.01f64..1.0, t in 0.05f64..20.0) {
        let (m, ens) = ge();
        let energy = 10f64.powf(log_e) * MEV;
        let delta0 = frac * energy;
        let delta = (energy * energy - delta0 * delta0).max(0.0).sqrt();
        let (up, down) = transition_rates(&TlsState { delta, delta0 }, &m, &ens, t);
        let e = tls_energy(&TlsState { delta, delta0 });
        prop_assert!((up / down / (-e / (K_B * t)).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn digamma_real_part_is_even(x in -1e4f64..1e4) {
        prop_assert_eq!(digamma_half_plus_imag(x), digamma_half_plus_imag(-x));
    }

    #[test]
    fn linewidth_falls_with_intensity(t in 0.3f64..3.99, log_j in -3.0f64..3.0, step in 1.01f64..100.0) {
        let (m, ens) = ge();
        let mode = PhononMode::longitudinal(hz_to_angular(9.188e9));
        let jc = JcSource::PowerLaw(ens.jc_power_law);
        let at = |j: f64| total_linewidth(&mode, &DriveState { temperature: t, intensity: j, omega: mode.omega }, &m, &ens, &jc, 1.09).total;
        let j = 10f64.powf(log_j);
        prop_assert!(at(j * step) < at(j));
    }

    #[test]
    fn weak_resonant_rate_falls_with_temperature(t in 0.01f64..50.0, step in 1.001f64..10.0) {
        let (m, ens) = ge();
        let mode = PhononMode::longitudinal(hz_to_angular(9.188e9));
        prop_assert!(gamma_res_weak(&mode, t * step, &m, &ens) < gamma_res_weak(&mode, t, &m, &ens));
    }

    #[test]
    fn powerlaw_fit_ignores_order(seed in 0u64..1000, n in 3usize..30) {
        let mut pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = 1.1 + 3.1 * i as f64 / n as f64;
                let wobble = 1.0 + 0.05 * (((i as u64 * 7919 + seed) % 97) as f64 / 97.0 - 0.5);
                (t, 0.9 * t.powf(2.6) * wobble)
            })
            .collect();
        let a = fit_powerlaw(&pts).unwrap();
        let k = (seed as usize) % n;
        pts.rotate_left(k);
        pts.reverse();
        let b = fit_powerlaw(&pts).unwrap();
        prop_assert!((a.a / b.a - 1.0).abs() < 1e-12 && (a.b - b.b).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_fit_is_scale_equivariant(c in -2.0f64..2.0, log_scale in -12.0f64..6.0) {
        let x: Vec<f64> = (0..201).map(|i| -10.0 + 0.1 * i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &x)| lorentzian(x, c, 1.7, 2.0) + 2e-3 * (((i * 31) % 17) as f64 / 17.0 - 0.5))
            .collect();
        let scale = 10f64.powf(log_scale);
        let scaled: Vec<f64> = y.iter().map(|v| v * scale).collect();
        let a = fit_lorentzian(&x, &y, None).unwrap();
        let b = fit_lorentzian(&x, &scaled, None).unwrap();
        prop_assert!((a.omega_hat - b.omega_hat).abs() < 1e-10);
        prop_assert!((a.gamma_hat / b.gamma_hat - 1.0).abs() < 1e-10, "{}", a.gamma_hat / b.gamma_hat - 1.0);
        prop_assert!((b.peak_hat / (a.peak_hat * scale) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gain_and_intensity_share_one_lineshape(offset in -10.0f64..10.0) {
        let m = MaterialParams::ge_doped_silica();
        let pump = optical_angular_frequency(1548.963e-9);
        let omega = hz_to_angular(9.188e9);
        let gamma = hz_to_angular(1e6);
        let at = |w: f64| {
            let d = OpticalDrive::new(35e-3, 0.55e-3, pump, w, m.fiber_length).unwrap();
            phonon_intensity(&d, omega, gamma, &m, 18.0) / stokes_gain(&d, omega, gamma, 18.0)
                / (w / d.stokes_omega())
        };
        prop_assert!((at(omega + offset * gamma) / at(omega) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stokes_gain_is_exactly_lorentzian(offset in -20.0f64..20.0) {
        let pump = optical_angular_frequency(1548.963e-9);
        let omega = hz_to_angular(9.188e9);
        let gamma = hz_to_angular(1.3e6);
        let w = omega + offset * gamma;
        let d = OpticalDrive::new(35e-3, 0.55e-3, pump, w, 0.022).unwrap();
        let g = stokes_gain(&d, omega, gamma, 0.6);
        let peak = 0.6 * 35e-3 * 0.55e-3 * 0.022;
        prop_assert!((g / lorentzian(w, omega, gamma, peak) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn constants_are_consistent() {
    assert!((HBAR / 1.054_571_817e-34 - 1.0).abs() < 1e-15);
}
