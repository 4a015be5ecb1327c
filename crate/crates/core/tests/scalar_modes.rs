mod common;

use std::f64::consts::PI;

use common::{bessel_j_exact, bessel_k_quadrature, normalization_by_quadrature};
use cylspin::model::{ModeSpec, OperatingPoint, Spin, WaveguideParams};
use cylspin::scalar_modes::{
    beta_shift, dispersion_curve, energy_shift, propagation_constant, rotation_rate_fw, soi_shift,
    solve_scalar_modes, solve_scalar_modes_at_r, DispersionModel, ScalarMode,
};
use proptest::prelude::*;

fn base_params() -> WaveguideParams {
    WaveguideParams::new(30.0, 0.02, 0.02, 1.0).unwrap()
}

fn oracle_f(m: u32, r: f64, u: f64) -> Option<f64> {
    let jm = bessel_j_exact(m, u);
    if jm.abs() < 1e-9 {
        return None;
    }
    let w = (r * r - u * u).sqrt();
    Some(u * bessel_j_exact(m + 1, u) / jm - w * bessel_k_quadrature(m + 1, w) / bessel_k_quadrature(m, w))
}

/// Upward zero crossings of the oracle residual on a uniform grid. Poles
/// give downward jumps, so they are not counted.
fn upward_brackets(m: u32, r: f64, points: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..points {
        let u = r * i as f64 / points as f64;
        let Some(f) = oracle_f(m, r, u) else {
            prev = None;
            continue;
        };
        if let Some((u0, f0)) = prev {
            if f0 < 0.0 && f >= 0.0 {
                out.push((u0, u));
            }
        }
        prev = Some((u, f));
    }
    out
}

#[test]
fn mode_counts_at_r6() {
    let p = base_params();
    assert!((p.r() - 6.0).abs() < 1e-12);
    let counts: Vec<usize> = (0..4).map(|m| solve_scalar_modes(&p, m).unwrap().len()).collect();
    assert_eq!(counts[0], 2);
    assert!(counts.iter().all(|&c| c >= 1));
}

#[test]
fn no_high_order_mode_in_a_weak_well() {
    assert!(solve_scalar_modes_at_r(0.5, 3).unwrap().is_empty());
    assert!(upward_brackets(3, 0.5, 2000).is_empty());
}

#[test]
fn roots_match_oracle_scan() {
    for (r, m) in [(6.0, 0), (6.0, 1), (6.0, 3), (3.0, 1), (10.0, 2)] {
        let modes = solve_scalar_modes_at_r(r, m).unwrap();
        let brackets = upward_brackets(m, r, 2000);
        assert_eq!(modes.len(), brackets.len(), "R = {r}, m = {m}");
        for (mode, (lo, hi)) in modes.iter().zip(&brackets) {
            assert!(mode.u >= *lo && mode.u <= *hi, "R = {r}, m = {m}: {} not in [{lo}, {hi}]", mode.u);
            assert!(oracle_f(m, r, mode.u).unwrap().abs() < 1e-9);
        }
    }
}

#[test]
fn normalization_matches_quadrature() {
    for m in 0..4 {
        for mode in solve_scalar_modes(&base_params(), m).unwrap() {
            let q = normalization_by_quadrature(m, mode.u, mode.w);
            let rel = (mode.norm_a2 - q).abs() / q;
            assert!(rel < 1e-8, "m = {m}: {} vs {q}", mode.norm_a2);
        }
    }
}

#[test]
fn boundary_matching_with_oracle_functions() {
    for m in 0..4 {
        for mode in solve_scalar_modes(&base_params(), m).unwrap() {
            let (u, w) = (mode.u, mode.w);
            let j = bessel_j_exact(m, u);
            let k = bessel_k_quadrature(m, w);
            let outside = mode.radial_amplitude(1.0 + 1e-12).unwrap();
            assert!((outside - j).abs() < 1e-10 * j.abs().max(1e-3));
            // ρ d/dρ log of each side at ρ = 1.
            let inside_log = m as f64 - u * bessel_j_exact(m + 1, u) / j;
            let outside_log = m as f64 - w * bessel_k_quadrature(m + 1, w) / k;
            assert!((inside_log - outside_log).abs() < 1e-9, "m = {m}");
        }
    }
}

#[test]
fn energy_shift_from_quadrature() {
    let p = base_params();
    for m in 1..4u32 {
        for mode in solve_scalar_modes(&p, m).unwrap() {
            let n2 = normalization_by_quadrature(m, mode.u, mode.w);
            let j = bessel_j_exact(m, mode.u);
            for (m_ell, spin) in [(m as i32, Spin::Up), (-(m as i32), Spin::Up), (m as i32, Spin::Down)] {
                let sm = (m_ell * spin.sign()) as f64;
                // Spin-orbit term at the wall: (dv/4C²)(1/ρ)δ(ρ-1) σ m, weighted
                // by the ring density 2πρ|ψ(1)|².
                let oracle = sm * p.dv() / (4.0 * p.compton_ratio().powi(2)) * 2.0 * PI * n2 * j * j;
                let de = energy_shift(&mode, &ModeSpec::new(m_ell, spin, mode.radial_index), &p).unwrap();
                assert!((de - oracle).abs() < 1e-8 * oracle.abs(), "{de} vs {oracle}");
            }
        }
    }
}

#[test]
fn beta_shift_matches_finite_difference() {
    let p = base_params();
    let op = OperatingPoint::new(0.5).unwrap();
    let c = p.compton_ratio();
    for m in 1..4u32 {
        for mode in solve_scalar_modes(&p, m).unwrap() {
            let beta0 = op.beta_bar_a(&p);
            let e0 = (beta0 * beta0 + mode.u * mode.u) / (2.0 * c * c) - p.v0();
            let spec = ModeSpec::new(m as i32, Spin::Up, mode.radial_index);
            let de = energy_shift(&mode, &spec, &p).unwrap();
            let db = beta_shift(de, &p, &op);
            let nr = DispersionModel::NonRelativistic;
            let shifted = propagation_constant(mode.u, &p, e0 - de, nr).unwrap();
            let base = propagation_constant(mode.u, &p, e0, nr).unwrap();
            let fd = shifted - base;
            assert!((fd - db).abs() < 0.01 * db.abs(), "m = {m}: {fd} vs {db}");
        }
    }
}

#[test]
fn relativistic_curve_matches_at_low_energy() {
    let p = WaveguideParams::from_r(2.0, 1e-5, 1e-5, 1.0).unwrap();
    let mode = solve_scalar_modes(&p, 0).unwrap()[0];
    let e = 1e-4 - p.v0();
    let nr = propagation_constant(mode.u, &p, e, DispersionModel::NonRelativistic).unwrap();
    let rel = propagation_constant(mode.u, &p, e, DispersionModel::Relativistic).unwrap();
    assert!((nr - rel).abs() / nr < 1e-3);
}

#[test]
fn parallel_branch_lies_above_in_energy() {
    let p = base_params();
    let mode = solve_scalar_modes(&p, 1).unwrap()[0];
    let up = energy_shift(&mode, &ModeSpec::new(1, Spin::Up, 0), &p).unwrap();
    let down = energy_shift(&mode, &ModeSpec::new(1, Spin::Down, 0), &p).unwrap();
    assert!(up > 0.0 && down < 0.0);
    let energies: Vec<f64> = (0..50).map(|i| 0.01 + 0.001 * i as f64).collect();
    let model = DispersionModel::NonRelativistic;
    let par = dispersion_curve(mode.u, &p, &energies, model, up);
    let anti = dispersion_curve(mode.u, &p, &energies, model, down);
    for (a, b) in par.iter().zip(&anti) {
        if let (Some(x), Some(y)) = (a.beta_a, b.beta_a) {
            assert!(x < y, "parallel state should need more energy at fixed beta");
        }
    }
}

#[test]
fn m_zero_is_unshifted() {
    let p = base_params();
    let op = OperatingPoint::new(0.5).unwrap();
    for mode in solve_scalar_modes(&p, 0).unwrap() {
        for spin in [Spin::Up, Spin::Down] {
            let s = soi_shift(&mode, &ModeSpec::new(0, spin, mode.radial_index), &p, &op).unwrap();
            assert_eq!(s.d_e, 0.0);
            assert_eq!(s.d_beta_a, 0.0);
            assert!(s.d_beta_rot_a.is_none());
        }
    }
}

fn mode_at(r: f64, m: u32) -> Option<ScalarMode> {
    solve_scalar_modes_at_r(r, m).ok()?.into_iter().next()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotation_rate_is_half_the_split(r in 1.0f64..12.0, m in 1u32..4, vz in 0.05f64..0.95) {
        let p = WaveguideParams::from_r(r, 0.02, 0.02, 1.0).unwrap();
        let op = OperatingPoint::new(vz).unwrap();
        let Some(mode) = solve_scalar_modes(&p, m).unwrap().into_iter().next() else {
            return Ok(());
        };
        let m_ell = m as i32;
        let db = |spin| {
            soi_shift(&mode, &ModeSpec::new(m_ell, spin, 0), &p, &op).unwrap().d_beta_a
        };
        let (plus, minus) = (db(Spin::Up), db(Spin::Down));
        let rate = rotation_rate_fw(&mode, &p, &op).unwrap();
        prop_assert!((rate - 0.5 * (plus - minus)).abs() <= 1e-12 * rate.abs());
        prop_assert!(plus < 0.0 && minus > 0.0 && rate < 0.0);
    }

    #[test]
    fn time_reversed_partner_is_degenerate(r in 1.0f64..12.0, m in 1i32..4) {
        let p = WaveguideParams::from_r(r, 0.02, 0.02, 1.0).unwrap();
        if let Some(mode) = mode_at(r, m as u32) {
            let a = energy_shift(&mode, &ModeSpec::new(m, Spin::Up, 0), &p).unwrap();
            let b = energy_shift(&mode, &ModeSpec::new(-m, Spin::Down, 0), &p).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn residual_vanishes_at_every_root(r in 0.5f64..15.0, m in 0u32..5) {
        for mode in solve_scalar_modes_at_r(r, m).unwrap() {
            prop_assert!(mode.u > 0.0 && mode.u < r);
            prop_assert!(mode.residual().unwrap().abs() < 1e-8 * (1.0 + mode.u));
        }
    }
}
