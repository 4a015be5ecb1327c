use std::f64::consts::{PI, TAU};

use cylspin::dirac_modes::solve_dirac_pair;
use cylspin::model::{ModeSpec, OperatingPoint, Spin, WaveguideParams};
use cylspin::scalar_modes::{rotation_rate_fw, solve_scalar_modes, ScalarMode};
use cylspin::wavefield::{
    integrate_polar, lobe_angle, lower_component_ratio, rotation_slope, sample_bispinor_density,
    sample_eigenstate, sample_rotating_superposition, superposition_density, Evolution, Geometry,
};
use proptest::prelude::*;

fn setup(m: u32) -> (WaveguideParams, OperatingPoint, ScalarMode) {
    let p = WaveguideParams::new(30.0, 0.02, 0.02, 1.0).unwrap();
    let op = OperatingPoint::new(0.5).unwrap();
    let mode = solve_scalar_modes(&p, m).unwrap()[0];
    (p, op, mode)
}

fn unrolled(rate: f64) -> Geometry {
    Geometry::Unrolled { rho: 0.8, n_phi: 256, n_z: 64, z_max: 0.9 * PI / rate.abs() }
}

#[test]
fn lobes_turn_at_the_input_rate() {
    for m in 1..4u32 {
        let (p, op, mode) = setup(m);
        let fw = rotation_rate_fw(&mode, &p, &op).unwrap();
        let exact = solve_dirac_pair(&p, &op, m as i32, 0).unwrap().d_beta_rot_a;
        for rate in [fw, exact] {
            for spin in [Spin::Up, Spin::Down] {
                let g = sample_rotating_superposition(&mode, spin, rate, &unrolled(rate), Evolution::Distance)
                    .unwrap();
                let slope = rotation_slope(&g, m).unwrap();
                let expected = -(spin.sign() as f64) * rate / m as f64;
                assert!((slope - expected).abs() < 1e-6 * expected.abs(), "m = {m}: {slope} vs {expected}");
            }
        }
    }
}

#[test]
fn opposite_spins_mirror_in_phi() {
    let (p, op, mode) = setup(2);
    let rate = rotation_rate_fw(&mode, &p, &op).unwrap();
    let geom = unrolled(rate);
    let up = sample_rotating_superposition(&mode, Spin::Up, rate, &geom, Evolution::Distance).unwrap();
    let down = sample_rotating_superposition(&mode, Spin::Down, rate, &geom, Evolution::Distance).unwrap();
    let n = up.n_cols();
    for i in 0..up.n_rows() {
        for j in 0..n {
            let mirrored = down.get(i, (n - j) % n);
            assert!((up.get(i, j) - mirrored).abs() < 1e-12 * up.max());
        }
    }
}

#[test]
fn time_evolution_turns_the_other_way_for_opposite_spin() {
    let (p, op, mode) = setup(1);
    let rate = rotation_rate_fw(&mode, &p, &op).unwrap();
    let geom = Geometry::Polar { rho_max: 1.0, n_rho: 8, n_phi: 256, z: 0.0 };
    let at = |spin, phase| {
        let g = sample_rotating_superposition(&mode, spin, rate, &geom, Evolution::Time { phase }).unwrap();
        lobe_angle(g.row(5), 1).unwrap()
    };
    let up = at(Spin::Up, 0.3) - at(Spin::Up, 0.0);
    let down = at(Spin::Down, 0.3) - at(Spin::Down, 0.0);
    assert!((up + down).abs() < 1e-12);
    assert!((up - 0.3).abs() < 1e-12);
}

#[test]
fn polar_slices_are_normalized() {
    for m in 0..4u32 {
        let (_, _, mode) = setup(m);
        let spin = Spin::Up;
        let g = sample_eigenstate(&mode, &ModeSpec::new(m as i32, spin, 0), &Geometry::default()).unwrap();
        let total = g.meta.grid_integral.unwrap();
        assert_eq!(total, integrate_polar(&g).unwrap());
        let bound = g.meta.normalization_error_bound.unwrap();
        assert!((total - 1.0).abs() <= bound, "m = {m}: {total} with bound {bound}");
        assert!(bound < 1e-3);
    }
}

#[test]
fn eigenstate_density_is_axially_uniform() {
    let (_, _, mode) = setup(2);
    let g = sample_eigenstate(&mode, &ModeSpec::new(-2, Spin::Down, 0), &Geometry::default()).unwrap();
    for i in 0..g.n_rows() {
        let row = g.row(i);
        let spread = row.iter().cloned().fold(f64::MIN, f64::max) - row.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 1e-14 * g.max());
    }
}

#[test]
fn cartesian_grid_shows_2m_lobes() {
    for m in 1..4u32 {
        let (p, op, mode) = setup(m);
        let rate = rotation_rate_fw(&mode, &p, &op).unwrap();
        let geom = Geometry::Cartesian { half_width: 1.5, n: 129, z: 0.0 };
        let g = sample_rotating_superposition(&mode, Spin::Up, rate, &geom, Evolution::Distance).unwrap();
        // Walk a ring of radius 0.8 and count the maxima.
        let ring: Vec<f64> = (0..720)
            .map(|k| {
                let phi = TAU * k as f64 / 720.0;
                superposition_density(&mode, Spin::Up, rate, 0.8, phi, 0.0).unwrap()
            })
            .collect();
        let peaks = (0..ring.len())
            .filter(|&k| {
                let prev = ring[(k + ring.len() - 1) % ring.len()];
                let next = ring[(k + 1) % ring.len()];
                ring[k] > prev && ring[k] >= next
            })
            .count();
        assert_eq!(peaks, 2 * m as usize);
        assert!(g.max() > 0.0);
    }
}

#[test]
fn bispinor_density_tracks_schrodinger_density() {
    let (p, op, mode) = setup(1);
    let pair = solve_dirac_pair(&p, &op, 1, 0).unwrap();
    let geom = Geometry::Polar { rho_max: 2.0, n_rho: 64, n_phi: 64, z: 3.0 };
    let b = sample_bispinor_density(&pair, Spin::Up, &p, &op, &geom, Evolution::Distance).unwrap();
    let s = sample_rotating_superposition(&mode, Spin::Up, pair.d_beta_rot_a, &geom, Evolution::Distance).unwrap();
    let weight = b.meta.lower_component_weight.unwrap();
    assert!(weight < 0.06);
    let dev = b.samples.iter().zip(&s.samples).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(dev <= 0.06 * s.max(), "max deviation {dev}");
}

#[test]
fn lower_components_vanish_at_rest() {
    let p = WaveguideParams::new(30.0, 0.02, 0.02, 1.0).unwrap();
    let mut last = f64::INFINITY;
    for vz in [0.5, 0.1, 0.01, 0.001] {
        let r = lower_component_ratio(2.5, &p, &OperatingPoint::new(vz).unwrap());
        assert!(r < last);
        last = r;
    }
    assert!(last < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn helical_pattern_is_invariant(
        m in 1u32..4,
        up in any::<bool>(),
        rho in 0.0f64..2.0,
        phi in 0.0f64..TAU,
        z in 0.0f64..1e4,
        dz in -1e4f64..1e4,
    ) {
        let (p, op, mode) = setup(m);
        let spin = if up { Spin::Up } else { Spin::Down };
        let rate = rotation_rate_fw(&mode, &p, &op).unwrap();
        let dphi = -(spin.sign() as f64) * rate * dz / m as f64;
        let a = superposition_density(&mode, spin, rate, rho, phi, z).unwrap();
        let b = superposition_density(&mode, spin, rate, rho, phi + dphi, z + dz).unwrap();
        let peak = 2.0 * mode.norm_a2;
        prop_assert!((a - b).abs() <= 1e-10 * peak);
    }
}
