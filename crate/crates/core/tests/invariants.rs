use std::f64::consts::PI;

use num_complex::Complex64;
use planar_eikonal::chi::ChiProfile;
use planar_eikonal::specfun::{plane_kernel, KernelArg};
use planar_eikonal::target::{
    amplitude_a, q_convert, AtomSpecies, Direction, ProjectileSpec, TargetSpec, UnitSystem,
};
use planar_eikonal::xsec::structure_factor;
use proptest::prelude::*;

fn kernel(xi: f64) -> f64 {
    plane_kernel(KernelArg::new(xi).unwrap())
}

fn stack(n: usize, spacing: f64, amplitude: f64, sign: f64) -> ChiProfile {
    let xs = (0..n)
        .map(|k| (k as f64 - 0.5 * (n as f64 - 1.0)) * spacing)
        .collect();
    ChiProfile::new(amplitude, 14.0 / 137.036, xs, sign).unwrap()
}

#[test]
fn kernel_strictly_decreasing_on_dense_grid() {
    let values: Vec<f64> = (0..1000).map(|i| kernel(i as f64 * 0.1)).collect();
    assert_eq!(values[0], 1.0);
    for w in values.windows(2) {
        // Past ξ ≈ 745 the kernel underflows; the grid stops at 100.
        assert!(w[1] < w[0], "{} !< {}", w[1], w[0]);
        assert!(w[1] > 0.0);
    }
}

#[test]
fn centered_stack_is_even() {
    for n in 1..=5 {
        let p = stack(n, 7.0, 10.0, 1.0);
        for i in 0..200 {
            let x = i as f64 * 0.173;
            assert!(
                (p.phase_f(x) - p.phase_f(-x)).norm() <= 1e-12 * p.phase_f(x).norm().max(1e-300)
            );
            assert_eq!(
                p.single_plane().plane_mean(x),
                p.single_plane().plane_mean(-x)
            );
        }
    }
}

#[test]
fn schwarz_bound_on_dense_grid() {
    // Re(F + F') + G̃ ≤ 0 is what keeps |e^{F+F'+G̃}| ≤ 1.
    for (n, a) in [(1, 10.0), (3, 10.0), (5, 1.0)] {
        let p = stack(n, 7.0, a, 1.0);
        let half = 0.5 * (n as f64 - 1.0) * 7.0 + 8.0;
        for i in 0..200 {
            for j in 0..200 {
                let x = -half + 2.0 * half * i as f64 / 199.0;
                let xp = -half + 2.0 * half * j as f64 / 199.0;
                let c = p.cumulant_phases(x, xp);
                let s = c.f.re + c.f_prime.re + c.g_tilde;
                assert!(s <= 1e-12 * p.max_phase_scale(), "{s} at ({x}, {xp})");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kernel_in_unit_interval(xi in 0.0f64..800.0) {
        let s = kernel(xi);
        prop_assert!((0.0..=1.0).contains(&s));
        if xi < 700.0 {
            prop_assert!(s > 0.0);
        }
    }

    #[test]
    fn kernel_monotone(a in 0.0f64..100.0, d in 1e-6f64..10.0) {
        prop_assert!(kernel(a + d) < kernel(a));
    }

    #[test]
    fn structure_factor_bounds_and_evenness(n in 1usize..8, spacing in 3.0f64..12.0, q in -20.0f64..20.0) {
        let xs: Vec<f64> = (0..n).map(|k| k as f64 * spacing).collect();
        let d = structure_factor(q, &xs);
        let n2 = (n * n) as f64;
        prop_assert!(d >= 0.0 && d <= n2 * (1.0 + 1e-12));
        prop_assert!((d - structure_factor(-q, &xs)).abs() <= 1e-12 * n2);
    }

    #[test]
    fn structure_factor_shift_invariant(n in 1usize..8, spacing in 3.0f64..12.0, q in 0.0f64..20.0, shift in -50.0f64..50.0) {
        let xs: Vec<f64> = (0..n).map(|k| k as f64 * spacing).collect();
        let moved: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        let n2 = (n * n) as f64;
        prop_assert!((structure_factor(q, &xs) - structure_factor(q, &moved)).abs() <= 1e-12 * n2);
    }

    #[test]
    fn structure_factor_period_mean(n in 1usize..8, spacing in 3.0f64..12.0) {
        let xs: Vec<f64> = (0..n).map(|k| k as f64 * spacing).collect();
        let m = 2048;
        let mean = (0..m).map(|i| structure_factor(2.0 * PI / spacing * i as f64 / m as f64, &xs)).sum::<f64>() / m as f64;
        prop_assert!((mean - n as f64).abs() <= 1e-10 * n as f64);
    }

    #[test]
    fn phase_bounds(n in 1usize..6, a in 0.01f64..30.0, repulsive in any::<bool>(), x in -40.0f64..40.0, xp in -40.0f64..40.0) {
        let p = stack(n, 7.0, a, if repulsive { -1.0 } else { 1.0 });
        let c = p.cumulant_phases(x, xp);
        prop_assert!(c.f.exp().norm() <= 1.0 + 1e-15);
        prop_assert!(c.f_prime.exp().norm() <= 1.0 + 1e-15);
        prop_assert!((c.f + c.f_prime + Complex64::new(c.g_tilde, 0.0)).exp().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn profiles_even_and_symmetric(a in 0.01f64..30.0, x in -30.0f64..30.0, xp in -30.0f64..30.0) {
        let p = stack(1, 7.0, a, 1.0);
        prop_assert_eq!(p.plane_mean(x), p.plane_mean(-x));
        prop_assert_eq!(p.plane_sq(x), p.plane_sq(-x));
        prop_assert_eq!(p.plane_corr(x, xp), p.plane_corr(xp, x));
        prop_assert_eq!(p.plane_corr(x, xp), p.plane_corr(-x, -xp));
        prop_assert!((p.plane_corr(x, x) - p.plane_sq(x)).abs() <= 1e-14 * p.plane_sq(x).max(1e-300));
    }

    #[test]
    fn correlation_bounded_by_variances(a in 0.01f64..30.0, x in -30.0f64..30.0, xp in -30.0f64..30.0) {
        let p = stack(1, 7.0, a, 1.0);
        let c = p.plane_corr(x, xp);
        prop_assert!(c * c <= p.plane_sq(x) * p.plane_sq(xp) * (1.0 + 1e-12));
    }

    #[test]
    fn q_round_trip(q in 0.0f64..1e3, z in 1u32..90) {
        let units = UnitSystem::for_species(&AtomSpecies::thomas_fermi(z).unwrap());
        let back = q_convert(q_convert(q, Direction::ToPhysical, &units), Direction::ToInternal, &units);
        prop_assert!((back - q).abs() <= 1e-14 * q.max(1.0));
    }

    #[test]
    fn amplitude_independent_of_plane_height(scale in 0.1f64..10.0) {
        let (t, _) = TargetSpec::silicon_100(1);
        let proj = ProjectileSpec::electron();
        let taller = TargetSpec { length_y: t.length_y * scale, ..t.clone() };
        let a = amplitude_a(&t, &proj);
        prop_assert!((amplitude_a(&taller, &proj) - a).abs() <= 1e-12 * a);
        let areal = t.atoms_per_plane() / t.length_y;
        prop_assert!((taller.atoms_per_plane() / taller.length_y - areal).abs() <= 1e-12 * areal);
        // Trading height for density keeps the atom count.
        let traded = TargetSpec { length_y: t.length_y * scale, conc_2d: t.conc_2d / scale, ..t.clone() };
        prop_assert!((traded.atoms_per_plane() - t.atoms_per_plane()).abs() <= 1e-12 * t.atoms_per_plane());
    }

    #[test]
    fn amplitude_linear_in_each_factor(k in 0.1f64..10.0) {
        let (t, _) = TargetSpec::silicon_100(1);
        let proj = ProjectileSpec::electron();
        let base = amplitude_a(&t, &proj);
        let scaled = [
            amplitude_a(&TargetSpec { length_z: t.length_z * k, ..t.clone() }, &proj),
            amplitude_a(&TargetSpec { conc_2d: t.conc_2d * k, ..t.clone() }, &proj),
            amplitude_a(&t, &ProjectileSpec { charge: proj.charge * k, ..proj }),
        ];
        for a in scaled {
            prop_assert!((a - k * base).abs() <= 1e-12 * k * base);
        }
        let doubled = TargetSpec { species: AtomSpecies { z: 28, ..t.species }, ..t.clone() };
        prop_assert!((amplitude_a(&doubled, &proj) - 2.0 * base).abs() <= 1e-12 * base);
    }
}
