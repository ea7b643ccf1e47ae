use std::f64::consts::PI;

use ffgas_core::statmech::fermi;
use ffgas_core::*;
use proptest::prelude::*;

fn soft() -> Confinement {
    Confinement::soft_from_length(1.0, Units::NATURAL).unwrap()
}

fn hard() -> Confinement {
    Confinement::hard_wall(Units::NATURAL)
}

fn kinematics() -> impl Strategy<Value = KinematicSample> {
    (0.5f64..4.0, -2.0f64..2.0, -1.0f64..1.0).prop_map(|(l, v, s)| KinematicSample::new(0.0, l, v, s / l.powi(3)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn soft_bernoulli_identity(n in 0u32..20_000, k in kinematics()) {
        let conf = soft();
        let f = level_force(&conf, n, &k).unwrap();
        let e = level_energy_ff(&conf, n, &k).unwrap();
        let rhs = f64::from(2 * n + 1) * (0.75 * k.length * k.acceleration - 0.5 * k.velocity * k.velocity);
        let scale = (f * k.length).abs() + 2.0 * e.abs();
        prop_assert!((f * k.length - 2.0 * e - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn box_bernoulli_identity(n in 1u32..20_000, k in kinematics()) {
        let conf = hard();
        let f = level_force(&conf, n, &k).unwrap();
        let e = level_energy_ff(&conf, n, &k).unwrap();
        let c = 1.0 / 6.0 - 1.0 / (4.0 * PI * PI * f64::from(n).powi(2));
        let rhs = c * (3.0 * k.length * k.acceleration - 2.0 * k.velocity * k.velocity);
        let scale = (f * k.length).abs() + 2.0 * e.abs();
        prop_assert!((f * k.length - 2.0 * e - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn energy_scales_as_inverse_square(n in 1u32..1000, l in 0.1f64..10.0) {
        for conf in [soft(), hard()] {
            let e1 = energy(&conf, n, 1.0).unwrap();
            let el = energy(&conf, n, l).unwrap();
            prop_assert!((el * l * l / e1 - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn fermi_is_a_reflection(x in -700.0f64..700.0) {
        prop_assert!((fermi(x) + fermi(-x) - 1.0).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&fermi(x)));
    }

    #[test]
    fn velocity_is_the_derivative_of_length(t in 0.01f64..0.99, v in -0.4f64..1.0) {
        let tr = Trajectory::new(1.0, v, 1.0).unwrap();
        let h = 1e-5;
        let fd = (tr.kinematics(t + h).unwrap().length - tr.kinematics(t - h).unwrap().length) / (2.0 * h);
        let ad = (tr.kinematics(t + h).unwrap().velocity - tr.kinematics(t - h).unwrap().velocity) / (2.0 * h);
        let k = tr.kinematics(t).unwrap();
        prop_assert!((fd - k.velocity).abs() < 1e-8);
        prop_assert!((ad - k.acceleration).abs() < 1e-7);
    }

    #[test]
    fn occupations_count_the_particles(half in 1u32..60, t in 0.05f64..50.0) {
        let n = 2 * half;
        for conf in [soft(), hard()] {
            let ens = Ensemble::new(&conf, n, t, 1.0).unwrap();
            prop_assert!((ens.particle_count() - f64::from(n)).abs() < 1e-9 * f64::from(n));
            // Filling never increases with level index.
            prop_assert!(ens.occupations.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn effective_temperature_keeps_occupations(t in 0.0f64..1.0, t0 in 0.5f64..20.0) {
        let conf = soft();
        let tr = Trajectory::between(1.0, 2.5, 1.0).unwrap();
        let ens = Ensemble::new(&conf, 20, t0, 1.0).unwrap();
        let l = tr.kinematics(t).unwrap().length;
        let te = effective_temperature(&tr, t0, t).unwrap();
        prop_assert!((te - ens.temperature_at(l)).abs() <= 1e-14 * te);
        let again = ens.occupations_at(&conf, l).unwrap();
        for (a, b) in again.iter().zip(&ens.occupations) {
            prop_assert!((a - b).abs() <= 1e-13);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn theta_integral_matches_closed_form(n in 0u32..6, l in 0.5f64..3.0) {
        let conf = soft();
        let grid = Grid::for_soft(l, n, 401).unwrap();
        let closed = theta_phase(&conf, l, &grid).unwrap();
        let integral = theta_from_integral(&conf, n, l, &grid).unwrap();
        for (a, b) in closed.iter().zip(&integral.theta) {
            prop_assert!((a - b).abs() < 1e-8, "n={} L={}: {} vs {}", n, l, a, b);
        }
    }

    #[test]
    fn driven_state_modulus_is_the_eigenfunction(n in 0u32..8, t in 0.0f64..1.5) {
        let conf = soft();
        let tr = Trajectory::between(1.0, 2.0, 1.0).unwrap();
        let l = tr.kinematics(t).unwrap().length;
        let grid = Grid::for_soft(l, n, 513).unwrap();
        let wf = ff_wavefunction(&conf, &tr, n, t, &grid).unwrap();
        let phi = eigenfunction(&conf, n, l, &grid).unwrap();
        for (z, p) in wf.psi.iter().zip(&phi) {
            prop_assert!((z.norm() - p.abs()).abs() < 1e-14);
        }
        prop_assert!((wf.norm_squared() - 1.0).abs() < 1e-10);
    }
}
