use proptest::prelude::*;

use fheat::boundary::{boundary_psi, small_r_check};
use fheat::estimates::{
    cutoff_profile, harnack_holds, radial_derivative, reaction_bounds_over,
    required_harnack_constant,
};
use fheat::geometry::{ModelSpace, Warp, Weight};
use fheat::linalg::Tridiagonal;
use fheat::solver::{
    constant_ode_oracle, discrete_f_laplacian, solve, EquationSpec, Grid, SolverConfig, TimeWindow,
};

fn warp() -> impl Strategy<Value = Warp> {
    prop_oneof![
        Just(Warp::Euclidean),
        (0.2..2.0f64).prop_map(|k| Warp::Hyperbolic { curvature: k }),
        (0.2..1.0f64).prop_map(|k| Warp::Spherical { curvature: k }),
    ]
}

fn weight() -> impl Strategy<Value = Weight> {
    prop_oneof![
        Just(Weight::Zero),
        (0.1..2.0f64).prop_map(|l| Weight::GaussianHalfSquare { lambda: l })
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thomas_solves_dominant_systems(
        rows in prop::collection::vec((-1.0..1.0f64, 2.5..4.0f64, -1.0..1.0f64, -5.0..5.0f64), 3..40)
    ) {
        let mut m = Tridiagonal::zeros(rows.len());
        let mut rhs = Vec::new();
        for (i, (l, d, u, b)) in rows.iter().enumerate() {
            m.lower[i] = *l;
            m.diag[i] = *d;
            m.upper[i] = *u;
            rhs.push(*b);
        }
        let x = m.solve(&rhs).unwrap();
        let back = m.mul_vec(&x);
        for (a, b) in back.iter().zip(&rhs) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn f_laplacian_annihilates_constants(n in 2usize..6, warp in warp(), weight in weight(), c in 0.1..10.0f64) {
        let space = ModelSpace::new(n, warp, weight, 2.5).unwrap();
        let grid = Grid::ball(2.5, 65).unwrap();
        let lap = discrete_f_laplacian(&space, &grid, &vec![c; 65]).unwrap();
        prop_assert!(lap.iter().all(|v| v.abs() <= 1e-12 * c));
    }

    #[test]
    fn heat_flow_obeys_the_maximum_principle(
        warp in warp(),
        weight in weight(),
        data in prop::collection::vec(0.1..2.0f64, 6),
    ) {
        let space = ModelSpace::new(3, warp, weight, 2.5).unwrap();
        let grid = Grid::ball(2.5, 49).unwrap();
        let init = grid.sample(|r| {
            data.iter().enumerate().map(|(k, a)| a * (k as f64 * std::f64::consts::PI * r / 2.5).cos()).sum::<f64>().abs() + 0.05
        });
        let (lo, hi) = init.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        let window = TimeWindow::uniform(0.1, 0.1, 2).unwrap();
        let traj = solve(&space, &EquationSpec::heat(), &grid, &init, &window, &SolverConfig::with_dt(0.01)).unwrap();
        for s in &traj.snapshots {
            prop_assert!(s.values.iter().all(|&v| v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn absorbing_signs_give_h1_equal_h0(
        a in -2.0..2.0f64, b in -2.0..2.0f64, big_a in -2.0..0.0f64, big_b in 0.0..2.0f64,
        p in 1.0..4.0f64, q in 0.0..3.0f64, lo in 0.05..0.5f64, hi in 0.5..1.0f64,
    ) {
        let eq = EquationSpec::log_power(a, b, big_a, big_b, p, q);
        let bounds = reaction_bounds_over(&eq, [lo, hi]);
        prop_assert_eq!(bounds.h1, bounds.h0);
    }

    #[test]
    fn rescaling_conjugates_the_reaction(
        a in -2.0..2.0f64, b in -2.0..2.0f64, big_a in -2.0..2.0f64, big_b in -2.0..2.0f64,
        p in 1.0..4.0f64, q in 0.0..3.0f64, c in 0.2..5.0f64, u in 0.05..3.0f64,
    ) {
        let eq = EquationSpec::log_power(a, b, big_a, big_b, p, q);
        let lhs = eq.rescale(c).unwrap().reaction(u / c).unwrap().0;
        let rhs = eq.reaction(u).unwrap().0 / c;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn harnack_constant_is_the_threshold(
        u1 in 0.05..1.0f64, u2 in 0.05..1.0f64, rho in 0.1..4.0f64, tau in 0.1..3.0f64, k in 0.0..2.0f64,
    ) {
        let c = required_harnack_constant(u1, u2, rho, tau, k);
        prop_assert!(c.is_finite() && c >= 0.0);
        prop_assert!(harnack_holds(c, u1, u2, rho, tau, k));
        prop_assert!(harnack_holds(2.0 * c + 1.0, u1, u2, rho, tau, k));
        if c > 1e-9 {
            prop_assert!(!harnack_holds(0.99 * c, u1, u2, rho, tau, k));
        }
    }

    #[test]
    fn ode_oracle_is_a_semigroup(u0 in 0.05..2.0f64, t1 in 0.0..1.0f64, t2 in 0.0..1.0f64, b in -1.0..1.0f64) {
        let eq = EquationSpec::log_power(-1.0, b, 0.0, 0.0, 1.0, 0.0);
        let once = constant_ode_oracle(&eq, u0, t1 + t2).unwrap();
        let twice = constant_ode_oracle(&eq, constant_ode_oracle(&eq, u0, t1).unwrap(), t2).unwrap();
        prop_assert!((once - twice).abs() <= 1e-12 * once);
    }

    #[test]
    fn radial_derivative_is_exact_on_quadratics(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64) {
        let dr = 0.05;
        let v: Vec<f64> = (0..41).map(|i| { let r = i as f64 * dr; a + b * r + c * r * r }).collect();
        let d = radial_derivative(&v, dr);
        for (i, g) in d.iter().enumerate() {
            let r = i as f64 * dr;
            prop_assert!((g - (b + 2.0 * c * r)).abs() <= 1e-9);
        }
    }

    #[test]
    fn boundary_psi_stays_in_its_bounds(h in 0.0..5.0f64, s in 0.0..3.0f64) {
        let (psi, d, d2) = boundary_psi(h, s);
        prop_assert!(psi >= 0.0 && psi <= h);
        prop_assert!(d >= 0.0 && d <= h);
        prop_assert!(d2 >= -h);
    }

    #[test]
    fn small_r_check_is_monotone(k in -1.0..2.0f64, h in 0.0..3.0f64, r in 0.01..0.6f64, shrink in 0.1..1.0f64) {
        if small_r_check(k, h, r).holds {
            prop_assert!(small_r_check(k, h, r * shrink).holds);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn cutoff_properties_hold(eps in 0.05..0.95f64, radius in 0.5..3.0f64, tau in 0.2..0.9f64) {
        let p = cutoff_profile(radius, 1.0, 1.0, tau, eps).unwrap();
        prop_assert!(p.properties_hold);
        prop_assert!(p.c_eps.is_finite() && p.c_eps_bounded);
        prop_assert!((p.c_time - 2.0).abs() < 1e-9);
    }
}
