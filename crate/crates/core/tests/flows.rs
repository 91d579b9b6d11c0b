mod common;

use common::*;
use jacobi_flow::catalog;
use jacobi_flow::field::ScalarField;
use jacobi_flow::flow::{
    compare_paths_with, integrate, integrate_verlet, reparametrize, Direction, FlowState, HamiltonFlow,
    IntegrateOptions, JacobiFlow, ParameterKind, PlanarChart, Termination,
};
use jacobi_flow::jacobi::MechanicalSystem;
use jacobi_flow::metric::MetricField;
use jacobi_flow::Error;
use proptest::prelude::*;

fn cartesian_kepler(energy: f64) -> MechanicalSystem {
    let u = ScalarField::new(|x| -1.0 / x[0].hypot(x[1])).with_gradient(|x, _| {
        let r3 = x[0].hypot(x[1]).powi(3);
        vec![x[0] / r3, x[1] / r3]
    });
    MechanicalSystem::new(MetricField::euclidean(2), u, 1.0, energy).unwrap()
}

#[test]
fn energy_is_conserved_over_ten_periods() {
    // Default tolerances alone give ~7e-9 at e = 0.5; capping the step at
    // T/1000 (what the CLI does) brings it well under 1e-9.
    let sys = kepler(1.0, 1.0, -0.5);
    let start = apsis_start(&sys, 0.5);
    let span = 10.0 * kepler_period(1.0, 1.0, -0.5);
    let traj = hamilton(&sys, &start, span, &dense(span));
    assert_eq!(traj.termination(), Termination::Completed);
    let drift = traj.monitor_drift("energy", 1e-12).unwrap();
    assert!(drift < 1e-9, "energy drift {drift:e}");
}

#[test]
fn kepler_period_matches_radial_return() {
    let sys = kepler(1.0, 1.0, -0.5);
    let start = apsis_start(&sys, 0.5);
    let t = radial_period(&sys, &start, 10.0);
    assert!(rel(t, kepler_period(1.0, 1.0, -0.5)) < 1e-6, "{t}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Bound Kepler orbits: the Jacobi flow stays on `H̃ = 1`, conserves
    /// Clairaut's constant, and traces the Hamilton path.
    #[test]
    fn jacobi_flow_matches_hamilton(e in -0.8..-0.2f64, frac in 0.3..0.9f64) {
        let sys = kepler(1.0, 1.0, e);
        // Start between periapsis and the circular radius.
        let r0 = frac / (2.0 * e.abs()) + (1.0 - frac) * 0.3 / e.abs();
        let start = apsis_start(&sys, r0);
        let period = kepler_period(1.0, 1.0, e);
        let ham = hamilton(&sys, &start, period, &dense(period));
        let s = jacobi_length(&sys, &ham);
        let jac = jacobi(&sys, &start, s, &dense(s));
        prop_assert_eq!(jac.termination(), Termination::Completed);
        prop_assert!(jac.monitor_deviation("H_tilde", 1.0).unwrap() < 1e-8);
        prop_assert!(jac.monitor_drift("clairaut", 1e-12).unwrap() < 1e-9);
        let r_t = ham.first().unwrap().monitor("clairaut").unwrap();
        let r_s = jac.first().unwrap().monitor("clairaut").unwrap();
        prop_assert!(rel(r_s, r_t) < 1e-12);
        let dev = compare_paths_with(&ham, &jac, polar_to_cartesian).unwrap();
        prop_assert!(dev < 1e-6, "path deviation {dev:e}");
    }
}

#[test]
fn perlick_paths_coincide() {
    let entry = catalog::bertrand_perlick(1.0, 0.1, 1.0, 1.0).unwrap();
    let start = FlowState::new(0.0, vec![1.0, 0.0], vec![0.0, 0.3]).unwrap();
    let sys = entry
        .mechanical(0.0)
        .unwrap()
        .with_energy_from(&start.x, &start.p)
        .unwrap();
    let period = radial_period(&sys, &start, 60.0);
    let ham = hamilton(&sys, &start, period, &dense(period));
    let s = jacobi_length(&sys, &ham);
    let jac = jacobi(&sys, &start, s, &dense(s));
    let dev = compare_paths_with(&ham, &jac, polar_to_cartesian).unwrap();
    assert!(dev < 1e-6, "{dev:e}");
    // Back at the starting apsis after one radial period.
    assert!((ham.last().unwrap().x[0] - 1.0).abs() < 1e-6);
}

#[test]
fn verlet_energy_error_stays_bounded() {
    let sys = cartesian_kepler(-0.5);
    let l = 0.5 * (2.0 * (-0.5 + 2.0f64)).sqrt();
    let start = FlowState::new(0.0, vec![0.5, 0.0], vec![0.0, l / 0.5]).unwrap();
    let period = kepler_period(1.0, 1.0, -0.5);
    let flow = HamiltonFlow::new(sys.clone());
    let traj = integrate_verlet(&flow, &start, 1000.0 * period, period / 500.0, 50).unwrap();
    let e0 = -0.5;
    let errs: Vec<f64> = traj
        .states()
        .iter()
        .map(|s| (s.monitor("energy").unwrap() - e0).abs())
        .collect();
    let per_period = 10;
    let early = errs[..10 * per_period].iter().cloned().fold(0.0, f64::max);
    let late = errs[errs.len() - 10 * per_period..].iter().cloned().fold(0.0, f64::max);
    // Symplectic: the error oscillates without a secular trend.
    assert!(late < 1.5 * early, "early {early:e}, late {late:e}");
    assert!(late < 1e-2);
}

#[test]
fn verlet_needs_a_constant_metric() {
    let sys = kepler(1.0, 1.0, -0.5);
    let start = apsis_start(&sys, 0.5);
    assert!(matches!(
        integrate_verlet(&HamiltonFlow::new(sys), &start, 1.0, 0.01, 1),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn reparametrize_round_trip() {
    let sys = kepler(1.0, 1.0, -0.5);
    let start = apsis_start(&sys, 0.5);
    let ham = hamilton(&sys, &start, 5.0, &IntegrateOptions::default());
    let s = reparametrize(&ham, Direction::TToS, &sys).unwrap();
    assert_eq!(s.parameter_kind(), ParameterKind::JacobiS);
    let back = reparametrize(&s, Direction::SToT, &sys).unwrap();
    for (a, b) in ham.states().iter().zip(back.states()) {
        assert!((a.param - b.param).abs() < 1e-12);
        assert_eq!(a.x, b.x);
    }
    assert!(reparametrize(&ham, Direction::SToT, &sys).is_err());
}

#[test]
fn jacobi_flow_stops_at_a_turning_point() {
    // Radial fall from rest at the apocentre: 2m(E − U) vanishes at the start.
    let sys = kepler(1.0, 1.0, -0.5);
    let at_rest = FlowState::new(0.0, vec![2.0, 0.0], vec![0.0, 0.0]).unwrap();
    let flow = JacobiFlow::new(sys.clone()).with_chart(PlanarChart::Polar);
    let outcome = integrate(&flow, &at_rest, 1.0, &IntegrateOptions::default());
    match outcome {
        Ok(traj) => assert_eq!(traj.termination(), Termination::TurningPoint),
        Err(e) => assert!(matches!(e, Error::TurningPoint { .. }), "{e}"),
    }
    // Hamilton's flow is indifferent to it.
    let ham = hamilton(&sys, &at_rest, 1.0, &IntegrateOptions::default());
    assert_eq!(ham.termination(), Termination::Completed);
    assert!(ham.last().unwrap().x[0] < 2.0);
}

#[test]
fn infall_towards_the_horizon_ends_early() {
    let entry = catalog::schwarzschild(1.0, 1.0, 1.0).unwrap();
    let sys = entry.mechanical(-0.1).unwrap();
    let start = FlowState::new(0.0, vec![3.0, std::f64::consts::FRAC_PI_2, 0.0], vec![-2.0, 0.0, 0.0]).unwrap();
    // g^rr → 0 while p_r diverges, so steps shrink without bound; a step
    // budget turns that into a StepFailure instead of a long stall.
    let opts = IntegrateOptions {
        max_steps: 100_000,
        ..Default::default()
    };
    let traj = integrate(&HamiltonFlow::new(sys), &start, 50.0, &opts).unwrap();
    assert_ne!(traj.termination(), Termination::Completed);
    assert!(traj.last().unwrap().x[0] > 2.0);
    assert!(traj.last().unwrap().param < 50.0);
}
