//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use jacobi_flow::catalog;
use jacobi_flow::flow::{
    integrate, reparametrize, Direction, FlowState, HamiltonFlow, IntegrateOptions, JacobiFlow, PlanarChart, Trajectory,
};
use jacobi_flow::jacobi::MechanicalSystem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn kepler(k: f64, m: f64, energy: f64) -> MechanicalSystem {
    catalog::kepler(k, m, 1.0).unwrap().mechanical(energy).unwrap()
}

/// Apsis start `(r0, 0)`, `p = (0, L)` with `L` fixed by the energy.
pub fn apsis_start(sys: &MechanicalSystem, r0: f64) -> FlowState {
    let u = sys.potential.value(&[r0, 0.0], 0.0);
    let l = r0 * (2.0 * sys.mass() * (sys.energy() - u)).sqrt();
    FlowState::new(0.0, vec![r0, 0.0], vec![0.0, l]).unwrap()
}

/// `2π√(m a³/k)` with `a = k / 2|E|`.
pub fn kepler_period(k: f64, m: f64, energy: f64) -> f64 {
    let a = k / (2.0 * energy.abs());
    2.0 * PI * (m * a.powi(3) / k).sqrt()
}

pub fn dense(span: f64) -> IntegrateOptions {
    IntegrateOptions::default().with_max_step(span * 1e-4)
}

pub fn hamilton(sys: &MechanicalSystem, start: &FlowState, span: f64, opts: &IntegrateOptions) -> Trajectory {
    integrate(
        &HamiltonFlow::new(sys.clone()).with_chart(PlanarChart::Polar),
        start,
        span,
        opts,
    )
    .unwrap()
}

pub fn jacobi(sys: &MechanicalSystem, start: &FlowState, span: f64, opts: &IntegrateOptions) -> Trajectory {
    integrate(
        &JacobiFlow::new(sys.clone()).with_chart(PlanarChart::Polar),
        start,
        span,
        opts,
    )
    .unwrap()
}

/// Jacobi length of a time-parametrized run.
pub fn jacobi_length(sys: &MechanicalSystem, traj: &Trajectory) -> f64 {
    reparametrize(traj, Direction::TToS, sys).unwrap().last().unwrap().param
}

/// Time between the start (an apsis with `p_r = 0`) and the first return of
/// `p_r` to zero from the same side, from a dense Hamilton run.
pub fn radial_period(sys: &MechanicalSystem, start: &FlowState, horizon: f64) -> f64 {
    let traj = hamilton(
        sys,
        start,
        horizon,
        &IntegrateOptions::default().with_max_step(horizon * 1e-5),
    );
    let s = traj.states();
    let initial_sign = s.iter().find(|st| st.p[0] != 0.0).map(|st| st.p[0].signum()).unwrap();
    let mut left = false;
    for w in s.windows(2) {
        let (a, b) = (w[0].p[0], w[1].p[0]);
        if !left && a * initial_sign > 0.0 && b * initial_sign < 0.0 {
            left = true;
        } else if left && a * initial_sign < 0.0 && b * initial_sign >= 0.0 {
            // linear interpolation of the crossing
            return w[0].param + (w[1].param - w[0].param) * a / (a - b);
        }
    }
    panic!("no full radial oscillation within {horizon}");
}

pub fn polar_to_cartesian(x: &[f64]) -> Vec<f64> {
    vec![x[0] * x[1].cos(), x[0] * x[1].sin()]
}

pub fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// One instance of every catalog family, with generic parameters.
pub fn catalog_entries() -> Vec<catalog::CatalogEntry> {
    vec![
        catalog::schwarzschild(1.0, 1.0, 1.0).unwrap(),
        catalog::schwarzschild(0.7, 2.0, 3.0).unwrap(),
        catalog::taub_nut(1.0, 0.5).unwrap(),
        catalog::bertrand_kepler(1.0, 1.0).unwrap(),
        catalog::bertrand_perlick(1.0, 0.1, 1.0, 1.0).unwrap(),
        catalog::kerr(1.0, 0.6, 1.0, 1.0, 1.0).unwrap(),
        catalog::kepler(1.0, 1.5, 1.0).unwrap(),
    ]
}
