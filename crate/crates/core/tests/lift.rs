mod common;

use std::f64::consts::PI;

use common::rel;
use jacobi_flow::field::ScalarField;
use jacobi_flow::flow::{compare_paths, integrate, FlowState, HamiltonFlow, IntegrateOptions, Termination};
use jacobi_flow::jacobi::MechanicalSystem;
use jacobi_flow::lift::{lift_static, lift_time_dependent, lifted_energy_relation, LiftKind, PzNormalization};
use jacobi_flow::metric::MetricField;
use jacobi_flow::Error;
use proptest::prelude::*;

fn anisotropic() -> ScalarField {
    ScalarField::new(|x| 0.5 * (x[0] * x[0] + 4.0 * x[1] * x[1])).with_gradient(|x, _| vec![x[0], 4.0 * x[1]])
}

fn driven(eps: f64) -> ScalarField {
    ScalarField::time_dependent(move |x, t| 0.5 * (1.0 + eps * t.sin()) * x[0] * x[0])
        .with_gradient(move |x, t| vec![(1.0 + eps * t.sin()) * x[0]])
}

#[test]
fn static_lift_projects_onto_hamilton_flow() {
    let g = MetricField::euclidean(2);
    let (x0, p0) = ([1.0, 0.2], [0.0, 0.7]);
    let opts = IntegrateOptions::default().with_sample_interval(0.01);
    let mech = MechanicalSystem::new(g.clone(), anisotropic(), 1.0, 0.0).unwrap();
    let direct = integrate(
        &HamiltonFlow::new(mech),
        &FlowState::new(0.0, x0.to_vec(), p0.to_vec()).unwrap(),
        15.0,
        &opts,
    )
    .unwrap();
    for norm in [PzNormalization::Unit, PzNormalization::Sqrt2] {
        let lifted = lift_static(&g, &anisotropic(), 1.0, norm).unwrap();
        assert_eq!(lifted.kind(), LiftKind::StaticZ);
        let traj = integrate(
            &lifted.flow(),
            &lifted.initial_state(&x0, &p0, 0.0).unwrap(),
            15.0,
            &opts,
        )
        .unwrap();
        // Census: K, p_z and the mechanical energy are all conserved.
        for name in ["K", "p_z", "energy"] {
            let drift = traj.monitor_drift(name, 1e-12).unwrap();
            assert!(drift < 1e-9, "{norm:?} {name} drift {drift:e}");
        }
        assert!(traj.monitor_deviation("legendre", 0.0).unwrap() < 1e-12);
        let projected = lifted.project(&traj).unwrap();
        assert!(compare_paths(&projected, &direct).unwrap() < 1e-7);
    }
}

#[test]
fn sigma_lift_census() {
    let g = MetricField::euclidean(1);
    let lifted = lift_time_dependent(&g, &driven(0.1), 1.0, 1.0).unwrap();
    let opts = IntegrateOptions::default().with_sample_interval(0.01);
    let traj = integrate(
        &lifted.flow(),
        &lifted.initial_state(&[1.0], &[0.0], 0.0).unwrap(),
        20.0 * PI,
        &opts,
    )
    .unwrap();
    assert_eq!(traj.termination(), Termination::Completed);
    // Conserved: K and p_σ. Not conserved: p_t and the mechanical energy.
    assert!(traj.monitor_drift("p_sigma", 1e-12).unwrap() < 1e-9);
    assert!(traj.monitor_drift("K", 1e-12).unwrap() < 1e-9);
    assert!(traj.monitor_drift("p_t", 1e-12).unwrap() > 1e-3);
    assert!(traj.monitor_drift("energy", 1e-12).unwrap() > 1e-3);
    assert!(traj.monitor_deviation("mass_shell", 0.0).unwrap() < 1e-8);
    assert!(traj.monitor_deviation("legendre", 0.0).unwrap() < 1e-9);
    // The affine parameter and the t coordinate advance together.
    for s in traj.states() {
        assert!((s.x[1] - s.param).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// On the `p_z = √2` slice the lifted Hamiltonian equals the mechanical one.
    #[test]
    fn static_lift_reduces_to_h(x in -3.0..3.0f64, y in -3.0..3.0f64, px in -3.0..3.0f64, py in -3.0..3.0f64, z in -5.0..5.0f64) {
        let g = MetricField::euclidean(2);
        let mech = MechanicalSystem::new(g.clone(), anisotropic(), 1.0, 0.0).unwrap();
        let h = mech.hamiltonian(&[x, y], &[px, py], 0.0).unwrap();
        for norm in [PzNormalization::Unit, PzNormalization::Sqrt2] {
            let k = lift_static(&g, &anisotropic(), 1.0, norm).unwrap().hamiltonian(&[x, y, z], &[px, py, norm.p_z()]).unwrap();
            prop_assert!((k - h).abs() <= 1e-12 * h.abs().max(1.0));
        }
    }

    /// Initial σ-lift states sit on the mass shell.
    #[test]
    fn sigma_initial_state_is_on_shell(x in -3.0..3.0f64, p in -3.0..3.0f64, t in 0.0..10.0f64, c in 0.5..3.0f64) {
        let lifted = lift_time_dependent(&MetricField::euclidean(1), &driven(0.3), 1.2, c).unwrap();
        let st = lifted.initial_state(&[x], &[p], t).unwrap();
        let residual = lifted_energy_relation(&lifted, &st).unwrap();
        prop_assert!(residual.abs() < 1e-12 * st.p[1].abs().max(1.0) * c * c);
        prop_assert_eq!(st.p[0], -p);
        prop_assert!(rel(st.p[2], 1.2 * c) < 1e-15);
    }
}

#[test]
fn static_metric_is_undefined_where_v_vanishes() {
    let lifted = lift_static(
        &MetricField::euclidean(1),
        &ScalarField::new(|x| 0.5 * x[0] * x[0]),
        1.0,
        PzNormalization::Unit,
    )
    .unwrap();
    assert!(matches!(
        lifted.extended_metric().eval(&[0.0, 0.0], 0.0),
        Err(Error::DomainViolation(_))
    ));
    // The cometric stays regular there.
    assert!(lifted.cometric(&[0.0, 0.0]).is_ok());
    assert!(lift_static(
        &MetricField::euclidean(1),
        &ScalarField::constant(1.0),
        0.0,
        PzNormalization::Unit
    )
    .is_err());
    assert!(lift_time_dependent(&MetricField::euclidean(1), &ScalarField::constant(1.0), 1.0, 0.0).is_err());
}
