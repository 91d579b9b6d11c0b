use std::ffi::{CStr, CString};
use std::ptr;

use jacobi_flow_ffi::*;

fn last_error() -> String {
    let p = jf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn kepler(energy: f64) -> *mut JfSystem {
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { jf_system_kepler(1.0, 1.0, energy, &mut sys) }, JfStatus::Ok);
    sys
}

#[test]
fn curvature_matches_closed_form() {
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        assert_eq!(jf_kepler_curvature(1.0, 0.5, 2.0, &mut a), JfStatus::Ok);
        assert_eq!(jf_kepler_curvature_numeric(1.0, 0.5, 2.0, &mut b), JfStatus::Ok);
    }
    // f² = (Er + k)/r, rf = √(r(Er + k)), (rf)'/f = 1 − k/(2(Er + k)),
    // K = −(1/(r f²))·kE/(2(Er + k)²) = −1/32 at k = 1, E = ½, r = 2.
    let expected = -1.0 / 32.0;
    assert!((a - expected).abs() < 1e-15);
    assert!(((b - a) / a).abs() < 1e-6);
    assert_eq!(unsafe { jf_kepler_curvature(1.0, -0.5, 2.0, &mut a) }, JfStatus::Pole);
    assert!(last_error().contains("pole"));
}

#[test]
fn orbit_classes_and_eccentricity() {
    assert_eq!(jf_classify_orbit(-0.5), JfOrbitClass::Ellipse);
    assert_eq!(jf_classify_orbit(0.0), JfOrbitClass::Parabola);
    assert_eq!(jf_classify_orbit(0.5), JfOrbitClass::Hyperbola);
    let mut e = 0.0;
    assert_eq!(unsafe { jf_eccentricity(-0.5, 1.0, 1.0, 1.0, &mut e) }, JfStatus::Ok);
    assert!(e.abs() < 1e-15);
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(
            jf_kepler_curvature(1.0, 0.5, 2.0, ptr::null_mut()),
            JfStatus::NullPointer
        );
        assert!(last_error().contains("out_k"));
        let mut h = 0.0;
        assert_eq!(
            jf_system_hamiltonian(ptr::null(), ptr::null(), ptr::null(), 2, &mut h),
            JfStatus::NullPointer
        );
        assert_eq!(jf_trajectory_len(ptr::null()), 0);
        assert!(jf_system_energy(ptr::null()).is_nan());
        jf_system_free(ptr::null_mut());
        jf_trajectory_free(ptr::null_mut());
        jf_catalog_free(ptr::null_mut());
    }
}

#[test]
fn rhs_scaling_between_flows() {
    let sys = kepler(-0.5);
    let (x, p) = ([0.7, 0.3], [0.2, 0.9]);
    let (mut hx, mut hp, mut jx, mut jp) = ([0.0; 2], [0.0; 2], [0.0; 2], [0.0; 2]);
    let mut f = 0.0;
    unsafe {
        assert_eq!(jf_system_set_energy_from(sys, x.as_ptr(), p.as_ptr(), 2), JfStatus::Ok);
        assert_eq!(
            jf_system_hamilton_rhs(sys, x.as_ptr(), p.as_ptr(), 2, hx.as_mut_ptr(), hp.as_mut_ptr()),
            JfStatus::Ok
        );
        assert_eq!(
            jf_system_jacobi_rhs(sys, x.as_ptr(), p.as_ptr(), 2, jx.as_mut_ptr(), jp.as_mut_ptr()),
            JfStatus::Ok
        );
        assert_eq!(jf_system_jacobi_factor(sys, x.as_ptr(), 2, &mut f), JfStatus::Ok);
        for i in 0..2 {
            assert!((hx[i] / f - jx[i]).abs() < 1e-14);
            assert!((hp[i] / f - jp[i]).abs() < 1e-14);
        }
        assert_eq!(
            jf_system_hamilton_rhs(sys, x.as_ptr(), p.as_ptr(), 3, hx.as_mut_ptr(), hp.as_mut_ptr()),
            JfStatus::DimensionMismatch
        );
        jf_system_free(sys);
    }
}

#[test]
fn hamilton_and_jacobi_paths_agree() {
    let sys = kepler(-0.5);
    let (x0, p0) = ([0.5, 0.0], [0.0, 0.75f64.sqrt()]);
    let period = 2.0 * std::f64::consts::PI;
    unsafe {
        let mut ham = ptr::null_mut();
        let status = jf_integrate(
            sys,
            JfFlowKind::Hamilton,
            JfChart::Polar,
            x0.as_ptr(),
            p0.as_ptr(),
            2,
            period,
            1e-10,
            1e-12,
            period * 1e-4,
            &mut ham,
        );
        assert_eq!(status, JfStatus::Ok);
        let mut term = JfTermination::StepFailure;
        assert_eq!(jf_trajectory_termination(ham, &mut term), JfStatus::Ok);
        assert_eq!(term, JfTermination::Completed);

        let mut relabeled = ptr::null_mut();
        assert_eq!(jf_trajectory_to_jacobi(ham, sys, &mut relabeled), JfStatus::Ok);
        let n = jf_trajectory_len(relabeled);
        let (mut s_end, mut x, mut p) = (0.0, [0.0; 2], [0.0; 2]);
        assert_eq!(
            jf_trajectory_state(relabeled, n - 1, &mut s_end, x.as_mut_ptr(), p.as_mut_ptr(), 2),
            JfStatus::Ok
        );

        let mut jac = ptr::null_mut();
        let status = jf_integrate(
            sys,
            JfFlowKind::Jacobi,
            JfChart::Polar,
            x0.as_ptr(),
            p0.as_ptr(),
            2,
            s_end,
            1e-10,
            1e-12,
            s_end * 1e-4,
            &mut jac,
        );
        assert_eq!(status, JfStatus::Ok);
        let mut d = f64::NAN;
        assert_eq!(jf_compare_paths(ham, jac, true, &mut d), JfStatus::Ok);
        assert!(d < 1e-6, "deviation {d}");

        let name = CString::new("clairaut").unwrap();
        let (mut r0, mut r1) = (0.0, 0.0);
        assert_eq!(jf_trajectory_monitor(jac, 0, name.as_ptr(), &mut r0), JfStatus::Ok);
        assert_eq!(
            jf_trajectory_monitor(jac, jf_trajectory_len(jac) - 1, name.as_ptr(), &mut r1),
            JfStatus::Ok
        );
        assert!(((r1 - r0) / r0).abs() < 1e-9);
        let bogus = CString::new("nope").unwrap();
        assert_eq!(
            jf_trajectory_monitor(jac, 0, bogus.as_ptr(), &mut r0),
            JfStatus::InvalidInput
        );
        assert_eq!(
            jf_trajectory_state(jac, usize::MAX, &mut r0, x.as_mut_ptr(), p.as_mut_ptr(), 2),
            JfStatus::InvalidInput
        );

        jf_trajectory_free(ham);
        jf_trajectory_free(relabeled);
        jf_trajectory_free(jac);
        jf_system_free(sys);
    }
}

#[test]
fn catalog_handles() {
    let name = CString::new("schwarzschild").unwrap();
    let key = CString::new("M").unwrap();
    let keys = [key.as_ptr()];
    let values = [1.0];
    unsafe {
        let mut cat = ptr::null_mut();
        assert_eq!(
            jf_catalog_new(name.as_ptr(), keys.as_ptr(), values.as_ptr(), 1, &mut cat),
            JfStatus::Ok
        );
        assert_eq!(jf_catalog_dim(cat), 3);
        let x = [6.0, std::f64::consts::FRAC_PI_2, 0.3];
        let (mut generic, mut printed) = ([0.0; 9], [0.0; 9]);
        assert_eq!(
            jf_catalog_jacobi_relativistic(cat, x.as_ptr(), 3, 0.95, generic.as_mut_ptr()),
            JfStatus::Ok
        );
        assert_eq!(
            jf_catalog_printed_relativistic(cat, x.as_ptr(), 3, 0.95, printed.as_mut_ptr()),
            JfStatus::Ok
        );
        for (g, p) in generic.iter().zip(&printed) {
            assert!((g - p).abs() <= 1e-12 * p.abs().max(1.0));
        }
        let inside = [1.0, 1.0, 0.0];
        assert_eq!(
            jf_catalog_jacobi_relativistic(cat, inside.as_ptr(), 3, 0.95, generic.as_mut_ptr()),
            JfStatus::DomainViolation
        );
        let mut sys = ptr::null_mut();
        assert_eq!(jf_catalog_system(cat, -0.05, &mut sys), JfStatus::Ok);
        assert_eq!(jf_system_dim(sys), 3);
        jf_system_free(sys);
        jf_catalog_free(cat);

        let unknown = CString::new("minkowski").unwrap();
        let mut cat = ptr::null_mut();
        assert_eq!(
            jf_catalog_new(unknown.as_ptr(), ptr::null(), ptr::null(), 0, &mut cat),
            JfStatus::InvalidInput
        );
        assert!(cat.is_null());
        assert!(last_error().contains("minkowski"));
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(jf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
