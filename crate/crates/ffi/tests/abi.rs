use std::ffi::{CStr, CString};
use std::ptr;

use psd_approx_ffi::*;

const EPS: f64 = 1e-12;

fn geometric_spec(qs: &[f64]) -> *mut PsdSpec {
    let spec = psd_spec_new();
    for &q in qs {
        assert_eq!(
            unsafe { psd_spec_push(spec, PsdFamily::Geometric as u32, q) },
            PsdStatus::Ok
        );
    }
    spec
}

fn last_error() -> String {
    let p = psd_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn iid_geometric_values() {
    let spec = geometric_spec(&[0.2; 10]);
    unsafe {
        assert_eq!(psd_spec_len(spec), 10);
        let (mut mean, mut var) = (0.0, 0.0);
        assert_eq!(psd_spec_moments(spec, &mut mean, &mut var), PsdStatus::Ok);
        assert!((mean - 2.5).abs() < 1e-12);

        let mut bound = 0.0;
        assert_eq!(
            psd_poisson_bound_matched(spec, EPS, &mut bound),
            PsdStatus::Ok
        );
        assert!((bound - 0.25).abs() < 1e-12);

        let mut general = 0.0;
        assert_eq!(
            psd_poisson_bound(spec, 2.5, EPS, false, &mut general),
            PsdStatus::Ok
        );
        assert!((general - bound).abs() < 1e-12);
        let mut crude = 0.0;
        assert_eq!(
            psd_poisson_bound_crude(spec, 2.5, &mut crude),
            PsdStatus::Ok
        );
        assert!(crude >= bound);

        let (mut r, mut p) = (0.0, 0.0);
        assert_eq!(psd_nb_fit(spec, false, 10.0, &mut r, &mut p), PsdStatus::Ok);
        assert_eq!(r, 10.0);
        assert!((p - 0.8).abs() < 1e-12);
        let mut one = 1.0;
        assert_eq!(psd_nb_bound_one(spec, 10.0, EPS, &mut one), PsdStatus::Ok);
        assert!(one.abs() < 1e-10, "{one}");

        let (mut tv, mut err) = (0.0, 0.0);
        assert_eq!(
            psd_oracle_tv_poisson(spec, 2.5, EPS, &mut tv, &mut err),
            PsdStatus::Ok
        );
        assert!(tv > 0.0 && tv <= bound);
        assert_eq!(
            psd_oracle_tv_nb(spec, 10.0, 0.8, EPS, &mut tv, &mut err),
            PsdStatus::Ok
        );
        assert!(tv <= err + 1e-12);
        psd_spec_free(spec);
    }
}

#[test]
fn two_moment_and_tau() {
    let spec = geometric_spec(&[0.3, 0.1, 0.25, 0.2]);
    unsafe {
        let mut tau = 0.0;
        assert_eq!(psd_tau_upper(spec, EPS, &mut tau), PsdStatus::Ok);
        assert!(tau > 0.0 && tau.is_finite());
        let mut two = 0.0;
        assert_eq!(psd_nb_bound_two(spec, EPS, &mut two), PsdStatus::Ok);
        let (mut tv, mut err) = (0.0, 0.0);
        let (mut r, mut p) = (0.0, 0.0);
        assert_eq!(psd_nb_fit(spec, true, 0.0, &mut r, &mut p), PsdStatus::Ok);
        assert_eq!(
            psd_oracle_tv_nb(spec, r, p, EPS, &mut tv, &mut err),
            PsdStatus::Ok
        );
        assert!(tv - err <= two);
        psd_spec_free(spec);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let spec = psd_spec_new();
        let mut out = 0.0;
        assert_eq!(
            psd_poisson_bound_matched(spec, EPS, &mut out),
            PsdStatus::EmptySpec
        );
        assert_eq!(
            psd_spec_push(spec, PsdFamily::Geometric as u32, 1.5),
            PsdStatus::Domain
        );
        assert!(last_error().contains("domain"));
        assert_eq!(psd_spec_push(spec, 99, 0.5), PsdStatus::InvalidArgument);
        assert_eq!(
            psd_spec_push(spec, PsdFamily::Bernoulli as u32, 0.3),
            PsdStatus::Ok
        );
        assert_eq!(psd_nb_bound_two(spec, EPS, &mut out), PsdStatus::Infeasible);
        assert_eq!(
            psd_poisson_bound_matched(spec, EPS, ptr::null_mut()),
            PsdStatus::NullPointer
        );
        assert_eq!(
            psd_poisson_bound_matched(ptr::null(), EPS, &mut out),
            PsdStatus::NullPointer
        );
        assert_eq!(psd_spec_len(ptr::null()), 0);
        psd_spec_free(spec);
        psd_spec_free(ptr::null_mut());
        psd_string_free(ptr::null_mut());
    }
}

#[test]
fn scenario_round_trip() {
    let text = CString::new(
        "family = geometric\nthetas = 0.2, 0.2, 0.2\nn_values = 3\nmethods = poisson, nb_one\n",
    )
    .unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(
            psd_run_scenario(text.as_ptr(), false, true, EPS, &mut out),
            PsdStatus::Ok
        );
        let table = CStr::from_ptr(out).to_str().unwrap().to_owned();
        psd_string_free(out);
        assert!(table.starts_with("n,poisson,nb_one\n3,"));

        let bad = CString::new("family = nope\n").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(
            psd_run_scenario(bad.as_ptr(), false, false, EPS, &mut out),
            PsdStatus::Parse
        );
        assert!(out.is_null());
        assert!(last_error().starts_with("line 1"));
    }
}
