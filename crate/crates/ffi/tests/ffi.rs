use std::ffi::{CStr, CString};
use std::ptr;

use pwlab_ffi::*;

fn last_error() -> String {
    let p = pwlab_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn spec_lifecycle_and_metric() {
    let f = [0.0];
    let b = [1.0];
    let mut spec = ptr::null_mut();
    let s = unsafe { pwlab_spec_new(PwlabWaveKind::A, 1, f.as_ptr(), b.as_ptr(), &mut spec) };
    assert_eq!(s, PwlabStatus::Ok);
    assert!(pwlab_last_error_message().is_null());
    assert_eq!(unsafe { pwlab_spec_n(spec) }, 1);
    let coords = [0.0, 2.0, 5.0];
    let mut g = [0.0; 9];
    assert_eq!(unsafe { pwlab_spec_metric(spec, coords.as_ptr(), g.as_mut_ptr()) }, PwlabStatus::Ok);
    assert_eq!(g, [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 4.0]);
    let mut flat = false;
    assert_eq!(unsafe { pwlab_spec_is_conformally_flat(spec, 1e-12, &mut flat) }, PwlabStatus::Ok);
    assert!(flat);
    unsafe { pwlab_spec_free(spec) };
}

#[test]
fn validation_errors_set_the_last_error() {
    let f = [0.0, 1.0, 1.0, 0.0];
    let b = [1.0, 0.0, 0.0, 1.0];
    let mut spec = ptr::null_mut();
    let s = unsafe { pwlab_spec_new(PwlabWaveKind::A, 2, f.as_ptr(), b.as_ptr(), &mut spec) };
    assert_eq!(s, PwlabStatus::Validation);
    assert!(spec.is_null());
    assert!(last_error().contains("skew"));

    let s = unsafe { pwlab_spec_new(PwlabWaveKind::A, 2, ptr::null(), b.as_ptr(), &mut spec) };
    assert_eq!(s, PwlabStatus::NullPointer);

    let mut pf = 0.0;
    let mut pb = 1.0;
    let mut spec_b = ptr::null_mut();
    let s = unsafe { pwlab_spec_new(PwlabWaveKind::B, 1, &mut pf, &mut pb, &mut spec_b) };
    assert_eq!(s, PwlabStatus::Ok);
    let mut out = [0.0];
    let s = unsafe { pwlab_spec_curvature_profile(spec_b, -1.0, out.as_mut_ptr()) };
    assert_eq!(s, PwlabStatus::Validation);
    assert!(last_error().contains("u > 0"));
    unsafe { pwlab_spec_free(spec_b) };
}

#[test]
fn last_error_is_thread_local() {
    let mut spec = ptr::null_mut();
    let bad = CString::new("{").unwrap();
    assert_eq!(unsafe { pwlab_spec_from_json(bad.as_ptr(), &mut spec) }, PwlabStatus::Validation);
    std::thread::spawn(|| assert!(pwlab_last_error_message().is_null())).join().unwrap();
    assert!(!last_error().is_empty());
}

#[test]
fn algebras_through_handles() {
    let json = CString::new(r#"{"kind":"a","n":2,"F":[[0,0],[0,0]],"B":[[1,0],[0,2]]}"#).unwrap();
    let mut spec = ptr::null_mut();
    assert_eq!(unsafe { pwlab_spec_from_json(json.as_ptr(), &mut spec) }, PwlabStatus::Ok);
    let mut isom = ptr::null_mut();
    assert_eq!(unsafe { pwlab_algebra_isom(spec, &mut isom) }, PwlabStatus::Ok);
    assert_eq!(unsafe { pwlab_algebra_dim(isom) }, 6);
    assert!(unsafe { pwlab_algebra_jacobi_residual(isom) } < 1e-12);
    let mut c = 0.0;
    let s = unsafe { pwlab_algebra_structure_constant(isom, 0, 6, 0, &mut c) };
    assert_eq!(s, PwlabStatus::OutOfRange);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { pwlab_algebra_to_json(isom, &mut text) }, PwlabStatus::Ok);
    let parsed: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(text) }.to_str().unwrap()).unwrap();
    assert_eq!(parsed["labels"].as_array().unwrap().len(), 6);
    unsafe { pwlab_string_free(text) };

    let mut conf = ptr::null_mut();
    assert_eq!(unsafe { pwlab_algebra_conf(spec, &mut conf) }, PwlabStatus::Ok);
    assert_eq!(unsafe { pwlab_algebra_dim(conf) }, 7);
    unsafe {
        pwlab_algebra_free(conf);
        pwlab_algebra_free(isom);
        pwlab_spec_free(spec);
        pwlab_algebra_free(ptr::null_mut());
    }
}

#[test]
fn classification_and_decisions() {
    // p∧q with n = 1: p -> -p, q -> q.
    let m = [-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
    let mut kind = PwlabElementKind::Elliptic;
    let mut a = 0.0;
    assert_eq!(unsafe { pwlab_classify(m.as_ptr(), 1, 1e-9, &mut kind, &mut a) }, PwlabStatus::Ok);
    assert_eq!(kind, PwlabElementKind::Hyperbolic);
    assert!((a - 1.0).abs() < 1e-12);

    let b = [1.0, 0.0, 0.0, -1.0];
    let mut yes = true;
    assert_eq!(unsafe { pwlab_cw_decide(b.as_ptr(), 2, false, 1e-9, &mut yes) }, PwlabStatus::Ok);
    assert!(!yes);
    let b = [-1.0, 0.0, 0.0, -4.0];
    assert_eq!(unsafe { pwlab_cw_decide(b.as_ptr(), 2, true, 1e-9, &mut yes) }, PwlabStatus::Ok);
    assert!(yes);
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/pwlab.h");
    for name in [
        "pwlab_last_error_message",
        "pwlab_spec_new",
        "pwlab_spec_from_json",
        "pwlab_spec_free",
        "pwlab_spec_metric",
        "pwlab_algebra_isom",
        "pwlab_algebra_structure_constant",
        "pwlab_string_free",
        "pwlab_classify",
        "pwlab_cw_decide",
        "typedef struct PwlabSpec PwlabSpec",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
