use std::ffi::{c_char, CStr, CString};
use std::ptr;

use cohres_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { cohres_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn s_matrix_corner_and_symmetry() {
    let alphas = [1.0];
    let mut out = [0.0; 25];
    let st = unsafe { cohres_s_matrix(alphas.as_ptr(), 1, 4, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, CohresStatus::Ok);
    // 1 + <0|p^2|0> with <0|p^2|0> = 1/4
    assert_eq!(out[0], 1.25);
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(out[i * 5 + j], out[j * 5 + i]);
        }
    }
}

#[test]
fn short_buffer_is_reported() {
    let alphas = [1.0];
    let mut out = [0.0; 3];
    let st = unsafe { cohres_s_matrix(alphas.as_ptr(), 1, 4, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, CohresStatus::BufferTooSmall);
    assert!(last_error().contains("25"));
}

#[test]
fn invalid_parameters_are_rejected() {
    let alphas = [-1.0];
    let mut out = [0.0; 25];
    let st = unsafe { cohres_s_matrix(alphas.as_ptr(), 1, 4, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, CohresStatus::InvalidArgument);
    let st = unsafe { cohres_s_matrix(ptr::null(), 1, 4, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, CohresStatus::NullPointer);
}

#[test]
fn inverse_corner_matches_closed_form() {
    let alphas = [1.0];
    let mut out = [0.0; 4];
    let st = unsafe { cohres_s_inverse_block(alphas.as_ptr(), 1, 2, 1e-12, out.as_mut_ptr(), 4) };
    assert_eq!(st, CohresStatus::Ok);
    // sqrt(2 pi) e^2 erfc(sqrt 2), evaluated independently to 18 digits
    assert!((out[0] - 0.842_738_458_576_108_9).abs() < 1e-9, "{}", out[0]);
    assert!(out[1].abs() < 1e-14);
}

#[test]
fn densities_are_finite() {
    let alphas = [1.0, 2.0];
    let xs = [-1.0, 0.0, 0.5];
    let mut w = [0.0; 3];
    let st = unsafe { cohres_omega_xi(alphas.as_ptr(), 2, xs.as_ptr(), 3, w.as_mut_ptr()) };
    assert_eq!(st, CohresStatus::Ok);
    assert!(w.iter().all(|v| v.is_finite()));
    let mut plain = [0.0; 3];
    let mut damped = [0.0; 3];
    unsafe {
        assert_eq!(cohres_omega_rho(alphas.as_ptr(), 2, xs.as_ptr(), 3, false, plain.as_mut_ptr()), CohresStatus::Ok);
        assert_eq!(cohres_omega_rho(alphas.as_ptr(), 2, xs.as_ptr(), 3, true, damped.as_mut_ptr()), CohresStatus::Ok);
    }
    for ((&t, p), d) in xs.iter().zip(plain).zip(damped) {
        assert!((p * (-t * t / 8.0f64).exp() - d).abs() < 1e-12 * p.abs().max(1.0));
    }
}

#[test]
fn functional_on_ground_pair_is_positive() {
    let alphas = [1.0];
    let (mut re, mut im) = (0.0, 0.0);
    let st = unsafe { cohres_functional_rho(alphas.as_ptr(), 1, 0, 0, &mut re, &mut im) };
    assert_eq!(st, CohresStatus::Ok);
    assert!(im.abs() < 1e-12);
    assert!(re.is_finite() && re > 0.0);
}

#[test]
fn soliton_handle_lifecycle() {
    let alphas = [1.0, 2.0];
    let mut h: *mut CohresSoliton = ptr::null_mut();
    let st = unsafe { cohres_soliton_new(alphas.as_ptr(), ptr::null(), 2, &mut h) };
    assert_eq!(st, CohresStatus::Ok);
    assert!(!h.is_null());
    assert_eq!(unsafe { cohres_soliton_order(h) }, 2);
    let xs = [0.0, 12.0];
    let mut v = [0.0; 2];
    assert_eq!(unsafe { cohres_soliton_potential(h, xs.as_ptr(), 2, v.as_mut_ptr()) }, CohresStatus::Ok);
    assert!(v[0] < 0.0);
    assert!(v[1].abs() < 1e-6);
    let mut e = [0.0; 2];
    assert_eq!(unsafe { cohres_soliton_bound_energies(h, e.as_mut_ptr(), 2) }, CohresStatus::Ok);
    let mut sorted = e;
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((sorted[0] + 4.0).abs() < 1e-8 && (sorted[1] + 1.0).abs() < 1e-8, "{e:?}");
    unsafe { cohres_soliton_free(h) };
    unsafe { cohres_soliton_free(ptr::null_mut()) };
    assert_eq!(unsafe { cohres_soliton_order(ptr::null()) }, 0);
}

#[test]
fn verify_returns_json_report() {
    let suite = CString::new("xi").unwrap();
    let alphas = [1.0];
    let mut report: *mut c_char = ptr::null_mut();
    let st = unsafe { cohres_verify_json(suite.as_ptr(), alphas.as_ptr(), 1, 8, &mut report) };
    assert_eq!(st, CohresStatus::Ok);
    let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_owned();
    unsafe { cohres_string_free(report) };
    assert!(text.contains("\"overall_pass\": true") || text.contains("\"overall_pass\":true"));

    let bad = CString::new("nope").unwrap();
    let st = unsafe { cohres_verify_json(bad.as_ptr(), alphas.as_ptr(), 1, 8, &mut report) };
    assert_eq!(st, CohresStatus::InvalidArgument);
    assert!(report.is_null());
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cohres.h")).unwrap();
    for name in [
        "COHRES_H",
        "COHRES_STATUS_BUFFER_TOO_SMALL",
        "typedef struct CohresSoliton CohresSoliton",
        "cohres_last_error",
        "cohres_s_matrix",
        "cohres_s_inverse_block",
        "cohres_omega_xi",
        "cohres_omega_rho",
        "cohres_functional_rho",
        "cohres_soliton_new",
        "cohres_soliton_free",
        "cohres_soliton_order",
        "cohres_soliton_potential",
        "cohres_soliton_bound_energies",
        "cohres_verify_json",
        "cohres_string_free",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
