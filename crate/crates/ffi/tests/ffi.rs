use std::ffi::{c_char, CString};
use std::ptr;

use hallmech_ffi::*;

fn parse(token: &str) -> *mut HmPrior {
    let c = CString::new(token).unwrap();
    let mut prior = ptr::null_mut();
    assert_eq!(unsafe { hm_prior_parse(c.as_ptr(), &mut prior) }, HmStatus::Ok);
    assert!(!prior.is_null());
    prior
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { hm_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take(n.min(255)).map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn prior_round_trip() {
    let prior = parse("uniform:0,1");
    let (mut lo, mut hi, mut f) = (f64::NAN, f64::NAN, f64::NAN);
    unsafe {
        assert_eq!(hm_prior_support(prior, &mut lo, &mut hi), HmStatus::Ok);
        assert_eq!(hm_prior_cdf(prior, 0.25, &mut f), HmStatus::Ok);
        hm_prior_free(prior);
    }
    assert_eq!((lo, hi), (0.0, 1.0));
    assert!((f - 0.25).abs() < 1e-15);
}

#[test]
fn bad_token_reports_parse_error() {
    let c = CString::new("uniform:1,0").unwrap();
    let mut prior = ptr::null_mut();
    let status = unsafe { hm_prior_parse(c.as_ptr(), &mut prior) };
    assert_ne!(status, HmStatus::Ok);
    assert!(prior.is_null());
    assert!(!last_error().is_empty());

    let c = CString::new("nosuch:1").unwrap();
    assert_eq!(unsafe { hm_prior_parse(c.as_ptr(), &mut prior) }, HmStatus::Parse);
}

#[test]
fn null_pointers_are_rejected() {
    let mut out = 0.0;
    assert_eq!(unsafe { hm_prior_cdf(ptr::null(), 0.5, &mut out) }, HmStatus::NullPointer);
    assert!(last_error().contains("prior"));
    let prior = parse("uniform:0,1");
    assert_eq!(unsafe { hm_prior_cdf(prior, 0.5, ptr::null_mut()) }, HmStatus::NullPointer);
    unsafe {
        hm_prior_free(prior);
        hm_prior_free(ptr::null_mut());
        hm_virtual_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates_and_reports_full_length() {
    let mut out = 0.0;
    unsafe { hm_prior_cdf(ptr::null(), 0.5, &mut out) };
    let full = unsafe { hm_last_error_message(ptr::null_mut(), 0) };
    let mut buf = [1 as c_char; 5];
    let n = unsafe { hm_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(n, full);
    assert!(full > 4);
    assert_eq!(buf[4], 0);
}

#[test]
fn uniform_threshold_and_virtual_value() {
    // U(0,1), gamma = 0.75, s = 0.4: flat up to T = (0.4 + sqrt(11.2)) / 6,
    // then 2v - 1.
    let prior = parse("uniform:0,1");
    let mut t = 0.0;
    let mut psi = ptr::null_mut();
    let (mut inside, mut above, mut inv, mut stored) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(hm_compute_threshold(prior, 0.75, 0.4, &mut t), HmStatus::Ok);
        assert_eq!(hm_virtual_new(prior, 0.75, 0.4, 2000, &mut psi), HmStatus::Ok);
        hm_virtual_eval(psi, 0.45, &mut inside);
        hm_virtual_eval(psi, 0.9, &mut above);
        hm_virtual_pseudo_inverse(psi, inside, &mut inv);
        hm_virtual_threshold(psi, &mut stored);
        hm_virtual_free(psi);
        hm_prior_free(prior);
    }
    assert!((t - 0.62444).abs() < 1e-4, "threshold {t}");
    assert!((stored - t).abs() < 1e-9);
    assert!((above - 0.8).abs() < 1e-3, "psi(0.9) = {above}");
    assert!(inv <= 0.4 + 1e-9);
}

#[test]
fn optimal_price_matches_uniform_closed_form() {
    // Above the ignore region the seller follows the signal.
    let prior = parse("uniform:0,1");
    let (mut p, mut regime) = (0.0, HmRegime::Unclassified);
    unsafe {
        assert_eq!(hm_optimal_price(prior, 0.5, 0.7, 2000, &mut p, &mut regime), HmStatus::Ok);
        hm_prior_free(prior);
    }
    assert!((p - 0.7).abs() < 1e-9);
    assert_eq!(regime, HmRegime::Follow);
}

#[test]
fn eager_run_and_invalid_input() {
    let values = [0.5, 0.9, 0.3];
    let reserves = [0.2, 0.6, 0.1];
    let (mut w, mut pay) = (0i64, 0.0);
    assert_eq!(unsafe { hm_eager_run(values.as_ptr(), reserves.as_ptr(), 3, &mut w, &mut pay) }, HmStatus::Ok);
    assert_eq!(w, 1);
    assert!((pay - 0.6).abs() < 1e-15);

    let low = [0.1, 0.2, 0.0];
    assert_eq!(unsafe { hm_eager_run(low.as_ptr(), reserves.as_ptr(), 3, &mut w, &mut pay) }, HmStatus::Ok);
    assert_eq!(w, -1);
    assert_eq!(pay, 0.0);

    let nan = [f64::NAN, 0.2, 0.0];
    assert_eq!(
        unsafe { hm_eager_run(nan.as_ptr(), reserves.as_ptr(), 3, &mut w, &mut pay) },
        HmStatus::InvalidParameter
    );
}

#[test]
fn exact_revenue_small_gamma_is_second_price() {
    // With almost no weight on the prior both values sit at the signals.
    let prior = parse("uniform:0,1");
    let mut r = 0.0;
    unsafe {
        assert_eq!(
            hm_exact_two_buyer_revenue(prior, 1e-6, 0.3, 0.8, HmPolicy::SignalEager, 0, 500, &mut r),
            HmStatus::Ok
        );
        hm_prior_free(prior);
    }
    assert!((r - 0.8).abs() < 1e-3, "revenue {r}");
}

#[test]
fn full_surplus_status_codes() {
    let mut r = 0.0;
    assert_eq!(unsafe { hm_full_surplus_revenue(0.5, 0.5, 0.1, &mut r) }, HmStatus::Ok);
    assert!(r > 0.0);
    assert_eq!(unsafe { hm_full_surplus_revenue(0.5, 1.0, 0.1, &mut r) }, HmStatus::Singular);
    assert_eq!(unsafe { hm_full_surplus_revenue(1.5, 0.5, 0.1, &mut r) }, HmStatus::InvalidParameter);
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/hallmech.h");
    for name in [
        "hm_last_error_message",
        "hm_prior_parse",
        "hm_prior_free",
        "hm_prior_support",
        "hm_prior_cdf",
        "hm_compute_threshold",
        "hm_virtual_new",
        "hm_virtual_free",
        "hm_virtual_eval",
        "hm_virtual_pseudo_inverse",
        "hm_virtual_threshold",
        "hm_optimal_price",
        "hm_eager_run",
        "hm_exact_two_buyer_revenue",
        "hm_full_surplus_revenue",
        "typedef struct HmPrior HmPrior",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/hallmech.h");
    match std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header]).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler on PATH; header syntax not checked"),
    }
}
