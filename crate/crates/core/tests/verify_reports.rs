//! Structural invariants of the check reports and determinism of their JSON.

use enriques_phi::verify::{
    rel_log, verify_appendix, verify_denominator, verify_modular_series, verify_odd_leading, Report, Status,
};
use num_complex::Complex64;
use proptest::prelude::*;
use serde_json::Value;

fn cheap_reports() -> Vec<Report> {
    vec![verify_denominator(4).unwrap(), verify_odd_leading(4).unwrap(), verify_appendix().unwrap()]
}

fn check_consistency(r: &Report) {
    assert_eq!(r.pass, r.status != Status::Fail, "{}: status disagrees with pass", r.check_name);
    if r.subchecks.is_empty() {
        if r.status != Status::Degenerate {
            assert_eq!(r.pass, r.rel_error <= r.tolerance, "{}: pass flag vs error", r.check_name);
        }
    } else {
        assert_eq!(r.pass, r.subchecks.iter().all(|s| s.pass), "{}: group pass flag", r.check_name);
    }
    r.subchecks.iter().for_each(check_consistency);
}

fn strip_runtime(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("runtime_ms");
            m.values_mut().for_each(strip_runtime);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_runtime),
        _ => {}
    }
}

#[test]
fn cheap_checks_pass_and_are_internally_consistent() {
    for r in cheap_reports() {
        assert!(r.pass, "{} failed", r.check_name);
        check_consistency(&r);
    }
}

#[test]
fn report_json_has_the_documented_fields() {
    let v = serde_json::to_value(verify_denominator(3).unwrap()).unwrap();
    for key in ["check_name", "inputs", "lhs", "rhs", "abs_error", "rel_error", "tolerance", "pass", "status", "runtime_ms", "params"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["status"], "pass");
}

#[test]
fn report_json_is_deterministic_apart_from_timing() {
    let mut a = serde_json::to_value(cheap_reports()).unwrap();
    let mut b = serde_json::to_value(cheap_reports()).unwrap();
    strip_runtime(&mut a);
    strip_runtime(&mut b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn invalid_orders_are_rejected() {
    assert!(verify_denominator(0).is_err());
    assert!(verify_odd_leading(2).is_err());
}

#[test]
fn modular_series_check_rejects_points_too_low_in_the_half_plane() {
    assert!(verify_modular_series(&[Complex64::new(0.0, 0.5)], 1e-10, 128).is_err());
}

#[test]
fn modular_series_check_passes_at_a_few_points() {
    let pts = [Complex64::new(0.0, 1.0), Complex64::new(0.5, 1.5), Complex64::new(-1.7, 2.9)];
    let r = verify_modular_series(&pts, 1e-10, 128).unwrap();
    assert!(r.pass);
    check_consistency(&r);
}

proptest! {
    #[test]
    fn rel_log_ignores_whole_turns(re in -50.0f64..50.0, im in -10.0f64..10.0, k in -5i32..=5) {
        let a = Complex64::new(re, im);
        let b = a + Complex64::new(0.0, 2.0 * std::f64::consts::PI * k as f64);
        prop_assert!(rel_log(a, b) < 1e-12);
    }

    #[test]
    fn rel_log_measures_relative_modulus_change(re in -50.0f64..50.0, eps in -0.1f64..0.1) {
        let a = Complex64::new(re, 0.3);
        let b = a - Complex64::new(eps.ln_1p(), 0.0);
        prop_assert!((rel_log(a, b) - eps.abs()).abs() < 1e-12);
    }
}
