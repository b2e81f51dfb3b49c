//! Transformation laws and special values of the closed-form modular
//! functions, evaluated with multiprecision arithmetic.

use enriques_phi::modular::{eta_eval, j_eval, lambda_eval, theta_eval, weber_eval, ComplexAP, HalfPlanePoint};
use num_complex::Complex64;
use proptest::prelude::*;

const PREC: usize = 128;
const TOL: f64 = 1e-25;

fn at(z: Complex64) -> HalfPlanePoint {
    HalfPlanePoint::from_c64(z, PREC).unwrap()
}

fn val(f: fn(&HalfPlanePoint) -> enriques_phi::Result<ComplexAP>, z: Complex64) -> ComplexAP {
    f(&at(z)).unwrap()
}

/// `|a − b| / max(|a|, |b|)` in full precision.
fn rel(a: &ComplexAP, b: &ComplexAP) -> f64 {
    let d = a.sub(b).abs_f64();
    d / a.abs_f64().max(b.abs_f64()).max(f64::MIN_POSITIVE)
}

fn point() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, 0.8f64..2.5).prop_map(|(x, y)| Complex64::new(x, y))
}

#[test]
fn j_at_i_is_1728() {
    let v = val(j_eval, Complex64::new(0.0, 1.0));
    assert!(rel(&v, &ComplexAP::from_i64(1728, PREC)) < TOL, "j(i) = {}", v.to_decimal(30));
}

#[test]
fn j_vanishes_at_cube_root_of_unity() {
    let rho = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    // ρ is rounded to double precision, and j has a triple zero at ρ.
    let v = val(j_eval, rho);
    assert!(v.abs_f64() < 1e-30, "|j(ρ)| = {}", v.abs_f64());
}

#[test]
fn lambda_at_i_is_one_half() {
    let v = val(lambda_eval, Complex64::new(0.0, 1.0));
    let half = ComplexAP::from_c64(Complex64::new(0.5, 0.0), PREC);
    assert!(rel(&v, &half) < TOL, "λ(i) = {}", v.to_decimal(30));
}

#[test]
fn weber_at_i_over_sqrt2_is_fixed_by_its_involution() {
    // τ = i/√2 is fixed by τ ↦ −1/(2τ), so W² = 2¹² there.
    let v = val(weber_eval, Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2));
    assert!((v.abs_f64() - 64.0).abs() < 1e-12, "|W| = {}", v.abs_f64());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn j_is_invariant_under_translation_and_inversion(z in point()) {
        let j = val(j_eval, z);
        // z + 1 is rounded to double precision, so the laws hold to ~1e-15.
        prop_assert!(rel(&j, &val(j_eval, z + 1.0)) < 1e-12);
        prop_assert!(rel(&j, &val(j_eval, -1.0 / z)) < 1e-12);
    }

    #[test]
    fn eta_picks_up_24th_root_of_unity_under_translation(z in point()) {
        let lhs = val(eta_eval, z + 1.0).to_c64();
        let rhs = val(eta_eval, z).to_c64() * Complex64::from_polar(1.0, std::f64::consts::PI / 12.0);
        prop_assert!((lhs - rhs).norm() / rhs.norm() < 1e-12);
    }

    #[test]
    fn eta_inversion_has_square_root_factor(z in point()) {
        let lhs = val(eta_eval, -1.0 / z).to_c64();
        let rhs = val(eta_eval, z).to_c64() * (Complex64::new(0.0, -1.0) * z).sqrt();
        prop_assert!((lhs - rhs).norm() / rhs.norm() < 1e-12);
    }

    #[test]
    fn lambda_inversion_is_complement(z in point()) {
        let l = val(lambda_eval, z);
        let li = val(lambda_eval, -1.0 / z);
        let one = ComplexAP::from_i64(1, PREC);
        prop_assert!(rel(&li, &one.sub(&l)) < 1e-12);
    }

    #[test]
    fn lambda_translation_law(z in point()) {
        let l = val(lambda_eval, z);
        let lt = val(lambda_eval, z + 1.0);
        let one = ComplexAP::from_i64(1, PREC);
        prop_assert!(rel(&lt, &l.div(&l.sub(&one))) < 1e-12);
    }

    #[test]
    fn jacobi_quartic_identity(z in point()) {
        let t2 = val(|t| theta_eval(2, t), z).powi(4);
        let t3 = val(|t| theta_eval(3, t), z).powi(4);
        let t4 = val(|t| theta_eval(4, t), z).powi(4);
        prop_assert!(rel(&t3, &t2.add(&t4)) < 1e-20);
    }

    #[test]
    fn lambda_is_theta_quotient(z in point()) {
        let t2 = val(|t| theta_eval(2, t), z).powi(4);
        let t3 = val(|t| theta_eval(3, t), z).powi(4);
        prop_assert!(rel(&val(lambda_eval, z), &t2.div(&t3)) < 1e-20);
    }

    #[test]
    fn j_is_rational_in_lambda(z in point()) {
        // j = 256 (1 − λ + λ²)³ / (λ²(1 − λ)²).
        let l = val(lambda_eval, z);
        let one = ComplexAP::from_i64(1, PREC);
        let num = one.sub(&l).add(&l.mul(&l)).powi(3).mul(&ComplexAP::from_i64(256, PREC));
        let den = l.mul(&l).mul(&one.sub(&l).powi(2));
        prop_assert!(rel(&val(j_eval, z), &num.div(&den)) < 1e-15);
    }

    #[test]
    fn weber_fricke_involution(z in point()) {
        // W(−1/(2τ)) · W(τ) = 2¹².
        let w = val(weber_eval, z);
        let wi = val(weber_eval, -1.0 / (z * 2.0));
        prop_assert!(rel(&w.mul(&wi), &ComplexAP::from_i64(4096, PREC)) < 1e-12);
    }
}
