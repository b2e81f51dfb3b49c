//! Exact power-series arithmetic: ring laws, eta quotients against a naive
//! product, and known coefficients of `j` and of the `c(n)` input form.

use enriques_phi::qseries::{c_coeff, eta_quotient_qexp, j_qexp, monster_denominator_series, LaurentSeries2};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

/// Naive oracle: multiply by `(1 − q^{k·m})^{±1}` one factor at a time.
fn naive_eta_quotient(factors: &[(u32, i64)], order: usize) -> Vec<i128> {
    let mut c = vec![0i128; order + 1];
    c[0] = 1;
    for &(k, e) in factors {
        for _ in 0..e.unsigned_abs() {
            let mut m = k as usize;
            while m <= order {
                if e > 0 {
                    // c ← c·(1 − q^m)
                    for i in (m..=order).rev() {
                        c[i] -= c[i - m];
                    }
                } else {
                    // c ← c / (1 − q^m) = c·Σ q^{jm}
                    for i in m..=order {
                        c[i] += c[i - m];
                    }
                }
                m += k as usize;
            }
        }
    }
    c
}

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

#[test]
fn j_has_the_classical_leading_coefficients() {
    let j = j_qexp(3).unwrap();
    assert_eq!(j.coeff_int(-1), big(1));
    assert_eq!(j.coeff_int(0), big(744));
    assert_eq!(j.coeff_int(1), big(196884));
    assert_eq!(j.coeff_int(2), big(21493760));
    assert_eq!(j.coeff_int(3), big(864299970));
}

#[test]
fn c_coefficients_match_naive_product() {
    // η(τ)^{-8} η(2τ)^8 η(4τ)^{-8} = q^{-1} Σ c(n−1)... computed naively.
    let naive = naive_eta_quotient(&[(1, -8), (2, 8), (4, -8)], 40);
    for (i, v) in naive.iter().enumerate() {
        assert_eq!(c_coeff(i as i64 - 1), BigInt::from(*v), "c({})", i as i64 - 1);
    }
    assert_eq!(c_coeff(-2), big(0));
    assert_eq!(c_coeff(-1), big(1));
    assert_eq!(c_coeff(0), big(8));
}

#[test]
fn eta_quotient_offset_is_weighted_sum_over_24() {
    let s = eta_quotient_qexp(&[(1, -8), (2, 8), (4, -8)], 4).unwrap();
    assert_eq!(s.offset, num_rational::Ratio::new(-1, 1));
    let d = eta_quotient_qexp(&[(1, 24)], 4).unwrap();
    assert_eq!(d.offset, num_rational::Ratio::new(1, 1));
    // Δ = q − 24q² + 252q³ − 1472q⁴ + 4830q⁵.
    let tau: Vec<i64> = (0..5).map(|n| i64::try_from(d.coeff_int(n)).unwrap()).collect();
    assert_eq!(tau, vec![1, -24, 252, -1472, 4830]);
}

#[test]
fn denominator_identity_sides_agree_exactly() {
    let (lhs, rhs) = monster_denominator_series(4).unwrap();
    assert!(lhs.agrees_to(&rhs, lhs.order.min(rhs.order)), "sides differ");
}

#[test]
fn eta_quotient_rejects_zero_scale() {
    assert!(eta_quotient_qexp(&[(0, 1)], 3).is_err());
    assert!(eta_quotient_qexp(&[(1, 1)], -1).is_err());
}

fn poly_strategy() -> impl Strategy<Value = LaurentSeries2> {
    prop::collection::vec((0i64..4, 0i64..4, -5i64..=5), 1..6).prop_map(|t| LaurentSeries2::poly(&t))
}

/// A series with unit constant term (invertible at every order).
fn unit_strategy() -> impl Strategy<Value = LaurentSeries2> {
    prop::collection::vec((0i64..3, 0i64..3, -3i64..=3), 0..4).prop_map(|mut t| {
        t.retain(|&(a, b, _)| a + b > 0);
        t.push((0, 0, 1));
        LaurentSeries2::poly(&t)
    })
}

const ORDER: i64 = 8;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_commutative(a in poly_strategy(), b in poly_strategy()) {
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap();
        prop_assert!(ab.agrees_to(&ba, 12));
    }

    #[test]
    fn multiplication_is_associative(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
        let l = a.mul(&b).unwrap().mul(&c).unwrap();
        let r = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(l.agrees_to(&r, 18));
    }

    #[test]
    fn multiplication_distributes_over_addition(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
        let l = a.mul(&b.add(&c)).unwrap();
        let r = a.mul(&b).unwrap().add(&a.mul(&c).unwrap());
        prop_assert!(l.agrees_to(&r, 12));
    }

    #[test]
    fn subtraction_inverts_addition(a in poly_strategy(), b in poly_strategy()) {
        prop_assert!(a.add(&b).sub(&b).agrees_to(&a, 12));
    }

    #[test]
    fn inverse_times_series_is_one(u in unit_strategy()) {
        let u = u.truncate(ORDER);
        let inv = u.inverse().unwrap();
        prop_assert!(u.mul(&inv).unwrap().agrees_to(&LaurentSeries2::one(), ORDER));
    }

    #[test]
    fn integer_powers_add_exponents(u in unit_strategy(), k in -3i64..=3, m in -3i64..=3) {
        let u = u.truncate(ORDER);
        let l = u.pow_int(k).unwrap().mul(&u.pow_int(m).unwrap()).unwrap();
        let r = u.pow_int(k + m).unwrap();
        prop_assert!(l.agrees_to(&r, ORDER));
    }

    #[test]
    fn scaling_by_one_is_identity(a in poly_strategy()) {
        let one = BigRational::from_integer(BigInt::from(1));
        prop_assert_eq!(a.scale(&one), a);
    }

    #[test]
    fn eta_quotients_match_naive_product(
        factors in prop::collection::vec((1u32..=4, -6i64..=6), 1..4),
        order in 0usize..25,
    ) {
        let s = eta_quotient_qexp(&factors, order as i64).unwrap();
        let naive = naive_eta_quotient(&factors, order);
        for (n, v) in naive.iter().enumerate() {
            prop_assert_eq!(s.coeff_int(n as i64), BigInt::from(*v), "coefficient {}", n);
        }
    }
}
