//! Borcherds products: exact leading expansions, the relation between the
//! two canonical products, and weight-4 automorphy.

use enriques_phi::borcherds::{automorphy_defect, phi1_eval, phi2_eval, phi_gamma_leading_qexp, ProductParams};
use enriques_phi::enriques::{all_lambda_gammas, gamma_classes, lambda_gamma_for, GammaClass, Parity};
use enriques_phi::qseries::LaurentSeries2;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn params(tail: f64) -> ProductParams {
    ProductParams { tail_target: tail, ..Default::default() }
}

#[test]
fn there_are_six_odd_and_nine_even_classes() {
    let classes = gamma_classes();
    assert_eq!(classes.len(), 15);
    assert_eq!(classes.iter().filter(|g| g.parity == Parity::Odd).count(), 6);
    assert_eq!(all_lambda_gammas().len(), 15);
}

#[test]
fn malformed_class_labels_are_rejected() {
    assert!(GammaClass::parse("0,0,0,0").is_err());
    assert!(GammaClass::parse("0,0,1/3,0").is_err());
    assert!(GammaClass::parse("0,1/2").is_err());
}

#[test]
fn odd_level_two_products_start_with_a_perfect_square() {
    let minus = LaurentSeries2::poly(&[(2, 0, -256), (1, 1, 512), (0, 2, -256)]);
    let plus = LaurentSeries2::poly(&[(2, 0, -256), (1, 1, -512), (0, 2, -256)]);
    let mut seen = Vec::new();
    for lg in all_lambda_gammas().iter().filter(|l| l.gamma.parity == Parity::Odd && l.level() == 2) {
        let s = phi_gamma_leading_qexp(lg, 3).unwrap();
        assert!(s.val() >= 2, "{}: valuation {}", lg.gamma.label(), s.val());
        let low = s.truncate(2);
        let sign = if low.agrees_to(&minus, 2) { -1 } else if low.agrees_to(&plus, 2) { 1 } else { 0 };
        assert_ne!(sign, 0, "{}: {}", lg.gamma.label(), low.digest());
        seen.push(sign);
    }
    seen.sort();
    assert_eq!(seen, vec![-1, 1]);
}

#[test]
fn odd_level_one_products_have_unit_constant_term() {
    for lg in all_lambda_gammas().iter().filter(|l| l.gamma.parity == Parity::Odd && l.level() == 1) {
        let s = phi_gamma_leading_qexp(lg, 2).unwrap();
        assert!(s.val() >= 0);
        assert_eq!(s.coeff(0, 0), Some(BigRational::from_integer(BigInt::from(1))), "{}", lg.gamma.label());
    }
}

#[test]
fn product_of_odd_leading_terms_is_a_square_of_p_minus_q() {
    let mut prod = LaurentSeries2::one();
    for lg in all_lambda_gammas().iter().filter(|l| l.gamma.parity == Parity::Odd) {
        prod = prod.mul(&phi_gamma_leading_qexp(lg, 4).unwrap()).unwrap();
    }
    let target = LaurentSeries2::poly(&[(4, 0, 65536), (2, 2, -131072), (0, 4, 65536)]);
    assert!(prod.val() >= 4);
    assert!(prod.truncate(4).agrees_to(&target, 4));
}

fn z_vec(z1: Complex64, z2: Complex64) -> Vec<Complex64> {
    let mut z = vec![Complex64::new(0.0, 0.0); 10];
    z[0] = z1;
    z[1] = z2;
    z
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// The two canonical products are related by the Fricke-type chart change
    /// `Φ₂(z₁, z₂) = −z₁⁻⁴ Φ₁(−1/(2z₁), z₂)` on the hyperbolic plane.
    #[test]
    fn level_two_product_is_chart_change_of_level_one_product(
        x1 in -0.2f64..0.2, y1 in 0.9f64..1.1, x2 in -0.3f64..0.3, y2 in 6.0f64..7.0,
    ) {
        // Both products converge fastest when Im z₁ · Im z₂ is large; the
        // sample keeps it above 2 on both sides of the chart change.
        let z1 = c(x1, y1);
        let z2 = c(x2, y2);
        let p = params(1e-12);
        let lhs = phi2_eval(&z_vec(z1, z2), &p).unwrap();
        let rhs = phi1_eval(&z_vec(-1.0 / (z1 * 2.0), z2), &p).unwrap();
        let predicted = rhs.log - z1.ln() * 4.0 + Complex64::new(0.0, std::f64::consts::PI);
        let d = ((lhs.log - predicted).exp() - 1.0).norm();
        prop_assert!(d < 1e-10, "defect {}", d);
    }
}

#[test]
fn automorphy_holds_for_one_class_of_each_kind() {
    let p = params(1e-9);
    let t = c(0.2, 2.5);
    let tp = c(-0.1, 2.8);
    let t2 = [[1, 2], [0, 1]];
    let u2 = [[1, 0], [2, 1]];
    let id = [[1, 0], [0, 1]];
    for g in ["0,0,1/2,1/2", "1/2,0,0,0", "1/2,1/2,1/2,1/2"] {
        let lg = lambda_gamma_for(&GammaClass::parse(g).unwrap());
        for (a, b) in [(t2, id), (id, u2), (u2, t2)] {
            let d = automorphy_defect(lg, a, b, t, tp, &p).unwrap();
            assert!(d < 1e-7, "class {g}: defect {d}");
        }
    }
}

#[test]
fn automorphy_rejects_matrices_outside_level_two() {
    let lg = &all_lambda_gammas()[0];
    let r = automorphy_defect(lg, [[1, 1], [0, 1]], [[1, 0], [0, 1]], c(0.0, 2.0), c(0.0, 2.0), &params(1e-8));
    assert!(r.is_err());
}
