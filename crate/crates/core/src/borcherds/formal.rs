//! Exact formal expansions of the restricted products at the standard cusp.
//!
//! Along the standard chart `z_E = τ + σ_E`, `z_F = τ′ + σ_F`, so every factor
//! variable is a signed monomial `e^{πik⟨λ,u⟩} = ±P^{ke} Q^{kf}` with
//! `P = p^{1/2} = e^{πiτ}` and `Q = q^{1/2} = e^{πiτ′}`; its total degree is
//! `k(e + f)`.  Factors of negative degree are rewritten as
//! `(1 − x)^E = (−x)^E (1 − x⁻¹)^E`, degree-0 factors are exact
//! polynomials, and positive-degree factors are binomial series.

use super::plane::{FactorClass, PlaneEngine, ProductKind};
use crate::error::{Error, Result};
use crate::lattice::intmat::Q;
use crate::qseries::{c_coeff, LaurentSeries2, EXACT};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// One factor `(1 − s·P^a Q^b)^E` (level 2) or
/// `((1 − s·P^a Q^b)/(1 + s·P^a Q^b))^E` (level 1).
#[derive(Clone, Debug)]
struct Factor {
    a: i64,
    b: i64,
    s: i64,
    exp: BigInt,
}

fn integral(x: Q, what: &str) -> Result<i64> {
    if !x.is_integer() {
        return Err(Error::Incompatible(format!("{what} is not integral in the standard chart")));
    }
    Ok(x.to_integer())
}

fn class_factor(eng: &PlaneEngine, sigma: (Q, Q), cl: &FactorClass) -> Result<Factor> {
    let k = eng.kind().k();
    let a = integral(cl.e * k, "P-exponent")?;
    let b = integral(cl.f * k, "Q-exponent")?;
    let ph = (cl.e * sigma.0 + cl.f * sigma.1 + Q::new(cl.phase, eng.phase_den())) * k;
    let r = integral(ph, "factor phase")?;
    let s = if r.rem_euclid(2) == 0 { 1 } else { -1 };
    let mut exp = c_coeff(cl.n) * BigInt::from(cl.count);
    if cl.negative {
        exp = -exp;
    }
    Ok(Factor { a, b, s, exp })
}

/// Generalized binomial coefficient `binom(E, j)` for integer `E`.
fn binom(e: &BigInt, j: i64) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..j {
        num *= e - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// `(1 + c·P^a Q^b)^E` truncated at total degree `order` (`a + b > 0`),
/// or exactly when `a + b = 0` (then `E ≥ 0` is required).
fn binomial_series(a: i64, b: i64, c: i64, e: &BigInt, order: i64) -> Result<LaurentSeries2> {
    let deg = a + b;
    if deg == 0 {
        let n = e.to_i64().filter(|n| *n >= 0).ok_or(Error::NotInvertible)?;
        let mut s = LaurentSeries2::zero(EXACT);
        for j in 0..=n {
            let coef = binom(e, j) * BigInt::from(c).pow(j as u32);
            s = s.add(&LaurentSeries2::monomial(BigRational::from_integer(coef), a * j, b * j));
        }
        return Ok(s);
    }
    assert!(deg > 0);
    let mut s = LaurentSeries2::zero(order);
    let mut j = 0i64;
    while j * deg <= order {
        let coef = binom(e, j) * BigInt::from(c).pow(j as u32);
        s = s.add(&LaurentSeries2::monomial(BigRational::from_integer(coef), a * j, b * j).truncate(order));
        j += 1;
    }
    Ok(s)
}

/// Formal expansion of the chart product along the standard cusp, to total
/// degree `order` in `P, Q`.
pub fn leading_qexp(eng: &PlaneEngine, sigma: (Q, Q), order: i64) -> Result<LaurentSeries2> {
    let kind = eng.kind();
    let k = kind.k();
    // Monomial part: the level-2 prefactor and the negative-degree factors.
    let mut coef = BigRational::one();
    let (mut ma, mut mb) = (0i64, 0i64);
    if kind == ProductKind::Level2 {
        let (re, rf, rc) = eng.rho_data();
        ma += integral(re * 2, "prefactor exponent")?;
        mb += integral(rf * 2, "prefactor exponent")?;
        let r = integral((re * sigma.0 + rf * sigma.1 + rc) * 2, "prefactor phase")?;
        coef = BigRational::from_integer(BigInt::from(256 * if r.rem_euclid(2) == 0 { 1 } else { -1 }));
    }
    let tables0 = eng.tables(eng.required_radius(1.0, 1.0, 0.0));
    let mut low: Vec<Factor> = Vec::new();
    let mut err = None;
    eng.visit(&tables0, 1.0, 1.0, 0.0, |cl| match class_factor(eng, sigma, cl) {
        Ok(f) => low.push(f),
        Err(e) => err = Some(e),
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut unit_factors: Vec<Factor> = Vec::new();
    for f in low {
        let deg = f.a + f.b;
        if deg < 0 {
            if kind == ProductKind::Level1 {
                return Err(Error::Incompatible("level-1 factor of negative degree".into()));
            }
            // (1 − s m)^E = (−s m)^E (1 − s m⁻¹)^E.
            let ei = f.exp.to_i64().ok_or_else(|| Error::LimitExceeded("exponent".into()))?;
            ma += f.a * ei;
            mb += f.b * ei;
            if f.s == 1 && ei.rem_euclid(2) == 1 {
                coef = -coef;
            }
            unit_factors.push(Factor { a: -f.a, b: -f.b, s: f.s, exp: f.exp });
        } else {
            unit_factors.push(f);
        }
    }
    let unit_order = order - (ma + mb);
    if unit_order < 0 {
        return Ok(LaurentSeries2::zero(order));
    }
    // Positive-degree factors up to the unit order.
    let h = unit_order as f64 / k as f64;
    let tables = eng.tables(eng.required_radius(1.0, 1.0, h));
    let mut err = None;
    eng.visit(&tables, 1.0, 1.0, h, |cl| {
        if cl.e + cl.f <= Q::zero() {
            return;
        }
        match class_factor(eng, sigma, cl) {
            Ok(f) => unit_factors.push(f),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut unit = LaurentSeries2::one().truncate(unit_order);
    for f in &unit_factors {
        if f.a + f.b > unit_order {
            continue;
        }
        let series = match kind {
            ProductKind::Level2 => binomial_series(f.a, f.b, -f.s, &f.exp, unit_order)?,
            ProductKind::Level1 => {
                let num = binomial_series(f.a, f.b, -f.s, &f.exp, unit_order)?;
                let den = binomial_series(f.a, f.b, f.s, &(-f.exp.clone()), unit_order)?;
                num.mul(&den)?
            }
        };
        unit = unit.mul(&series)?.truncate(unit_order);
    }
    let mono = LaurentSeries2::monomial(coef, ma, mb);
    Ok(mono.mul(&unit)?.truncate(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn binomials() {
        assert_eq!(binom(&BigInt::from(5), 2), BigInt::from(10));
        assert_eq!(binom(&BigInt::from(-1), 3), BigInt::from(-1));
        assert_eq!(binom(&BigInt::from(-2), 2), BigInt::from(3));
        assert!(binom(&BigInt::from(3), 4).is_zero());
        let s = binomial_series(1, 0, -1, &BigInt::from(-1), 3).unwrap();
        for j in 0..=3 {
            assert_eq!(s.coeff(j, 0).unwrap(), BigRational::one());
        }
        assert!(!s.coeff(0, 0).unwrap().is_negative());
    }
}
