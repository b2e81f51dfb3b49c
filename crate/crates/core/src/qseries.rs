//! Exact truncated Laurent series in one and two variables.
//!
//! Two-variable series live in `ℚ[[P, Q]][P⁻¹, Q⁻¹]` with `P = p^{1/2}` and
//! `Q = q^{1/2}`: the exponent pair `(a, b)` stands for `p^{a/2} q^{b/2}`.
//! Truncation is by *total degree* `a + b ≤ order`; coefficients beyond the
//! order are unknown and never reported.  One-variable series carry integer
//! exponents of `q` together with a symbolic rational exponent offset (the
//! `q^{Σ e_i k_i / 24}` prefactor of an η-quotient).
//!
//! Products use the rule `order(xy) = min(N_x + val(y), N_y + val(x))`, where
//! `val` is the smallest degree that can carry a nonzero coefficient.  Exact
//! polynomials use the [`EXACT`] order sentinel.

use crate::error::{Error, Result};
use crate::lattice::intmat::Q;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

/// Order sentinel for exact (untruncated) polynomials.
pub const EXACT: i64 = i64::MAX / 8;

fn sat_add(a: i64, b: i64) -> i64 {
    if a >= EXACT || b >= EXACT {
        EXACT
    } else {
        (a + b).min(EXACT)
    }
}

/// Exponent pair in half units: the monomial `p^{a/2} q^{b/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Exp2 {
    pub a: i64,
    pub b: i64,
}

impl Exp2 {
    pub fn new(a: i64, b: i64) -> Self {
        Self { a, b }
    }
    /// Total degree `a + b`.
    pub fn deg(&self) -> i64 {
        self.a + self.b
    }
}

/// Truncated two-variable Laurent series over ℚ.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries2 {
    pub terms: BTreeMap<Exp2, BigRational>,
    pub order: i64,
    pub lower: (i64, i64),
}

/// Default lower bound for series built from Laurent monomials.
pub const DEFAULT_LOWER: (i64, i64) = (-1_000_000, -1_000_000);

impl LaurentSeries2 {
    /// Zero known to the given order.
    pub fn zero(order: i64) -> Self {
        Self { terms: BTreeMap::new(), order, lower: DEFAULT_LOWER }
    }

    /// The exact constant `c`.
    pub fn constant(c: BigRational) -> Self {
        let mut s = Self::zero(EXACT);
        s.insert(Exp2::new(0, 0), c);
        s
    }

    /// The exact constant 1.
    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// Exact monomial `c · P^a Q^b`.
    pub fn monomial(c: BigRational, a: i64, b: i64) -> Self {
        let mut s = Self::zero(EXACT);
        s.insert(Exp2::new(a, b), c);
        s
    }

    /// Exact polynomial from `(a, b, coefficient)` triples.
    pub fn poly(terms: &[(i64, i64, i64)]) -> Self {
        let mut s = Self::zero(EXACT);
        for &(a, b, c) in terms {
            s.add_term(Exp2::new(a, b), BigRational::from_integer(BigInt::from(c)));
        }
        s
    }

    /// Replace the truncation order (only ever lowers it).
    pub fn truncate(mut self, order: i64) -> Self {
        if order < self.order {
            self.order = order;
            self.terms.retain(|e, _| e.deg() <= order);
        }
        self
    }

    fn insert(&mut self, e: Exp2, c: BigRational) {
        if !c.is_zero() && e.deg() <= self.order {
            self.terms.insert(e, c);
        }
    }

    fn add_term(&mut self, e: Exp2, c: BigRational) {
        if e.deg() > self.order || c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Coefficient of `P^a Q^b` (`None` if beyond the truncation order).
    pub fn coeff(&self, a: i64, b: i64) -> Option<BigRational> {
        if a + b > self.order {
            return None;
        }
        Some(self.terms.get(&Exp2::new(a, b)).cloned().unwrap_or_else(BigRational::zero))
    }

    /// Smallest total degree that may carry a nonzero coefficient.
    pub fn val(&self) -> i64 {
        self.terms.keys().map(|e| e.deg()).min().unwrap_or(sat_add(self.order, 1))
    }

    /// True if every stored term satisfies the canonical-form invariants.
    pub fn is_canonical(&self) -> bool {
        self.terms.iter().all(|(e, c)| {
            !c.is_zero() && e.deg() <= self.order && e.a >= self.lower.0 && e.b >= self.lower.1
        })
    }

    /// Sum.
    pub fn add(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut s = Self { terms: BTreeMap::new(), order, lower: min_pair(self.lower, o.lower) };
        for (e, c) in self.terms.iter().chain(o.terms.iter()) {
            s.add_term(*e, c.clone());
        }
        s
    }

    /// Difference.
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-BigRational::one()))
    }

    /// Scalar multiple.
    pub fn scale(&self, k: &BigRational) -> Self {
        let mut s = Self { terms: BTreeMap::new(), order: self.order, lower: self.lower };
        if k.is_zero() {
            return s;
        }
        for (e, c) in &self.terms {
            s.terms.insert(*e, c * k);
        }
        s
    }

    /// Product with the truncation rule of the module docs.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        let order = sat_add(self.order, o.val()).min(sat_add(o.order, self.val()));
        let lower = (
            self.lower.0.saturating_add(o.lower.0).max(DEFAULT_LOWER.0),
            self.lower.1.saturating_add(o.lower.1).max(DEFAULT_LOWER.1),
        );
        if order < lower.0.saturating_add(lower.1) {
            return Err(Error::TruncationUnderflow { order, lower: lower.0 + lower.1 });
        }
        let mut acc: BTreeMap<Exp2, BigRational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = Exp2::new(e1.a + e2.a, e1.b + e2.b);
                if e.deg() > order {
                    continue;
                }
                *acc.entry(e).or_insert_with(BigRational::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Self { terms: acc, order, lower })
    }

    /// Integer power; negative powers need a single lowest-degree monomial.
    pub fn pow_int(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Ok(Self::one());
        }
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut result = Self::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&b)?;
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b)?;
            }
        }
        Ok(result)
    }

    /// Multiplicative inverse via the geometric series of the unit part.
    pub fn inverse(&self) -> Result<Self> {
        let v = self.val();
        let lead: Vec<(&Exp2, &BigRational)> = self.terms.iter().filter(|(e, _)| e.deg() == v).collect();
        if lead.len() != 1 {
            return Err(Error::NotInvertible);
        }
        let (m, c) = (*lead[0].0, lead[0].1.clone());
        if self.order >= EXACT && self.terms.len() == 1 {
            return Ok(Self::monomial(c.recip(), -m.a, -m.b));
        }
        // x = c·m·(1 + y) with val(y) ≥ 1, known to order N_x − deg m.
        let ny = self.order - v;
        let minv = Self::monomial(c.recip(), -m.a, -m.b);
        let unit = self.mul(&minv)?;
        let y = unit.sub(&Self::one()).truncate(ny);
        let mut inv = Self::one().truncate(ny);
        let mut term = Self::one().truncate(ny);
        let neg_y = y.scale(&-BigRational::one());
        for _ in 0..=ny.max(0) {
            term = term.mul(&neg_y)?;
            if term.terms.is_empty() {
                break;
            }
            inv = inv.add(&term);
        }
        inv.mul(&minv)
    }

    /// Substitute numeric values for `P = p^{1/2}` and `Q = q^{1/2}`.
    pub fn eval(&self, p_half: num_complex::Complex64, q_half: num_complex::Complex64) -> num_complex::Complex64 {
        let mut s = num_complex::Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let cf = big_to_f64(c);
            s += p_half.powi(e.a as i32) * q_half.powi(e.b as i32) * cf;
        }
        s
    }

    /// Exact equality of all coefficients up to total degree `order`.
    pub fn agrees_to(&self, o: &Self, order: i64) -> bool {
        if self.order < order || o.order < order {
            return false;
        }
        let keys: std::collections::BTreeSet<Exp2> =
            self.terms.keys().chain(o.terms.keys()).filter(|e| e.deg() <= order).copied().collect();
        keys.iter().all(|e| self.coeff(e.a, e.b) == o.coeff(e.a, e.b))
    }

    /// JSON form `{lower, order, offset, terms: [[a, b, num, den], …]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(e, c)| serde_json::json!([e.a, e.b, c.numer().to_string(), c.denom().to_string()]))
            .collect();
        serde_json::json!({
            "lower": [self.lower.0, self.lower.1],
            "order": if self.order >= EXACT { serde_json::Value::Null } else { serde_json::json!(self.order) },
            "offset": "0",
            "terms": terms,
        })
    }

    /// Compact human-readable digest, e.g. `-256*P^2 + 512*P*Q - 256*Q^2 + O(deg 3)`.
    pub fn digest(&self) -> String {
        let mut items: Vec<(&Exp2, &BigRational)> = self.terms.iter().collect();
        items.sort_by_key(|(e, _)| (e.deg(), std::cmp::Reverse(e.a)));
        let mut out = String::new();
        for (i, (e, c)) in items.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = monomial_str(e.a, e.b);
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}*{mono}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        if self.order < EXACT {
            out.push_str(&format!(" + O(deg {})", self.order + 1));
        }
        out
    }
}

fn monomial_str(a: i64, b: i64) -> String {
    let f = |v: &str, e: i64| -> String {
        match e {
            0 => String::new(),
            1 => v.to_string(),
            _ => format!("{v}^{e}"),
        }
    };
    let parts: Vec<String> = [f("P", a), f("Q", b)].into_iter().filter(|s| !s.is_empty()).collect();
    parts.join("*")
}

fn min_pair(x: (i64, i64), y: (i64, i64)) -> (i64, i64) {
    (x.0.min(y.0), x.1.min(y.1))
}

/// Lossy conversion of a big rational to `f64`.
pub fn big_to_f64(c: &BigRational) -> f64 {
    match (c.numer().to_f64(), c.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale down huge values.
            let nb = c.numer().bits() as i64;
            let db = c.denom().bits() as i64;
            let shift = (nb - db).max(0) as u32;
            let n = (c.numer() >> (nb.saturating_sub(60).max(0) as usize)).to_f64().unwrap_or(0.0);
            let d = (c.denom() >> (db.saturating_sub(60).max(0) as usize)).to_f64().unwrap_or(1.0);
            let _ = shift;
            n / d * 2f64.powi((nb.saturating_sub(60).max(0) - db.saturating_sub(60).max(0)) as i32)
        }
    }
}

/// Truncated one-variable Laurent series `q^{offset} Σ c_n q^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries1 {
    pub terms: BTreeMap<i64, BigRational>,
    pub order: i64,
    pub lower: i64,
    /// Symbolic exponent offset, never merged into the integer exponents.
    pub offset: Q,
}

impl LaurentSeries1 {
    /// From integer coefficients `c_lower, c_{lower+1}, …` known up to `order`.
    pub fn from_ints(lower: i64, coeffs: &[BigInt], order: i64, offset: Q) -> Self {
        let mut terms = BTreeMap::new();
        for (i, c) in coeffs.iter().enumerate() {
            let n = lower + i as i64;
            if n <= order && !c.is_zero() {
                terms.insert(n, BigRational::from_integer(c.clone()));
            }
        }
        Self { terms, order, lower, offset }
    }

    /// Coefficient of `q^n` (relative to the offset).
    pub fn coeff(&self, n: i64) -> Option<BigRational> {
        if n > self.order {
            return None;
        }
        Some(self.terms.get(&n).cloned().unwrap_or_else(BigRational::zero))
    }

    /// Integer coefficient (panics if not integral).
    pub fn coeff_int(&self, n: i64) -> BigInt {
        let c = self.coeff(n).expect("beyond truncation order");
        assert!(c.is_integer(), "non-integral coefficient");
        c.to_integer()
    }

    fn val(&self) -> i64 {
        self.terms.keys().next().copied().unwrap_or(sat_add(self.order, 1))
    }

    /// Product (offsets add).
    pub fn mul(&self, o: &Self) -> Result<Self> {
        let order = sat_add(self.order, o.val()).min(sat_add(o.order, self.val()));
        let lower = self.lower + o.lower;
        if order < lower {
            return Err(Error::TruncationUnderflow { order, lower });
        }
        let mut acc: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                if e1 + e2 <= order {
                    *acc.entry(e1 + e2).or_insert_with(BigRational::zero) += c1 * c2;
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Self { terms: acc, order, lower, offset: self.offset + o.offset })
    }

    /// Sum (offsets must agree).
    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.offset != o.offset {
            return Err(Error::Incompatible("different exponent offsets".into()));
        }
        let order = self.order.min(o.order);
        let mut acc: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (e, c) in self.terms.iter().chain(o.terms.iter()) {
            if *e <= order {
                *acc.entry(*e).or_insert_with(BigRational::zero) += c;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Self { terms: acc, order, lower: self.lower.min(o.lower), offset: self.offset })
    }

    /// Evaluate at `q` (the offset factor `q^{offset}` is the caller's business).
    pub fn eval_stripped(&self, q: num_complex::Complex64) -> num_complex::Complex64 {
        let mut s = num_complex::Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            s += q.powi(*e as i32) * big_to_f64(c);
        }
        s
    }

    /// Re-express as a two-variable series in `P` with `q = P^{2·scale}`
    /// (the offset must be integral in those units).
    pub fn to_series2_in_p(&self, half_units_per_q: i64) -> LaurentSeries2 {
        let mut s = LaurentSeries2 {
            terms: BTreeMap::new(),
            order: if self.order >= EXACT { EXACT } else { self.order * half_units_per_q },
            lower: DEFAULT_LOWER,
        };
        for (e, c) in &self.terms {
            s.terms.insert(Exp2::new(e * half_units_per_q, 0), c.clone());
        }
        s
    }

    /// JSON form (single-variable terms reported with `b = 0`).
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(e, c)| serde_json::json!([e, 0, c.numer().to_string(), c.denom().to_string()]))
            .collect();
        serde_json::json!({
            "lower": [self.lower, 0],
            "order": self.order,
            "offset": self.offset.to_string(),
            "terms": terms,
        })
    }
}

/// Coefficients of `∏_{n≥1} (1 − q^{kn})` up to `q^order` (Euler's
/// pentagonal theorem, rescaled).
fn euler_product(k: usize, order: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); order + 1];
    c[0] = BigInt::one();
    let mut j: i64 = 1;
    loop {
        let mut any = false;
        for g in [j * (3 * j - 1) / 2, j * (3 * j + 1) / 2] {
            let e = g as usize * k;
            if e <= order {
                c[e] += if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                any = true;
            }
        }
        if !any {
            break;
        }
        j += 1;
    }
    c
}

/// `f^e` for a power series with `f_0 = 1` and integer coefficients (Miller's
/// recurrence; the divisions are exact).
fn series_pow(f: &[BigInt], e: i64, order: usize) -> Vec<BigInt> {
    assert!(f[0].is_one());
    let mut g = vec![BigInt::zero(); order + 1];
    g[0] = BigInt::one();
    let nz: Vec<usize> = (1..f.len().min(order + 1)).filter(|&k| !f[k].is_zero()).collect();
    for n in 1..=order {
        let mut s = BigInt::zero();
        for &k in &nz {
            if k > n {
                break;
            }
            let w = BigInt::from(k as i64 * (e + 1) - n as i64);
            s += w * &f[k] * &g[n - k];
        }
        let (q, r) = s.div_rem(&BigInt::from(n));
        debug_assert!(r.is_zero());
        g[n] = q;
    }
    g
}

/// Naive product of two integer series truncated at `order`.
fn series_mul_int(a: &[BigInt], b: &[BigInt], order: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            if !y.is_zero() {
                c[i + j] += x * y;
            }
        }
    }
    c
}

/// `∏ η(k_i τ)^{e_i}` as `q^{Σ e_i k_i/24} · Σ_{n=0}^{order} c_n q^n`.
pub fn eta_quotient_qexp(factors: &[(u32, i64)], order: i64) -> Result<LaurentSeries1> {
    if order < 0 {
        return Err(Error::InvalidInput("order must be ≥ 0".into()));
    }
    let n = order as usize;
    let mut acc = vec![BigInt::zero(); n + 1];
    acc[0] = BigInt::one();
    let mut offset = Q::zero();
    for &(k, e) in factors {
        if k == 0 {
            return Err(Error::InvalidInput("η scale must be positive".into()));
        }
        offset += Q::new(e * k as i64, 24);
        let base = euler_product(k as usize, n);
        let p = series_pow(&base, e, n);
        acc = series_mul_int(&acc, &p, n);
    }
    Ok(LaurentSeries1::from_ints(0, &acc, order, offset))
}

/// Exact values `c(−1), …, c(n_max)` of `η(τ)^{-8}η(2τ)^8η(4τ)^{-8} = Σ c(n) qⁿ`.
pub fn c_coeffs(n_max: i64) -> Vec<BigInt> {
    static CACHE: OnceLock<Mutex<Vec<BigInt>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let need = (n_max + 2).max(0) as usize;
    let mut guard = cache.lock().unwrap();
    if guard.len() < need {
        let target = need.max(2 * guard.len()).max(64);
        let s = eta_quotient_qexp(&[(1, -8), (2, 8), (4, -8)], target as i64 - 1).unwrap();
        *guard = (0..target as i64).map(|i| s.coeff_int(i)).collect();
    }
    guard[..need].to_vec()
}

/// `c(n)` with the convention `c(n) = 0` for `n < −1`.
pub fn c_coeff(n: i64) -> BigInt {
    if n < -1 {
        return BigInt::zero();
    }
    c_coeffs(n)[(n + 1) as usize].clone()
}

/// `c(n)` as `f64` (0 below −1).
pub fn c_coeff_f64(n: i64) -> f64 {
    static CACHE: OnceLock<Mutex<Vec<f64>>> = OnceLock::new();
    if n < -1 {
        return 0.0;
    }
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut g = cache.lock().unwrap();
    let idx = (n + 1) as usize;
    if g.len() <= idx {
        let v = c_coeffs(n.max(2 * g.len() as i64));
        *g = v.iter().map(|b| b.to_f64().unwrap_or(f64::INFINITY)).collect();
    }
    g[idx]
}

/// `c(n)` as `i128` (panics on overflow).
pub fn c_coeff_i128(n: i64) -> i128 {
    if n < -1 {
        return 0;
    }
    c_coeff(n).to_i128().expect("c(n) exceeds i128")
}

/// `σ₃(n)`.
pub fn sigma3(n: u64) -> u64 {
    (1..=n).filter(|d| n % d == 0).map(|d| d * d * d).sum()
}

/// Coefficients of `E₄ = 1 + 240 Σ σ₃(n) qⁿ` up to `q^order`.
pub fn e4_coeffs(order: usize) -> Vec<BigInt> {
    (0..=order)
        .map(|n| if n == 0 { BigInt::one() } else { BigInt::from(240u64 * sigma3(n as u64)) })
        .collect()
}

/// `j(τ) = E₄³ / (q ∏(1−qⁿ)²⁴)` from `q^{-1}` through `q^order`.
pub fn j_qexp(order: i64) -> Result<LaurentSeries1> {
    if order < -1 {
        return Err(Error::InvalidInput("order must be ≥ −1".into()));
    }
    let n = (order + 1) as usize;
    let e4 = e4_coeffs(n);
    let e4c = series_mul_int(&series_mul_int(&e4, &e4, n), &e4, n);
    let inv_delta = series_pow(&euler_product(1, n), -24, n);
    let c = series_mul_int(&e4c, &inv_delta, n);
    Ok(LaurentSeries1::from_ints(-1, &c, order, Q::zero()))
}

/// The two sides of the Monster denominator identity
/// `j(p) − j(q) = (p⁻¹ − q⁻¹) ∏_{m,n>0} (1 − p^m qⁿ)^{a(mn)}`.
///
/// `order` is in full units: the returned series are exact for every monomial
/// `p^m qⁿ` with total degree `m + n ≤ 2·order + 1`, which covers the box
/// `m, n ≤ order`.  The series use half units (`p = P²`, `q = Q²`).
pub fn monster_denominator_series(order: i64) -> Result<(LaurentSeries2, LaurentSeries2)> {
    if order < 1 {
        return Err(Error::InvalidInput("order must be ≥ 1".into()));
    }
    let d = 2 * order + 1; // full-unit total degree kept
    let half_order = 2 * d;
    let j = j_qexp(d)?;
    let mut lhs = LaurentSeries2::zero(half_order);
    for (e, c) in &j.terms {
        lhs.add_term(Exp2::new(2 * e, 0), c.clone());
        lhs.add_term(Exp2::new(0, 2 * e), -c.clone());
    }
    // Product over m + n ≤ d + 1 on a dense full-unit box, then convert.
    let box_deg = (d + 1) as usize;
    // Exponents c(mn) with m + n ≤ box_deg, so mn ≤ box_deg²/4.
    let mn_max = (box_deg * box_deg / 4) as i64;
    let jc = j_qexp(mn_max)?;
    let a: Vec<BigInt> = (0..=mn_max).map(|k| jc.coeff_int(k)).collect();
    let mut prod: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); box_deg + 1]; box_deg + 1];
    prod[0][0] = BigInt::one();
    for m in 1..=box_deg {
        for n in 1..=(box_deg - m) {
            let e = &a[m * n];
            // (1 − p^m qⁿ)^e as a series in t = p^m qⁿ, truncated by degree.
            let kmax = box_deg / (m + n);
            let mut binom = vec![BigInt::one()];
            for k in 1..=kmax {
                // binom(e, k)·(−1)^k
                let prev = binom[k - 1].clone();
                let num = prev * (e - BigInt::from(k - 1)) * BigInt::from(-1);
                binom.push(num / BigInt::from(k));
            }
            let mut next = vec![vec![BigInt::zero(); box_deg + 1]; box_deg + 1];
            for x in 0..=box_deg {
                for y in 0..=(box_deg - x) {
                    if prod[x][y].is_zero() {
                        continue;
                    }
                    for (k, bk) in binom.iter().enumerate() {
                        let (xx, yy) = (x + k * m, y + k * n);
                        if xx + yy > box_deg {
                            break;
                        }
                        next[xx][yy] += &prod[x][y] * bk;
                    }
                }
            }
            prod = next;
        }
    }
    let mut prod_s = LaurentSeries2::zero(2 * box_deg as i64);
    for x in 0..=box_deg {
        for y in 0..=(box_deg - x) {
            prod_s.add_term(Exp2::new(2 * x as i64, 2 * y as i64), BigRational::from_integer(prod[x][y].clone()));
        }
    }
    let pre = LaurentSeries2::poly(&[(-2, 0, 1), (0, -2, -1)]);
    let rhs = pre.mul(&prod_s)?.truncate(half_order);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn difference_of_squares() {
        let a = LaurentSeries2::poly(&[(0, 0, 1), (1, 0, 1)]);
        let b = LaurentSeries2::poly(&[(0, 0, 1), (1, 0, -1)]);
        assert_eq!(a.mul(&b).unwrap(), LaurentSeries2::poly(&[(0, 0, 1), (2, 0, -1)]));
    }

    #[test]
    fn geometric_inverse() {
        let a = LaurentSeries2::poly(&[(0, 0, 1), (1, 0, -1)]).truncate(6);
        let inv = a.pow_int(-1).unwrap();
        for k in 0..=6 {
            assert_eq!(inv.coeff(k, 0), Some(r(1)));
        }
        assert_eq!(inv.coeff(7, 0), None);
    }

    #[test]
    fn monomial_power() {
        let m = LaurentSeries2::monomial(r(1), -2, 0);
        assert_eq!(m.pow_int(3).unwrap(), LaurentSeries2::monomial(r(1), -6, 0));
    }

    #[test]
    fn c_values() {
        let c = c_coeffs(12);
        let expect = [1, 8, 36, 128, 402, 1152, 3064, 7680, 18351, 42112, 93300, 200448, 419150, 855552];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(c[i], BigInt::from(*e));
        }
    }

    #[test]
    fn j_leading() {
        let j = j_qexp(2).unwrap();
        assert_eq!(j.coeff_int(-1), BigInt::from(1));
        assert_eq!(j.coeff_int(0), BigInt::from(744));
        assert_eq!(j.coeff_int(1), BigInt::from(196884));
    }
}
