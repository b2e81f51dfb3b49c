//! Arbitrary-precision evaluation of η, the θ-constants, λ, `j` and the Weber
//! function on the upper half-plane.
//!
//! Every function reduces its argument to the standard fundamental domain
//! first (`|Re τ| ≤ ½`, `|τ| ≥ 1`), so the series converge at least like
//! `e^{-π√3 n}`.  η is transported back through `η(τ+1) = e^{πi/12}η(τ)` and
//! `η(−1/τ) = √(−iτ)·η(τ)`; the θ-constants, λ and `W` are η-quotients,
//! and `j` is evaluated as `E₄³/Δ` at the reduced point.
//!
//! Working precision is the requested precision plus 32 guard bits.

use crate::error::{Error, Result};
use astro_float::{BigFloat, Consts, RoundingMode};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;

const RM: RoundingMode = RoundingMode::ToEven;
const GUARD: usize = 32;

/// An arbitrary-precision complex number with its precision in bits.
#[derive(Clone, Debug)]
pub struct ComplexAP {
    pub re: BigFloat,
    pub im: BigFloat,
    pub prec: usize,
}

/// A point of the upper half-plane at a given precision.
#[derive(Clone, Debug)]
pub struct HalfPlanePoint {
    pub re: BigFloat,
    pub im: BigFloat,
    pub prec: usize,
}

fn bf_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    // Decimal round trip; correctly rounded on both sides up to the last ulp.
    format!("{x}").parse::<f64>().unwrap_or(f64::NAN)
}

fn bf_rational(r: &BigRational, p: usize) -> BigFloat {
    let num = BigFloat::parse(&r.numer().to_string(), astro_float::Radix::Dec, p, RM, &mut Consts::new().unwrap());
    let den = BigFloat::parse(&r.denom().to_string(), astro_float::Radix::Dec, p, RM, &mut Consts::new().unwrap());
    num.div(&den, p, RM)
}

impl HalfPlanePoint {
    /// From a double-precision point (exact conversion of the binary value).
    pub fn from_c64(z: Complex64, prec: usize) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidInput("non-finite point".into()));
        }
        if !(z.im > 0.0) {
            return Err(Error::InvalidInput("point must lie in the upper half-plane".into()));
        }
        let p = prec + GUARD;
        Ok(Self { re: BigFloat::from_f64(z.re, p), im: BigFloat::from_f64(z.im, p), prec })
    }

    /// From exact rational coordinates.
    pub fn from_rationals(re: &BigRational, im: &BigRational, prec: usize) -> Result<Self> {
        if !im.is_positive() {
            return Err(Error::InvalidInput("point must lie in the upper half-plane".into()));
        }
        let p = prec + GUARD;
        Ok(Self { re: bf_rational(re, p), im: bf_rational(im, p), prec })
    }

    /// Parse `"a+bi"`, `"bi"`, `"a-bi"`, `"2i"`, `"1/2+3i"`, `"5i/2"`, `"1.5+0.25i"`.
    pub fn parse(s: &str, prec: usize) -> Result<Self> {
        let (re, im) = parse_complex_rational(s)?;
        Self::from_rationals(&re, &im, prec)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(bf_to_f64(&self.re), bf_to_f64(&self.im))
    }

    fn as_complex(&self) -> ComplexAP {
        ComplexAP { re: self.re.clone(), im: self.im.clone(), prec: self.prec }
    }
}

/// Parse a complex number with rational parts; see [`HalfPlanePoint::parse`].
pub fn parse_complex_rational(s: &str) -> Result<(BigRational, BigRational)> {
    let bad = || Error::InvalidInput(format!("cannot parse complex number {s:?}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    // Split into signed terms.
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, ch) in t.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('e') && !cur.ends_with('E') {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut re = BigRational::zero();
    let mut im = BigRational::zero();
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(b) => (-1, b.to_string()),
            None => (1, term.trim_start_matches('+').to_string()),
        };
        if body.contains('i') {
            let b = body.replacen('i', "", 1);
            let b = b.replace("*", "");
            let v = if b.is_empty() {
                BigRational::from_integer(1.into())
            } else if let Some(rest) = b.strip_prefix('/') {
                BigRational::new(1.into(), parse_rational(rest).ok_or_else(bad)?.to_integer())
            } else {
                parse_rational(&b).ok_or_else(bad)?
            };
            im += v * BigRational::from_integer(sign.into());
        } else {
            re += parse_rational(&body).ok_or_else(bad)? * BigRational::from_integer(sign.into());
        }
    }
    Ok((re, im))
}

fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((a, b)) = s.split_once('/') {
        let a = parse_rational(a)?;
        let b = parse_rational(b)?;
        if b.is_zero() {
            return None;
        }
        return Some(a / b);
    }
    if let Some((mant, exp)) = s.split_once(['e', 'E']) {
        let m = parse_rational(mant)?;
        let e: i32 = exp.parse().ok()?;
        let ten = BigRational::from_integer(10.into());
        return Some(if e >= 0 { m * num_traits::pow(ten, e as usize) } else { m / num_traits::pow(ten, (-e) as usize) });
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: num_bigint::BigInt = if digits.is_empty() { 0.into() } else { digits.parse().ok()? };
    let d = num_traits::pow(num_bigint::BigInt::from(10), frac.len());
    Some(BigRational::new(n, d))
}

/// Precision context: working precision and the constants cache.
struct Ctx {
    p: usize,
    cc: Consts,
}

impl Ctx {
    fn new(prec: usize) -> Self {
        Self { p: prec + GUARD, cc: Consts::new().expect("constants cache") }
    }
    fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }
    fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }
}

impl ComplexAP {
    fn new(re: BigFloat, im: BigFloat, prec: usize) -> Self {
        Self { re, im, prec }
    }

    /// From a double.
    pub fn from_c64(z: Complex64, prec: usize) -> Self {
        let p = prec + GUARD;
        Self::new(BigFloat::from_f64(z.re, p), BigFloat::from_f64(z.im, p), prec)
    }

    /// The integer `v`.
    pub fn from_i64(v: i64, prec: usize) -> Self {
        let p = prec + GUARD;
        Self::new(BigFloat::from_i64(v, p), BigFloat::from_i64(0, p), prec)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(bf_to_f64(&self.re), bf_to_f64(&self.im))
    }

    fn wp(&self, o: &Self) -> (usize, usize) {
        let prec = self.prec.min(o.prec);
        (prec, prec + GUARD)
    }

    pub fn add(&self, o: &Self) -> Self {
        let (prec, p) = self.wp(o);
        Self::new(self.re.add(&o.re, p, RM), self.im.add(&o.im, p, RM), prec)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let (prec, p) = self.wp(o);
        Self::new(self.re.sub(&o.re, p, RM), self.im.sub(&o.im, p, RM), prec)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (prec, p) = self.wp(o);
        let re = self.re.mul(&o.re, p, RM).sub(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.re.mul(&o.im, p, RM).add(&self.im.mul(&o.re, p, RM), p, RM);
        Self::new(re, im, prec)
    }

    pub fn scale(&self, k: &BigFloat) -> Self {
        let p = self.prec + GUARD;
        Self::new(self.re.mul(k, p, RM), self.im.mul(k, p, RM), self.prec)
    }

    pub fn norm_sqr(&self) -> BigFloat {
        let p = self.prec + GUARD;
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    pub fn div(&self, o: &Self) -> Self {
        let (prec, p) = self.wp(o);
        let d = o.norm_sqr();
        let re = self.re.mul(&o.re, p, RM).add(&self.im.mul(&o.im, p, RM), p, RM).div(&d, p, RM);
        let im = self.im.mul(&o.re, p, RM).sub(&self.re.mul(&o.im, p, RM), p, RM).div(&d, p, RM);
        Self::new(re, im, prec)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.re.neg(), self.im.neg(), self.prec)
    }

    /// `zⁿ` for an integer `n` (square-and-multiply).
    pub fn powi(&self, n: i64) -> Self {
        let p = self.prec + GUARD;
        let mut acc = Self::new(BigFloat::from_i64(1, p), BigFloat::from_i64(0, p), self.prec);
        let mut base = self.clone();
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        if n < 0 {
            let one = Self::new(BigFloat::from_i64(1, p), BigFloat::from_i64(0, p), self.prec);
            one.div(&acc)
        } else {
            acc
        }
    }

    fn exp(&self, ctx: &mut Ctx) -> Self {
        let p = ctx.p;
        let m = self.re.exp(p, RM, &mut ctx.cc);
        let c = self.im.cos(p, RM, &mut ctx.cc);
        let s = self.im.sin(p, RM, &mut ctx.cc);
        Self::new(m.mul(&c, p, RM), m.mul(&s, p, RM), self.prec)
    }

    /// Principal square root.
    fn sqrt(&self, ctx: &mut Ctx) -> Self {
        let p = ctx.p;
        let r = self.norm_sqr().sqrt(p, RM);
        let two = ctx.f(2.0);
        let a = r.add(&self.re, p, RM).div(&two, p, RM).sqrt(p, RM);
        let b = r.sub(&self.re, p, RM).div(&two, p, RM).sqrt(p, RM);
        let b = if self.im.is_negative() { b.neg() } else { b };
        Self::new(a, b, self.prec)
    }

    /// Principal `ln z` as a double-precision complex number, without
    /// overflow for values outside the double range.
    pub fn ln_c64(&self) -> Complex64 {
        let p = self.prec + GUARD;
        let n = self.norm_sqr();
        if n.is_zero() {
            return Complex64::new(f64::NEG_INFINITY, 0.0);
        }
        let mut cc = Consts::new().expect("constant cache");
        let ln_abs = bf_to_f64(&n.ln(p, RM, &mut cc)) / 2.0;
        let r = n.sqrt(p, RM);
        let c = bf_to_f64(&self.re.div(&r, p, RM));
        let s = bf_to_f64(&self.im.div(&r, p, RM));
        Complex64::new(ln_abs, s.atan2(c))
    }

    /// `|z|` as a double.
    pub fn abs_f64(&self) -> f64 {
        bf_to_f64(&self.norm_sqr().sqrt(self.prec + GUARD, RM))
    }

    /// Decimal rendering `a+bi` with about `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let c = |x: &BigFloat| -> String {
            let s = format!("{x}");
            shorten(&s, digits)
        };
        let im = c(&self.im);
        if im.starts_with('-') {
            format!("{}{}i", c(&self.re), im)
        } else {
            format!("{}+{}i", c(&self.re), im)
        }
    }
}

/// Round a `d.ddd…e±N` decimal string to `digits` significant digits
/// (round half up), dropping trailing zeros.
fn shorten(s: &str, digits: usize) -> String {
    let (mant, exp) = s.split_once('e').unwrap_or((s, "0"));
    let neg = mant.starts_with('-');
    let mut exp: i64 = exp.trim_start_matches('+').parse().unwrap_or(0);
    let mut d: Vec<u8> = mant.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();
    let digits = digits.max(1);
    if d.len() > digits {
        let up = d[digits] >= 5;
        d.truncate(digits);
        if up {
            let mut i = digits;
            loop {
                if i == 0 {
                    d.insert(0, 1);
                    d.pop();
                    exp += 1;
                    break;
                }
                i -= 1;
                if d[i] == 9 {
                    d[i] = 0;
                } else {
                    d[i] += 1;
                    break;
                }
            }
        }
    }
    while d.len() > 1 && d.last() == Some(&0) {
        d.pop();
    }
    let body: String = d.iter().map(|x| char::from(b'0' + x)).collect();
    let (head, tail) = body.split_at(1);
    let sign = if neg { "-" } else { "" };
    let tail = if tail.is_empty() { "0" } else { tail };
    format!("{sign}{head}.{tail}e{}{exp}", if exp > 0 { "+" } else { "" })
}

impl fmt::Display for ComplexAP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(self.prec * 3 / 10))
    }
}

/// One reduction step, recorded from the original point towards the
/// fundamental domain.
#[derive(Clone, Copy, Debug)]
enum Step {
    /// `τ ↦ τ − n`.
    Shift(i64),
    /// `τ ↦ −1/τ`.
    Invert,
}

/// Reduce into the fundamental domain, returning the reduced point and the
/// steps taken.
fn reduce(t: &ComplexAP, ctx: &mut Ctx) -> Result<(ComplexAP, Vec<Step>)> {
    let p = ctx.p;
    let mut z = t.clone();
    let mut steps = Vec::new();
    for _ in 0..10_000 {
        let n = bf_to_f64(&z.re).round();
        if !n.is_finite() {
            return Err(Error::InvalidInput("non-finite point".into()));
        }
        if n != 0.0 {
            z.re = z.re.sub(&BigFloat::from_f64(n, p), p, RM);
            steps.push(Step::Shift(n as i64));
        }
        let r2 = bf_to_f64(&z.norm_sqr());
        if r2 < 1.0 - 1e-12 {
            let one = ComplexAP::new(BigFloat::from_i64(1, p), BigFloat::from_i64(0, p), z.prec);
            z = one.div(&z).neg();
            steps.push(Step::Invert);
        } else {
            return Ok((z, steps));
        }
    }
    Err(Error::LimitExceeded("fundamental-domain reduction did not terminate".into()))
}

/// `e^{2πi·(num/den)·τ}`.
fn qpow(t: &ComplexAP, num: i64, den: i64, ctx: &mut Ctx) -> ComplexAP {
    let p = ctx.p;
    let two_pi_k = ctx.pi().mul(&BigFloat::from_i64(2 * num, p), p, RM).div(&BigFloat::from_i64(den, p), p, RM);
    // 2πikτ = 2πk(−Im τ + i Re τ)
    ComplexAP::new(t.im.mul(&two_pi_k, p, RM).neg(), t.re.mul(&two_pi_k, p, RM), t.prec).exp(ctx)
}

/// `η` at a reduced point via the pentagonal-number series
/// `q^{1/24} Σ_k (−1)^k q^{k(3k−1)/2}`.
fn eta_reduced(t: &ComplexAP, ctx: &mut Ctx) -> ComplexAP {
    let p = ctx.p;
    let q = qpow(t, 1, 1, ctx);
    let lq = -2.0 * std::f64::consts::PI * bf_to_f64(&t.im); // ln|q|
    let cutoff = -((p as f64) + 8.0) * std::f64::consts::LN_2;
    let mut sum = ComplexAP::new(BigFloat::from_i64(1, p), BigFloat::from_i64(0, p), t.prec);
    let mut k: i64 = 1;
    loop {
        let e1 = k * (3 * k - 1) / 2;
        if (e1 as f64) * lq < cutoff {
            break;
        }
        let e2 = k * (3 * k + 1) / 2;
        let mut term = q.powi(e1);
        if (e2 as f64) * lq >= cutoff {
            term = term.add(&q.powi(e2));
        }
        sum = if k % 2 == 1 { sum.sub(&term) } else { sum.add(&term) };
        k += 1;
    }
    qpow(t, 1, 24, ctx).mul(&sum)
}

fn eta_ctx(t: &ComplexAP, ctx: &mut Ctx) -> Result<ComplexAP> {
    let (z, steps) = reduce(t, ctx)?;
    let mut val = eta_reduced(&z, ctx);
    let p = ctx.p;
    // Walk back: `cur` is the point at which `val` is η.
    let mut cur = z;
    for s in steps.iter().rev() {
        match *s {
            Step::Shift(n) => {
                // previous = cur + n; η(cur + n) = e^{πin/12} η(cur)
                let ang = ctx.pi().mul(&BigFloat::from_i64(n, p), p, RM).div(&BigFloat::from_i64(12, p), p, RM);
                let u = ComplexAP::new(BigFloat::from_i64(0, p), ang, cur.prec).exp(ctx);
                val = val.mul(&u);
                cur.re = cur.re.add(&BigFloat::from_i64(n, p), p, RM);
            }
            Step::Invert => {
                // previous = −1/cur; η(−1/cur) = √(−i·cur) η(cur)
                let mi = ComplexAP::new(cur.im.clone(), cur.re.neg(), cur.prec);
                val = val.mul(&mi.sqrt(ctx));
                let one = ComplexAP::new(BigFloat::from_i64(1, p), BigFloat::from_i64(0, p), cur.prec);
                cur = one.div(&cur).neg();
            }
        }
    }
    Ok(val)
}

fn scaled(t: &HalfPlanePoint, k: f64) -> ComplexAP {
    let p = t.prec + GUARD;
    let kk = BigFloat::from_f64(k, p);
    ComplexAP::new(t.re.mul(&kk, p, RM), t.im.mul(&kk, p, RM), t.prec)
}

/// Dedekind η.
pub fn eta_eval(t: &HalfPlanePoint) -> Result<ComplexAP> {
    let mut ctx = Ctx::new(t.prec);
    eta_ctx(&t.as_complex(), &mut ctx)
}

/// θ₂, θ₃ or θ₄ (`kind` ∈ {2, 3, 4}) with `θ(τ) = Σ e^{πi n² τ}`-type series,
/// via `θ₂ = 2η(2τ)²/η(τ)`, `θ₃ = η(τ)⁵/(η(τ/2)²η(2τ)²)`, `θ₄ = η(τ/2)²/η(τ)`.
pub fn theta_eval(kind: u8, t: &HalfPlanePoint) -> Result<ComplexAP> {
    let mut ctx = Ctx::new(t.prec);
    let e1 = eta_ctx(&t.as_complex(), &mut ctx)?;
    match kind {
        2 => {
            let e2 = eta_ctx(&scaled(t, 2.0), &mut ctx)?;
            Ok(e2.powi(2).div(&e1).scale(&ctx.f(2.0)))
        }
        3 => {
            let e2 = eta_ctx(&scaled(t, 2.0), &mut ctx)?;
            let eh = eta_ctx(&scaled(t, 0.5), &mut ctx)?;
            Ok(e1.powi(5).div(&eh.powi(2).mul(&e2.powi(2))))
        }
        4 => {
            let eh = eta_ctx(&scaled(t, 0.5), &mut ctx)?;
            Ok(eh.powi(2).div(&e1))
        }
        _ => Err(Error::InvalidInput(format!("unknown theta constant θ{kind}"))),
    }
}

/// `λ = θ₂⁴/θ₃⁴ = 16 η(τ/2)⁸ η(2τ)¹⁶ / η(τ)²⁴`.
pub fn lambda_eval(t: &HalfPlanePoint) -> Result<ComplexAP> {
    let mut ctx = Ctx::new(t.prec);
    let e1 = eta_ctx(&t.as_complex(), &mut ctx)?;
    let e2 = eta_ctx(&scaled(t, 2.0), &mut ctx)?;
    let eh = eta_ctx(&scaled(t, 0.5), &mut ctx)?;
    Ok(eh.powi(8).mul(&e2.powi(16)).div(&e1.powi(24)).scale(&ctx.f(16.0)))
}

/// Klein's `j = E₄³/Δ`, evaluated at the reduced point.
pub fn j_eval(t: &HalfPlanePoint) -> Result<ComplexAP> {
    let mut ctx = Ctx::new(t.prec);
    let (z, _) = reduce(&t.as_complex(), &mut ctx)?;
    let p = ctx.p;
    let q = qpow(&z, 1, 1, &mut ctx);
    let lq = -2.0 * std::f64::consts::PI * bf_to_f64(&z.im);
    let cutoff = -((p as f64) + 24.0) * std::f64::consts::LN_2;
    let mut e4 = ComplexAP::new(BigFloat::from_i64(1, p), BigFloat::from_i64(0, p), z.prec);
    let mut qn = q.clone();
    let mut n: u64 = 1;
    while (n as f64) * lq - (240.0 * (n as f64).powi(4)).ln() >= cutoff {
        let c = BigFloat::from_u64(240 * crate::qseries::sigma3(n), p);
        e4 = e4.add(&qn.scale(&c));
        qn = qn.mul(&q);
        n += 1;
    }
    let delta = eta_reduced(&z, &mut ctx).powi(24);
    Ok(e4.powi(3).div(&delta))
}

/// Weber function `W(τ) = 2¹² η(2τ)²⁴/η(τ)²⁴`.
pub fn weber_eval(t: &HalfPlanePoint) -> Result<ComplexAP> {
    let mut ctx = Ctx::new(t.prec);
    let e1 = eta_ctx(&t.as_complex(), &mut ctx)?;
    let e2 = eta_ctx(&scaled(t, 2.0), &mut ctx)?;
    Ok(e2.div(&e1).powi(24).scale(&ctx.f(4096.0)))
}

/// Convenience: evaluate at a double-precision point with 53 + guard bits and
/// return a double.
pub fn eval_c64(f: fn(&HalfPlanePoint) -> Result<ComplexAP>, t: Complex64) -> Result<Complex64> {
    Ok(f(&HalfPlanePoint::from_c64(t, 64)?)?.to_c64())
}

/// Relative difference `|a − b| / max(|a|, |b|)`.
pub fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    let d = (a - b).norm();
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// Round a double to `digits` significant decimal digits in scientific form.
pub fn fmt_c64(z: Complex64) -> String {
    format!("{:.15e}{:+.15e}i", z.re, z.im)
}

/// `BigRational` to double (helper for callers that parse rational input).
pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(re: f64, im: f64) -> HalfPlanePoint {
        HalfPlanePoint::from_c64(Complex64::new(re, im), 100).unwrap()
    }

    #[test]
    fn decimal_output_rounds_to_nearest() {
        assert_eq!(shorten("1.72799999999999e+3", 10), "1.728e+3");
        assert_eq!(shorten("9.9999999e0", 4), "1.0e+1");
        assert_eq!(shorten("-1.23449e-5", 4), "-1.234e-5");
        assert_eq!(shorten("-0.0e0", 5), "-0.0e0");
        assert_eq!(shorten("2.5e1", 10), "2.5e+1");
    }

    #[test]
    fn parses_points() {
        let h = |s: &str| {
            let (a, b) = parse_complex_rational(s).unwrap();
            (rat_to_f64(&a), rat_to_f64(&b))
        };
        assert_eq!(h("2i"), (0.0, 2.0));
        assert_eq!(h("1/2+3i"), (0.5, 3.0));
        assert_eq!(h("5i/2"), (0.0, 2.5));
        assert_eq!(h("1+2i"), (1.0, 2.0));
        assert_eq!(h("-0.5-1.25i"), (-0.5, -1.25));
        assert_eq!(h("i"), (0.0, 1.0));
        assert!(parse_complex_rational("x").is_err());
    }

    #[test]
    fn eta_at_i() {
        // η(i) = Γ(1/4) / (2 π^{3/4})
        let g14 = 3.625_609_908_221_908_f64;
        let want = g14 / (2.0 * std::f64::consts::PI.powf(0.75));
        let v = eta_eval(&pt(0.0, 1.0)).unwrap().to_c64();
        assert!((v.re - want).abs() < 1e-15 && v.im.abs() < 1e-15, "{v}");
    }

    #[test]
    fn eta_transforms() {
        let t = Complex64::new(0.3, 0.4);
        let a = eval_c64(eta_eval, t).unwrap();
        let b = eval_c64(eta_eval, -1.0 / t).unwrap();
        let f = (Complex64::new(0.0, -1.0) * t).sqrt();
        assert!(rel_diff(b, f * a) < 1e-14);
    }

    #[test]
    fn j_special_values() {
        let v = eval_c64(j_eval, Complex64::new(0.0, 1.0)).unwrap();
        assert!((v - 1728.0).norm() < 1e-9, "{v}");
        let rho = Complex64::new(0.5, 3f64.sqrt() / 2.0);
        assert!(eval_c64(j_eval, rho).unwrap().norm() < 1e-9);
    }

    #[test]
    fn lambda_special_values() {
        let v = eval_c64(lambda_eval, Complex64::new(0.0, 1.0)).unwrap();
        assert!((v - 0.5).norm() < 1e-15);
    }
}
