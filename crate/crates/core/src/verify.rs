//! The identity suite: each check computes both sides of an identity
//! independently and returns a self-contained [`Report`].
//!
//! Numerical checks compare values in log form, so products of large and
//! small factors never overflow; relative errors are `|exp(log L − log R) − 1|`.
//! Exact series checks compare coefficients over ℚ and report digests.

use crate::borcherds::{
    automorphy_defect, mobius, phi1_eval, phi2_eval, phi_gamma_eval, phi_gamma_leading_qexp, PhiValue, ProductParams,
};
use crate::enriques::{all_lambda_gammas, omega, pair_amb_c, LambdaGamma, Parity};
use crate::error::{Error, Result};
use crate::lattice::{
    appendix_ambient, appendix_glue, characteristic_vector, invariants, q_mod, sl2_lift_check, standard_lattice, Invariants,
};
use crate::lattice::intmat::Q;
use crate::modular::{eta_eval, j_eval, lambda_eval, theta_eval, weber_eval, ComplexAP, HalfPlanePoint};
use crate::qseries::{eta_quotient_qexp, j_qexp, monster_denominator_series, LaurentSeries1, LaurentSeries2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

/// Outcome of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Both sides vanish (diagonal input); judged with an absolute tolerance.
    Degenerate,
}

/// A machine-readable check report.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub check_name: String,
    pub inputs: Value,
    /// Left side: a decimal string (`(a+bi)e±N` means `(a+bi)·10^{±N}`) or
    /// a series digest.
    pub lhs: String,
    pub rhs: String,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub status: Status,
    pub runtime_ms: u64,
    /// Height cutoffs, precisions, orders and tail bounds.
    pub params: Value,
    /// Sub-checks; the report passes only if all of them pass.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub subchecks: Vec<Report>,
}

impl Report {
    fn numeric(name: &str, inputs: Value, lhs: String, rhs: String, abs_error: f64, rel_error: f64, tolerance: f64) -> Self {
        let pass = rel_error <= tolerance;
        Self {
            check_name: name.into(),
            inputs,
            lhs,
            rhs,
            abs_error,
            rel_error,
            tolerance,
            pass,
            status: if pass { Status::Pass } else { Status::Fail },
            runtime_ms: 0,
            params: json!({}),
            subchecks: Vec::new(),
        }
    }

    fn exact(name: &str, inputs: Value, lhs: String, rhs: String, equal: bool) -> Self {
        let e = if equal { 0.0 } else { 1.0 };
        let mut r = Self::numeric(name, inputs, lhs, rhs, e, e, 0.0);
        r.pass = equal;
        r.status = if equal { Status::Pass } else { Status::Fail };
        r
    }

    /// A parent report whose error is the largest sub-check error measured
    /// in units of that sub-check's tolerance (exact sub-checks count as 0
    /// or ∞).
    fn group(name: &str, inputs: Value, subchecks: Vec<Report>) -> Self {
        let worst = subchecks
            .iter()
            .map(|s| {
                if s.pass {
                    if s.tolerance > 0.0 { s.rel_error / s.tolerance } else { 0.0 }
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max);
        let pass = subchecks.iter().all(|s| s.pass);
        let summary = |f: fn(&Report) -> &str| subchecks.iter().map(f).collect::<Vec<_>>().join("; ");
        Self {
            check_name: name.into(),
            inputs,
            lhs: summary(|s| s.lhs.as_str()),
            rhs: summary(|s| s.rhs.as_str()),
            abs_error: subchecks.iter().map(|s| s.abs_error).fold(0.0, f64::max),
            rel_error: worst,
            tolerance: 1.0,
            pass,
            status: if pass { Status::Pass } else { Status::Fail },
            runtime_ms: 0,
            params: json!({ "rel_error": "largest sub-check error divided by its tolerance" }),
            subchecks,
        }
    }

    fn timed(mut self, t0: Instant) -> Self {
        self.runtime_ms = t0.elapsed().as_millis() as u64;
        self
    }

    fn with_params(mut self, p: Value) -> Self {
        self.params = p;
        self
    }
}

/// Parameters shared by the numerical checks.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerifyParams {
    /// Truncation of every product evaluation.
    pub product: ProductParams,
    /// Precision (bits) of the modular-function side.
    pub prec: usize,
    /// Relative tolerance of the main identity checks.
    pub tol: f64,
    /// Largest admissible tail bound of a single product.
    pub tail_max: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            product: ProductParams { height_cutoff: None, prec: 53, tail_target: 1e-10 },
            prec: 128,
            tol: 1e-6,
            tail_max: 1e-9,
        }
    }
}

impl VerifyParams {
    fn to_json(&self) -> Value {
        json!({
            "height_cutoff": self.product.height_cutoff,
            "tail_target": self.product.tail_target,
            "product_precision_bits": self.product.prec,
            "modular_precision_bits": self.prec,
            "tail_max": self.tail_max,
        })
    }
}

/// Render `exp(l)` as `(a+bi)e±N`, valid far outside the double range.
pub fn fmt_log(l: Complex64) -> String {
    if l.re == f64::NEG_INFINITY {
        return "0".into();
    }
    let e10 = l.re / std::f64::consts::LN_10;
    let n = e10.floor();
    let m = Complex64::from_polar(10f64.powf(e10 - n), l.im);
    format!("({:.15}{:+.15}i)e{}", m.re, m.im, n as i64)
}

/// `|exp(a − b) − 1|`: relative error of `exp(a)` against `exp(b)`.
pub fn rel_log(a: Complex64, b: Complex64) -> f64 {
    let d = a - b;
    let d = Complex64::new(d.re, d.im.rem_euclid(2.0 * PI));
    (d.exp() - 1.0).norm()
}

fn abs_from_rel(l: Complex64, rel: f64) -> f64 {
    (l.re + rel.ln()).exp()
}

fn pt_str(t: Complex64) -> String {
    format!("{}{:+}i", t.re, t.im)
}

fn points_json(t: Complex64, tp: Complex64) -> Value {
    json!({ "tau": pt_str(t), "tau_prime": pt_str(tp) })
}

fn ap(f: fn(&HalfPlanePoint) -> Result<ComplexAP>, t: Complex64, prec: usize) -> Result<ComplexAP> {
    f(&HalfPlanePoint::from_c64(t, prec)?)
}

type PhiTable = Arc<Vec<(String, Parity, PhiValue)>>;

fn phi_cache() -> &'static Mutex<HashMap<String, PhiTable>> {
    static C: OnceLock<Mutex<HashMap<String, PhiTable>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `Φ_γ(τ,τ′)` for all fifteen classes (memoized per point and parameters).
pub fn phi_all(t: Complex64, tp: Complex64, params: &ProductParams) -> Result<PhiTable> {
    let key = format!("{t:?}|{tp:?}|{params:?}");
    if let Some(v) = phi_cache().lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let vals: Result<Vec<(String, Parity, PhiValue)>> = all_lambda_gammas()
        .par_iter()
        .map(|lg| Ok((lg.gamma.label(), lg.gamma.parity, phi_gamma_eval(lg, t, tp, params)?)))
        .collect();
    let vals = Arc::new(vals?);
    phi_cache().lock().unwrap().insert(key, vals.clone());
    Ok(vals)
}

fn tails_json(vals: &[(String, Parity, PhiValue)]) -> Value {
    Value::Array(
        vals.iter()
            .map(|(g, _, v)| {
                json!({ "gamma": g, "height": v.height, "tail_bound": v.tail_bound, "terms": v.terms_used,
                        "level": v.level, "im_norm": v.im_norm, "cusp": v.cusp })
            })
            .collect(),
    )
}

/// `log(2⁹⁶ η(τ)¹⁴⁴ η(τ′)¹⁴⁴)`.
fn eta_closed_form_log(t: Complex64, tp: Complex64, prec: usize) -> Result<Complex64> {
    let e1 = ap(eta_eval, t, prec)?.ln_c64();
    let e2 = ap(eta_eval, tp, prec)?.ln_c64();
    Ok(96.0 * LN_2 + 144.0 * (e1 + e2))
}

/// Relative scale below which `|j(τ) − j(τ′)|` counts as zero.
const DIAGONAL_EPS: f64 = 1e-30;
/// Absolute smallness of odd products on the diagonal, relative to the
/// product's local scale.
const ZERO_REL: f64 = 1e-8;

/// `2^{−96}(j(τ)−j(τ′))^{12} = ∏_odd Φ_γ⁶ / ∏_even Φ_γ⁴`, with the even
/// product taken both per class and from `2⁹⁶η(τ)¹⁴⁴η(τ′)¹⁴⁴`.
pub fn verify_main_theorem(tau: &HalfPlanePoint, tau_p: &HalfPlanePoint, vp: &VerifyParams) -> Result<Report> {
    let t0 = Instant::now();
    let (t, tp) = (tau.to_c64(), tau_p.to_c64());
    let inputs = points_json(t, tp);
    let j1 = j_eval(tau)?;
    let j2 = j_eval(tau_p)?;
    let d = j1.sub(&j2);
    let jscale = j1.abs_f64().max(j2.abs_f64()).max(1.0);
    let vals = phi_all(t, tp, &vp.product)?;
    let max_tail = vals.iter().map(|(_, _, v)| v.tail_bound).fold(0.0, f64::max);
    let params = {
        let mut p = vp.to_json();
        p["max_tail_bound"] = json!(max_tail);
        p["products"] = tails_json(&vals);
        p
    };
    if d.abs_f64() <= DIAGONAL_EPS * jscale {
        // Diagonal: the left side is zero; some odd factor must vanish.
        let smallest = vals
            .iter()
            .filter(|(_, p, _)| *p == Parity::Odd)
            .map(|(_, _, v)| if v.is_zero { 0.0 } else { (v.log.re - v.log_scale).exp() })
            .fold(f64::INFINITY, f64::min);
        let mut r = Report::numeric(
            "main",
            inputs,
            "0".into(),
            format!("smallest |Φ_odd|/scale = {smallest:e}"),
            smallest,
            smallest,
            ZERO_REL,
        );
        r.status = if r.pass { Status::Degenerate } else { Status::Fail };
        return Ok(r.with_params(params).timed(t0));
    }
    let lhs = 12.0 * d.ln_c64() - 96.0 * LN_2;
    let odd: Complex64 = vals.iter().filter(|(_, p, _)| *p == Parity::Odd).map(|(_, _, v)| 6.0 * v.log).sum();
    let even: Complex64 = vals.iter().filter(|(_, p, _)| *p == Parity::Even).map(|(_, _, v)| 4.0 * v.log).sum();
    if vals.iter().any(|(_, _, v)| v.is_zero) {
        return Err(Error::InvalidInput("the point lies on the zero divisor of a product".into()));
    }
    let rhs_a = odd - even;
    let rhs_b = odd - 2.0 * eta_closed_form_log(t, tp, vp.prec)?;
    let ra = rel_log(lhs, rhs_a);
    let rb = rel_log(lhs, rhs_b);
    let rab = rel_log(rhs_a, rhs_b);
    let tail_report = Report::numeric(
        "main/tail-bounds",
        json!({}),
        format!("{max_tail:e}"),
        format!("≤ {:e}", vp.tail_max),
        max_tail,
        max_tail,
        vp.tail_max,
    );
    let subs = vec![
        Report::numeric("main/per-class", inputs.clone(), fmt_log(lhs), fmt_log(rhs_a), abs_from_rel(lhs, ra), ra, vp.tol),
        Report::numeric("main/eta-closed-form", inputs.clone(), fmt_log(lhs), fmt_log(rhs_b), abs_from_rel(lhs, rb), rb, vp.tol),
        Report::numeric("main/variants-agree", inputs.clone(), fmt_log(rhs_a), fmt_log(rhs_b), abs_from_rel(rhs_a, rab), rab, vp.tol),
        tail_report,
    ];
    let pass = subs.iter().all(|s| s.pass);
    let rel = ra.max(rb);
    let mut r = Report::numeric("main", inputs, fmt_log(lhs), fmt_log(rhs_a), abs_from_rel(lhs, rel), rel, vp.tol);
    r.pass = pass;
    r.status = if pass { Status::Pass } else { Status::Fail };
    r.subchecks = subs;
    Ok(r.with_params(params).timed(t0))
}

/// `∏_even Φ_γ(τ,τ′)² = 2⁹⁶ η(τ)¹⁴⁴ η(τ′)¹⁴⁴`.
pub fn verify_even_product(tau: &HalfPlanePoint, tau_p: &HalfPlanePoint, vp: &VerifyParams) -> Result<Report> {
    let t0 = Instant::now();
    let (t, tp) = (tau.to_c64(), tau_p.to_c64());
    let vals = phi_all(t, tp, &vp.product)?;
    let evens: Vec<_> = vals.iter().filter(|(_, p, _)| *p == Parity::Even).cloned().collect();
    if evens.iter().any(|(_, _, v)| v.is_zero) {
        return Err(Error::InvalidInput("an even product vanishes at this point".into()));
    }
    let lhs: Complex64 = evens.iter().map(|(_, _, v)| 2.0 * v.log).sum();
    let rhs = eta_closed_form_log(t, tp, vp.prec)?;
    let rel = rel_log(lhs, rhs);
    let max_tail = evens.iter().map(|(_, _, v)| v.tail_bound).fold(0.0, f64::max);
    let mut p = vp.to_json();
    p["max_tail_bound"] = json!(max_tail);
    p["products"] = tails_json(&evens);
    let mut r = Report::numeric("even", points_json(t, tp), fmt_log(lhs), fmt_log(rhs), abs_from_rel(lhs, rel), rel, vp.tol);
    if max_tail > vp.tail_max {
        r.pass = false;
        r.status = Status::Fail;
    }
    Ok(r.with_params(p).timed(t0))
}

fn big(n: i64) -> num_rational::BigRational {
    num_rational::BigRational::from_integer(n.into())
}

/// Exact leading terms of the odd classes: the level-1 ones are `≡ 1 mod 𝔪`,
/// the level-2 ones start with `−2⁸(P ∓ Q)²`, and the product of all six is
/// `2¹⁶(p − q)²` up to terms of higher degree (`p = P²`, `q = Q²`).
pub fn verify_odd_leading(order: i64) -> Result<Report> {
    let t0 = Instant::now();
    if order < 4 {
        return Err(Error::InvalidInput("order must be at least 4 half units".into()));
    }
    let odd: Vec<&LambdaGamma> = all_lambda_gammas().iter().filter(|l| l.gamma.parity == Parity::Odd).collect();
    let series: Vec<(String, i64, LaurentSeries2)> = odd
        .par_iter()
        .map(|l| Ok((l.gamma.label(), l.level(), phi_gamma_leading_qexp(l, order)?)))
        .collect::<Result<_>>()?;
    let mut subs = Vec::new();
    let minus = LaurentSeries2::poly(&[(2, 0, -256), (1, 1, 512), (0, 2, -256)]);
    let plus = LaurentSeries2::poly(&[(2, 0, -256), (1, 1, -512), (0, 2, -256)]);
    let mut level2_signs = Vec::new();
    for (label, level, s) in &series {
        let inputs = json!({ "gamma": label, "level": level, "order": order });
        if *level == 1 {
            let one = LaurentSeries2::one();
            let ok = s.val() >= 0 && s.coeff(0, 0) == Some(big(1));
            let low = s.clone().truncate(0);
            subs.push(Report::exact("odd-leading/level1", inputs, low.digest(), one.digest(), ok && low.agrees_to(&one, 0)));
        } else {
            let low = s.clone().truncate(2);
            let is_minus = low.agrees_to(&minus, 2) && s.val() >= 2;
            let is_plus = low.agrees_to(&plus, 2) && s.val() >= 2;
            level2_signs.push(if is_minus { -1 } else if is_plus { 1 } else { 0 });
            let rhs = if is_plus { plus.digest() } else { minus.digest() };
            subs.push(Report::exact("odd-leading/level2", inputs, low.digest(), rhs, is_minus || is_plus));
        }
    }
    level2_signs.sort();
    subs.push(Report::exact(
        "odd-leading/level2-signs",
        json!({}),
        format!("{level2_signs:?}"),
        "[-1, 1]".into(),
        level2_signs == [-1, 1],
    ));
    let mut prod = LaurentSeries2::one();
    for (_, _, s) in &series {
        prod = prod.mul(s)?;
    }
    // 2¹⁶(p − q)² = 2¹⁶(P⁴ − 2P²Q² + Q⁴).
    let target = LaurentSeries2::poly(&[(4, 0, 65536), (2, 2, -131072), (0, 4, 65536)]);
    let low = prod.clone().truncate(4);
    let ok = prod.val() >= 4 && low.agrees_to(&target, 4);
    subs.push(Report::exact(
        "odd-leading/product",
        json!({ "order": order }),
        low.digest(),
        target.digest(),
        ok,
    ));
    let mut r = Report::group("odd-leading", json!({ "order": order }), subs);
    r.lhs = low.digest();
    r.rhs = target.digest();
    Ok(r.with_params(json!({ "order_half_units": order, "product_order": prod.order })).timed(t0))
}

/// `j(p) − j(q) = (p⁻¹ − q⁻¹) ∏ (1 − p^m qⁿ)^{c(mn)}`, coefficientwise.
pub fn verify_denominator(order: i64) -> Result<Report> {
    let t0 = Instant::now();
    let (lhs, rhs) = monster_denominator_series(order)?;
    let half = 2 * order;
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for m in -1..=order {
        for n in -1..=order {
            let (a, b) = (lhs.coeff(2 * m, 2 * n), rhs.coeff(2 * m, 2 * n));
            if a.is_none() || b.is_none() {
                return Err(Error::InvalidInput("series truncated below the requested box".into()));
            }
            checked += 1;
            if a != b {
                mismatches += 1;
            }
        }
    }
    let full = lhs.agrees_to(&rhs, lhs.order.min(rhs.order));
    let swap = |s: &LaurentSeries2| -> LaurentSeries2 {
        let mut t = LaurentSeries2::zero(s.order);
        for (e, c) in &s.terms {
            t = t.add(&LaurentSeries2::monomial(-c.clone(), e.b, e.a).truncate(s.order));
        }
        t
    };
    let antisym = swap(&lhs).agrees_to(&lhs, lhs.order) && swap(&rhs).agrees_to(&rhs, rhs.order);
    let subs = vec![
        Report::exact(
            "denominator/box",
            json!({ "order": order }),
            format!("{checked} coefficients"),
            format!("{mismatches} mismatches"),
            mismatches == 0,
        ),
        Report::exact("denominator/all-degrees", json!({ "order": lhs.order }), lhs.digest(), rhs.digest(), full),
        Report::exact("denominator/antisymmetry", json!({}), "lhs, rhs".into(), "odd under p ↔ q".into(), antisym),
    ];
    let mut r = Report::group("denominator", json!({ "order": order }), subs);
    r.lhs = lhs.clone().truncate(half.min(lhs.order)).digest();
    r.rhs = rhs.clone().truncate(half.min(rhs.order)).digest();
    Ok(r.with_params(json!({ "order": order, "series_order_half_units": lhs.order })).timed(t0))
}

/// The three functions `λ(λ−1)`, `λ/(λ−1)²`, `(λ−1)/λ²` (log form).
fn lambda_functions(t: Complex64, prec: usize) -> Result<[Complex64; 3]> {
    let l = ap(lambda_eval, t, prec)?;
    let lm = l.sub(&ComplexAP::from_i64(1, prec));
    Ok([l.mul(&lm).ln_c64(), l.div(&lm.mul(&lm)).ln_c64(), lm.div(&l.mul(&l)).ln_c64()])
}

fn q_log(z: Complex64) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI) * z
}

/// `log(e^a − e^b)` for `Re a, Re b` possibly far below the double range.
fn log_diff_exp(a: Complex64, b: Complex64) -> Complex64 {
    a + (-(b - a).exp() + 1.0).ln()
}

/// Tolerances of the three groups of the K′ suite.
pub const SECTION8_TOLS: [f64; 3] = [1e-5, 1e-4, 1e-3];

/// Theta-quotient identities for the even classes and the two Borcherds
/// products on `U ⊕ U(2)` together with the Weber function.
///
/// (a) The nine values `Φ_γ⁶/(η(τ)⁴⁸η(τ′)⁴⁸)` (`γ` even) coincide as a
/// multiset with `2³²(X(τ)Y(τ′))⁻⁴`, `X, Y ∈ {λ(λ−1), λ/(λ−1)², (λ−1)/λ²}`.
/// (b) `Φ_{K′}(z) = 2⁸(q₂−q₁)(1+𝔪)` at the level-2 cusp, `Φ_{K′}(w) = 1+𝔪′`
/// at the level-1 cusp, and the two charts agree under `w₁ = −1/(2z₁)`,
/// `w₂ = z₂` with weight-4 factor `−z₁⁻⁴`.
/// (c) `Ψ = 2⁻⁴⁸Φ_{K′}⁹G⁻⁴` has leading terms `2²⁴(q₁q₂)⁴(q₂−q₁)` and
/// `(q₁′q₂′)⁴`; the exponent of `Φ_{K′}` that matches the level-2 leading
/// term is reported.
pub fn verify_section8(z1: &HalfPlanePoint, z2: &HalfPlanePoint, vp: &VerifyParams) -> Result<Report> {
    let t0 = Instant::now();
    let (a, b) = (z1.to_c64(), z2.to_c64());
    let inputs = json!({ "z1": pt_str(a), "z2": pt_str(b) });
    let [tol_a, tol_b, tol_c] = SECTION8_TOLS;
    let mut subs = Vec::new();

    // (a) multiset of the nine even values.
    let vals = phi_all(a, b, &vp.product)?;
    let eta = 48.0 * (ap(eta_eval, a, vp.prec)?.ln_c64() + ap(eta_eval, b, vp.prec)?.ln_c64());
    let mut lhs: Vec<Complex64> =
        vals.iter().filter(|(_, p, _)| *p == Parity::Even).map(|(_, _, v)| 6.0 * v.log - eta).collect();
    let (fx, fy) = (lambda_functions(a, vp.prec)?, lambda_functions(b, vp.prec)?);
    let mut rhs: Vec<Complex64> = Vec::new();
    for x in fx {
        for y in fy {
            rhs.push(32.0 * LN_2 - 4.0 * (x + y));
        }
    }
    let (worst, pairs) = multiset_match(&mut lhs, &mut rhs);
    let mut ra = Report::numeric(
        "section8/theta-multiset",
        inputs.clone(),
        lhs.iter().map(|l| fmt_log(*l)).collect::<Vec<_>>().join(", "),
        rhs.iter().map(|l| fmt_log(*l)).collect::<Vec<_>>().join(", "),
        0.0,
        worst,
        tol_a,
    );
    ra.params = json!({ "matched_pairs": pairs });
    subs.push(ra);

    // (b) Φ_{K′} at the level-2 cusp.
    let mut w = vec![Complex64::new(0.0, 0.0); 10];
    w[0] = a;
    w[1] = b;
    let phi2 = phi2_eval(&w, &vp.product)?;
    let lead2 = 8.0 * LN_2 + log_diff_exp(q_log(b), q_log(a));
    let e = rel_log(phi2.log, lead2);
    subs.push(
        Report::numeric("section8/phi-level2", inputs.clone(), fmt_log(phi2.log), fmt_log(lead2), abs_from_rel(lead2, e), e, tol_b)
            .with_params(json!({ "height": phi2.height, "tail_bound": phi2.tail_bound })),
    );
    // Level-1 cusp, at the point whose level-1 coordinates are (z₁, z₂).
    let mut u = vec![Complex64::new(0.0, 0.0); 10];
    u[0] = a;
    u[1] = b;
    let phi1 = phi1_eval(&u, &vp.product)?;
    let e = rel_log(phi1.log, Complex64::new(0.0, 0.0));
    subs.push(
        Report::numeric("section8/phi-level1", json!({ "w1": pt_str(a), "w2": pt_str(b) }), fmt_log(phi1.log), "1".into(), e, e, tol_b)
            .with_params(json!({ "height": phi1.height, "tail_bound": phi1.tail_bound })),
    );
    // Chart consistency where both products converge.
    let (c1, c2) = (Complex64::new(0.0, 2.0), Complex64::new(0.0, 6.0));
    let mut wc = vec![Complex64::new(0.0, 0.0); 10];
    wc[0] = c1;
    wc[1] = c2;
    let mut uc = wc.clone();
    uc[0] = -1.0 / (2.0 * c1);
    let l2 = phi2_eval(&wc, &vp.product)?;
    let l1 = phi1_eval(&uc, &vp.product)?;
    let rhs_c = l1.log - 4.0 * c1.ln() + Complex64::new(0.0, PI);
    let e = rel_log(l2.log, rhs_c);
    subs.push(Report::numeric(
        "section8/chart-change",
        json!({ "z1": pt_str(c1), "z2": pt_str(c2) }),
        fmt_log(l2.log),
        fmt_log(rhs_c),
        abs_from_rel(rhs_c, e),
        e,
        tol_b,
    ));

    // (c) Ψ = 2⁻⁴⁸ Φ⁹ G⁻⁴.
    let g_log = |x: Complex64, y: Complex64| -> Result<Complex64> {
        let wx = ap(weber_eval, x, vp.prec)?;
        let wy = ap(weber_eval, y, vp.prec)?;
        let d = wx.sub(&wy);
        Ok(2.0 * d.ln_c64() - wx.ln_c64() - wy.ln_c64())
    };
    let g2 = g_log(a, b)?;
    let psi2 = -48.0 * LN_2 + 9.0 * phi2.log - 4.0 * g2;
    let lead_psi2 = 24.0 * LN_2 + 4.0 * (q_log(a) + q_log(b)) + log_diff_exp(q_log(b), q_log(a));
    let e = rel_log(psi2, lead_psi2);
    let k_obs = (lead_psi2.re + 48.0 * LN_2 + 4.0 * g2.re) / phi2.log.re;
    subs.push(
        Report::numeric("section8/psi-level2", inputs.clone(), fmt_log(psi2), fmt_log(lead_psi2), abs_from_rel(lead_psi2, e), e, tol_c)
            .with_params(json!({ "constant": "2^24", "phi_exponent": 9, "observed_phi_exponent": k_obs })),
    );
    // Level 1: w = (z₁, z₂) corresponds to z = (−1/(2w₁), w₂).
    let g1 = g_log(-1.0 / (2.0 * a), b)?;
    let psi1 = -48.0 * LN_2 + 9.0 * phi1.log - 4.0 * g1;
    let lead_psi1 = 4.0 * (q_log(a) + q_log(b));
    let e = rel_log(psi1, lead_psi1);
    subs.push(Report::numeric(
        "section8/psi-level1",
        json!({ "w1": pt_str(a), "w2": pt_str(b) }),
        fmt_log(psi1),
        fmt_log(lead_psi1),
        abs_from_rel(lead_psi1, e),
        e,
        tol_c,
    ));

    let mut p = vp.to_json();
    p["tolerances"] = json!({ "theta_multiset": tol_a, "phi_cusps": tol_b, "psi_cusps": tol_c });
    Ok(Report::group("section8", inputs, subs).with_params(p).timed(t0))
}

/// Pair two multisets of log values greedily by smallest relative
/// difference; returns the largest matched error and the pairing.
fn multiset_match(lhs: &mut [Complex64], rhs: &mut [Complex64]) -> (f64, Vec<(usize, usize, f64)>) {
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, l) in lhs.iter().enumerate() {
        for (j, r) in rhs.iter().enumerate() {
            cand.push((rel_log(*l, *r), i, j));
        }
    }
    cand.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let (mut ul, mut ur) = (vec![false; lhs.len()], vec![false; rhs.len()]);
    let mut pairs = Vec::new();
    for (e, i, j) in cand {
        if !ul[i] && !ur[j] {
            ul[i] = true;
            ur[j] = true;
            pairs.push((i, j, e));
        }
    }
    pairs.sort_by_key(|p| (p.0, p.1));
    let worst = if lhs.len() == rhs.len() { pairs.iter().map(|p| p.2).fold(0.0, f64::max) } else { f64::INFINITY };
    (worst, pairs)
}

/// The glue-lattice invariants and the lifts of SL₂(ℤ) generators.
pub fn verify_appendix() -> Result<Report> {
    let t0 = Instant::now();
    let mut subs = Vec::new();
    let glue = appendix_glue();
    let inv = invariants(&glue)?;
    let want = Invariants { signature: (2, 10), disc_rank: 10, parity: 0 };
    subs.push(Report::exact(
        "appendix/glue-invariants",
        json!({ "lattice": glue.name }),
        format!("{:?}", (inv.signature, inv.disc_rank, inv.parity)),
        format!("{:?}", (want.signature, want.disc_rank, want.parity)),
        inv == want && glue.is_even(),
    ));
    let lam = invariants(&standard_lattice("Lambda")?)?;
    subs.push(Report::exact(
        "appendix/matches-enriques-lattice",
        json!({}),
        format!("{:?}", (inv.signature, inv.disc_rank, inv.parity)),
        format!("{:?}", (lam.signature, lam.disc_rank, lam.parity)),
        inv == lam,
    ));
    let i29 = standard_lattice("I29_2")?;
    let chi = characteristic_vector(&i29)?;
    let mut lambda2 = vec![Q::new(-1, 2); 11];
    lambda2[0] = Q::new(3, 2);
    let n2 = i29.pair(&lambda2, &lambda2);
    let amb = appendix_ambient();
    let mut lambda1 = vec![Q::from(0); 12];
    lambda1[0] = Q::new(1, 2);
    let n1 = amb.pair(&lambda1, &lambda1);
    let chi_n = q_mod(i29.pair(&chi.coords, &chi.coords), 2);
    subs.push(Report::exact(
        "appendix/characteristic-norms",
        json!({}),
        format!("λ₁² = {n1}, λ₂² = {n2}, characteristic class norm ≡ {chi_n} mod 2"),
        "λ₁² = -1/2, λ₂² = 1/2, characteristic class norm ≡ 1/2 mod 2".into(),
        n1 == Q::new(-1, 2) && n2 == Q::new(1, 2) && chi_n == Q::new(1, 2),
    ));
    let gens: [(&str, [[i64; 2]; 2]); 4] =
        [("S", [[0, -1], [1, 0]]), ("T", [[1, 1], [0, 1]]), ("T^-1", [[1, -1], [0, 1]]), ("ST", [[0, -1], [1, 1]])];
    for (name, g) in gens {
        let l = sl2_lift_check(g)?;
        subs.push(Report::exact(
            "appendix/sl2-lift",
            json!({ "generator": name, "matrix": g }),
            format!("{:?}", l.matrix),
            "BᵀGB = G, restricts to g, preserves the component".into(),
            l.is_isometry && l.restricts_to_g && l.preserves_component,
        ));
    }
    Ok(Report::group("appendix", json!({}), subs).timed(t0))
}

/// For an odd class, the partner `τ′` with `⟨ω(τ,τ′), δ⟩ = 0` for the root
/// `δ` of [`LambdaGamma::odd_root_witness`]; `None` for even classes.
pub fn odd_partner(lg: &LambdaGamma, tau: Complex64) -> Option<Complex64> {
    let delta = lg.odd_root_witness()?;
    let dq: Vec<Complex64> = delta.iter().map(|&x| Complex64::new(x as f64 / 2.0, 0.0)).collect();
    let at = |tp: Complex64| pair_amb_c(&omega(tau, tp), &dq);
    let c0 = at(Complex64::new(0.0, 0.0));
    let c1 = at(Complex64::new(1.0, 0.0)) - c0;
    let tp = -c0 / c1;
    (tp.im > 0.0).then_some(tp)
}

/// Odd classes vanish on their root hyperplanes, even classes do not vanish
/// on `τ = τ′`.  Each odd `Φ_γ` is evaluated at `(τ, τ′)` with `τ′` on the
/// hyperplane `δ^⊥` of an odd root (`τ′ = τ` when that hyperplane is the
/// diagonal); each even `Φ_γ` at `(τ, τ)`.  Values are compared with the
/// local scale of the product at the point.
pub fn verify_parity_vanishing(tau: &HalfPlanePoint, vp: &VerifyParams) -> Result<Report> {
    let t0 = Instant::now();
    let t = tau.to_c64();
    let subs: Vec<Report> = all_lambda_gammas()
        .par_iter()
        .map(|lg| -> Result<Report> {
            let (tp, name, tol) = match lg.gamma.parity {
                Parity::Odd => (odd_partner(lg, t).ok_or_else(|| Error::InvalidInput("no root hyperplane".into()))?, "parity/odd-vanishes", ZERO_REL),
                Parity::Even => (t, "parity/even-nonzero", 1e-3),
            };
            let v = phi_gamma_eval(lg, t, tp, &vp.product)?;
            let ratio = if v.is_zero { 0.0 } else { (v.log.re - v.log_scale).exp() };
            let inputs = json!({ "gamma": lg.gamma.label(), "tau": pt_str(t), "tau_prime": pt_str(tp) });
            let (lhs, rhs) = (format!("|Φ|/scale = {ratio:e}"), format!("scale = {:e}", v.log_scale.exp()));
            // Even classes: `|Φ|/scale ≥ 10⁻³` is reported as `scale/|Φ| ≤ 10³`.
            let r = match lg.gamma.parity {
                Parity::Odd => Report::numeric(name, inputs, lhs, rhs, v.abs(), ratio, tol),
                Parity::Even => Report::numeric(name, inputs, lhs, rhs, v.abs(), 1.0 / ratio, 1.0 / tol),
            };
            Ok(r.with_params(json!({ "exact_zero": v.is_zero, "tail_bound": v.tail_bound, "height": v.height, "cusp": v.cusp })))
        })
        .collect::<Result<_>>()?;
    let mut r = Report::group("parity", json!({ "tau": pt_str(t) }), subs);
    r.params = vp.to_json();
    Ok(r.timed(t0))
}

/// Generators of `Γ(2)` paired into six elements of `Γ(2) × Γ(2)`.
pub fn gamma2_generator_pairs() -> [([[i64; 2]; 2], [[i64; 2]; 2]); 6] {
    let i = [[1, 0], [0, 1]];
    let t2 = [[1, 2], [0, 1]];
    let u2 = [[1, 0], [2, 1]];
    let m = [[-1, 0], [0, -1]];
    [(t2, i), (i, t2), (u2, i), (i, u2), (t2, u2), (m, u2)]
}

/// `Φ_γ(gτ, g′τ′) = ±(cτ+d)⁴(c′τ′+d′)⁴ Φ_γ(τ,τ′)` for `(g, g′) ∈ Γ(2)²`,
/// checked for all fifteen classes at each base point.
pub fn verify_automorphy(points: &[(Complex64, Complex64)], tol: f64, params: &ProductParams) -> Result<Report> {
    let t0 = Instant::now();
    let mut subs = Vec::new();
    for &(t, tp) in points {
        for (g, gp) in gamma2_generator_pairs() {
            let defects: Vec<(String, f64)> = all_lambda_gammas()
                .par_iter()
                .map(|lg| Ok((lg.gamma.label(), automorphy_defect(lg, g, gp, t, tp, params)?)))
                .collect::<Result<_>>()?;
            let worst = defects.iter().map(|d| d.1).fold(0.0, f64::max);
            let inputs = json!({ "tau": pt_str(t), "tau_prime": pt_str(tp), "g": g, "g_prime": gp,
                                 "image": [pt_str(mobius(g, t)), pt_str(mobius(gp, tp))] });
            subs.push(
                Report::numeric("automorphy/pair", inputs, format!("max defect {worst:e}"), "0".into(), worst, worst, tol)
                    .with_params(json!({ "defects": defects })),
            );
        }
    }
    let mut r = Report::group("automorphy", json!({ "points": points.iter().map(|p| points_json(p.0, p.1)).collect::<Vec<_>>() }), subs);
    r.params = json!({ "tail_target": params.tail_target, "tolerance": tol });
    Ok(r.timed(t0))
}

/// A modular function next to its `q`-expansion: `(name, factors)`, where the
/// expansion is `k · q_N^{offset} Σ c_n q_Nⁿ` with `q_N = e^{2πiτ/N}`.
struct SeriesForm {
    name: &'static str,
    eval: fn(&HalfPlanePoint) -> Result<ComplexAP>,
    series: LaurentSeries1,
    per: f64,
    k: f64,
}

fn series_forms(order: i64) -> Result<Vec<SeriesForm>> {
    // In q_h = e^{πiτ}: η(τ/2) ↦ η₁, η(τ) ↦ η₂, η(2τ) ↦ η₄.
    Ok(vec![
        SeriesForm { name: "eta", eval: eta_eval, series: eta_quotient_qexp(&[(1, 1)], order)?, per: 1.0, k: 1.0 },
        SeriesForm { name: "theta2", eval: |t| theta_eval(2, t), series: eta_quotient_qexp(&[(4, 2), (2, -1)], order)?, per: 2.0, k: 2.0 },
        SeriesForm { name: "theta3", eval: |t| theta_eval(3, t), series: eta_quotient_qexp(&[(2, 5), (1, -2), (4, -2)], order)?, per: 2.0, k: 1.0 },
        SeriesForm { name: "theta4", eval: |t| theta_eval(4, t), series: eta_quotient_qexp(&[(1, 2), (2, -1)], order)?, per: 2.0, k: 1.0 },
        SeriesForm { name: "lambda", eval: lambda_eval, series: eta_quotient_qexp(&[(1, 8), (4, 16), (2, -24)], order)?, per: 2.0, k: 16.0 },
        SeriesForm { name: "j", eval: j_eval, series: j_qexp(order)?, per: 1.0, k: 1.0 },
        SeriesForm { name: "weber", eval: weber_eval, series: eta_quotient_qexp(&[(2, 24), (1, -24)], order)?, per: 1.0, k: 4096.0 },
    ])
}

/// Every modular function against its `q`-series at the given points.
pub fn verify_modular_series(points: &[Complex64], tol: f64, prec: usize) -> Result<Report> {
    let t0 = Instant::now();
    let order = 60;
    let forms = series_forms(order)?;
    let mut subs = Vec::new();
    for &t in points {
        if t.im < 1.0 {
            return Err(Error::InvalidInput("series comparison needs Im τ ≥ 1".into()));
        }
        for f in &forms {
            let a = (f.eval)(&HalfPlanePoint::from_c64(t, prec)?)?.to_c64();
            let qn = Complex64::new(0.0, 2.0 * PI / f.per) * t;
            let off = f.series.offset.numer().to_owned() as f64 / *f.series.offset.denom() as f64;
            let s = f.series.eval_stripped(qn.exp()) * (qn * off).exp() * f.k;
            let e = crate::modular::rel_diff(a, s);
            subs.push(Report::numeric(
                "modular-series",
                json!({ "function": f.name, "tau": pt_str(t) }),
                crate::modular::fmt_c64(a),
                crate::modular::fmt_c64(s),
                (a - s).norm(),
                e,
                tol,
            ));
        }
    }
    let mut r = Report::group("modular-series", json!({ "points": points.len() }), subs);
    r.params = json!({ "series_order": order, "precision_bits": prec, "tolerance": tol });
    Ok(r.timed(t0))
}

/// The fixed reference points of the main and even checks.
pub fn reference_points() -> Vec<(&'static str, &'static str)> {
    vec![("2i", "3i"), ("5i/2", "1/2+3i"), ("1+2i", "7i/2")]
}
