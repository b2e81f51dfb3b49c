//! Borcherds products: numerical evaluation on tube domains, restriction to
//! the period maps of the fifteen involution classes, exact leading-term
//! expansions, Petersson norms and automorphy checks.
//!
//! Values are returned in log form ([`PhiValue::log`]) together with an
//! a-posteriori bound on the discarded part of the product; powers such as
//! `Φ⁶` are formed as `exp(6·log Φ)`, which is independent of the branch.
//!
//! `Φ_γ(τ,τ′)` is computed through a tube-domain chart of `Λ_γ` at a
//! primitive isotropic `v₂ ∈ K`: with `ω = ω(τ,τ′)`,
//! `Φ_γ(τ,τ′) = ±⟨ω,v₂⟩^{-4} Φ_ℓ(u)`, where `ℓ` is the level of `v₂`.  The
//! sign is immaterial for the even powers used by the identities.  The chart
//! is chosen per point with a cost model (the larger `(Im u)²`, the faster the
//! product converges), so that points far from the standard cusp are
//! evaluated through a cusp close to them.

pub mod formal;
pub mod plane;

pub use plane::{PlaneChart, PlaneEngine, ProductKind};

use crate::enriques::{level_in, LambdaGamma, TubeChart};
use crate::error::{Error, Result};
use crate::lattice::intmat::Q;
use crate::lattice::{block_diag, e8_2_gram, u_gram};
use crate::qseries::LaurentSeries2;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Truncation parameters of a product evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProductParams {
    /// Fixed height cutoff `H` (`⟨λ, Im u⟩ ≤ H`); chosen automatically from
    /// `tail_target` when absent.
    pub height_cutoff: Option<f64>,
    /// Working precision in bits (the product itself is accumulated in
    /// double precision with compensated summation).
    pub prec: u32,
    /// Requested bound on the neglected part of `log Φ`.
    pub tail_target: f64,
}

impl Default for ProductParams {
    fn default() -> Self {
        Self { height_cutoff: None, prec: 53, tail_target: 1e-12 }
    }
}

/// A truncated product value.
#[derive(Clone, Debug, Serialize)]
pub struct PhiValue {
    /// `log Φ` (principal branch of the accumulated factor logarithms).
    #[serde(serialize_with = "ser_c")]
    pub log: Complex64,
    /// Bound on `|log Φ − log Φ_H|` from the discarded factors.
    pub tail_bound: f64,
    /// Number of lattice vectors whose factors were multiplied.
    pub terms_used: u64,
    /// A factor vanished exactly.
    pub is_zero: bool,
    /// Height cutoff used.
    pub height: f64,
    /// Level of the chart that was used.
    pub level: i64,
    /// `(Im u)²` at the chart point.
    pub im_norm: f64,
    /// Cusp vector `v₂` of the chart (half units), when restricted to `Λ_γ`.
    pub cusp: Vec<i64>,
    /// `log` of the local scale: the modulus of the product's prefactor
    /// (`2⁸|e^{2πi⟨ρ,u⟩}|` at level 2, `1` at level 1) times the modulus of
    /// the automorphy factor of the chart.  Smallness of `|Φ|` is measured
    /// against `exp(log_scale)`.
    pub log_scale: f64,
}

fn ser_c<S: serde::Serializer>(v: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&v.re)?;
    t.serialize_element(&v.im)?;
    t.end()
}

impl PhiValue {
    /// The value `Φ`.
    pub fn value(&self) -> Complex64 {
        self.pow(1)
    }

    /// `Φ^k`.
    pub fn pow(&self, k: i32) -> Complex64 {
        if self.is_zero {
            return Complex64::zero();
        }
        (self.log * k as f64).exp()
    }

    /// `|Φ|`.
    pub fn abs(&self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.log.re.exp()
        }
    }
}

fn engines() -> &'static Mutex<HashMap<PlaneChart, Arc<PlaneEngine>>> {
    static E: OnceLock<Mutex<HashMap<PlaneChart, Arc<PlaneEngine>>>> = OnceLock::new();
    E.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared engine for a chart (coset tables are cached across calls).
pub fn engine_for(chart: &PlaneChart) -> Result<Arc<PlaneEngine>> {
    if let Some(e) = engines().lock().unwrap().get(chart) {
        return Ok(e.clone());
    }
    let e = Arc::new(PlaneEngine::new(chart.clone())?);
    Ok(engines().lock().unwrap().entry(chart.clone()).or_insert(e).clone())
}

impl PlaneChart {
    /// Product chart of a tube-domain chart of `Λ_γ`.
    pub fn from_tube(ch: &TubeChart) -> Self {
        let kind = if ch.level == 1 { ProductKind::Level1 } else { ProductKind::Level2 };
        Self {
            kind,
            m_gram: ch.m_gram.clone(),
            e: ch.e.clone(),
            f: ch.f.clone(),
            kappa: ch.kappa,
            c: ch.c.clone(),
            rho: if kind == ProductKind::Level2 { ch.rho.clone() } else { Vec::new() },
            rho_prime: if kind == ProductKind::Level2 { ch.rho_prime.clone() } else { Vec::new() },
        }
    }

    /// `M₁ = U(2) ⊕ E8(2)` (level 1) or `M₂ = U ⊕ E8(2)` (level 2) with
    /// `E, F` the hyperbolic basis, frame `ρ = e₁`, `ρ′ = f₁` and real part `C`.
    pub fn canonical(kind: ProductKind, c: Vec<Q>) -> Self {
        let m = if kind == ProductKind::Level1 { 2 } else { 1 };
        let m_gram = block_diag(&[u_gram(m), e8_2_gram()]);
        let unit = |i: usize| -> Vec<Q> { (0..10).map(|j| Q::from(i64::from(i == j))).collect() };
        let (rho, rho_prime) = if kind == ProductKind::Level2 {
            let r: Vec<i64> = (0..10).map(|j| i64::from(j == 0)).collect();
            let rp: Vec<i64> = (0..10).map(|j| i64::from(j == 1)).collect();
            (r, rp)
        } else {
            (Vec::new(), Vec::new())
        };
        Self { kind, m_gram, e: unit(0), f: unit(1), kappa: Q::from(m), c, rho, rho_prime }
    }
}

/// Evaluate a chart product at `u = z_E E + z_F F + C`.
pub fn eval_plane(eng: &PlaneEngine, z_e: Complex64, z_f: Complex64, params: &ProductParams) -> Result<PhiValue> {
    if !(z_e.im > 0.0 && z_f.im > 0.0) || !z_e.is_finite() || !z_f.is_finite() {
        return Err(Error::ConeViolation("Im u must lie in the positive quadrant of E, F".into()));
    }
    let kap = eng.kappa().to_f64().unwrap();
    let y2 = 2.0 * kap * z_e.im * z_f.im;
    let rate = PlaneEngine::rate(eng.kind(), y2);
    if rate < 0.02 {
        return Err(Error::TailUnreachable(format!("(Im u)² = {y2:.4} is outside the convergence region")));
    }
    let target = params.tail_target.max(1e-300);
    let mut h = params.height_cutoff.unwrap_or(((1.0 / target).ln().max(1.0) + 5.0) / rate);
    let mut tail;
    let mut tables;
    let mut rounds = 0;
    loop {
        tables = eng.tables(eng.required_radius(z_e.im, z_f.im, h * 1.05));
        tail = eng.tail_bound(&tables, z_e.im, z_f.im, h)?;
        if params.height_cutoff.is_some() || tail <= target {
            break;
        }
        rounds += 1;
        if rounds > 24 {
            return Err(Error::TailUnreachable(format!("tail bound {tail:e} above target {target:e}")));
        }
        h *= 1.12;
    }
    let s = eng.log_product(&tables, z_e, z_f, h);
    let log_scale = if eng.kind() == ProductKind::Level2 {
        let (re, rf, _) = eng.rho_data();
        let beta = re.to_f64().unwrap() * z_e.im + rf.to_f64().unwrap() * z_f.im;
        8.0 * std::f64::consts::LN_2 - 2.0 * std::f64::consts::PI * beta
    } else {
        0.0
    };
    Ok(PhiValue {
        log: s.log,
        tail_bound: tail,
        terms_used: s.terms,
        is_zero: s.zero,
        height: h,
        level: eng.kind().k(),
        im_norm: y2,
        cusp: Vec::new(),
        log_scale,
    })
}

/// Recover an exact rational from a double (continued fractions, small
/// denominators only).
fn rationalize(x: f64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut y = x;
    for _ in 0..40 {
        let a = y.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > 1_000_000 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if ((h1 as f64 / k1 as f64) - x).abs() <= 1e-12 * x.abs().max(1.0) {
            return Some(Q::new(h1, k1));
        }
        let frac = y - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        y = 1.0 / frac;
    }
    None
}

fn canonical_eval(kind: ProductKind, z: &[Complex64], params: &ProductParams) -> Result<PhiValue> {
    if z.len() != 10 {
        return Err(Error::InvalidInput("expected 10 coordinates".into()));
    }
    let scale = z.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let mut c = vec![Q::zero(); 10];
    for i in 2..10 {
        if z[i].im.abs() > 1e-14 * scale {
            return Err(Error::InvalidInput(
                "Im z must lie in the hyperbolic plane spanned by the first two basis vectors".into(),
            ));
        }
        c[i] = rationalize(z[i].re)
            .ok_or_else(|| Error::InvalidInput("real parts off the plane must be rational".into()))?;
    }
    let chart = PlaneChart::canonical(kind, c);
    let eng = engine_for(&chart)?;
    eval_plane(&eng, z[0], z[1], params)
}

/// `Φ₁(z)` on `M₁ = U(2) ⊕ E8(2)`; `z` in the basis `(e, f, α₁, …, α₈)`.
///
/// The imaginary part must lie in `span(e, f)` (first quadrant) and the
/// `E8(2)` real part must be rational.
pub fn phi1_eval(z: &[Complex64], params: &ProductParams) -> Result<PhiValue> {
    canonical_eval(ProductKind::Level1, z, params)
}

/// `Φ₂(w)` on `M₂ = U ⊕ E8(2)`; `w` in the basis `(e₁, f₁, α₁, …, α₈)`.
pub fn phi2_eval(w: &[Complex64], params: &ProductParams) -> Result<PhiValue> {
    canonical_eval(ProductKind::Level2, w, params)
}

/// Reduce `τ` to the standard fundamental domain; returns the reduced point
/// and `g = [[a,b],[c,d]] ∈ SL₂(ℤ)` with `g·τ` equal to it.
pub fn sl2_reduce(tau: Complex64) -> (Complex64, [[i64; 2]; 2]) {
    let mut t = tau;
    let mut g = [[1i64, 0], [0, 1]];
    for _ in 0..1000 {
        let n = t.re.round();
        if n != 0.0 {
            t -= n;
            let n = n as i64;
            g = [[g[0][0] - n * g[1][0], g[0][1] - n * g[1][1]], g[1]];
        }
        if t.norm_sqr() < 1.0 - 1e-15 {
            t = -1.0 / t;
            g = [[-g[1][0], -g[1][1]], g[0]];
        } else {
            break;
        }
    }
    (t, g)
}

/// Candidate bottom rows `(c, d)` of cusp changes for a point.
fn bottom_rows(tau: Complex64) -> Vec<(i64, i64)> {
    let mut rows: Vec<(i64, i64)> = vec![(0, 1), (1, 0), (1, 1), (1, -1), (1, 2), (1, -2), (2, 1), (2, -1)];
    let (_, g) = sl2_reduce(tau);
    rows.push((g[1][0], g[1][1]));
    let norm = |(c, d): (i64, i64)| if c < 0 || (c == 0 && d < 0) { (-c, -d) } else { (c, d) };
    let mut out: Vec<(i64, i64)> = Vec::new();
    for r in rows {
        let r = norm(r);
        if !out.contains(&r) && num_integer::gcd(r.0, r.1) == 1 {
            out.push(r);
        }
    }
    out
}

/// Cusp vector `v₂ = (dd′, −cc′, dc′, cd′ | 0)` (half units) with
/// `⟨ω(τ,τ′), v₂⟩ = (cτ + d)(c′τ′ + d′)`.
pub fn cusp_vector(cd: (i64, i64), cdp: (i64, i64)) -> Vec<i64> {
    let (c, d) = cd;
    let (cp, dp) = cdp;
    let mut v = vec![2 * d * dp, -2 * c * cp, 2 * d * cp, 2 * c * dp];
    v.extend([0; 8]);
    v
}

/// Cusp chosen for a point, with the predicted cost.
#[derive(Clone, Debug)]
pub struct ChartChoice {
    pub v_half: Vec<i64>,
    pub level: i64,
    pub im_norm: f64,
    pub cost: f64,
}

/// Rank candidate cusps for `Φ_γ(τ,τ′)` by predicted work.
pub fn choose_chart(lg: &LambdaGamma, tau: Complex64, tau_p: Complex64, target: f64) -> Result<Vec<ChartChoice>> {
    let l = (1.0 / target.max(1e-300)).ln() + 10.0;
    let mut out: Vec<ChartChoice> = Vec::new();
    for r1 in bottom_rows(tau) {
        for r2 in bottom_rows(tau_p) {
            let v = cusp_vector(r1, r2);
            let Ok(level) = level_in(&lg.basis_half, &v) else { continue };
            let a = Complex64::new(r1.0 as f64, 0.0) * tau + r1.1 as f64;
            let b = Complex64::new(r2.0 as f64, 0.0) * tau_p + r2.1 as f64;
            let y2 = tau.im * tau_p.im / (a.norm_sqr() * b.norm_sqr());
            let kind = if level == 1 { ProductKind::Level1 } else { ProductKind::Level2 };
            let rate = PlaneEngine::rate(kind, y2);
            if rate < 0.05 {
                continue;
            }
            let r = (l / rate).powi(2) / y2;
            let cost = r.powi(4) + (l / rate).powi(2);
            if out.iter().any(|c| c.v_half == v) {
                continue;
            }
            out.push(ChartChoice { v_half: v, level, im_norm: y2, cost });
        }
    }
    out.sort_by(|a, b| a.cost.partial_cmp(&b.cost).unwrap());
    if out.is_empty() {
        return Err(Error::TailUnreachable("no cusp gives a convergent product at this point".into()));
    }
    Ok(out)
}

/// Evaluate `Φ_γ(τ,τ′)` through a specific cusp `v₂` (half units).
pub fn phi_gamma_eval_at_cusp(
    lg: &LambdaGamma,
    v_half: &[i64],
    tau: Complex64,
    tau_p: Complex64,
    params: &ProductParams,
) -> Result<PhiValue> {
    let chart = lg.chart_at(v_half)?;
    let p = chart.point(tau, tau_p)?;
    let eng = engine_for(&PlaneChart::from_tube(&chart))?;
    let mut v = eval_plane(&eng, p.z_e, p.z_f, params)?;
    v.log -= p.scale.ln() * 4.0;
    v.log_scale -= 4.0 * p.scale.norm().ln();
    v.cusp = v_half.to_vec();
    Ok(v)
}

/// `Φ_γ(τ,τ′)` evaluated through the cheapest convergent cusp.
pub fn phi_gamma_eval(lg: &LambdaGamma, tau: Complex64, tau_p: Complex64, params: &ProductParams) -> Result<PhiValue> {
    if !(tau.im > 0.0 && tau_p.im > 0.0) {
        return Err(Error::InvalidInput("τ, τ′ must lie in the upper half-plane".into()));
    }
    let choices = choose_chart(lg, tau, tau_p, params.tail_target)?;
    let mut last = None;
    for c in choices.iter().take(4) {
        match phi_gamma_eval_at_cusp(lg, &c.v_half, tau, tau_p, params) {
            Ok(v) => return Ok(v),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

/// Exact expansion of `Φ_γ` at the standard cusp to total degree `order`
/// in `P = p^{1/2}`, `Q = q^{1/2}`.
pub fn phi_gamma_leading_qexp(lg: &LambdaGamma, order: i64) -> Result<LaurentSeries2> {
    let chart = &lg.chart;
    let std = chart
        .standard
        .as_ref()
        .ok_or_else(|| Error::FrameSearch("standard chart without affine shift".into()))?;
    let eng = engine_for(&PlaneChart::from_tube(chart))?;
    formal::leading_qexp(&eng, (std.sigma_e, std.sigma_f), order)
}

/// Petersson norm `(Im τ · Im τ′)⁴ |Φ_γ(τ,τ′)|²`.
pub fn petersson_norm(lg: &LambdaGamma, tau: Complex64, tau_p: Complex64, params: &ProductParams) -> Result<f64> {
    let v = phi_gamma_eval(lg, tau, tau_p, params)?;
    Ok(petersson_from(&v, tau.im * tau_p.im))
}

/// `y⁴ |Φ|²` from a log value.
pub fn petersson_from(v: &PhiValue, y: f64) -> f64 {
    if v.is_zero {
        return 0.0;
    }
    (4.0 * y.ln() + 2.0 * v.log.re).exp()
}

/// Petersson norm computed in the tube domain of a chart:
/// `⟨Im u, Im u⟩⁴ |Φ_ℓ(u)|²`.
pub fn petersson_norm_tube(lg: &LambdaGamma, v_half: &[i64], tau: Complex64, tau_p: Complex64, params: &ProductParams) -> Result<f64> {
    let chart = lg.chart_at(v_half)?;
    let p = chart.point(tau, tau_p)?;
    let eng = engine_for(&PlaneChart::from_tube(&chart))?;
    let v = eval_plane(&eng, p.z_e, p.z_f, params)?;
    Ok(petersson_from(&v, p.im_norm(chart.kappa)))
}

/// True for `g ∈ Γ(2)`.
pub fn in_gamma2(g: [[i64; 2]; 2]) -> bool {
    g[0][0] * g[1][1] - g[0][1] * g[1][0] == 1
        && g[0][0].rem_euclid(2) == 1
        && g[1][1].rem_euclid(2) == 1
        && g[0][1].rem_euclid(2) == 0
        && g[1][0].rem_euclid(2) == 0
}

/// Möbius action.
pub fn mobius(g: [[i64; 2]; 2], t: Complex64) -> Complex64 {
    (t * g[0][0] as f64 + g[0][1] as f64) / (t * g[1][0] as f64 + g[1][1] as f64)
}

/// Relative automorphy defect
/// `|Φ(gτ,g′τ′)² − j⁸j′⁸Φ(τ,τ′)²| / |j⁸j′⁸Φ(τ,τ′)²|` with `j = cτ+d`.
pub fn automorphy_defect(
    lg: &LambdaGamma,
    g: [[i64; 2]; 2],
    gp: [[i64; 2]; 2],
    tau: Complex64,
    tau_p: Complex64,
    params: &ProductParams,
) -> Result<f64> {
    if !in_gamma2(g) || !in_gamma2(gp) {
        return Err(Error::InvalidMatrix("matrices must lie in Γ(2)".into()));
    }
    let a = phi_gamma_eval(lg, tau, tau_p, params)?;
    let b = phi_gamma_eval(lg, mobius(g, tau), mobius(gp, tau_p), params)?;
    if a.is_zero || b.is_zero {
        return Err(Error::InvalidInput("point lies on the zero divisor".into()));
    }
    let j = tau * g[1][0] as f64 + g[1][1] as f64;
    let jp = tau_p * gp[1][0] as f64 + gp[1][1] as f64;
    let d = b.log * 2.0 - a.log * 2.0 - j.ln() * 8.0 - jp.ln() * 8.0;
    Ok((d.exp() - 1.0).norm())
}
