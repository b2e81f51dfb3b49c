//! Plane-split evaluation of the level-1 and level-2 products.
//!
//! A chart supplies a Lorentzian lattice `M` (rank 10), a rational isotropic
//! basis `E, F` of a hyperbolic plane `P ⊂ M⊗ℚ` with `⟨E,F⟩ = κ > 0`, and a
//! rational real part `C ⊥ P`; period points are `u = z_E E + z_F F + C` with
//! `Im u = y_E E + y_F F`.  Every `λ ∈ M` splits as `λ_P + λ_N` with
//!
//! * `λ_P = (f/κ)E + (e/κ)F`, where `e = ⟨λ,E⟩`, `f = ⟨λ,F⟩`, so
//!   `λ_P² = 2ef/κ` and `⟨λ, Im u⟩ = e·y_E + f·y_F`;
//! * `λ_N ∈ N⊗ℚ`, `N = M ∩ P^⊥` negative definite of rank 8.
//!
//! The pairs `(e, f)` form a rank-2 lattice; over each pair the admissible
//! `λ_N` run through a fixed coset of `N`.  The coset tables (vector counts
//! grouped by norm, phase `⟨λ_N, C⟩` and the frame pairings) depend on the
//! chart only, so they are built once — in parallel, with Fincke–Pohst — and
//! reused for every point and height cutoff.

use crate::error::{Error, Result};
use crate::lattice::intmat::{self, denom_lcm, hnf_with_transform, inverse_q, lll_gram, IMat, Q};
use crate::lattice::FinckePohst;
use crate::qseries::c_coeff_f64;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Which of the two product expansions a chart carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProductKind {
    /// `∏ ((1 − e^{πi⟨λ,u⟩})/(1 + e^{πi⟨λ,u⟩}))^{c(λ²/2)}` over the closed cone.
    Level1,
    /// `2⁸ e^{2πi⟨ρ,u⟩} ∏ (1 − e^{2πi⟨λ,u⟩})^{(−1)^{⟨λ,ρ−ρ′⟩} c(λ²/2)}`.
    Level2,
}

impl ProductKind {
    /// Multiplier `k` in the exponential `e^{πik⟨λ,u⟩}`.
    pub fn k(self) -> i64 {
        match self {
            ProductKind::Level1 => 1,
            ProductKind::Level2 => 2,
        }
    }
}

/// Lattice data of a product chart (all vectors in `M` coordinates).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlaneChart {
    pub kind: ProductKind,
    pub m_gram: IMat,
    pub e: Vec<Q>,
    pub f: Vec<Q>,
    pub kappa: Q,
    pub c: Vec<Q>,
    /// Level-2 frame `ρ, ρ′` (empty for level 1).
    pub rho: Vec<i64>,
    pub rho_prime: Vec<i64>,
}

/// One group of lattice vectors sharing the same factor.
#[derive(Clone, Copy, Debug)]
pub struct FactorClass {
    pub e: Q,
    pub f: Q,
    /// `⟨λ, Im u⟩`.
    pub t: f64,
    /// `λ²/2`.
    pub n: i64,
    /// Exponent sign `(−1)^{⟨λ,ρ−ρ′⟩}` (always `false` at level 1).
    pub negative: bool,
    /// `⟨λ_N, C⟩ = phase / phase_den`, reduced modulo `2/k`.
    pub phase: i64,
    pub count: u64,
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    nn: i64,
    phase: i64,
    sig: i64,
    rho: i64,
    count: u64,
}

#[derive(Debug, Default)]
struct CosetTable {
    entries: Vec<Entry>,
    cum_nn: Vec<i64>,
    cum_count: Vec<u64>,
}

impl CosetTable {
    fn prefix_len(&self, nn_max: i64) -> usize {
        self.entries.partition_point(|x| x.nn <= nn_max)
    }
    fn range_eq(&self, nn: i64) -> &[Entry] {
        let lo = self.entries.partition_point(|x| x.nn < nn);
        let hi = self.entries.partition_point(|x| x.nn <= nn);
        &self.entries[lo..hi]
    }
    fn cum(&self, nn_max: i64) -> u64 {
        let i = self.cum_nn.partition_point(|&x| x <= nn_max);
        if i == 0 {
            0
        } else {
            self.cum_count[i - 1]
        }
    }
}

/// Coset tables of a chart up to a norm radius.
#[derive(Debug)]
pub struct Tables {
    /// Exact for `nn · den² ≤ radius_num`.
    radius_num: i64,
    cosets: Vec<CosetTable>,
    smemo: Mutex<HashMap<(usize, i64, bool), f64>>,
}

impl Tables {
    /// Radius (in norm units) up to which the tables are exact.
    pub fn radius(&self, den: i64) -> f64 {
        self.radius_num as f64 / (den * den) as f64
    }
    /// Number of stored vectors.
    pub fn vector_count(&self) -> u64 {
        self.cosets.iter().map(|c| c.cum_count.last().copied().unwrap_or(0)).sum()
    }
}

/// Precomputed split of a chart's lattice.
#[derive(Debug)]
pub struct PlaneEngine {
    pub chart: PlaneChart,
    k: i64,
    e1: Q,
    f1: Q,
    f2: Q,
    den: i64,
    s1n: Vec<i64>,
    s2n: Vec<i64>,
    cosets: Vec<Vec<i64>>,
    coset_index: HashMap<Vec<i64>, usize>,
    gn: IMat,
    ncn: Vec<i64>,
    dc: i64,
    pm: i64,
    nsig: Vec<i64>,
    nrho: Vec<i64>,
    rho_e: Q,
    rho_f: Q,
    rr_e: Q,
    rr_f: Q,
    rho_c: Q,
    fp: FinckePohst,
    vol_scale: f64,
    vol_pad: f64,
    tables: Mutex<Option<Arc<Tables>>>,
}

fn to_i128(v: &Q, d: i64) -> i128 {
    let x = *v * d;
    assert!(x.is_integer(), "scaled value is not integral");
    x.to_integer() as i128
}

impl PlaneEngine {
    /// Split the chart lattice; validates the plane data.
    pub fn new(chart: PlaneChart) -> Result<Self> {
        let n = chart.m_gram.len();
        if n < 3 || chart.e.len() != n || chart.f.len() != n || chart.c.len() != n {
            return Err(Error::InvalidLattice("chart dimensions".into()));
        }
        let pair = |x: &[Q], y: &[Q]| intmat::bilinear_q(&chart.m_gram, x, y);
        let iq = |x: &[i64]| -> Vec<Q> { x.iter().map(|&a| Q::from(a)).collect() };
        if !pair(&chart.e, &chart.e).is_zero() || !pair(&chart.f, &chart.f).is_zero() {
            return Err(Error::InvalidLattice("E, F must be isotropic".into()));
        }
        if pair(&chart.e, &chart.f) != chart.kappa || !chart.kappa.is_positive() {
            return Err(Error::InvalidLattice("⟨E,F⟩ must equal κ > 0".into()));
        }
        if !pair(&chart.c, &chart.e).is_zero() || !pair(&chart.c, &chart.f).is_zero() {
            return Err(Error::InvalidLattice("C must be orthogonal to P".into()));
        }
        let unit = |i: usize| -> Vec<Q> { (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect() };
        let ev: Vec<Q> = (0..n).map(|i| pair(&unit(i), &chart.e)).collect();
        let fv: Vec<Q> = (0..n).map(|i| pair(&unit(i), &chart.f)).collect();
        let d = num_integer::lcm(denom_lcm(&ev), denom_lcm(&fv));
        let a: Vec<Vec<i128>> = (0..n).map(|i| vec![to_i128(&ev[i], d), to_i128(&fv[i], d)]).collect();
        let (h, u) = hnf_with_transform(&a);
        if h[0][0] <= 0 || h[1][0] != 0 || h[1][1] <= 0 {
            return Err(Error::InvalidLattice("E and F are dependent on M".into()));
        }
        let e1 = Q::new(h[0][0] as i64, d);
        let f1 = Q::new(h[0][1] as i64, d);
        let f2 = Q::new(h[1][1] as i64, d);
        let ui: IMat = u.iter().map(|r| r.iter().map(|&x| i64::try_from(x).expect("transform overflow")).collect()).collect();
        let l1 = ui[0].clone();
        let l2 = ui[1].clone();
        let ker: IMat = ui[2..].to_vec();
        let gk = intmat::congruence(&ker, &chart.m_gram);
        let neg: IMat = gk.iter().map(|r| r.iter().map(|&x| -x).collect()).collect();
        let t = lll_gram(&neg);
        let nb = intmat::mat_mul(&t, &ker);
        let gn = intmat::congruence(&nb, &chart.m_gram);
        let r = nb.len();
        let gnq: Vec<Vec<Q>> = gn.iter().map(|row| row.iter().map(|&x| Q::from(x)).collect()).collect();
        let inv = inverse_q(&gnq).ok_or_else(|| Error::InvalidLattice("degenerate complement".into()))?;
        let proj = |l: &[i64]| -> Vec<Q> {
            let g: Vec<Q> = nb.iter().map(|nk| Q::from(intmat::bilinear(&chart.m_gram, l, nk) as i64)).collect();
            (0..r).map(|k| (0..r).fold(Q::zero(), |s, j| s + inv[k][j] * g[j])).collect()
        };
        let s1 = proj(&l1);
        let s2 = proj(&l2);
        let den = num_integer::lcm(denom_lcm(&s1), denom_lcm(&s2)).max(1);
        let s1n: Vec<i64> = s1.iter().map(|x| (*x * den).to_integer().rem_euclid(den)).collect();
        let s2n: Vec<i64> = s2.iter().map(|x| (*x * den).to_integer().rem_euclid(den)).collect();
        let mut cosets: Vec<Vec<i64>> = Vec::new();
        let mut coset_index = HashMap::new();
        for i in 0..den {
            for j in 0..den {
                let v: Vec<i64> = (0..r).map(|k| (i * s1n[k] + j * s2n[k]).rem_euclid(den)).collect();
                if !coset_index.contains_key(&v) {
                    coset_index.insert(v.clone(), cosets.len());
                    cosets.push(v);
                }
            }
        }
        // Phase and frame pairings with the complement basis.
        let nc: Vec<Q> = nb.iter().map(|nk| pair(&iq(nk), &chart.c)).collect();
        let dc = denom_lcm(&nc).max(1);
        let ncn: Vec<i64> = nc.iter().map(|x| (*x * dc).to_integer()).collect();
        let k = chart.kind.k();
        let pm = (2 / k) * den * dc;
        let (nsig, nrho, rho_e, rho_f, rr_e, rr_f, rho_c) = if chart.kind == ProductKind::Level2 {
            if chart.rho.len() != n || chart.rho_prime.len() != n {
                return Err(Error::InvalidLattice("level-2 chart needs a frame".into()));
            }
            let rho = iq(&chart.rho);
            let rp = iq(&chart.rho_prime);
            if !pair(&rho, &rho).is_zero() || !pair(&rp, &rp).is_zero() || pair(&rho, &rp) != Q::one() {
                return Err(Error::InvalidLattice("frame must be isotropic with ⟨ρ,ρ′⟩ = 1".into()));
            }
            let rr: Vec<Q> = rho.iter().zip(&rp).map(|(a, b)| *a - *b).collect();
            let nsig = nb.iter().map(|nk| pair(&iq(nk), &rr).to_integer()).collect();
            let nrho = nb.iter().map(|nk| pair(&iq(nk), &rho).to_integer()).collect();
            let (re, rf) = (pair(&rho, &chart.e), pair(&rho, &chart.f));
            if re.is_negative() || rf.is_negative() || (re.is_zero() && rf.is_zero()) {
                return Err(Error::ConeViolation("ρ is not in the closed positive cone".into()));
            }
            (nsig, nrho, re, rf, pair(&rr, &chart.e), pair(&rr, &chart.f), pair(&rho, &chart.c))
        } else {
            (vec![0; r], vec![0; r], Q::zero(), Q::zero(), Q::zero(), Q::zero(), Q::zero())
        };
        let negf: Vec<Vec<f64>> = gn.iter().map(|row| row.iter().map(|&x| -(x as f64)).collect()).collect();
        let fp = FinckePohst::new(&negf)?;
        // Lattice-point count bound: vol(B(√r + pad)) / covolume.
        let (_, bstar) = intmat::gso_from_gram(&neg_mat(&gn));
        let det: f64 = bstar.iter().product();
        let vball = PI.powi(4) / 24.0; // volume of the unit 8-ball
        let vol_scale = if r == 8 { vball / det.sqrt() } else { unit_ball_volume(r) / det.sqrt() };
        let vol_pad = 0.5 * bstar.iter().sum::<f64>().sqrt();
        let eng = Self {
            chart,
            k,
            e1,
            f1,
            f2,
            den,
            s1n,
            s2n,
            cosets,
            coset_index,
            gn,
            ncn,
            dc,
            pm,
            nsig,
            nrho,
            rho_e,
            rho_f,
            rr_e,
            rr_f,
            rho_c,
            fp,
            vol_scale,
            vol_pad,
            tables: Mutex::new(None),
        };
        eng.self_check(&l1, &l2, &s1, &s2)?;
        Ok(eng)
    }

    fn self_check(&self, l1: &[i64], l2: &[i64], s1: &[Q], s2: &[Q]) -> Result<()> {
        // λ² = 2ef/κ − nn on the two plane generators.
        for (l, s, e, f) in [(l1, s1, self.e1, self.f1), (l2, s2, Q::zero(), self.f2)] {
            let lam2 = Q::from(intmat::bilinear(&self.chart.m_gram, l, l) as i64);
            let nn = -intmat::bilinear_q(&self.gn, s, s);
            if lam2 != Q::from(2) * e * f / self.chart.kappa - nn {
                return Err(Error::InvalidLattice("plane split is inconsistent".into()));
            }
        }
        Ok(())
    }

    /// Denominator of the phase numerators in [`FactorClass`].
    pub fn phase_den(&self) -> i64 {
        self.den * self.dc
    }

    /// Product kind.
    pub fn kind(&self) -> ProductKind {
        self.chart.kind
    }

    /// `κ = ⟨E,F⟩`.
    pub fn kappa(&self) -> Q {
        self.chart.kappa
    }

    /// `(⟨ρ,E⟩, ⟨ρ,F⟩, ⟨ρ,C⟩)`.
    pub fn rho_data(&self) -> (Q, Q, Q) {
        (self.rho_e, self.rho_f, self.rho_c)
    }

    /// Number of complement cosets.
    pub fn coset_count(&self) -> usize {
        self.cosets.len()
    }

    fn coset_of(&self, i: i64, j: i64) -> usize {
        let (i, j) = (i.rem_euclid(self.den), j.rem_euclid(self.den));
        let v: Vec<i64> = (0..self.s1n.len()).map(|k| (i * self.s1n[k] + j * self.s2n[k]).rem_euclid(self.den)).collect();
        self.coset_index[&v]
    }

    /// Tables exact at least up to norm `radius`, built or enlarged on demand.
    pub fn tables(&self, radius: f64) -> Arc<Tables> {
        let d2 = self.den * self.den;
        let need = (radius * d2 as f64).ceil() as i64;
        let mut guard = self.tables.lock().unwrap();
        if let Some(t) = guard.as_ref() {
            if t.radius_num >= need {
                return t.clone();
            }
        }
        let grown = guard.as_ref().map_or(need, |t| need.max(t.radius_num + t.radius_num / 3));
        let t = Arc::new(self.build_tables(grown));
        *guard = Some(t.clone());
        t
    }

    fn build_tables(&self, radius_num: i64) -> Tables {
        let den = self.den;
        let r = self.s1n.len();
        let radius = radius_num as f64 / (den * den) as f64;
        let level2 = self.chart.kind == ProductKind::Level2;
        let cosets = self
            .cosets
            .iter()
            .map(|sh| {
                let shift: Vec<f64> = sh.iter().map(|&v| v as f64 / den as f64).collect();
                let (lo, hi) = self.fp.top_range(&shift, radius);
                let maps: Vec<HashMap<(i64, i64, i64, i64), u64>> = (lo..=hi)
                    .into_par_iter()
                    .map(|top| {
                        let mut m: HashMap<(i64, i64, i64, i64), u64> = HashMap::new();
                        let mut z = vec![0i64; r];
                        self.fp.for_each_with_top(&shift, radius, top, &mut |x: &[i64]| {
                            for k in 0..r {
                                z[k] = den * x[k] + sh[k];
                            }
                            let mut nn: i64 = 0;
                            for a in 0..r {
                                let mut s = 0i64;
                                for b in 0..r {
                                    s += self.gn[a][b] * z[b];
                                }
                                nn -= z[a] * s;
                            }
                            if nn > radius_num {
                                return;
                            }
                            let mut ph = 0i64;
                            let mut sg = 0i64;
                            let mut rh = 0i64;
                            for a in 0..r {
                                ph += z[a] * self.ncn[a];
                                if level2 {
                                    sg += z[a] * self.nsig[a];
                                    rh += z[a] * self.nrho[a];
                                }
                            }
                            let key = (nn, ph.rem_euclid(self.pm), sg.rem_euclid(2 * den), rh);
                            *m.entry(key).or_insert(0) += 1;
                        });
                        m
                    })
                    .collect();
                let mut all: BTreeMap<(i64, i64, i64, i64), u64> = BTreeMap::new();
                for m in maps {
                    for (k, v) in m {
                        *all.entry(k).or_insert(0) += v;
                    }
                }
                let entries: Vec<Entry> = all
                    .into_iter()
                    .map(|((nn, phase, sig, rho), count)| Entry { nn, phase, sig, rho, count })
                    .collect();
                let mut cum_nn = Vec::new();
                let mut cum_count = Vec::new();
                let mut acc = 0u64;
                for e in &entries {
                    acc += e.count;
                    if cum_nn.last() == Some(&e.nn) {
                        *cum_count.last_mut().unwrap() = acc;
                    } else {
                        cum_nn.push(e.nn);
                        cum_count.push(acc);
                    }
                }
                CosetTable { entries, cum_nn, cum_count }
            })
            .collect();
        Tables { radius_num, cosets, smemo: Mutex::new(HashMap::new()) }
    }

    /// `m = λ_P² = 2ef/κ` scaled by `den²` (must be an integer).
    fn m_num(&self, e: Q, f: Q) -> i64 {
        let m = Q::from(2) * e * f / self.chart.kappa * (self.den * self.den);
        assert!(m.is_integer(), "λ_P² · den² is not integral");
        m.to_integer()
    }

    /// Plane-lattice points `(i, j, e, f)` in the box `e ∈ [e_lo, e_hi]`,
    /// `f ∈ [f_lo, f_hi]`, in `(i, j)` order.
    fn plane_points(&self, e_lo: f64, e_hi: f64, f_lo: f64, f_hi: f64, mut cb: impl FnMut(i64, i64, Q, Q)) {
        let e1 = self.e1.to_f64().unwrap();
        let f1 = self.f1.to_f64().unwrap();
        let f2 = self.f2.to_f64().unwrap();
        let i_lo = (e_lo / e1 - 1e-9).ceil() as i64;
        let i_hi = (e_hi / e1 + 1e-9).floor() as i64;
        for i in i_lo..=i_hi {
            let base = i as f64 * f1;
            let j_lo = ((f_lo - base) / f2 - 1e-9).ceil() as i64;
            let j_hi = ((f_hi - base) / f2 + 1e-9).floor() as i64;
            for j in j_lo..=j_hi {
                let e = self.e1 * i;
                let f = self.f1 * i + self.f2 * j;
                cb(i, j, e, f);
            }
        }
    }

    /// Lower bound for `⟨λ, Im u⟩` over roots with `⟨λ,ρ⟩ > 0`.
    pub fn root_t_min(&self, y_e: f64, y_f: f64) -> f64 {
        let y2 = 2.0 * self.chart.kappa.to_f64().unwrap() * y_e * y_f;
        let beta = self.rho_e.to_f64().unwrap() * y_e + self.rho_f.to_f64().unwrap() * y_f;
        y2 / (2.0 * beta) - beta
    }

    /// Box containing all root classes with `t ∈ (t_min, h]`.
    fn root_box(&self, y_e: f64, y_f: f64, h: f64) -> (f64, f64, f64, f64) {
        let kap = self.chart.kappa.to_f64().unwrap();
        let a = (-self.root_t_min(y_e, y_f)).max(0.0);
        let disc = (a * a + 4.0 * kap * y_e * y_f).sqrt();
        let e_neg = (a + disc) / (2.0 * y_e);
        let f_neg = (a + disc) / (2.0 * y_f);
        (-e_neg, (h + f_neg * y_f) / y_e, -f_neg, (h + e_neg * y_e) / y_f)
    }

    /// Norm radius the tables need to cover every class with `t ≤ h`.
    ///
    /// When `e, f` have the same sign, `λ_P² ≤ t²/(Im u)²`; otherwise
    /// `λ_P² < 0`.  Roots may have `t` down to [`Self::root_t_min`].
    pub fn required_radius(&self, y_e: f64, y_f: f64, h: f64) -> f64 {
        let y2 = 2.0 * self.chart.kappa.to_f64().unwrap() * y_e * y_f;
        let mut h = h.max(0.0);
        if self.chart.kind == ProductKind::Level2 {
            h = h.max(-self.root_t_min(y_e, y_f));
        }
        h * h / y2 + 2.0 + 1e-9
    }

    /// Visit every factor class with `⟨λ, Im u⟩ ∈ (0, h]` (and, at level 2,
    /// the roots with `⟨λ,ρ⟩ > 0` and `⟨λ, Im u⟩ ≤ h`), in a fixed order.
    pub fn visit(&self, tables: &Tables, y_e: f64, y_f: f64, h: f64, mut cb: impl FnMut(&FactorClass)) {
        let d2 = self.den * self.den;
        let level2 = self.chart.kind == ProductKind::Level2;
        // Non-root classes: e, f ≥ 0, nn ≤ m.
        self.plane_points(0.0, h / y_e, 0.0, h / y_f, |i, j, e, f| {
            if e.is_negative() || f.is_negative() || (e.is_zero() && f.is_zero()) {
                return;
            }
            let t = e.to_f64().unwrap() * y_e + f.to_f64().unwrap() * y_f;
            if t > h {
                return;
            }
            let m = self.m_num(e, f);
            assert!(m <= tables.radius_num, "coset table radius too small");
            let tab = &tables.cosets[self.coset_of(i, j)];
            let psig = if level2 { self.p_pairing_den(e, f, self.rr_e, self.rr_f) } else { 0 };
            for ent in &tab.entries[..tab.prefix_len(m)] {
                let l2 = m - ent.nn;
                assert!(l2 % (2 * d2) == 0, "λ²/2 is not an integer");
                let n = l2 / (2 * d2);
                let negative = level2 && (psig + ent.sig).rem_euclid(2 * self.den) != 0;
                if level2 {
                    assert!((psig + ent.sig) % self.den == 0, "⟨λ,ρ−ρ′⟩ is not an integer");
                }
                cb(&FactorClass { e, f, t, n, negative, phase: ent.phase, count: ent.count });
            }
        });
        if !level2 {
            return;
        }
        // Roots with ⟨λ,ρ⟩ > 0.
        let t_min = self.root_t_min(y_e, y_f);
        let (el, eh, fl, fh) = self.root_box(y_e, y_f, h);
        self.plane_points(el, eh, fl, fh, |i, j, e, f| {
            let t = e.to_f64().unwrap() * y_e + f.to_f64().unwrap() * y_f;
            if t > h || t < t_min - 1e-9 {
                return;
            }
            let m = self.m_num(e, f);
            let target = m + 2 * d2;
            if target < 0 {
                return;
            }
            assert!(target <= tables.radius_num, "coset table radius too small");
            let tab = &tables.cosets[self.coset_of(i, j)];
            let psig = self.p_pairing_den(e, f, self.rr_e, self.rr_f);
            let prho = self.p_pairing_den(e, f, self.rho_e, self.rho_f);
            for ent in tab.range_eq(target) {
                if prho + ent.rho <= 0 {
                    continue;
                }
                assert!((psig + ent.sig) % self.den == 0, "⟨λ,ρ−ρ′⟩ is not an integer");
                let negative = (psig + ent.sig).rem_euclid(2 * self.den) != 0;
                cb(&FactorClass { e, f, t, n: -1, negative, phase: ent.phase, count: ent.count });
            }
        });
    }

    /// `⟨λ_P, X⟩ · den` for `X` with `⟨X,E⟩ = x_e`, `⟨X,F⟩ = x_f`.
    fn p_pairing_den(&self, e: Q, f: Q, x_e: Q, x_f: Q) -> i64 {
        let v = (f * x_e + e * x_f) / self.chart.kappa * self.den;
        assert!(v.is_integer(), "plane pairing is not integral at the coset denominator");
        v.to_integer()
    }

    /// Count bound `#{x : nn(x) ≤ r}` for any coset.
    fn ncum_bound(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        self.vol_scale * (r.sqrt() + self.vol_pad).powi(self.s1n.len() as i32)
    }

    fn ncum(&self, tables: &Tables, coset: usize, r_num: i64) -> f64 {
        if r_num < 0 {
            0.0
        } else if r_num <= tables.radius_num {
            tables.cosets[coset].cum(r_num) as f64
        } else {
            self.ncum_bound(r_num as f64 / (self.den * self.den) as f64)
        }
    }

    /// Upper bound for `Σ |exponent|` over the classes at one plane point.
    fn weight(&self, tables: &Tables, coset: usize, m: i64, nonroot: bool, root: bool) -> f64 {
        let key = (coset, m, nonroot);
        let mut total = 0.0;
        if nonroot && m >= 0 {
            let memo = tables.smemo.lock().unwrap().get(&key).copied();
            let s = match memo {
                Some(s) => s,
                None => {
                    let d2 = self.den * self.den;
                    let s = if m <= tables.radius_num {
                        let tab = &tables.cosets[coset];
                        tab.entries[..tab.prefix_len(m)]
                            .iter()
                            .map(|ent| ent.count as f64 * c_coeff_f64((m - ent.nn) / (2 * d2)))
                            .sum()
                    } else {
                        // Abel summation with c nondecreasing on n ≥ 0.
                        let mut s = c_coeff_f64(0) * self.ncum(tables, coset, m);
                        let mut kk = 1i64;
                        while m - 2 * kk * d2 >= 0 {
                            s += (c_coeff_f64(kk) - c_coeff_f64(kk - 1)) * self.ncum(tables, coset, m - 2 * kk * d2);
                            kk += 1;
                        }
                        s
                    };
                    tables.smemo.lock().unwrap().insert(key, s);
                    s
                }
            };
            total += s;
        }
        if root {
            let d2 = self.den * self.den;
            let target = m + 2 * d2;
            if target >= 0 {
                total += if target <= tables.radius_num {
                    tables.cosets[coset].range_eq(target).iter().map(|e| e.count as f64).sum::<f64>()
                } else {
                    self.ncum(tables, coset, target)
                };
            }
        }
        total
    }

    /// A-posteriori bound on `Σ |exponent| · |log factor|` over the classes
    /// with `⟨λ, Im u⟩ > h`.  Shells are summed until they are negligible;
    /// the remainder beyond is estimated geometrically from the last shells.
    pub fn tail_bound(&self, tables: &Tables, y_e: f64, y_f: f64, h: f64) -> Result<f64> {
        let level2 = self.chart.kind == ProductKind::Level2;
        let kf = self.k as f64;
        let g = |t: f64| -> f64 {
            let x = (-PI * kf * t).exp();
            if level2 {
                -(-x).ln_1p()
            } else {
                (x.ln_1p() - (-x).ln_1p()).abs()
            }
        };
        let width = 0.5f64;
        let mut bins: Vec<f64> = Vec::new();
        let mut t_done = h;
        let kap = self.chart.kappa.to_f64().unwrap();
        let max_extent = h + 400.0;
        loop {
            let t_hi = t_done + 8.0 * width;
            let nb = ((t_hi - h) / width).round() as usize;
            bins.resize(nb, 0.0);
            let (el, eh, fl, fh) = if level2 {
                self.root_box(y_e, y_f, t_hi)
            } else {
                (0.0, t_hi / y_e, 0.0, t_hi / y_f)
            };
            self.plane_points(el, eh, fl, fh, |i, j, e, f| {
                let t = e.to_f64().unwrap() * y_e + f.to_f64().unwrap() * y_f;
                if t <= t_done || t > t_hi {
                    return;
                }
                let nonroot = !e.is_negative() && !f.is_negative();
                let ef = e.to_f64().unwrap() * f.to_f64().unwrap();
                let root = level2 && ef >= -kap - 1e-12;
                if !nonroot && !root {
                    return;
                }
                let m = self.m_num(e, f);
                let w = self.weight(tables, self.coset_of(i, j), m, nonroot, root);
                let b = (((t - h) / width).floor() as usize).min(nb - 1);
                bins[b] += w * g(t);
            });
            t_done = t_hi;
            let total: f64 = bins.iter().sum();
            // Decay is judged on whole chunks: heights can be sparse, so single
            // bins may be empty.
            let chunks: Vec<f64> = bins.chunks(8).map(|c| c.iter().sum()).collect();
            let n = chunks.len();
            if total == 0.0 && t_done > h + 20.0 {
                return Ok(0.0);
            }
            if n >= 3 {
                let last = chunks[n - 1];
                if chunks[n - 3] > 0.0 && chunks[n - 2] > 0.0 {
                    let r = (chunks[n - 2] / chunks[n - 3]).max(last / chunks[n - 2]);
                    if r < 0.9 && last < 1e-3 * total {
                        return Ok(total + last * r / (1.0 - r));
                    }
                }
            }
            if t_done > max_extent {
                return Err(Error::TailUnreachable("tail shells do not decay".into()));
            }
        }
    }

    /// Convergence rate per unit of `⟨λ, Im u⟩` for a point with `(Im u)² = y2`.
    pub fn rate(kind: ProductKind, y2: f64) -> f64 {
        match kind {
            ProductKind::Level1 => PI * (1.0 - (2.0 / y2).sqrt()),
            ProductKind::Level2 => 2.0 * PI * (1.0 - 1.0 / (2.0 * y2).sqrt()),
        }
    }

    /// Logarithm of the truncated product at `u = z_E E + z_F F + C`.
    pub fn log_product(&self, tables: &Tables, z_e: Complex64, z_f: Complex64, h: f64) -> ProductSum {
        let (y_e, y_f) = (z_e.im, z_f.im);
        let k = self.k as f64;
        let pden = self.phase_den() as f64;
        let mut units: HashMap<i64, Complex64> = HashMap::new();
        let mut acc = Neumaier::default();
        let mut terms: u64 = 0;
        let mut zero = false;
        let mut cvals: Vec<f64> = Vec::new();
        self.visit(tables, y_e, y_f, h, |cl| {
            let unit = *units
                .entry(cl.phase)
                .or_insert_with(|| Complex64::from_polar(1.0, PI * k * cl.phase as f64 / pden));
            let arg = (z_e * cl.e.to_f64().unwrap() + z_f * cl.f.to_f64().unwrap()) * (PI * k);
            let x = Complex64::new(0.0, 1.0) * arg;
            let x = x.exp() * unit;
            let idx = (cl.n + 1) as usize;
            if cvals.len() <= idx {
                cvals = (0..=(idx + 16)).map(|i| c_coeff_f64(i as i64 - 1)).collect();
            }
            let mut c = cvals[idx] * cl.count as f64;
            if cl.negative {
                c = -c;
            }
            let l = match self.chart.kind {
                ProductKind::Level1 => {
                    if (1.0 - x).norm() < ZERO_FACTOR || (1.0 + x).norm() < ZERO_FACTOR {
                        zero = true;
                        return;
                    }
                    ln1p(-x) - ln1p(x)
                }
                ProductKind::Level2 => {
                    if (1.0 - x).norm() < ZERO_FACTOR {
                        zero = true;
                        return;
                    }
                    ln1p(-x)
                }
            };
            if !l.is_finite() {
                zero = true;
                return;
            }
            acc.add(l * c);
            terms += cl.count;
        });
        if self.chart.kind == ProductKind::Level2 {
            let (re, rf, rc) = self.rho_data();
            let pre = (z_e * re.to_f64().unwrap() + z_f * rf.to_f64().unwrap() + rc.to_f64().unwrap())
                * Complex64::new(0.0, 2.0 * PI);
            acc.add(pre + Complex64::new(8.0 * std::f64::consts::LN_2, 0.0));
        }
        ProductSum { log: acc.sum(), terms, zero }
    }
}

fn neg_mat(g: &IMat) -> IMat {
    g.iter().map(|r| r.iter().map(|&x| -x).collect()).collect()
}

fn unit_ball_volume(n: usize) -> f64 {
    let nf = n as f64;
    PI.powf(nf / 2.0) / gamma_half_int(nf / 2.0 + 1.0)
}

fn gamma_half_int(x: f64) -> f64 {
    // Γ on positive integers and half-integers.
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as i64).map(|i| i as f64).product()
    } else {
        let mut v = PI.sqrt();
        let mut a = 0.5;
        while a < x - 1e-9 {
            v *= a;
            a += 1.0;
        }
        v
    }
}

/// A factor `1 − x` with `|1 − x|` below this lies on the zero divisor to
/// within rounding of the input point; the product is then reported as zero
/// (absolute accuracy only).
pub const ZERO_FACTOR: f64 = 1e-12;

/// Accurate `ln(1 + w)` for complex `w` with `|w| < 1`.
pub fn ln1p(w: Complex64) -> Complex64 {
    let (a, b) = (w.re, w.im);
    let re = 0.5 * (2.0 * a + a * a + b * b).ln_1p();
    let im = b.atan2(1.0 + a);
    Complex64::new(re, im)
}

/// Result of a truncated log-product.
#[derive(Clone, Copy, Debug)]
pub struct ProductSum {
    pub log: Complex64,
    pub terms: u64,
    pub zero: bool,
}

/// Neumaier compensated summation of complex numbers.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    s: Complex64,
    c: Complex64,
}

impl Neumaier {
    pub fn add(&mut self, x: Complex64) {
        let step = |s: &mut f64, c: &mut f64, x: f64| {
            let t = *s + x;
            if s.abs() >= x.abs() {
                *c += (*s - t) + x;
            } else {
                *c += (x - t) + *s;
            }
            *s = t;
        };
        step(&mut self.s.re, &mut self.c.re, x.re);
        step(&mut self.s.im, &mut self.c.im, x.im);
    }
    pub fn sum(&self) -> Complex64 {
        self.s + self.c
    }
}
