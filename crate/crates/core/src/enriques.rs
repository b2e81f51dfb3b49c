//! The fifteen involution classes `γ ∈ A_K ∖ {0}` of `K = U(2) ⊕ U(2)`, their
//! glue lattices `Λ_γ = ℤ(d₁+d₂) + K ⊕ E8(2)`, and tube-domain charts.
//!
//! Ambient coordinates are twelve numbers: the four `K` coordinates
//! `(x₁,x₂,x₃,x₄)` with `⟨x,y⟩ = 2(x₁y₂+x₂y₁) + 2(x₃y₄+x₄y₃)`, followed by the
//! eight simple-root coordinates of `E8(2)`.  Lattice vectors are stored in
//! *half units* (twice the ambient coordinates) so that every element of
//! `K^∨ ⊕ E8(2)^∨` has integer entries.
//!
//! A chart is attached to a primitive isotropic `v₂ ∈ K` of level `ℓ` in
//! `Λ_γ` together with an isotropic partner `v₂′` with `⟨v₂,v₂′⟩ = ℓ` of the
//! same level; then `Λ_γ = (ℤv₂ + ℤv₂′) ⊕ M` with `M` of signature `(1,9)`.
//! The period point of `(τ,τ′)` is
//! `u = (−1)^{2/ℓ}(Z − αv₂ − v₂′/ℓ)` with `Z = ω/⟨ω,v₂⟩`, `α = ⟨Z,v₂′⟩/ℓ` and
//! `ω(τ,τ′) = (−ττ′/2, 1/2, τ/2, τ′/2 | 0)`.

use crate::error::{Error, Result};
use crate::lattice::intmat::{self, denom_lcm, ext_gcd, gcd_slice, kernel, row_basis, solve_left, IMat, QMat, Q};
use crate::lattice::{
    block_diag, e8_2_gram, enumerate_vectors, q_mod, u_gram, FinckePohst, LatticeVector, QuadLattice,
    RationalVector, E8_HIGHEST_ROOT,
};
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::sync::{Arc, Mutex, OnceLock};

/// Ambient dimension `rank K + rank E8(2)`.
pub const AMB: usize = 12;

/// Integer Gram matrix of the ambient lattice `K ⊕ E8(2)`.
pub fn ambient_gram() -> &'static IMat {
    static G: OnceLock<IMat> = OnceLock::new();
    G.get_or_init(|| block_diag(&[u_gram(2), u_gram(2), e8_2_gram()]))
}

/// Pairing of two half-unit ambient vectors: `XᵀGY/4`.
pub fn pair_half(x: &[i64], y: &[i64]) -> Q {
    Q::new(intmat::bilinear(ambient_gram(), x, y) as i64, 4)
}

/// Pairing of two rational ambient vectors (actual coordinates).
pub fn pair_amb(x: &[Q], y: &[Q]) -> Q {
    intmat::bilinear_q(ambient_gram(), x, y)
}

/// Pairing of complex ambient vectors (bilinear, not Hermitian).
pub fn pair_amb_c(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let g = ambient_gram();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..AMB {
        for j in 0..AMB {
            if g[i][j] != 0 {
                s += x[i] * y[j] * g[i][j] as f64;
            }
        }
    }
    s
}

fn half_to_q(x: &[i64]) -> Vec<Q> {
    x.iter().map(|&a| Q::new(a, 2)).collect()
}

fn q_to_c(x: &[Q]) -> Vec<Complex64> {
    x.iter().map(|a| Complex64::new(a.to_f64().unwrap(), 0.0)).collect()
}

/// Parity of an involution class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Parity {
    Odd,
    Even,
}

/// One of the fifteen nonzero classes of `A_K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GammaClass {
    /// Coset representative in `K^∨` (entries in `{0, 1/2}`).
    #[serde(serialize_with = "ser_qs")]
    pub d1: Vec<Q>,
    pub parity: Parity,
    /// Level of `v = (1,0,0,0|0)` in `Λ_γ`.
    pub level: i64,
    /// Glue partner in `E8(2)^∨` (simple-root coordinates).
    #[serde(serialize_with = "ser_qs")]
    pub d2: Vec<Q>,
}

fn ser_qs<S: serde::Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

impl GammaClass {
    /// Build from the four `K^∨` coordinates (each 0 or 1/2).
    pub fn from_d1(d1: [Q; 4]) -> Result<Self> {
        if d1.iter().all(|x| x.is_zero()) {
            return Err(Error::InvalidInput("γ must be a nonzero class".into()));
        }
        if d1.iter().any(|x| *x != Q::zero() && *x != Q::new(1, 2)) {
            return Err(Error::InvalidInput("γ coordinates must be 0 or 1/2".into()));
        }
        let q = Q::from(4) * (d1[0] * d1[1] + d1[2] * d1[3]);
        let parity = if q_mod(q, 2).is_zero() { Parity::Even } else { Parity::Odd };
        let level = if d1[1] == Q::new(1, 2) { 1 } else { 2 };
        let d2: Vec<Q> = match parity {
            Parity::Odd => E8_HIGHEST_ROOT.iter().map(|&c| Q::new(c, 2)).collect(),
            Parity::Even => {
                let mut v = vec![Q::zero(); 8];
                v[0] = Q::new(1, 2);
                v[1] = Q::new(1, 2);
                v
            }
        };
        Ok(Self { d1: d1.to_vec(), parity, level, d2 })
    }

    /// Parse `"0,0,1/2,1/2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(|p| p.trim()).collect();
        if parts.len() != 4 {
            return Err(Error::Usage(format!("γ must have four entries, got `{s}`")));
        }
        let mut d1 = [Q::zero(); 4];
        for (i, p) in parts.iter().enumerate() {
            d1[i] = match *p {
                "0" => Q::zero(),
                "1/2" | "0.5" => Q::new(1, 2),
                _ => return Err(Error::Usage(format!("bad γ entry `{p}`"))),
            };
        }
        Self::from_d1(d1)
    }

    /// Label `"a,b,c,d"` with entries `0` or `1/2`.
    pub fn label(&self) -> String {
        self.d1.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }

    /// `d₁ + d₂` in half units.
    pub fn glue_half(&self) -> Vec<i64> {
        self.d1.iter().chain(self.d2.iter()).map(|x| (*x * 2).to_integer()).collect()
    }

    /// `q(d₁) = d₁²` (exact rational).
    pub fn d1_norm(&self) -> Q {
        let mut x = half_to_q(&self.d1.iter().map(|q| (*q * 2).to_integer()).collect::<Vec<_>>());
        x.extend(vec![Q::zero(); 8]);
        pair_amb(&x, &x)
    }
}

/// The fifteen classes: six odd (level-1 then level-2 representatives) and the
/// nine even ones in lexicographic order.
pub fn gamma_classes() -> Vec<GammaClass> {
    let h = Q::new(1, 2);
    let z = Q::zero();
    let odd = [[h, h, h, z], [h, h, z, z], [h, h, z, h], [z, h, h, h], [z, z, h, h], [h, z, h, h]];
    let mut out: Vec<GammaClass> = odd.iter().map(|d| GammaClass::from_d1(*d).unwrap()).collect();
    for mask in 1u32..16 {
        let d: [Q; 4] = std::array::from_fn(|i| if (mask >> (3 - i)) & 1 == 1 { h } else { z });
        let g = GammaClass::from_d1(d).unwrap();
        if g.parity == Parity::Even {
            out.push(g);
        }
    }
    out
}

/// A Gaussian rational `re + i·im` used for exact chart set-up.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Cq {
    re: Q,
    im: Q,
}

impl Cq {
    fn new(re: Q, im: Q) -> Self {
        Self { re, im }
    }
    fn real(re: Q) -> Self {
        Self { re, im: Q::zero() }
    }
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
    fn scale(self, k: Q) -> Self {
        Self::new(self.re * k, self.im * k)
    }
    fn div(self, o: Self) -> Self {
        let d = o.re * o.re + o.im * o.im;
        Self::new((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)
    }
}

fn pair_cq(x: &[Cq], y: &[Q]) -> Cq {
    let re: Vec<Q> = x.iter().map(|c| c.re).collect();
    let im: Vec<Q> = x.iter().map(|c| c.im).collect();
    Cq::new(pair_amb(&re, y), pair_amb(&im, y))
}

/// `ω(τ,τ′)` in ambient coordinates (exact).
fn omega_cq(t: Cq, tp: Cq) -> Vec<Cq> {
    let mut w = vec![Cq::real(Q::zero()); AMB];
    w[0] = t.mul(tp).scale(Q::new(-1, 2));
    w[1] = Cq::real(Q::new(1, 2));
    w[2] = t.scale(Q::new(1, 2));
    w[3] = tp.scale(Q::new(1, 2));
    w
}

/// `ω(τ,τ′)` in ambient coordinates (floating point).
pub fn omega(t: Complex64, tp: Complex64) -> Vec<Complex64> {
    let mut w = vec![Complex64::new(0.0, 0.0); AMB];
    w[0] = -t * tp * 0.5;
    w[1] = Complex64::new(0.5, 0.0);
    w[2] = t * 0.5;
    w[3] = tp * 0.5;
    w
}

/// Affine data of the chart for the standard cusp: `z_E = τ + σ_E`,
/// `z_F = τ′ + σ_F`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StandardShift {
    #[serde(serialize_with = "ser_q")]
    pub sigma_e: Q,
    #[serde(serialize_with = "ser_q")]
    pub sigma_f: Q,
}

fn ser_q<S: serde::Serializer>(v: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// A tube-domain chart of `Λ_γ` at a primitive isotropic `v₂ ∈ K`.
#[derive(Clone, Debug)]
pub struct TubeChart {
    pub level: i64,
    /// `v₂`, `v₂′` in half units.
    pub v_half: Vec<i64>,
    pub vp_half: Vec<i64>,
    /// Basis of `M = v₂^⊥ ∩ v₂′^⊥ ∩ Λ_γ` (rows, half units).
    pub m_basis_half: IMat,
    pub m_gram: IMat,
    /// Isotropic basis `E, F` of `P = K⊗ℚ ∩ M⊗ℚ` with `Im u = y_E E + y_F F`, `y_E, y_F > 0`.
    pub e_amb: Vec<Q>,
    pub f_amb: Vec<Q>,
    pub e: Vec<Q>,
    pub f: Vec<Q>,
    pub kappa: Q,
    /// Constant real part of `u`, orthogonal to `P` (M coordinates).
    pub c: Vec<Q>,
    /// Present for the standard cusp `v₂ = v`.
    pub standard: Option<StandardShift>,
    /// Frame: isotropic `ρ, ρ′ ∈ M` with `⟨ρ,ρ′⟩ = 2/ℓ`, both in the closed cone.
    pub rho: Vec<i64>,
    pub rho_prime: Vec<i64>,
}

/// Chart coordinates of a point: `u = z_E E + z_F F + C`, and the homogeneity
/// factor `⟨ω, v₂⟩` relating the chart value to `Φ_γ(τ,τ′)`.
#[derive(Clone, Copy, Debug)]
pub struct ChartPoint {
    pub z_e: Complex64,
    pub z_f: Complex64,
    pub scale: Complex64,
}

impl ChartPoint {
    /// `⟨Im u, Im u⟩ = 2κ·Im z_E·Im z_F`.
    pub fn im_norm(&self, kappa: Q) -> f64 {
        2.0 * kappa.to_f64().unwrap() * self.z_e.im * self.z_f.im
    }
}

/// Tube-domain point in `M ⊗ ℂ`.
#[derive(Clone, Debug)]
pub struct PeriodPoint {
    pub coords: Vec<Complex64>,
    pub im_norm: f64,
}

impl TubeChart {
    /// Build a chart at `v₂` (half units), searching for a partner if none is
    /// supplied.
    pub fn new(basis_half: &IMat, v_half: &[i64], vp_half: Option<&[i64]>, gamma: &GammaClass) -> Result<Self> {
        let level = level_in(basis_half, v_half)?;
        let vp_half: Vec<i64> = match vp_half {
            Some(v) => v.to_vec(),
            None => find_partner(basis_half, v_half, level, gamma)?,
        };
        check_partner(basis_half, v_half, &vp_half, level)?;
        // M = integer kernel of the pairing map against v₂, v₂′.
        let pv: Vec<i64> = basis_half.iter().map(|b| pair_half(b, v_half).to_integer()).collect();
        let pvp: Vec<i64> = basis_half.iter().map(|b| pair_half(b, &vp_half).to_integer()).collect();
        let ker = kernel(&[pv, pvp]);
        if ker.len() != 10 {
            return Err(Error::FrameSearch("M has wrong rank".into()));
        }
        // LLL-reduce M with respect to a positive majorant for readable bases.
        let m_basis_half = intmat::mat_mul(&ker, basis_half);
        let m_gram: IMat = m_basis_half
            .iter()
            .map(|x| m_basis_half.iter().map(|y| pair_half(x, y).to_integer()).collect())
            .collect();
        let m_basis_q: QMat = m_basis_half.iter().map(|r| half_to_q(r)).collect();
        let to_m = |x: &[Q]| -> Result<Vec<Q>> {
            solve_left(&m_basis_q, x).ok_or_else(|| Error::FrameSearch("vector not in M⊗ℚ".into()))
        };

        let s = if level == 1 { Q::one() } else { -Q::one() };
        let v_q = half_to_q(v_half);
        let vp_q = half_to_q(&vp_half);
        let lq = Q::from(level);
        let u_exact = |t: Cq, tp: Cq| -> Vec<Cq> {
            let w = omega_cq(t, tp);
            let sc = pair_cq(&w, &v_q);
            let z: Vec<Cq> = w.iter().map(|c| c.div(sc)).collect();
            let alpha = pair_cq(&z, &vp_q).scale(Q::one() / lq);
            (0..AMB)
                .map(|i| {
                    z[i].sub(alpha.mul(Cq::real(v_q[i]))).sub(Cq::real(vp_q[i] / lq)).scale(s)
                })
                .collect()
        };

        let is_standard = v_half == [2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0];
        let (e_amb, f_amb) = if is_standard {
            let z = Cq::real(Q::zero());
            let o = Cq::real(Q::one());
            let u00 = u_exact(z, z);
            let u10 = u_exact(o, z);
            let u01 = u_exact(z, o);
            let e: Vec<Q> = (0..AMB).map(|i| u10[i].re - u00[i].re).collect();
            let f: Vec<Q> = (0..AMB).map(|i| u01[i].re - u00[i].re).collect();
            (e, f)
        } else {
            isotropic_plane_basis(&v_q, &vp_q)?
        };
        let (mut e_amb, mut f_amb) = (e_amb, f_amb);
        let mut kappa = pair_amb(&e_amb, &f_amb);
        if kappa.is_zero() {
            return Err(Error::FrameSearch("degenerate isotropic plane".into()));
        }
        if kappa.is_negative() {
            f_amb = f_amb.iter().map(|x| -*x).collect();
            kappa = -kappa;
        }
        // Orientation from a reference point.
        let refp = (Cq::new(Q::zero(), Q::from(2)), Cq::new(Q::new(1, 3), Q::from(3)));
        let u_ref = u_exact(refp.0, refp.1);
        let yim: Vec<Q> = u_ref.iter().map(|c| c.im).collect();
        let y_e = pair_amb(&yim, &f_amb) / kappa;
        let y_f = pair_amb(&yim, &e_amb) / kappa;
        if y_e.is_negative() && y_f.is_negative() {
            if is_standard {
                return Err(Error::ConeViolation("standard chart orientation".into()));
            }
            e_amb = e_amb.iter().map(|x| -*x).collect();
            f_amb = f_amb.iter().map(|x| -*x).collect();
        } else if !(y_e.is_positive() && y_f.is_positive()) {
            return Err(Error::ConeViolation("Im u outside the quadrant of the isotropic basis".into()));
        }
        // Constant part orthogonal to P, checked at two reference points.
        let c_at = |u: &[Cq]| -> Result<Vec<Q>> {
            let ze = pair_cq(u, &f_amb).scale(Q::one() / kappa);
            let zf = pair_cq(u, &e_amb).scale(Q::one() / kappa);
            let c: Vec<Cq> = (0..AMB)
                .map(|i| u[i].sub(ze.mul(Cq::real(e_amb[i]))).sub(zf.mul(Cq::real(f_amb[i]))))
                .collect();
            if c.iter().any(|x| !x.im.is_zero()) {
                return Err(Error::FrameSearch("constant part is not real".into()));
            }
            Ok(c.iter().map(|x| x.re).collect())
        };
        let c1 = c_at(&u_ref)?;
        let c2 = c_at(&u_exact(Cq::new(Q::new(-1, 2), Q::new(5, 4)), Cq::new(Q::new(2, 7), Q::new(3, 2))))?;
        if c1 != c2 {
            return Err(Error::FrameSearch("constant part depends on the point".into()));
        }
        let standard = if is_standard {
            let z = Cq::real(Q::zero());
            let u00: Vec<Q> = u_exact(z, z).iter().map(|c| c.re).collect();
            Some(StandardShift {
                sigma_e: pair_amb(&u00, &f_amb) / kappa,
                sigma_f: pair_amb(&u00, &e_amb) / kappa,
            })
        } else {
            None
        };
        let e = to_m(&e_amb)?;
        let f = to_m(&f_amb)?;
        let c = to_m(&c1)?;
        let mut chart = TubeChart {
            level,
            v_half: v_half.to_vec(),
            vp_half,
            m_basis_half,
            m_gram,
            e_amb,
            f_amb,
            e,
            f,
            kappa,
            c,
            standard,
            rho: Vec::new(),
            rho_prime: Vec::new(),
        };
        let (rho, rho_prime) = chart.find_frame()?;
        chart.rho = rho;
        chart.rho_prime = rho_prime;
        Ok(chart)
    }

    /// `M` as a [`QuadLattice`] with its ambient embedding.
    pub fn m_lattice(&self) -> QuadLattice {
        QuadLattice {
            name: "M".into(),
            gram: self.m_gram.iter().map(|r| r.iter().map(|&x| Q::from(x)).collect()).collect(),
            basis_in_ambient: Some(self.m_basis_half.iter().map(|r| half_to_q(r)).collect()),
        }
    }

    /// Pairing on `M` of rational coordinate vectors.
    pub fn pair_m(&self, x: &[Q], y: &[Q]) -> Q {
        intmat::bilinear_q(&self.m_gram, x, y)
    }

    /// Pairing on `M` of an integer and a rational vector.
    pub fn pair_m_iq(&self, x: &[i64], y: &[Q]) -> Q {
        let xq: Vec<Q> = x.iter().map(|&a| Q::from(a)).collect();
        self.pair_m(&xq, y)
    }

    fn find_frame(&self) -> Result<(Vec<i64>, Vec<i64>)> {
        let target_level = if self.level == 1 { 2 } else { 1 };
        let m = self.m_lattice();
        let h = RationalVector { coords: self.e.iter().zip(&self.f).map(|(a, b)| *a + *b).collect() };
        let mut hmax = Q::from(2);
        while hmax <= Q::from(512) {
            let cands = enumerate_vectors(&m, Q::zero(), Q::zero(), &h, Q::zero(), hmax)?;
            for c in cands {
                if gcd_slice(&c.coords) != 1 {
                    continue;
                }
                if self.pair_m_iq(&c.coords, &self.e).is_negative() || self.pair_m_iq(&c.coords, &self.f).is_negative() {
                    continue;
                }
                let gv: Vec<i64> = (0..10).map(|i| (0..10).map(|j| self.m_gram[i][j] * c.coords[j]).sum()).collect();
                if gcd_slice(&gv) != target_level {
                    continue;
                }
                let x = solve_pairing(&gv, target_level)?;
                let x2 = intmat::bilinear(&self.m_gram, &x, &x) as i64;
                if x2 % (2 * target_level) != 0 {
                    continue;
                }
                let k = x2 / (2 * target_level);
                let rp: Vec<i64> = x.iter().zip(&c.coords).map(|(a, b)| a - k * b).collect();
                return Ok((c.coords, rp));
            }
            hmax *= 2;
        }
        Err(Error::FrameSearch("no isotropic frame vector found".into()))
    }

    /// Replace the frame by explicit ambient vectors (half units).
    pub fn set_frame_ambient(&mut self, rho_half: &[i64], rho_prime_half: &[i64]) -> Result<()> {
        let to_m_int = |x: &[i64]| -> Result<Vec<i64>> {
            intmat::solve_left_int(&self.m_basis_half, &x.iter().map(|&a| Q::from(a)).collect::<Vec<_>>())
                .ok_or_else(|| Error::FrameSearch("frame vector not in M".into()))
        };
        self.rho = to_m_int(rho_half)?;
        self.rho_prime = to_m_int(rho_prime_half)?;
        Ok(())
    }

    /// Chart coordinates of `(τ, τ′)`.
    pub fn point(&self, t: Complex64, tp: Complex64) -> Result<ChartPoint> {
        if !(t.im > 0.0 && tp.im > 0.0) || !t.is_finite() || !tp.is_finite() {
            return Err(Error::InvalidInput("τ, τ′ must lie in the upper half-plane".into()));
        }
        let w = omega(t, tp);
        let v = q_to_c(&half_to_q(&self.v_half));
        let vp = q_to_c(&half_to_q(&self.vp_half));
        let scale = pair_amb_c(&w, &v);
        let z: Vec<Complex64> = w.iter().map(|c| c / scale).collect();
        let l = self.level as f64;
        let alpha = pair_amb_c(&z, &vp) / l;
        let s = if self.level == 1 { 1.0 } else { -1.0 };
        let u: Vec<Complex64> = (0..AMB).map(|i| (z[i] - alpha * v[i] - vp[i] / l) * s).collect();
        let k = self.kappa.to_f64().unwrap();
        let z_e = pair_amb_c(&u, &q_to_c(&self.f_amb)) / k;
        let z_f = pair_amb_c(&u, &q_to_c(&self.e_amb)) / k;
        if !(z_e.im > 0.0 && z_f.im > 0.0) {
            return Err(Error::ConeViolation("Im u outside the positive cone".into()));
        }
        Ok(ChartPoint { z_e, z_f, scale })
    }

    /// Full period point in `M` coordinates.
    pub fn period_point(&self, t: Complex64, tp: Complex64) -> Result<PeriodPoint> {
        let p = self.point(t, tp)?;
        let coords: Vec<Complex64> = (0..10)
            .map(|i| {
                p.z_e * self.e[i].to_f64().unwrap()
                    + p.z_f * self.f[i].to_f64().unwrap()
                    + self.c[i].to_f64().unwrap()
            })
            .collect();
        Ok(PeriodPoint { coords, im_norm: p.im_norm(self.kappa) })
    }
}

/// Integer `x` with `gv · x = target` (where `gcd(gv) = target`).
fn solve_pairing(gv: &[i64], target: i64) -> Result<Vec<i64>> {
    let mut x = vec![0i64; gv.len()];
    let mut g: i128 = 0;
    for (i, &a) in gv.iter().enumerate() {
        if a == 0 {
            continue;
        }
        if g == 0 {
            g = a as i128;
            x[i] = 1;
            continue;
        }
        let (d, s, t) = ext_gcd(g, a as i128);
        for xj in x.iter_mut() {
            *xj = (*xj as i128 * s) as i64;
        }
        x[i] = t as i64;
        g = d;
    }
    if g < 0 {
        for xj in x.iter_mut() {
            *xj = -*xj;
        }
        g = -g;
    }
    if g != target as i128 {
        return Err(Error::FrameSearch("pairing gcd mismatch".into()));
    }
    Ok(x)
}

/// Level of a primitive isotropic ambient vector in the lattice with the given basis.
pub fn level_in(basis_half: &IMat, v_half: &[i64]) -> Result<i64> {
    let coords = intmat::solve_left_int(basis_half, &v_half.iter().map(|&a| Q::from(a)).collect::<Vec<_>>())
        .ok_or_else(|| Error::InvalidLattice("vector not in Λ_γ".into()))?;
    if gcd_slice(&coords) != 1 {
        return Err(Error::InvalidLattice("vector not primitive in Λ_γ".into()));
    }
    if !pair_half(v_half, v_half).is_zero() {
        return Err(Error::InvalidLattice("vector not isotropic".into()));
    }
    let p: Vec<i64> = basis_half.iter().map(|b| pair_half(b, v_half).to_integer()).collect();
    Ok(gcd_slice(&p))
}

fn check_partner(basis_half: &IMat, v: &[i64], vp: &[i64], level: i64) -> Result<()> {
    if pair_half(v, vp) != Q::from(level) {
        return Err(Error::FrameSearch("⟨v,v′⟩ ≠ ℓ".into()));
    }
    if level_in(basis_half, vp)? != level {
        return Err(Error::FrameSearch("partner has wrong level".into()));
    }
    Ok(())
}

/// Deterministic partner search: `K`-part in half units with entries in
/// `[−6, 6]` ordered by (max |entry|, lex), `E8` part in `{0, ±d₂}` or one
/// simple root away from it.
fn find_partner(basis_half: &IMat, v: &[i64], level: i64, gamma: &GammaClass) -> Result<Vec<i64>> {
    let d2: Vec<i64> = gamma.d2.iter().map(|x| (*x * 2).to_integer()).collect();
    // E8 parts: {0, ±d₂}, then the same shifted by ±α_i.
    let mut e_parts: Vec<Vec<i64>> = vec![vec![0; 8], d2.clone(), d2.iter().map(|x| -x).collect()];
    for base in [vec![0; 8], d2.clone(), d2.iter().map(|x| -x).collect::<Vec<i64>>()] {
        for i in 0..8 {
            for sgn in [2i64, -2] {
                let mut x = base.clone();
                x[i] += sgn;
                e_parts.push(x);
            }
        }
    }
    let mut ks: Vec<[i64; 4]> = Vec::new();
    let r = 6i64;
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                for d in -r..=r {
                    ks.push([a, b, c, d]);
                }
            }
        }
    }
    ks.sort_by_key(|k| (k.iter().map(|x| x.abs()).max().unwrap(), *k));
    for k in &ks {
        for e in &e_parts {
            let mut x: Vec<i64> = k.to_vec();
            x.extend(e.iter().copied());
            if !pair_half(&x, &x).is_zero() || pair_half(v, &x) != Q::from(level) {
                continue;
            }
            if check_partner(basis_half, v, &x, level).is_ok() {
                return Ok(x);
            }
        }
    }
    Err(Error::FrameSearch("no isotropic partner found".into()))
}

/// Isotropic basis of `P = K⊗ℚ ∩ v^⊥ ∩ v′^⊥` (ambient coordinates).
fn isotropic_plane_basis(v: &[Q], vp: &[Q]) -> Result<(Vec<Q>, Vec<Q>)> {
    // Pairings with K-basis vectors e_i (ambient actual coordinates).
    let row = |w: &[Q]| -> Vec<Q> {
        (0..4)
            .map(|i| {
                let mut ei = vec![Q::zero(); AMB];
                ei[i] = Q::one();
                pair_amb(&ei, w)
            })
            .collect()
    };
    let rows = [row(v), row(vp)];
    let d = denom_lcm(&rows[0]).max(1) * denom_lcm(&rows[1]).max(1);
    let ri: IMat = rows.iter().map(|r| r.iter().map(|x| (*x * d).to_integer()).collect()).collect();
    let ker = kernel(&ri);
    if ker.len() != 2 {
        return Err(Error::FrameSearch("P is not a plane".into()));
    }
    let emb = |k: &[i64]| -> Vec<Q> {
        let mut x = vec![Q::zero(); AMB];
        for i in 0..4 {
            x[i] = Q::from(k[i]);
        }
        x
    };
    let p1 = emb(&ker[0]);
    let p2 = emb(&ker[1]);
    let (a, b, c) = (pair_amb(&p1, &p1), pair_amb(&p1, &p2), pair_amb(&p2, &p2));
    // Roots of a·s² + 2b·s·t + c·t² = 0.
    let comb = |s: Q, t: Q| -> Vec<Q> { (0..AMB).map(|i| p1[i] * s + p2[i] * t).collect() };
    let disc = b * b - a * c;
    let sq = rational_sqrt(disc).ok_or_else(|| Error::FrameSearch("P has irrational isotropic lines".into()))?;
    let (e, f) = if a.is_zero() {
        // p1 isotropic; the other root: 2b·s + c·t = 0.
        (p1.clone(), comb(-c, Q::from(2) * b))
    } else {
        (comb(-b + sq, a), comb(-b - sq, a))
    };
    Ok((primitive_q(&e), primitive_q(&f)))
}

fn rational_sqrt(x: Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let isqrt = |n: i64| -> Option<i64> {
        let r = (n as f64).sqrt().round() as i64;
        (r - 1..=r + 1).find(|&c| c >= 0 && c * c == n)
    };
    Some(Q::new(isqrt(*x.numer())?, isqrt(*x.denom())?))
}

/// Scale a rational vector so that its half-unit entries are coprime integers.
fn primitive_q(x: &[Q]) -> Vec<Q> {
    let d = denom_lcm(x) * 2;
    let xi: Vec<i64> = x.iter().map(|a| (*a * d).to_integer()).collect();
    let g = gcd_slice(&xi).max(1);
    xi.iter().map(|&a| Q::new(a / g, 2)).collect()
}

/// Explicit frame data for the two level-2 odd classes.
#[derive(Clone, Debug, Serialize)]
pub struct ExplicitFrame {
    #[serde(serialize_with = "ser_qs")]
    pub w: Vec<Q>,
    #[serde(serialize_with = "ser_qs")]
    pub w_prime: Vec<Q>,
    #[serde(serialize_with = "ser_qs")]
    pub r: Vec<Q>,
}

/// `Λ_γ` with its standard chart.
#[derive(Clone, Debug)]
pub struct LambdaGamma {
    pub gamma: GammaClass,
    pub basis_half: IMat,
    pub lattice: QuadLattice,
    pub chart: TubeChart,
    pub explicit: Option<ExplicitFrame>,
    reduced: Arc<Mutex<Vec<(Vec<i64>, Arc<TubeChart>)>>>,
}

/// Basis (rows, half units) of `Λ_γ = ℤ(d₁+d₂) + K ⊕ E8(2)`.
pub fn lambda_gamma_basis(g: &GammaClass) -> IMat {
    let mut gens: IMat = vec![g.glue_half()];
    for i in 0..AMB {
        gens.push((0..AMB).map(|j| if i == j { 2 } else { 0 }).collect());
    }
    row_basis(&gens)
}

/// Build `Λ_γ`, its standard chart at `v = (1,0,0,0|0)` and the frame.
pub fn build_lambda_gamma(g: &GammaClass) -> Result<LambdaGamma> {
    let basis_half = lambda_gamma_basis(g);
    let gram: QMat = basis_half
        .iter()
        .map(|x| basis_half.iter().map(|y| pair_half(x, y)).collect())
        .collect();
    let lattice = QuadLattice {
        name: format!("Lambda_gamma({})", g.label()),
        gram,
        basis_in_ambient: Some(basis_half.iter().map(|r| half_to_q(r)).collect()),
    };
    let v = vec![2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0];
    let h = Q::new(1, 2);
    let z = Q::zero();
    let explicit_vp: Option<Vec<i64>> = if g.parity == Parity::Odd && g.level == 2 {
        if g.d1 == [z, z, h, h] {
            Some(vec![0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0])
        } else {
            Some(vec![0, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0])
        }
    } else {
        None
    };
    let mut chart = TubeChart::new(&basis_half, &v, explicit_vp.as_deref(), g)?;
    let mut explicit = None;
    if let Some(_) = explicit_vp {
        let w = vec![0, 0, -2, 0];
        let wp: Vec<i64> = if g.d1 == [z, z, h, h] { vec![0, 0, 1, -1] } else { vec![1, 0, 1, -1] };
        let r: Vec<i64> = g.d2.iter().map(|x| (*x * 2).to_integer()).collect();
        let mut w_full = w.clone();
        w_full.extend(vec![0; 8]);
        let mut rho = vec![0i64; AMB];
        for i in 0..4 {
            rho[i] = w[i] + wp[i];
        }
        for i in 0..8 {
            rho[4 + i] = r[i];
        }
        chart.set_frame_ambient(&rho, &w_full)?;
        let mut wq = half_to_q(&w);
        wq.extend(vec![Q::zero(); 8]);
        let mut wpq = half_to_q(&wp);
        wpq.extend(vec![Q::zero(); 8]);
        let mut rq = vec![Q::zero(); 4];
        rq.extend(half_to_q(&r));
        explicit = Some(ExplicitFrame { w: wq, w_prime: wpq, r: rq });
    }
    Ok(LambdaGamma {
        gamma: g.clone(),
        basis_half,
        lattice,
        chart,
        explicit,
        reduced: Arc::new(Mutex::new(Vec::new())),
    })
}

/// All fifteen `Λ_γ`, built once.
pub fn all_lambda_gammas() -> &'static Vec<LambdaGamma> {
    static ALL: OnceLock<Vec<LambdaGamma>> = OnceLock::new();
    ALL.get_or_init(|| gamma_classes().iter().map(|g| build_lambda_gamma(g).expect("Λ_γ construction")).collect())
}

/// Look up the cached `Λ_γ` for a class.
pub fn lambda_gamma_for(g: &GammaClass) -> &'static LambdaGamma {
    all_lambda_gammas().iter().find(|l| l.gamma == *g).expect("known class")
}

impl LambdaGamma {
    /// Level of the standard cusp.
    pub fn level(&self) -> i64 {
        self.chart.level
    }

    /// `M_γ` of the standard chart.
    pub fn m_gamma(&self) -> QuadLattice {
        self.chart.m_lattice()
    }

    /// Period point of `(τ, τ′)` in the standard chart.
    pub fn period_point(&self, t: Complex64, tp: Complex64) -> Result<PeriodPoint> {
        self.chart.period_point(t, tp)
    }

    /// Chart at another primitive isotropic `v₂ ∈ K` (half units), cached.
    pub fn chart_at(&self, v_half: &[i64]) -> Result<Arc<TubeChart>> {
        if v_half == self.chart.v_half.as_slice() {
            return Ok(Arc::new(self.chart.clone()));
        }
        {
            let cache = self.reduced.lock().unwrap();
            if let Some((_, c)) = cache.iter().find(|(k, _)| k == v_half) {
                return Ok(c.clone());
            }
        }
        let c = Arc::new(TubeChart::new(&self.basis_half, v_half, None, &self.gamma)?);
        self.reduced.lock().unwrap().push((v_half.to_vec(), c.clone()));
        Ok(c)
    }

    /// Express an ambient half-unit vector in `Λ_γ` coordinates.
    pub fn to_coords(&self, x_half: &[i64]) -> Option<LatticeVector> {
        intmat::solve_left_int(&self.basis_half, &x_half.iter().map(|&a| Q::from(a)).collect::<Vec<_>>())
            .map(|c| LatticeVector { coords: c })
    }

    /// Odd classes: a root `δ = d₁′ − d₂` of `Λ_γ` with `δ_K² = δ_E² = −1`
    /// (ambient half units).  Even classes: `None`, after
    /// [`even_root_obstruction`] confirms no root has `δ_K² < 0`.
    pub fn odd_root_witness(&self) -> Option<Vec<i64>> {
        if self.gamma.parity == Parity::Even {
            assert!(even_root_obstruction(&self.gamma), "even class admits a root with negative K-part");
            return None;
        }
        let d1h: Vec<i64> = self.gamma.d1.iter().map(|x| (*x * 2).to_integer()).collect();
        let d2h: Vec<i64> = self.gamma.d2.iter().map(|x| (*x * 2).to_integer()).collect();
        let mut ks: Vec<[i64; 4]> = Vec::new();
        for a in -3..=3i64 {
            for b in -3..=3i64 {
                for c in -3..=3i64 {
                    for d in -3..=3i64 {
                        let k = [a, b, c, d];
                        if (0..4).all(|i| (k[i] - d1h[i]).rem_euclid(2) == 0) && a * b + c * d == -1 {
                            ks.push(k);
                        }
                    }
                }
            }
        }
        ks.sort_by_key(|k| (k.iter().map(|x| x.abs()).max().unwrap(), *k));
        let k = ks.first()?;
        let mut delta: Vec<i64> = k.to_vec();
        delta.extend(d2h.iter().map(|x| -x));
        debug_assert_eq!(pair_half(&delta, &delta), Q::from(-2));
        self.to_coords(&delta)?;
        Some(delta)
    }
}

/// Finite obstruction: no vector of `Λ_γ` of norm −2 has a `K`-component of
/// negative norm.  Uses the residues of `K`-norms mod 4 on each glue coset
/// and the largest norm attained on the matching `E8(2)` coset.
pub fn even_root_obstruction(g: &GammaClass) -> bool {
    let d1h: Vec<i64> = g.d1.iter().map(|x| (*x * 2).to_integer()).collect();
    let d2h: Vec<i64> = g.d2.iter().map(|x| (*x * 2).to_integer()).collect();
    for glue in 0..2i64 {
        // K-part norms: (glue·d1 + k)² mod 4 over k ∈ K/2K.
        let mut residues = Vec::new();
        for mask in 0..16u32 {
            let mut x = vec![0i64; AMB];
            for i in 0..4 {
                x[i] = glue * d1h[i] + 2 * i64::from((mask >> i) & 1 == 1);
            }
            let n = pair_half(&x, &x);
            residues.push(q_mod(n, 4));
        }
        // Largest E-part norm on the coset glue·d2 + E8(2).
        let e_max = if glue == 0 { Q::zero() } else { coset_max_norm_e8(&d2h) };
        for nk in [Q::from(-1), Q::from(-2), Q::new(-1, 2), Q::new(-3, 2)] {
            if !residues.contains(&q_mod(nk, 4)) {
                continue;
            }
            let ne = Q::from(-2) - nk;
            if ne <= e_max {
                return false;
            }
        }
    }
    true
}

/// Largest norm (closest to 0) on the coset `x/2 + E8(2)` for half-unit `x`.
fn coset_max_norm_e8(xh: &[i64]) -> Q {
    let g = e8_2_gram();
    let a: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|&v| -(v as f64)).collect()).collect();
    let fp = FinckePohst::new(&a).unwrap();
    let shift: Vec<f64> = xh.iter().map(|&v| v as f64 / 2.0).collect();
    let mut best: Option<Q> = None;
    fp.for_each(&shift, 8.0, &mut |y| {
        let z: Vec<i64> = y.iter().zip(xh).map(|(a, b)| 2 * a + b).collect();
        let n = Q::new(intmat::bilinear(&g, &z, &z) as i64, 4);
        if best.map_or(true, |b| n > b) {
            best = Some(n);
        }
    });
    best.unwrap_or(Q::from(-1000))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_classes() {
        let c = gamma_classes();
        assert_eq!(c.len(), 15);
        assert_eq!(c.iter().filter(|g| g.parity == Parity::Odd).count(), 6);
    }

    #[test]
    fn omega_is_isotropic_and_normalized() {
        let w = omega(Complex64::new(0.3, 1.2), Complex64::new(-0.1, 2.0));
        let v = q_to_c(&half_to_q(&[2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]));
        assert!(pair_amb_c(&w, &w).norm() < 1e-14);
        assert!((pair_amb_c(&w, &v) - 1.0).norm() < 1e-14);
    }
}
