//! Integral quadratic lattices.
//!
//! A [`QuadLattice`] is a free ℤ-module with a rational, symmetric,
//! nondegenerate Gram matrix, optionally embedded in an ambient lattice.
//! Besides the standard constructors (`U`, `U(2)`, `E8(2)`, …) this module
//! provides discriminant groups of 2-elementary lattices, Nikulin invariants,
//! characteristic vectors, isotropic levels, a small glue construction and
//! the `SL₂(ℤ)` lift to `O(U ⊕ U)`.
//!
//! E₈ conventions: Bourbaki node numbering, edges 1–3, 3–4, 4–5, 5–6, 6–7,
//! 7–8 and 2–4.  `E8(2)` has Gram matrix `−2·C` with `C` the Cartan matrix, so
//! it is negative definite with all norms in `4ℤ`.

pub mod enumerate;
pub mod intmat;

pub use enumerate::{enumerate_vectors, FinckePohst};
use intmat::{bilinear_q, det, inverse_q, row_basis, signature, IMat, QMat, Q};

use crate::error::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Integer coordinate vector in a lattice basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector {
    pub coords: Vec<i64>,
}

/// Rational coordinate vector in a lattice basis (an element of `L ⊗ ℚ`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalVector {
    pub coords: Vec<Q>,
}

impl RationalVector {
    /// From integer coordinates.
    pub fn from_ints(v: &[i64]) -> Self {
        Self { coords: v.iter().map(|&x| Q::from(x)).collect() }
    }
}

impl From<&LatticeVector> for RationalVector {
    fn from(v: &LatticeVector) -> Self {
        Self::from_ints(&v.coords)
    }
}

/// A lattice with rational Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadLattice {
    pub name: String,
    pub gram: QMat,
    /// Basis vectors as rows in the coordinates of an ambient lattice.
    pub basis_in_ambient: Option<QMat>,
}

/// E₈ Cartan matrix in Bourbaki numbering.
pub fn e8_cartan() -> IMat {
    let edges = [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)];
    let mut c = vec![vec![0i64; 8]; 8];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = 2;
    }
    for &(a, b) in &edges {
        c[a - 1][b - 1] = -1;
        c[b - 1][a - 1] = -1;
    }
    c
}

/// Coefficients of the highest root of E₈ in the simple-root basis.
pub const E8_HIGHEST_ROOT: [i64; 8] = [2, 3, 4, 6, 5, 4, 3, 2];

fn qmat(m: &[Vec<i64>]) -> QMat {
    m.iter().map(|r| r.iter().map(|&x| Q::from(x)).collect()).collect()
}

/// Block-diagonal sum of integer matrices.
pub fn block_diag(blocks: &[IMat]) -> IMat {
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    let mut out = vec![vec![0i64; n]; n];
    let mut off = 0;
    for b in blocks {
        for (i, r) in b.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                out[off + i][off + j] = x;
            }
        }
        off += b.len();
    }
    out
}

/// Gram of the hyperbolic plane scaled by `m`.
pub fn u_gram(m: i64) -> IMat {
    vec![vec![0, m], vec![m, 0]]
}

/// Gram of `E8(2)`.
pub fn e8_2_gram() -> IMat {
    e8_cartan().iter().map(|r| r.iter().map(|&x| -2 * x).collect()).collect()
}

impl QuadLattice {
    /// Lattice from an integer Gram matrix.
    pub fn from_int_gram(name: &str, g: IMat) -> Self {
        Self { name: name.to_string(), gram: qmat(&g), basis_in_ambient: None }
    }

    /// Rank.
    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    /// Integer Gram matrix if the lattice is integral.
    pub fn gram_int(&self) -> Option<IMat> {
        self.gram
            .iter()
            .map(|r| r.iter().map(|x| if x.is_integer() { Some(x.to_integer()) } else { None }).collect())
            .collect()
    }

    /// Pairing of rational vectors.
    pub fn pair(&self, x: &[Q], y: &[Q]) -> Q {
        let mut s = Q::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                s += *xi * self.gram[i][j] * *yj;
            }
        }
        s
    }

    /// Pairing of integer vectors.
    pub fn pair_int(&self, x: &LatticeVector, y: &LatticeVector) -> Q {
        self.pair(&RationalVector::from(x).coords, &RationalVector::from(y).coords)
    }

    /// Norm `x²`.
    pub fn norm(&self, x: &LatticeVector) -> Q {
        self.pair_int(x, x)
    }

    /// Determinant of the Gram matrix.
    pub fn det(&self) -> Q {
        let d = self.gram.iter().fold(1i64, |l, r| l.lcm(&intmat::denom_lcm(r)));
        let gi: IMat = self.gram.iter().map(|r| r.iter().map(|x| (*x * d).to_integer()).collect()).collect();
        let num = det(&gi).to_i64().expect("determinant overflow");
        Q::new(num, d.pow(self.rank() as u32))
    }

    /// Signature `(n₊, n₋)`.
    pub fn signature(&self) -> (usize, usize) {
        signature(&self.gram)
    }

    /// True if every diagonal entry is an even integer and the form is integral.
    pub fn is_even(&self) -> bool {
        match self.gram_int() {
            Some(g) => (0..g.len()).all(|i| g[i][i] % 2 == 0),
            None => false,
        }
    }

    /// Dual basis (rows): the vectors `e_i^∨` with `⟨e_i^∨, e_j⟩ = δ_ij`, in
    /// the coordinates of this basis.
    pub fn dual_basis(&self) -> QMat {
        inverse_q(&self.gram).expect("degenerate Gram matrix")
    }

    /// True if `2 L^∨ ⊂ L`, i.e. the discriminant group is 2-elementary.
    pub fn is_two_elementary(&self) -> bool {
        self.gram_int().is_some()
            && self.dual_basis().iter().flatten().all(|x| (*x * 2).is_integer())
    }

    /// Verify `B · G_ambient · Bᵀ = gram` for the stored embedding.
    pub fn check_embedding(&self, ambient: &QuadLattice) -> bool {
        let Some(b) = &self.basis_in_ambient else { return true };
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                if ambient.pair(&b[i], &b[j]) != self.gram[i][j] {
                    return false;
                }
            }
        }
        true
    }

    /// JSON form `{name, gram, basis_in_ambient?}` with rationals as strings.
    pub fn to_json(&self) -> serde_json::Value {
        let m = |a: &QMat| -> serde_json::Value {
            a.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect()
        };
        let mut obj = serde_json::json!({ "name": self.name, "gram": m(&self.gram) });
        if let Some(b) = &self.basis_in_ambient {
            obj["basis_in_ambient"] = m(b);
        }
        obj
    }
}

/// The standard lattices by name: `U`, `U2`, `E8_2`, `K`, `Lambda`, `I29_2`.
pub fn standard_lattice(name: &str) -> Result<QuadLattice> {
    let g = match name {
        "U" => u_gram(1),
        "U2" => u_gram(2),
        "E8_2" => e8_2_gram(),
        "K" => block_diag(&[u_gram(2), u_gram(2)]),
        "Lambda" => block_diag(&[u_gram(2), u_gram(1), e8_2_gram()]),
        "I29_2" => {
            let mut d = vec![vec![0i64; 11]; 11];
            for (i, row) in d.iter_mut().enumerate() {
                row[i] = if i < 2 { 2 } else { -2 };
            }
            d
        }
        _ => return Err(Error::UnknownLattice(name.to_string())),
    };
    Ok(QuadLattice::from_int_gram(name, g))
}

/// Nikulin invariant triple of a 2-elementary lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Invariants {
    pub signature: (usize, usize),
    pub disc_rank: u32,
    pub parity: u8,
}

/// `(signature, rank of A_L, parity δ)`.
pub fn invariants(lat: &QuadLattice) -> Result<Invariants> {
    let signature = lat.signature();
    if !lat.is_two_elementary() {
        return Err(Error::NotTwoElementary);
    }
    let d = lat.det().abs();
    if !d.is_integer() {
        return Err(Error::NotTwoElementary);
    }
    let d = d.to_integer();
    if d <= 0 || (d & (d - 1)) != 0 {
        return Err(Error::NotTwoElementary);
    }
    let disc_rank = d.trailing_zeros();
    // q mod ℤ is additive on L^∨, so checking a dual basis decides parity.
    let dual = lat.dual_basis();
    let parity = u8::from(dual.iter().any(|y| !lat.pair(y, y).is_integer()));
    Ok(Invariants { signature, disc_rank, parity })
}

/// Discriminant group of a 2-elementary lattice.
#[derive(Clone, Debug)]
pub struct DiscGroup {
    pub dim: u32,
    /// Coset representatives with coordinates in `{0, 1/2}`.
    pub reps: Vec<RationalVector>,
    /// `q(x) = x² mod 2ℤ`, normalized to `[0, 2)`.
    pub qvals: Vec<Q>,
    pub parity: u8,
}

/// Maximum rank accepted by [`disc_group`] (brute force over `{0,½}^rank`).
pub const DISC_GROUP_MAX_RANK: usize = 16;

/// Reduce a rational modulo `m`, into `[0, m)`.
pub fn q_mod(x: Q, m: i64) -> Q {
    let m = Q::from(m);
    let k = (x / m).floor();
    x - k * m
}

/// Full enumeration of `A_L = L^∨/L` for a 2-elementary lattice.
pub fn disc_group(lat: &QuadLattice) -> Result<DiscGroup> {
    let n = lat.rank();
    if n > DISC_GROUP_MAX_RANK {
        return Err(Error::LimitExceeded(format!(
            "disc_group supports rank ≤ {DISC_GROUP_MAX_RANK}, got {n}"
        )));
    }
    let inv = invariants(lat)?;
    let g = lat.gram_int().ok_or(Error::NotTwoElementary)?;
    let mut reps = Vec::new();
    let mut qvals = Vec::new();
    for mask in 0u32..(1u32 << n) {
        // Bit i (from the most significant coordinate) ⇒ coordinate i is 1/2;
        // iterating masks in this order yields lexicographic order on reps.
        let bits: Vec<i64> = (0..n).map(|i| i64::from((mask >> (n - 1 - i)) & 1 == 1)).collect();
        if (0..n).all(|i| (0..n).map(|j| g[i][j] * bits[j]).sum::<i64>() % 2 == 0) {
            let y: Vec<Q> = bits.iter().map(|&b| Q::new(b, 2)).collect();
            qvals.push(q_mod(bilinear_q(&g, &y, &y), 2));
            reps.push(RationalVector { coords: y });
        }
    }
    let dim = reps.len().trailing_zeros();
    debug_assert_eq!(dim, inv.disc_rank);
    let parity = u8::from(qvals.iter().any(|q| !q.is_integer()));
    Ok(DiscGroup { dim, reps, qvals, parity })
}

/// The level `ℓ` of a primitive isotropic vector: `⟨v, L⟩ = ℓℤ`.
pub fn isotropic_level(lat: &QuadLattice, v: &LatticeVector) -> Result<i64> {
    let g = lat.gram_int().ok_or_else(|| Error::InvalidLattice("non-integral lattice".into()))?;
    if v.coords.len() != lat.rank() {
        return Err(Error::InvalidLattice("vector length mismatch".into()));
    }
    if intmat::gcd_slice(&v.coords) != 1 {
        return Err(Error::InvalidLattice("vector is not primitive".into()));
    }
    if !lat.norm(v).is_zero() {
        return Err(Error::InvalidLattice("vector is not isotropic".into()));
    }
    let pairings: Vec<i64> = (0..lat.rank())
        .map(|i| (0..lat.rank()).map(|j| g[i][j] * v.coords[j]).sum())
        .collect();
    Ok(intmat::gcd_slice(&pairings))
}

/// Characteristic vector of a 2-elementary lattice: the lexicographically
/// least `y ∈ {0,½}ⁿ ∩ L^∨` with `⟨y, x⟩ ≡ x² (mod ℤ)` for all `x ∈ L^∨`.
pub fn characteristic_vector(lat: &QuadLattice) -> Result<RationalVector> {
    let dg = disc_group(lat)?;
    let dual = lat.dual_basis();
    let targets: Vec<Q> = dual.iter().map(|x| lat.pair(x, x)).collect();
    for y in &dg.reps {
        if dual
            .iter()
            .zip(&targets)
            .all(|(x, t)| (lat.pair(&y.coords, x) - *t).is_integer())
        {
            return Ok(y.clone());
        }
    }
    Err(Error::InvalidLattice("no characteristic vector found".into()))
}

/// The glue lattice `ℤ(λ₁+λ₂) + ℤd ⊕ I₂,₉(2)` with `d² = −2`, `λ₁ = d/2` and
/// `λ₂ = (3,−1,…,−1)/2`, as a sublattice of `(ℤd ⊕ I₂,₉(2)) ⊗ ℚ`.
pub fn appendix_glue() -> QuadLattice {
    let amb = appendix_ambient();
    let n = amb.rank();
    let mut glue = vec![Q::zero(); n];
    glue[0] = Q::new(1, 2);
    glue[1] = Q::new(3, 2);
    for g in glue.iter_mut().skip(2) {
        *g = Q::new(-1, 2);
    }
    // Generators in doubled coordinates, then HNF.
    let mut gens: IMat = vec![glue.iter().map(|x| (*x * 2).to_integer()).collect()];
    for i in 0..n {
        gens.push((0..n).map(|j| if i == j { 2 } else { 0 }).collect());
    }
    let basis2 = row_basis(&gens);
    let basis: QMat = basis2.iter().map(|r| r.iter().map(|&x| Q::new(x, 2)).collect()).collect();
    let gram: QMat = basis.iter().map(|x| basis.iter().map(|y| amb.pair(x, y)).collect()).collect();
    QuadLattice { name: "glue(Zd+I29_2)".into(), gram, basis_in_ambient: Some(basis) }
}

/// The ambient `ℤd ⊕ I₂,₉(2)` with `d² = −2` (d first).
pub fn appendix_ambient() -> QuadLattice {
    let i29 = standard_lattice("I29_2").unwrap().gram_int().unwrap();
    QuadLattice::from_int_gram("Zd+I29_2", block_diag(&[vec![vec![-2]], i29]))
}

/// Index of a full-rank sublattice given by rational basis rows.
pub fn index_in(basis: &QMat) -> Q {
    let d = basis.iter().fold(1i64, |l, r| l.lcm(&intmat::denom_lcm(r)));
    let bi: IMat = basis.iter().map(|r| r.iter().map(|x| (*x * d).to_integer()).collect()).collect();
    let det_b = det(&bi).to_i64().unwrap().abs();
    Q::new(det_b, d.pow(basis.len() as u32))
}

/// Result of lifting `g ∈ SL₂(ℤ)` to `O(U ⊕ U)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sl2Lift {
    /// Columns are the images of `e, e′, f, f′` in that basis.
    pub matrix: IMat,
    pub is_isometry: bool,
    pub restricts_to_g: bool,
    pub preserves_component: bool,
}

/// Lift `g = [[a,b],[c,d]]` acting on `F = ℤe + ℤf ⊂ U ⊕ U` (basis
/// `e, e′, f, f′`, `⟨e,e′⟩ = ⟨f,f′⟩ = 1`) to the isometry
/// `e ↦ ae + cf`, `f ↦ be + df`, `e′ ↦ de′ − bf′`, `f′ ↦ −ce′ + af′`.
pub fn sl2_lift_check(g: [[i64; 2]; 2]) -> Result<Sl2Lift> {
    let [[a, b], [c, d]] = g;
    if a * d - b * c != 1 {
        return Err(Error::InvalidMatrix("g must have determinant 1".into()));
    }
    // Coordinates (e, e′, f, f′); columns are images.
    let cols: [[i64; 4]; 4] = [
        [a, 0, c, 0],  // g(e)
        [0, d, 0, -b], // g(e′)
        [b, 0, d, 0],  // g(f)
        [0, -c, 0, a], // g(f′)
    ];
    let m: IMat = (0..4).map(|i| (0..4).map(|j| cols[j][i]).collect()).collect();
    let gram = vec![vec![0, 1, 0, 0], vec![1, 0, 0, 0], vec![0, 0, 0, 1], vec![0, 0, 1, 0]];
    let mt = intmat::transpose(&m);
    let is_isometry = intmat::mat_mul(&intmat::mat_mul(&mt, &gram), &m) == gram;
    let restricts_to_g = cols[0] == [a, 0, c, 0] && cols[2] == [b, 0, d, 0];
    // Witness point X = e + e′ + i f + i f′ (isotropic: 1·1 + i·i = 0).
    let x = [(1.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.0, 1.0)];
    let mut img = [(0.0f64, 0.0f64); 4];
    for (i, im) in img.iter_mut().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            im.0 += m[i][j] as f64 * xj.0;
            im.1 += m[i][j] as f64 * xj.1;
        }
    }
    let div_im = |num: (f64, f64), den: (f64, f64)| -> f64 {
        // Im(num/den)
        (num.1 * den.0 - num.0 * den.1) / (den.0 * den.0 + den.1 * den.1)
    };
    let preserves_component = div_im(img[2], img[0]) > 0.0 && div_im(img[3], img[0]) > 0.0;
    Ok(Sl2Lift { matrix: m, is_isometry, restricts_to_g, preserves_component })
}

/// True if the lattice contains a vector of norm −2 in the box `|x_i| ≤ bound`
/// (used for small negative-definite lattices and finite witnesses).
pub fn has_root_in_box(lat: &QuadLattice, bound: i64) -> bool {
    let n = lat.rank();
    let mut x = vec![-bound; n];
    loop {
        let v = LatticeVector { coords: x.clone() };
        if lat.norm(&v) == Q::from(-2) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == n {
                return false;
            }
            x[i] += 1;
            if x[i] > bound {
                x[i] = -bound;
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// All vectors of a negative-definite integral lattice with `−x² ≤ radius`
/// (exact filter after a Fincke–Pohst walk).
pub fn short_vectors_negdef(lat: &QuadLattice, radius: i64) -> Result<Vec<LatticeVector>> {
    let g = lat.gram_int().ok_or_else(|| Error::InvalidLattice("non-integral".into()))?;
    let a: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|&x| -(x as f64)).collect()).collect();
    let fp = FinckePohst::new(&a)?;
    let mut out = Vec::new();
    fp.for_each(&vec![0.0; g.len()], radius as f64, &mut |x| {
        if -intmat::bilinear(&g, x, x) <= radius as i128 {
            out.push(LatticeVector { coords: x.to_vec() });
        }
    });
    out.sort();
    Ok(out)
}

/// Convenience: `Q` one.
pub fn q1() -> Q {
    Q::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use intmat::congruence;

    #[test]
    fn standard_dets() {
        assert_eq!(standard_lattice("U").unwrap().det(), Q::from(-1));
        assert_eq!(standard_lattice("K").unwrap().det(), Q::from(16));
        assert_eq!(standard_lattice("Lambda").unwrap().signature(), (2, 10));
    }

    #[test]
    fn e8_cartan_det_is_one() {
        assert_eq!(det(&e8_cartan()), num_bigint::BigInt::from(1));
    }

    #[test]
    fn u2_disc_values() {
        let dg = disc_group(&standard_lattice("U2").unwrap()).unwrap();
        let mut q: Vec<Q> = dg.qvals.clone();
        q.sort();
        assert_eq!(q, vec![Q::from(0), Q::from(0), Q::from(0), Q::from(1)]);
    }

    #[test]
    fn sl2_generators_lift() {
        for g in [[[1, 0], [0, 1]], [[1, 1], [0, 1]], [[0, -1], [1, 0]]] {
            let l = sl2_lift_check(g).unwrap();
            assert!(l.is_isometry && l.restricts_to_g && l.preserves_component);
        }
        assert!(sl2_lift_check([[1, 1], [1, 1]]).is_err());
    }

    #[test]
    fn congruence_identity() {
        let g = u_gram(2);
        let id = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(congruence(&id, &g), g);
    }
}
