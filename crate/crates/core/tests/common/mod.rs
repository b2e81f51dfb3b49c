//! Shared helpers for the integration tests: random Lorentzian lattices with
//! a known diagonalization, and a brute-force enumeration oracle.
#![allow(dead_code)]

use enriques_phi::lattice::intmat::{mat_mul, transpose, IMat, Q};
use enriques_phi::lattice::{LatticeVector, QuadLattice, RationalVector};
use rand::Rng;

/// A lattice `Gram = Bᵀ D B` with `D = diag(a, −b₂, …, −bₙ)`, `B` unimodular.
#[derive(Clone, Debug)]
pub struct RandomLorentzian {
    pub d: Vec<i64>,
    pub b: IMat,
    pub b_inv: IMat,
    pub gram: IMat,
    /// `h = k·B⁻¹e₁`, so `⟨x, h⟩ = k·a·(Bx)₁`.
    pub k: i64,
}

fn identity(n: usize) -> IMat {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

impl RandomLorentzian {
    pub fn sample<R: Rng>(rng: &mut R, rank: usize) -> Self {
        let mut d = vec![rng.gen_range(1..=2i64)];
        for _ in 1..rank {
            d.push(-rng.gen_range(1..=3i64));
        }
        // B = product of elementary operations; B⁻¹ tracked alongside.
        let mut b = identity(rank);
        let mut b_inv = identity(rank);
        for _ in 0..(2 * rank) {
            let i = rng.gen_range(0..rank);
            let j = rng.gen_range(0..rank);
            if i == j {
                continue;
            }
            let c = rng.gen_range(-1..=1i64);
            // row_i += c·row_j on B; column_j −= c·column_i on B⁻¹.
            for t in 0..rank {
                b[i][t] += c * b[j][t];
            }
            for row in b_inv.iter_mut() {
                row[j] -= c * row[i];
            }
        }
        let dm: IMat = (0..rank).map(|i| (0..rank).map(|j| if i == j { d[i] } else { 0 }).collect()).collect();
        let gram = mat_mul(&mat_mul(&transpose(&b), &dm), &b);
        Self { d, b, b_inv, gram, k: rng.gen_range(1..=2) }
    }

    pub fn lattice(&self) -> QuadLattice {
        QuadLattice::from_int_gram("random", self.gram.clone())
    }

    /// `h = k·B⁻¹e₁` in lattice coordinates.
    pub fn height(&self) -> RationalVector {
        RationalVector { coords: self.b_inv.iter().map(|r| Q::from(self.k * r[0])).collect() }
    }

    /// Brute force over the diagonal coordinates `y = Bx`: the height window
    /// bounds `y₁`, and then the norm window bounds the remaining `yᵢ`.
    pub fn naive(&self, norm_min: i64, norm_max: i64, h_min: i64, h_max: i64) -> Vec<Vec<i64>> {
        let n = self.d.len();
        let a = self.d[0];
        let ka = self.k * a;
        let y1_max = h_min.abs().max(h_max.abs()) / ka + 1;
        let mut out = Vec::new();
        let mut y = vec![0i64; n];
        for y1 in -y1_max..=y1_max {
            let hv = ka * y1;
            if hv <= h_min || hv > h_max {
                continue;
            }
            // Σ bᵢ yᵢ² = a y₁² − x² ≤ a y₁² − norm_min.
            let budget = a * y1 * y1 - norm_min;
            if budget < 0 {
                continue;
            }
            y[0] = y1;
            let bounds: Vec<i64> = (1..n).map(|i| ((budget / -self.d[i]) as f64).sqrt() as i64 + 1).collect();
            let mut rest: Vec<i64> = bounds.iter().map(|b| -b).collect();
            loop {
                y[1..].copy_from_slice(&rest);
                let norm: i64 = (0..n).map(|i| self.d[i] * y[i] * y[i]).sum();
                if norm >= norm_min && norm <= norm_max {
                    let x: Vec<i64> = (0..n).map(|i| (0..n).map(|j| self.b_inv[i][j] * y[j]).sum()).collect();
                    out.push(x);
                }
                let mut t = 0;
                loop {
                    if t == rest.len() {
                        break;
                    }
                    rest[t] += 1;
                    if rest[t] > bounds[t] {
                        rest[t] = -bounds[t];
                        t += 1;
                    } else {
                        break;
                    }
                }
                if t == rest.len() {
                    break;
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Coordinates of an enumeration result, sorted.
pub fn sorted_coords(v: &[LatticeVector]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = v.iter().map(|x| x.coords.clone()).collect();
    out.sort();
    out
}
