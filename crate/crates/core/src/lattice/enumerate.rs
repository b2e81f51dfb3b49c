//! Fincke–Pohst enumeration of lattice points in (shifted) ellipsoids, and the
//! height/norm-window enumeration for Lorentzian lattices built on top of it.

use super::intmat::{bilinear_q, denom_lcm, Q};
use super::{LatticeVector, QuadLattice, RationalVector};
use crate::error::{Error, Result};
use num_traits::{Signed, ToPrimitive, Zero};

/// Precomputed quadratic-form decomposition
/// `A(y) = Σ_i q_ii (y_i + Σ_{j>i} q_ij y_j)²` of a positive-definite matrix.
#[derive(Clone, Debug)]
pub struct FinckePohst {
    n: usize,
    q: Vec<Vec<f64>>,
}

impl FinckePohst {
    /// Decompose a positive-definite symmetric matrix; errors if it is not.
    pub fn new(a: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        let mut q: Vec<Vec<f64>> = a.to_vec();
        for i in 0..n {
            if !(q[i][i] > 0.0) || !q[i][i].is_finite() {
                return Err(Error::NonFiniteRegion(
                    "quadratic form is not positive definite".into(),
                ));
            }
            for j in (i + 1)..n {
                q[j][i] = q[i][j];
                q[i][j] /= q[i][i];
            }
            for k in (i + 1)..n {
                for l in k..n {
                    q[k][l] -= q[k][i] * q[i][l];
                }
            }
        }
        // Relative positivity margin: tiny pivots mean the form is degenerate.
        let scale = a.iter().enumerate().map(|(i, r)| r[i].abs()).fold(0.0f64, f64::max);
        if (0..n).any(|i| q[i][i] <= scale * 1e-12) {
            return Err(Error::NonFiniteRegion(
                "quadratic form is not positive definite".into(),
            ));
        }
        Ok(Self { n, q })
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Visit every integer `x` with `(x+s)ᵀ A (x+s) ≤ radius` (plus a small
    /// floating-point slack; callers filter exactly).
    pub fn for_each(&self, shift: &[f64], radius: f64, f: &mut dyn FnMut(&[i64])) {
        if self.n == 0 {
            if radius >= 0.0 {
                f(&[]);
            }
            return;
        }
        let slack = radius.abs() * 1e-9 + 1e-9;
        let mut x = vec![0i64; self.n];
        let mut y = vec![0f64; self.n];
        self.recurse(self.n - 1, radius + slack, shift, &mut x, &mut y, f);
    }

    /// Range of the last coordinate over the ellipsoid; used to split the
    /// enumeration into independent slices.
    pub fn top_range(&self, shift: &[f64], radius: f64) -> (i64, i64) {
        let i = self.n - 1;
        let budget = radius + radius.abs() * 1e-9 + 1e-9;
        let w = (budget.max(0.0) / self.q[i][i]).sqrt();
        ((-w - shift[i]).ceil() as i64, (w - shift[i]).floor() as i64)
    }

    /// Visit the points of the ellipsoid whose last coordinate equals `top`
    /// (statically dispatched; the hot path of the product tables).
    pub fn for_each_with_top<F: FnMut(&[i64])>(&self, shift: &[f64], radius: f64, top: i64, f: &mut F) {
        let n = self.n;
        let budget = radius + radius.abs() * 1e-9 + 1e-9;
        let i = n - 1;
        let yi = top as f64 + shift[i];
        let rest = budget - self.q[i][i] * yi * yi;
        if rest < 0.0 {
            return;
        }
        let mut x = vec![0i64; n];
        let mut y = vec![0f64; n];
        x[i] = top;
        y[i] = yi;
        if n == 1 {
            f(&x);
            return;
        }
        self.recurse_g(i - 1, rest, shift, &mut x, &mut y, f);
    }

    fn recurse_g<F: FnMut(&[i64])>(&self, i: usize, budget: f64, s: &[f64], x: &mut [i64], y: &mut [f64], f: &mut F) {
        let qi = &self.q[i];
        let mut c = 0.0;
        for j in (i + 1)..self.n {
            c -= qi[j] * y[j];
        }
        let w = (budget.max(0.0) / qi[i]).sqrt();
        let lo = (c - w - s[i]).ceil() as i64;
        let hi = (c + w - s[i]).floor() as i64;
        for xi in lo..=hi {
            let yi = xi as f64 + s[i];
            let d = yi - c;
            let rest = budget - qi[i] * d * d;
            if rest < 0.0 {
                continue;
            }
            x[i] = xi;
            y[i] = yi;
            if i == 0 {
                f(x);
            } else {
                self.recurse_g(i - 1, rest, s, x, y, f);
            }
        }
    }

    fn recurse(
        &self,
        i: usize,
        budget: f64,
        s: &[f64],
        x: &mut [i64],
        y: &mut [f64],
        f: &mut dyn FnMut(&[i64]),
    ) {
        let qi = &self.q[i];
        let mut c = 0.0;
        for j in (i + 1)..self.n {
            c -= qi[j] * y[j];
        }
        // y_i = x_i + s_i with (y_i − c)² q_ii ≤ budget.
        let w = (budget.max(0.0) / qi[i]).sqrt();
        let lo = (c - w - s[i]).ceil() as i64;
        let hi = (c + w - s[i]).floor() as i64;
        for xi in lo..=hi {
            let yi = xi as f64 + s[i];
            let d = yi - c;
            let rest = budget - qi[i] * d * d;
            if rest < 0.0 {
                continue;
            }
            x[i] = xi;
            y[i] = yi;
            if i == 0 {
                f(x);
            } else {
                self.recurse(i - 1, rest, s, x, y, f);
            }
        }
    }
}

/// All `λ ∈ L` with `norm_min ≤ λ² ≤ norm_max` and `h_min < ⟨λ, h⟩ ≤ h_max`,
/// sorted by `(⟨λ,h⟩, coordinates)`.
///
/// `L` must have signature `(1, r−1)` and `h` must have positive norm; the
/// search runs over the positive-definite majorant
/// `P(x) = 2⟨x,h⟩²/h² − x²`, which is bounded on the requested window.
pub fn enumerate_vectors(
    lat: &QuadLattice,
    norm_min: Q,
    norm_max: Q,
    height: &RationalVector,
    h_min: Q,
    h_max: Q,
) -> Result<Vec<LatticeVector>> {
    let n = lat.rank();
    if height.coords.len() != n {
        return Err(Error::InvalidLattice("height vector has wrong length".into()));
    }
    if norm_min > norm_max || h_min >= h_max {
        return Ok(Vec::new());
    }
    // Integer Gram with common denominator.
    let dg = lat.gram.iter().fold(1i64, |l, r| num_integer::lcm(l, denom_lcm(r)));
    let gi: Vec<Vec<i64>> = lat
        .gram
        .iter()
        .map(|r| r.iter().map(|x| (*x * dg).to_integer()).collect())
        .collect();
    let h = &height.coords;
    let h2 = bilinear_q(&gi, h, h) / dg;
    if !h2.is_positive() {
        return Err(Error::NonFiniteRegion("height vector has non-positive norm".into()));
    }
    // gh_i = ⟨e_i, h⟩.
    let gh: Vec<Q> = (0..n)
        .map(|i| (0..n).fold(Q::zero(), |s, j| s + h[j] * gi[i][j]) / dg)
        .collect();
    let hmax_abs = if h_min.abs() > h_max.abs() { h_min.abs() } else { h_max.abs() };
    let radius = Q::from(2) * hmax_abs * hmax_abs / h2 - norm_min;
    if radius.is_negative() {
        return Ok(Vec::new());
    }
    let h2f = h2.to_f64().unwrap();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    2.0 * gh[i].to_f64().unwrap() * gh[j].to_f64().unwrap() / h2f
                        - gi[i][j] as f64 / dg as f64
                })
                .collect()
        })
        .collect();
    let fp = FinckePohst::new(&a)?;
    // Exact filter: norms and heights scaled to integers.
    let dh = denom_lcm(&gh);
    let ghi: Vec<i64> = gh.iter().map(|x| (*x * dh).to_integer()).collect();
    let mut out: Vec<(Q, Vec<i64>)> = Vec::new();
    let zero = vec![0f64; n];
    fp.for_each(&zero, radius.to_f64().unwrap(), &mut |x: &[i64]| {
        let hv = Q::new(
            x.iter().zip(&ghi).map(|(&a, &b)| a as i128 * b as i128).sum::<i128>() as i64,
            dh,
        );
        if hv <= h_min || hv > h_max {
            return;
        }
        let nn = Q::new(super::intmat::bilinear(&gi, x, x) as i64, dg);
        if nn < norm_min || nn > norm_max {
            return;
        }
        out.push((hv, x.to_vec()));
    });
    out.sort();
    Ok(out.into_iter().map(|(_, c)| LatticeVector { coords: c }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp_counts_z2_disc() {
        let fp = FinckePohst::new(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut c = 0;
        fp.for_each(&[0.0, 0.0], 1.0, &mut |_| c += 1);
        assert_eq!(c, 5);
        let mut c = 0;
        fp.for_each(&[0.5, 0.5], 0.5, &mut |_| c += 1);
        assert_eq!(c, 4);
    }

    #[test]
    fn fp_rejects_indefinite() {
        assert!(FinckePohst::new(&[vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
    }
}
