//! Exact integer and rational matrix helpers.
//!
//! Everything here works on small dense matrices (rank ≤ 32) so the
//! algorithms are the textbook ones: row Hermite normal form with a
//! unimodular transform, integer kernels, Bareiss determinants, and
//! Gaussian elimination over `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Small exact rational used for lattice data.
pub type Q = Ratio<i64>;

/// Integer matrix stored row-major.
pub type IMat = Vec<Vec<i64>>;

/// Rational matrix stored row-major.
pub type QMat = Vec<Vec<Q>>;

/// Extended gcd: returns `(g, x, y)` with `a x + b y = g ≥ 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Gcd of a slice of integers (0 for the empty or zero slice).
pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Least common multiple of the denominators of a rational slice.
pub fn denom_lcm(v: &[Q]) -> i64 {
    v.iter().fold(1i64, |l, x| l.lcm(x.denom()))
}

/// Row Hermite normal form with transform: returns `(h, u)` with `u · a = h`,
/// `u` unimodular, the nonzero rows of `h` in echelon form with positive
/// pivots, followed by zero rows.
pub fn hnf_with_transform(a: &[Vec<i128>]) -> (Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut h: Vec<Vec<i128>> = a.to_vec();
    let mut u: Vec<Vec<i128>> = (0..m)
        .map(|i| (0..m).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut row = 0usize;
    for col in 0..n {
        if row >= m {
            break;
        }
        // Eliminate below the pivot with gcd row operations.
        for i in (row + 1)..m {
            if h[i][col] == 0 {
                continue;
            }
            let (a0, b0) = (h[row][col], h[i][col]);
            let (g, x, y) = ext_gcd(a0, b0);
            let (p, q) = (a0 / g, b0 / g);
            for k in 0..n {
                let (r0, r1) = (h[row][k], h[i][k]);
                h[row][k] = x * r0 + y * r1;
                h[i][k] = -q * r0 + p * r1;
            }
            for k in 0..m {
                let (r0, r1) = (u[row][k], u[i][k]);
                u[row][k] = x * r0 + y * r1;
                u[i][k] = -q * r0 + p * r1;
            }
        }
        if h[row][col] == 0 {
            continue;
        }
        if h[row][col] < 0 {
            for k in 0..n {
                h[row][k] = -h[row][k];
            }
            for k in 0..m {
                u[row][k] = -u[row][k];
            }
        }
        // Reduce the entries above the pivot.
        let piv = h[row][col];
        for i in 0..row {
            let f = h[i][col].div_euclid(piv);
            if f != 0 {
                for k in 0..n {
                    h[i][k] -= f * h[row][k];
                }
                for k in 0..m {
                    u[i][k] -= f * u[row][k];
                }
            }
        }
        row += 1;
    }
    (h, u)
}

fn to_i128(a: &[Vec<i64>]) -> Vec<Vec<i128>> {
    a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect()
}

fn from_i128(a: &[i128]) -> Vec<i64> {
    a.iter()
        .map(|&x| i64::try_from(x).expect("integer matrix entry overflow"))
        .collect()
}

/// Basis (nonzero HNF rows) of the row lattice of `a`.
pub fn row_basis(a: &[Vec<i64>]) -> IMat {
    let (h, _) = hnf_with_transform(&to_i128(a));
    h.into_iter()
        .filter(|r| r.iter().any(|&x| x != 0))
        .map(|r| from_i128(&r))
        .collect()
}

/// Basis of the integer kernel `{x ∈ ℤⁿ : a·x = 0}` (rows of the result).
pub fn kernel(a: &[Vec<i64>]) -> IMat {
    let m = a.len();
    assert!(m > 0, "kernel of empty matrix");
    let n = a[0].len();
    let at: Vec<Vec<i128>> = (0..n).map(|j| (0..m).map(|i| a[i][j] as i128).collect()).collect();
    let (h, u) = hnf_with_transform(&at);
    let mut out = Vec::new();
    for i in 0..n {
        if h[i].iter().all(|&x| x == 0) {
            out.push(from_i128(&u[i]));
        }
    }
    out
}

/// Integer matrix product `a · b`.
pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> IMat {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|r| {
            (0..n)
                .map(|j| r.iter().zip(b).map(|(&x, br)| x * br[j]).sum())
                .collect()
        })
        .collect()
}

/// Transpose.
pub fn transpose<T: Clone>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// `b · g · bᵀ` for integer matrices.
pub fn congruence(b: &[Vec<i64>], g: &[Vec<i64>]) -> IMat {
    mat_mul(&mat_mul(b, g), &transpose(b))
}

/// Bilinear form `xᵀ g y` on integer vectors (accumulated in i128).
pub fn bilinear(g: &[Vec<i64>], x: &[i64], y: &[i64]) -> i128 {
    let mut s = 0i128;
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        let mut t = 0i128;
        for (j, &yj) in y.iter().enumerate() {
            t += g[i][j] as i128 * yj as i128;
        }
        s += xi as i128 * t;
    }
    s
}

/// Bilinear form on rational vectors with an integer Gram matrix.
pub fn bilinear_q(g: &[Vec<i64>], x: &[Q], y: &[Q]) -> Q {
    let mut s = Q::zero();
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        let mut t = Q::zero();
        for (j, yj) in y.iter().enumerate() {
            if g[i][j] != 0 {
                t += *yj * g[i][j];
            }
        }
        s += *xi * t;
    }
    s
}

/// Bareiss determinant of an integer matrix.
pub fn det(a: &[Vec<i64>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Convert a small rational to a big rational.
pub fn q_to_big(x: &Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

/// Convert a big rational back to a small rational (panics on overflow).
pub fn big_to_q(x: &BigRational) -> Q {
    Q::new(
        x.numer().to_i64().expect("rational numerator overflow"),
        x.denom().to_i64().expect("rational denominator overflow"),
    )
}

/// Solve `x · a = t` for a rational row vector `x`, where `a` has full row
/// rank.  Returns `None` if `t` is not in the row space.
pub fn solve_left(a: &[Vec<Q>], t: &[Q]) -> Option<Vec<Q>> {
    // Transpose to the system aᵀ xᵀ = tᵀ and eliminate.
    let k = a.len();
    let n = t.len();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|j| {
            let mut row: Vec<BigRational> = (0..k).map(|i| q_to_big(&a[i][j])).collect();
            row.push(q_to_big(&t[j]));
            row
        })
        .collect();
    let mut piv_cols = Vec::new();
    let mut r = 0usize;
    for c in 0..k {
        let Some(p) = (r..n).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..=k {
                    let v = &m[r][j] * &f;
                    m[i][j] -= v;
                }
            }
        }
        piv_cols.push(c);
        r += 1;
    }
    // Consistency check on the remaining rows.
    for row in m.iter().skip(r) {
        if !row[k].is_zero() {
            return None;
        }
    }
    let mut x = vec![Q::zero(); k];
    for (i, &c) in piv_cols.iter().enumerate() {
        x[c] = big_to_q(&m[i][k]);
    }
    Some(x)
}

/// Solve `x · a = t` for an integer row vector `x`.
pub fn solve_left_int(a: &[Vec<i64>], t: &[Q]) -> Option<Vec<i64>> {
    let aq: QMat = a.iter().map(|r| r.iter().map(|&x| Q::from(x)).collect()).collect();
    let x = solve_left(&aq, t)?;
    if x.iter().all(|v| v.is_integer()) {
        Some(x.iter().map(|v| v.to_integer()).collect())
    } else {
        None
    }
}

/// Inverse of a square rational matrix (None if singular).
pub fn inverse_q(a: &[Vec<Q>]) -> Option<QMat> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<BigRational> = r.iter().map(q_to_big).collect();
            for j in 0..n {
                row.push(if i == j { BigRational::one() } else { BigRational::zero() });
            }
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..2 * n {
                    let v = &m[c][j] * &f;
                    m[i][j] -= v;
                }
            }
        }
    }
    Some(m.iter().map(|r| r[n..].iter().map(big_to_q).collect()).collect())
}

/// Signature `(n₊, n₋)` of a symmetric rational matrix via exact LDLᵀ with
/// symmetric pivoting.
pub fn signature(a: &[Vec<Q>]) -> (usize, usize) {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a.iter().map(|r| r.iter().map(q_to_big).collect()).collect();
    let (mut pos, mut neg) = (0usize, 0usize);
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        // Prefer a nonzero diagonal pivot.
        if let Some(&p) = active.iter().find(|&&i| !m[i][i].is_zero()) {
            let d = m[p][p].clone();
            if d.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            active.retain(|&i| i != p);
            for &i in &active {
                for &j in &active {
                    let v = &m[i][p] * &m[p][j] / &d;
                    m[i][j] -= v;
                }
            }
            continue;
        }
        // All diagonals vanish: find an off-diagonal pair and add row/col j to i.
        let mut found = None;
        'outer: for &i in &active {
            for &j in &active {
                if i != j && !m[i][j].is_zero() {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = found else {
            // Remaining block is zero: degenerate.
            break;
        };
        for k in 0..n {
            let v = m[j][k].clone();
            m[i][k] += v;
        }
        for k in 0..n {
            let v = m[k][j].clone();
            m[k][i] += v;
        }
    }
    (pos, neg)
}

/// LLL reduction of a positive-definite integer Gram matrix.  Returns the
/// unimodular row transform `t` such that `t · g · tᵀ` is LLL-reduced
/// (δ = 0.99).  Floating-point Gram–Schmidt is adequate for the small,
/// well-conditioned ranks used here; the transform itself is exact.
pub fn lll_gram(g: &[Vec<i64>]) -> IMat {
    let n = g.len();
    let mut t: IMat = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let gram_of = |t: &IMat| congruence(t, g);
    let delta = 0.99f64;
    let mut k = 1usize;
    let mut iterations = 0usize;
    while k < n {
        iterations += 1;
        assert!(iterations < 1_000_000, "LLL did not converge");
        let gm = gram_of(&t);
        let (mu, bstar) = gso_from_gram(&gm);
        // Size reduction of row k.
        let mut changed = false;
        for j in (0..k).rev() {
            let (mu2, _) = if changed { gso_from_gram(&gram_of(&t)) } else { (mu.clone(), bstar.clone()) };
            let r = mu2[k][j].round();
            if r != 0.0 {
                let r = r as i64;
                for c in 0..n {
                    t[k][c] -= r * t[j][c];
                }
                changed = true;
            }
        }
        let gm = gram_of(&t);
        let (mu, bstar) = gso_from_gram(&gm);
        if bstar[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            k += 1;
        } else {
            t.swap(k, k - 1);
            k = k.saturating_sub(1).max(1);
        }
    }
    t
}

/// Gram–Schmidt coefficients `μ` and squared lengths `‖b*_i‖²` from a Gram matrix.
pub fn gso_from_gram(g: &[Vec<i64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.len();
    let mut mu = vec![vec![0.0f64; n]; n];
    let mut b = vec![0.0f64; n];
    let mut r = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j] as f64;
            for k in 0..j {
                s -= mu[j][k] * r[i][k];
            }
            r[i][j] = s;
            if j < i {
                mu[i][j] = s / b[j];
            } else {
                b[i] = s;
            }
        }
        mu[i][i] = 1.0;
    }
    (mu, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_pairing_row() {
        let a = vec![vec![2, 4, 6]];
        let k = kernel(&a);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(2 * v[0] + 4 * v[1] + 6 * v[2], 0);
        }
        // The kernel basis must generate the full kernel lattice: det of the
        // completion with a vector of pairing 2 (the gcd) is ±1.
        let full = vec![k[0].clone(), k[1].clone(), vec![1, 0, 0]];
        assert_eq!(det(&full).abs(), BigInt::one());
    }

    #[test]
    fn hnf_transform_is_consistent() {
        let a = vec![vec![4i128, 6, 2], vec![2, 3, 7], vec![6, 9, 9]];
        let (h, u) = hnf_with_transform(&a);
        for i in 0..3 {
            for j in 0..3 {
                let s: i128 = (0..3).map(|k| u[i][k] * a[k][j]).sum();
                assert_eq!(s, h[i][j]);
            }
        }
    }

    #[test]
    fn det_small() {
        assert_eq!(det(&[vec![0, 2], vec![2, 0]]), BigInt::from(-4));
        assert_eq!(det(&[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]), BigInt::from(4));
    }

    #[test]
    fn signature_hyperbolic() {
        let g: QMat = vec![vec![Q::from(0), Q::from(1)], vec![Q::from(1), Q::from(0)]];
        assert_eq!(signature(&g), (1, 1));
    }

    #[test]
    fn solve_left_roundtrip() {
        let a: QMat = vec![vec![Q::from(1), Q::from(2)], vec![Q::from(3), Q::from(5)]];
        let t = vec![Q::from(7), Q::from(12)];
        let x = solve_left(&a, &t).unwrap();
        assert_eq!(x[0] * a[0][0] + x[1] * a[1][0], t[0]);
        assert_eq!(x[0] * a[0][1] + x[1] * a[1][1], t[1]);
    }

    #[test]
    fn lll_reduces_skewed_basis() {
        // A skewed basis of ℤ²: Gram of rows (1,0),(100,1).
        let g = vec![vec![1, 100], vec![100, 10001]];
        let t = lll_gram(&g);
        let r = congruence(&t, &g);
        assert!(r[0][0] <= 1 && r[1][1] <= 2);
    }
}
