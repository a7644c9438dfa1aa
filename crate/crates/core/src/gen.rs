//! Seeded generators for test inputs: random elements, unimodular
//! matrices and matrices with planted characteristic values.

use std::collections::BTreeMap;

use rand::Rng;

use crate::field::{Field, FieldElement};
use crate::linalg::{Matrix, Vector};
use crate::norm::Rational;
use crate::poly::Slope;

/// A random element `u·π^v` with `v` uniform in `lo..=hi` and a unit `u`
/// with `digits` random digits.
pub fn element<R: Rng>(k: &Field, rng: &mut R, lo: i64, hi: i64, digits: usize) -> FieldElement {
    let q = k.q() as u32;
    let p = k.p();
    let mut d: Vec<u32> = (0..digits.max(1)).map(|_| rng.gen_range(0..digits_base(k, q, p))).collect();
    if d[0] == 0 {
        d[0] = 1 + rng.gen_range(0..digits_base(k, q, p) - 1);
    }
    k.from_digits(&d, rng.gen_range(lo..=hi))
}

fn digits_base(k: &Field, q: u32, p: u32) -> u32 {
    match k.kind() {
        crate::FieldKind::Padic => p,
        crate::FieldKind::Laurent => q,
    }
}

/// Random integral element (possibly zero, never zero at precision).
pub fn integral<R: Rng>(k: &Field, rng: &mut R, digits: usize) -> FieldElement {
    let base = digits_base(k, k.q() as u32, k.p());
    let d: Vec<u32> = (0..digits).map(|_| rng.gen_range(0..base)).collect();
    k.from_digits(&d, 0)
}

/// Random vector; each entry is an exact zero with probability 1/8,
/// otherwise of valuation in `lo..=hi`.
pub fn vector<R: Rng>(k: &Field, rng: &mut R, n: usize, lo: i64, hi: i64) -> Vector {
    (0..n)
        .map(|_| {
            if rng.gen_ratio(1, 8) {
                k.zero()
            } else {
                element(k, rng, lo, hi, 4)
            }
        })
        .collect()
}

/// A random matrix in `GL_n(O)` together with its inverse, built as a
/// product of elementary matrices so that the inverse is exact.
pub fn unimodular<R: Rng>(k: &Field, rng: &mut R, n: usize) -> (Matrix, Matrix) {
    let mut u = Matrix::identity(k, n);
    let mut uinv = Matrix::identity(k, n);
    if n < 2 {
        return (u, uinv);
    }
    for _ in 0..2 * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = integral(k, rng, 2);
        if c.is_exact_zero() {
            continue;
        }
        // u ← u·E, E = I + c·e_ij;  uinv ← E^-1·uinv, E^-1 = I − c·e_ij
        for r in 0..n {
            let y = u.get(r, j) + &(u.get(r, i) * &c);
            u.set(r, j, y);
        }
        for col in 0..n {
            let y = uinv.get(i, col) - &(&c * uinv.get(j, col));
            uinv.set(i, col, y);
        }
    }
    (u, uinv)
}

/// A matrix `U·D·U^-1` with `D` block diagonal and the root valuations of
/// each block known in advance.
#[derive(Clone, Debug)]
pub struct Planted {
    pub matrix: Matrix,
    /// Expected characteristic slopes with multiplicities.
    pub slopes: BTreeMap<Slope, usize>,
    /// The block-diagonal model `D`.
    pub model: Matrix,
}

/// Plant blocks of size 1 (diagonal), 2 (Jordan block or a companion of
/// `T^2 − u·π^a` with `a` odd) and 3 (companion of `T^3 − u·π^a`, `3 ∤ a`).
/// Eigenvalues are never zero.
pub fn planted<R: Rng>(k: &Field, rng: &mut R, n: usize) -> Planted {
    plant(k, rng, n)
}

/// A singular matrix with known slopes: `[[A', C], [0, N]]` where `A'` is
/// [`planted`], `C` is random and `N` is an exact nilpotent block. The
/// exact zero block keeps the zero roots of the characteristic polynomial
/// exact; conjugating it away would leave them only zero at precision.
pub fn planted_with_kernel<R: Rng>(k: &Field, rng: &mut R, n: usize) -> Planted {
    assert!(n >= 2, "needs room for a kernel and an invertible part");
    let z = rng.gen_range(1..n);
    let m = n - z;
    let rest = planted(k, rng, m);
    let mut a = Matrix::zeros(k, n, n);
    let mut model = Matrix::zeros(k, n, n);
    for r in 0..m {
        for c in 0..m {
            a.set(r, c, rest.matrix.get(r, c).clone());
            model.set(r, c, rest.model.get(r, c).clone());
        }
        for c in m..n {
            a.set(r, c, integral(k, rng, 3));
        }
    }
    // N: Jordan blocks of size at most 2
    let mut i = m;
    while i + 1 < n {
        if rng.gen_bool(0.5) {
            a.set(i, i + 1, k.one());
            model.set(i, i + 1, k.one());
            i += 2;
        } else {
            i += 1;
        }
    }
    let mut slopes = rest.slopes;
    slopes.insert(Slope::ZeroRoot, z);
    Planted {
        matrix: a,
        slopes,
        model,
    }
}

fn plant<R: Rng>(k: &Field, rng: &mut R, n: usize) -> Planted {
    let mut blocks: Vec<(Matrix, Slope, usize)> = Vec::new();
    let mut left = n;
    while left > 0 {
        let kind = rng.gen_range(0..if left >= 3 { 4 } else if left == 2 { 3 } else { 1 });
        match kind {
            0 => {
                let v = rng.gen_range(-2..=2);
                let x = element(k, rng, v, v, 3);
                blocks.push((Matrix::diag(k, &[x]), Slope::Finite(Rational::from_integer(v)), 1));
                left -= 1;
            }
            1 => {
                let v = rng.gen_range(-1..=1);
                let x = element(k, rng, v, v, 3);
                let mut m = Matrix::diag(k, &[x.clone(), x]);
                m.set(0, 1, k.one());
                blocks.push((m, Slope::Finite(Rational::from_integer(v)), 2));
                left -= 2;
            }
            2 => {
                let a = [-1i64, 1, 3][rng.gen_range(0..3)];
                let c = element(k, rng, a, a, 3);
                blocks.push((companion(k, &[c, k.zero()]), Slope::Finite(Rational::new(a, 2)), 2));
                left -= 2;
            }
            _ => {
                let a = [-1i64, 1, 2][rng.gen_range(0..3)];
                let c = element(k, rng, a, a, 3);
                blocks.push((companion(k, &[c, k.zero(), k.zero()]), Slope::Finite(Rational::new(a, 3)), 3));
                left -= 3;
            }
        }
    }
    let mut d = Matrix::zeros(k, n, n);
    let mut off = 0;
    let mut slopes = BTreeMap::new();
    for (b, s, m) in &blocks {
        for i in 0..*m {
            for j in 0..*m {
                d.set(off + i, off + j, b.get(i, j).clone());
            }
        }
        *slopes.entry(*s).or_insert(0) += m;
        off += m;
    }
    let (u, uinv) = unimodular(k, rng, n);
    Planted {
        matrix: &(&u * &d) * &uinv,
        slopes,
        model: d,
    }
}

/// Companion matrix of `T^m − Σ c_i T^i` given `c_0..c_{m-1}`.
fn companion(k: &Field, c: &[FieldElement]) -> Matrix {
    let m = c.len();
    let mut a = Matrix::zeros(k, m, m);
    for i in 1..m {
        a.set(i, i - 1, k.one());
    }
    for (i, ci) in c.iter().enumerate() {
        a.set(i, m - 1, ci.clone());
    }
    a
}
