//! Full-rank lattices (finitely generated `O`-submodules of `K^n` spanning
//! `K^n`) in a canonical column Hermite form, and valuation Smith forms.

use super::matrix::{Matrix, Vector};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

/// A full-rank lattice, stored as its column Hermite basis: lower triangular,
/// diagonal entries `π^v_i`, and each entry left of a pivot reduced to the
/// digits below that pivot's valuation.
#[derive(Clone, Debug)]
pub struct Lattice {
    basis: Matrix,
}

fn sub_scaled(col: &mut [FieldElement], f: &FieldElement, other: &[FieldElement], from: usize) {
    if f.is_exact_zero() {
        return;
    }
    for r in from..col.len() {
        if other[r].is_exact_zero() {
            continue;
        }
        col[r] = &col[r] - &(f * &other[r]);
    }
}

fn hermite(field: &Field, n: usize, mut cols: Vec<Vector>) -> Result<Matrix> {
    for i in 0..n {
        let best = (i..cols.len())
            .filter_map(|j| cols[j][i].val().map(|v| (v, j)))
            .min();
        let Some((v, j)) = best else {
            return Err(if (i..cols.len()).all(|j| cols[j][i].is_exact_zero()) {
                Error::InvalidArgument("generators do not span a full-rank lattice".into())
            } else {
                Error::precision(format!("lattice pivot in row {i} undetermined"))
            });
        };
        cols.swap(i, j);
        let scale = field.pi_pow_exact(v).div(&cols[i][i])?;
        for r in i..n {
            cols[i][r] = &cols[i][r] * &scale;
        }
        cols[i][i] = field.pi_pow_exact(v);
        let (head, tail) = cols.split_at_mut(i + 1);
        let pivot_col = &head[i];
        for col in tail.iter_mut() {
            if col[i].is_exact_zero() {
                continue;
            }
            let f = col[i].mul_pi_pow(-v);
            sub_scaled(col, &f, pivot_col, i + 1);
            col[i] = field.zero();
        }
    }
    cols.truncate(n);
    for i in 0..n {
        let v = cols[i][i].val().expect("pivot");
        let (head, tail) = cols.split_at_mut(i);
        let pivot_col = &tail[0];
        for col in head.iter_mut() {
            let x = col[i].clone();
            if x.is_exact_zero() {
                continue;
            }
            let t = x.truncate_below(v);
            let f = (&x - &t).mul_pi_pow(-v);
            sub_scaled(col, &f, pivot_col, i + 1);
            col[i] = t;
        }
    }
    Ok(Matrix::from_columns(field, n, &cols))
}

impl Lattice {
    /// The lattice generated by the columns of `generators` (at least `n`
    /// columns spanning `K^n`).
    pub fn new(generators: &Matrix) -> Result<Lattice> {
        let n = generators.rows();
        if generators.cols() < n {
            return Err(Error::Dimension(format!("{} generators for a rank-{n} lattice", generators.cols())));
        }
        let basis = hermite(generators.field(), n, generators.columns())?;
        Ok(Lattice { basis })
    }

    /// `O^n`.
    pub fn standard(field: &Field, n: usize) -> Lattice {
        Lattice {
            basis: Matrix::identity(field, n),
        }
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn field(&self) -> &Field {
        self.basis.field()
    }

    /// Valuations of the diagonal pivots.
    pub fn pivots(&self) -> Vec<i64> {
        (0..self.dim()).map(|i| self.basis.get(i, i).val().unwrap()).collect()
    }

    /// `val det` of any basis; `[O^n : L] = q^val_det` when `L ⊆ O^n`.
    pub fn val_det(&self) -> i64 {
        self.pivots().iter().sum()
    }

    /// Coordinates of `v` in the Hermite basis.
    pub fn coordinates(&self, v: &[FieldElement]) -> Result<Vector> {
        // forward substitution on the lower triangular basis
        let n = self.dim();
        let mut c: Vec<FieldElement> = Vec::with_capacity(n);
        for i in 0..n {
            let mut r = v[i].clone();
            for (j, cj) in c.iter().enumerate() {
                let b = self.basis.get(i, j);
                if !b.is_exact_zero() && !cj.is_exact_zero() {
                    r = &r - &(b * cj);
                }
            }
            let v = self.basis.get(i, i).val().unwrap();
            c.push(r.mul_pi_pow(-v));
        }
        Ok(c)
    }

    pub fn contains_vector(&self, v: &[FieldElement]) -> Result<bool> {
        for x in self.coordinates(v)? {
            match x.is_integral() {
                Some(true) => {}
                Some(false) => return Ok(false),
                None => return Err(Error::precision("lattice membership undetermined")),
            }
        }
        Ok(true)
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Lattice) -> Result<bool> {
        for v in other.basis.columns() {
            if !self.contains_vector(&v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Equality of lattices (containment plus equal covolume).
    pub fn same_as(&self, other: &Lattice) -> Result<bool> {
        Ok(self.val_det() == other.val_det() && self.contains(other)?)
    }

    pub fn sum(&self, other: &Lattice) -> Result<Lattice> {
        Lattice::new(&self.basis.hcat(&other.basis))
    }

    /// `{y : <x, y> ∈ O for all x ∈ L}`.
    pub fn dual(&self) -> Result<Lattice> {
        Lattice::new(&self.basis.transpose().inverse()?)
    }

    pub fn intersection(&self, other: &Lattice) -> Result<Lattice> {
        self.dual()?.sum(&other.dual()?)?.dual()
    }

    /// `A·L` for invertible `A`.
    pub fn image(&self, a: &Matrix) -> Result<Lattice> {
        Lattice::new(&(a * &self.basis))
    }

    /// `π^k·L`.
    pub fn scaled(&self, k: i64) -> Lattice {
        Lattice {
            basis: self.basis.mul_pi_pow(k),
        }
    }

    /// Exponent `m` with `[larger : self] = q^m`; requires `self ⊆ larger`.
    pub fn index_in(&self, larger: &Lattice) -> Result<i64> {
        if !larger.contains(self)? {
            return Err(Error::InvalidArgument("index of a lattice not contained in the other".into()));
        }
        Ok(self.val_det() - larger.val_det())
    }
}

/// Valuations of the elementary divisors (Smith form over the valuation
/// ring, full valuation pivoting), one per determined pivot. Stops when the
/// remaining block is zero at precision; callers compare the length with the
/// rank they expect.
pub fn elementary_divisors(m: &Matrix) -> Vec<i64> {
    let mut a = m.clone();
    let (r, c) = (a.rows(), a.cols());
    let mut out = Vec::new();
    for t in 0..r.min(c) {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in t..r {
            for j in t..c {
                if let Some(v) = a.get(i, j).val() {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else { break };
        if pi != t {
            for j in 0..c {
                let x = a.get(pi, j).clone();
                let y = a.get(t, j).clone();
                a.set(t, j, x);
                a.set(pi, j, y);
            }
        }
        if pj != t {
            for i in 0..r {
                let x = a.get(i, pj).clone();
                let y = a.get(i, t).clone();
                a.set(i, t, x);
                a.set(i, pj, y);
            }
        }
        let inv = a.get(t, t).inv().expect("pivot is a unit multiple");
        for i in t + 1..r {
            let f = a.get(i, t);
            if f.is_exact_zero() {
                continue;
            }
            let f = f * &inv;
            for j in t + 1..c {
                let x = a.get(t, j);
                if x.is_exact_zero() {
                    continue;
                }
                let y = a.get(i, j) - &(&f * x);
                a.set(i, j, y);
            }
            a.set(i, t, m.field().zero());
        }
        for j in t + 1..c {
            a.set(t, j, m.field().zero());
        }
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> Field {
        Field::padic(3, 20).unwrap()
    }

    #[test]
    fn hermite_form_is_canonical() {
        let k = q3();
        let g1 = Matrix::parse(&k, &[vec!["3", "1"], vec!["0", "9"]]).unwrap();
        // same lattice, different generators: add multiples of one column to the other
        let g2 = Matrix::parse(&k, &[vec!["3", "7", "4"], vec!["0", "9", "9"]]).unwrap();
        let l1 = Lattice::new(&g1).unwrap();
        let l2 = Lattice::new(&g2).unwrap();
        assert!(l1.same_as(&l2).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                assert!(l1.basis().get(i, j).eq_at_precision(l2.basis().get(i, j)));
            }
        }
        assert_eq!(l1.val_det(), 3);
    }

    #[test]
    fn containment_and_index() {
        let k = q3();
        let std = Lattice::standard(&k, 2);
        let l = Lattice::new(&Matrix::diag(&k, &[k.from_i64(3), k.from_i64(9)])).unwrap();
        assert!(std.contains(&l).unwrap());
        assert!(!l.contains(&std).unwrap());
        assert_eq!(l.index_in(&std).unwrap(), 3);
        let s = l.sum(&std).unwrap();
        assert!(s.same_as(&std).unwrap());
        let i = l.intersection(&std).unwrap();
        assert!(i.same_as(&l).unwrap());
    }

    #[test]
    fn intersection_of_skew_lattices() {
        let k = q3();
        let a = Lattice::new(&Matrix::parse(&k, &[vec!["1", "0"], vec!["1", "3"]]).unwrap()).unwrap();
        let b = Lattice::new(&Matrix::parse(&k, &[vec!["1", "0"], vec!["2", "3"]]).unwrap()).unwrap();
        let c = a.intersection(&b).unwrap();
        assert!(a.contains(&c).unwrap() && b.contains(&c).unwrap());
        // both have index 3 in O^2 and are distinct, so the intersection has index 9
        assert_eq!(c.val_det(), 2);
    }

    #[test]
    fn smith_divisors() {
        let k = q3();
        let m = Matrix::parse(&k, &[vec!["3", "1"], vec!["9", "3"]]).unwrap();
        // det = 0, one unit divisor
        assert_eq!(elementary_divisors(&m), vec![0]);
        let m = Matrix::parse(&k, &[vec!["3", "9"], vec!["1/3", "27"]]).unwrap();
        let mut d = elementary_divisors(&m);
        d.sort();
        // det = 81 - 3 = 78 = 3·26, so divisors -1 and 2
        assert_eq!(d, vec![-1, 2]);
    }
}
