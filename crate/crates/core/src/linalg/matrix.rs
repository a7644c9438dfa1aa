//! Dense matrices over a local field with valuation-pivoted elimination.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

/// Column vectors are plain `Vec<FieldElement>`.
pub type Vector = Vec<FieldElement>;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

/// Result of [`Matrix::rref_val`].
#[derive(Clone, Debug)]
pub struct Rref {
    /// Reduced row echelon form.
    pub reduced: Matrix,
    /// Pivot columns, in order.
    pub pivots: Vec<usize>,
    /// Columns span the kernel.
    pub kernel: Matrix,
    /// Columns of the input at pivot positions; they span the image.
    pub image: Matrix,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn diag(field: &Field, entries: &[FieldElement]) -> Matrix {
        let n = entries.len();
        let mut m = Matrix::zeros(field, n, n);
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    pub fn from_rows(field: &Field, rows: Vec<Vec<FieldElement>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data: Vec<FieldElement> = rows.into_iter().flatten().collect();
        if data.iter().any(|x| !x.field().same(field)) {
            return Err(Error::FieldMismatch);
        }
        Ok(Matrix {
            field: field.clone(),
            rows: r,
            cols: c,
            data,
        })
    }

    /// Build from columns, all of length `rows`.
    pub fn from_columns(field: &Field, rows: usize, columns: &[Vector]) -> Matrix {
        let mut m = Matrix::zeros(field, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    /// Parse a row-major table of element strings.
    pub fn parse<S: AsRef<str>>(field: &Field, rows: &[Vec<S>]) -> Result<Matrix> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| field.parse(s.as_ref())).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(field, parsed)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: FieldElement) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> Vector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let cols: Vec<Vector> = idx.iter().map(|&j| self.column(j)).collect();
        Matrix::from_columns(&self.field, self.rows, &cols)
    }

    pub fn column_range(&self, start: usize, end: usize) -> Matrix {
        let idx: Vec<usize> = (start..end).collect();
        self.select_columns(&idx)
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        let mut m = Matrix::zeros(&self.field, r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                m.set(i - r0, j - c0, self.get(i, j).clone());
            }
        }
        m
    }

    /// `[self | other]`.
    pub fn hcat(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hcat row mismatch");
        let mut cols = self.columns();
        cols.extend(other.columns());
        Matrix::from_columns(&self.field, self.rows, &cols)
    }

    pub fn transpose(&self) -> Matrix {
        let mut m = Matrix::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(&FieldElement) -> FieldElement) -> Matrix {
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &FieldElement) -> Matrix {
        self.map(|x| x * c)
    }

    /// Exact multiplication of every entry by `π^k`.
    pub fn mul_pi_pow(&self, k: i64) -> Matrix {
        self.map(|x| x.mul_pi_pow(k))
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Vector {
        assert_eq!(v.len(), self.cols, "mul_vec dimension");
        (0..self.rows)
            .map(|i| {
                let mut acc = self.field.zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if a.is_exact_zero() || x.is_exact_zero() {
                        continue;
                    }
                    acc = &acc + &(a * x);
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, k: u32) -> Matrix {
        assert!(self.is_square());
        let mut acc = Matrix::identity(&self.field, self.rows);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// True when every entry is zero at its precision.
    pub fn is_negligible(&self) -> bool {
        self.data.iter().all(|x| x.is_negligible())
    }

    /// Smallest absolute precision among the entries (`None` if all exact zeros).
    pub fn min_known_to(&self) -> Option<i64> {
        self.data.iter().filter_map(|x| x.known_to()).min()
    }

    /// Smallest determined valuation among the entries.
    pub fn min_valuation(&self) -> Option<i64> {
        self.data.iter().filter_map(|x| x.val()).min()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Row index in `from..rows` holding the entry of minimal valuation in
    /// column `c`; ties go to the lowest row index.
    fn pivot_row(&self, c: usize, from: usize) -> Option<usize> {
        let mut best: Option<(i64, usize)> = None;
        for i in from..self.rows {
            if let Some(v) = self.get(i, c).val() {
                if best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, i));
                }
            }
        }
        best.map(|(_, i)| i)
    }

    /// Reduced row echelon form with valuation pivoting.
    ///
    /// Entries that are zero at precision are treated as zero. A column with
    /// no determined pivot is only accepted when the precision left in it is
    /// still below the scale of that column in the input; otherwise the rank
    /// decision is undetermined and `PrecisionExhausted` is returned.
    pub fn rref_val(&self) -> Result<Rref> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = m.pivot_row(c, r) else {
                let scale = (0..self.rows).filter_map(|i| self.get(i, c).val()).min();
                if let Some(scale) = scale {
                    for i in r..self.rows {
                        if let Some(k) = m.get(i, c).known_to() {
                            if k <= scale {
                                return Err(Error::precision(format!(
                                    "pivot decision in column {c} undetermined (known to {k}, column scale {scale})"
                                )));
                            }
                        }
                    }
                }
                continue;
            };
            m.swap_rows(pr, r);
            let inv = m.get(r, c).inv()?;
            for j in 0..self.cols {
                let x = m.get(r, j);
                if !x.is_exact_zero() {
                    let y = x * &inv;
                    m.set(r, j, y);
                }
            }
            m.set(r, c, self.field.one());
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_exact_zero() {
                    continue;
                }
                for j in 0..self.cols {
                    if j == c {
                        continue;
                    }
                    let rj = m.get(r, j);
                    if rj.is_exact_zero() {
                        continue;
                    }
                    let y = m.get(i, j) - &(&f * rj);
                    m.set(i, j, y);
                }
                m.set(i, c, self.field.zero());
            }
            pivots.push(c);
            r += 1;
        }
        // rows below the last pivot are negligible; clear them
        for i in r..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.field.zero());
            }
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut kernel_cols = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![self.field.zero(); self.cols];
            v[f] = self.field.one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.get(row, f);
            }
            kernel_cols.push(v);
        }
        let kernel = Matrix::from_columns(&self.field, self.cols, &kernel_cols);
        let image = self.select_columns(&pivots);
        Ok(Rref {
            reduced: m,
            pivots,
            kernel,
            image,
        })
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.rref_val()?.rank())
    }

    /// Kernel basis (columns).
    pub fn kernel(&self) -> Result<Matrix> {
        Ok(self.rref_val()?.kernel)
    }

    /// Solve `self · X = rhs` for square invertible `self`.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::Dimension(format!(
                "solve: {}x{} against {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for c in 0..n {
            let Some(pr) = a.pivot_row(c, c) else {
                return Err(if (c..n).all(|i| a.get(i, c).is_exact_zero()) {
                    Error::InvalidArgument("matrix is singular".into())
                } else {
                    Error::precision(format!("no determined pivot in column {c}"))
                });
            };
            a.swap_rows(pr, c);
            b.swap_rows(pr, c);
            let inv = a.get(c, c).inv()?;
            for i in 0..n {
                if i == c {
                    continue;
                }
                let f = a.get(i, c);
                if f.is_exact_zero() {
                    continue;
                }
                let f = f * &inv;
                for j in c + 1..n {
                    let acj = a.get(c, j);
                    if acj.is_exact_zero() {
                        continue;
                    }
                    let y = a.get(i, j) - &(&f * acj);
                    a.set(i, j, y);
                }
                for j in 0..b.cols {
                    let bcj = b.get(c, j);
                    if bcj.is_exact_zero() {
                        continue;
                    }
                    let y = b.get(i, j) - &(&f * bcj);
                    b.set(i, j, y);
                }
                a.set(i, c, self.field.zero());
            }
            for j in c + 1..n {
                let y = a.get(c, j) * &inv;
                a.set(c, j, y);
            }
            a.set(c, c, self.field.one());
            for j in 0..b.cols {
                let y = b.get(c, j) * &inv;
                b.set(c, j, y);
            }
        }
        Ok(b)
    }

    pub fn solve_vec(&self, rhs: &[FieldElement]) -> Result<Vector> {
        let b = Matrix::from_columns(&self.field, rhs.len(), &[rhs.to_vec()]);
        Ok(self.solve(&b)?.column(0))
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.solve(&Matrix::identity(&self.field, self.rows))
    }

    /// Determinant via the division-free characteristic polynomial.
    pub fn det(&self) -> FieldElement {
        assert!(self.is_square());
        let cp = super::charpoly::char_poly_coeffs(self);
        let c0 = cp[0].clone();
        if self.rows % 2 == 1 {
            -c0
        } else {
            c0
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension");
        let mut out = Matrix::zeros(&self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_exact_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_exact_zero() {
                        continue;
                    }
                    let y = out.get(i, j) + &(a * b);
                    out.set(i, j, y);
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{} over {}]", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).render()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn vec_add(a: &[FieldElement], b: &[FieldElement]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[FieldElement], b: &[FieldElement]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(c: &FieldElement, a: &[FieldElement]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

pub fn vec_is_negligible(a: &[FieldElement]) -> bool {
    a.iter().all(|x| x.is_negligible())
}

pub fn zero_vector(field: &Field, n: usize) -> Vector {
    vec![field.zero(); n]
}

pub fn unit_vector(field: &Field, n: usize, i: usize) -> Vector {
    let mut v = zero_vector(field, n);
    v[i] = field.one();
    v
}

/// Scale a nonzero vector so its entry of minimal valuation becomes a unit
/// power of the uniformizer: the result is primitive (integral, some unit entry).
pub fn primitive(v: &[FieldElement]) -> Vector {
    match v.iter().filter_map(|x| x.val()).min() {
        None => v.to_vec(),
        Some(m) => v.iter().map(|x| x.mul_pi_pow(-m)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q5() -> Field {
        Field::padic(5, 20).unwrap()
    }

    #[test]
    fn rref_of_zero_matrix() {
        let k = q5();
        let r = Matrix::zeros(&k, 2, 2).rref_val().unwrap();
        assert_eq!(r.rank(), 0);
        assert_eq!(r.kernel.cols(), 2);
        assert_eq!(r.image.cols(), 0);
    }

    #[test]
    fn rref_of_diag_p_zero() {
        let k = q5();
        let a = Matrix::diag(&k, &[k.from_i64(5), k.zero()]);
        let r = a.rref_val().unwrap();
        assert_eq!(r.pivots, vec![0]);
        assert_eq!(r.kernel.column(0), vec![k.zero(), k.one()]);
        assert_eq!(r.image.column(0), vec![k.from_i64(5), k.zero()]);
    }

    #[test]
    fn planted_rank_two() {
        let k = q5();
        let b = Matrix::parse(&k, &[vec!["1", "2"], vec!["3", "1/5"], vec!["0", "7"], vec!["25", "1"]]).unwrap();
        let c = Matrix::parse(&k, &[vec!["1", "0", "2", "3"], vec!["4", "5", "6", "1/25"]]).unwrap();
        let a = &b * &c;
        let r = a.rref_val().unwrap();
        assert_eq!(r.rank(), 2);
        let ak = &a * &r.kernel;
        assert!(ak.is_negligible());
    }

    #[test]
    fn inverse_and_solve() {
        let k = q5();
        let a = Matrix::parse(&k, &[vec!["5", "1"], vec!["1", "0"]]).unwrap();
        let inv = a.inverse().unwrap();
        let id = &a * &inv;
        assert!((&id - &Matrix::identity(&k, 2)).is_negligible());
        assert!(Matrix::zeros(&k, 2, 2).inverse().is_err());
    }

    #[test]
    fn determinant() {
        let k = q5();
        let a = Matrix::parse(&k, &[vec!["2", "1"], vec!["3", "4"]]).unwrap();
        assert!(a.det().eq_at_precision(&k.from_i64(5)));
    }
}
