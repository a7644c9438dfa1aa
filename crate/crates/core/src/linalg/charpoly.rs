//! Division-free characteristic polynomial (Berkowitz).

use super::matrix::Matrix;
use crate::field::FieldElement;
use crate::poly::Polynomial;

/// Coefficients of `det(T·I − A)`, constant term first; monic of degree `n`.
pub(crate) fn char_poly_coeffs(a: &Matrix) -> Vec<FieldElement> {
    assert!(a.is_square(), "char_poly of a non-square matrix");
    let k = a.field();
    let n = a.rows();
    if n == 0 {
        return vec![k.one()];
    }
    // descending coefficients of the leading principal minors
    let mut p = vec![k.one(), -a.get(0, 0)];
    for r in 1..n {
        let mut t = Vec::with_capacity(r + 2);
        t.push(k.one());
        t.push(-a.get(r, r));
        let mut v: Vec<FieldElement> = (0..r).map(|i| a.get(i, r).clone()).collect();
        for step in 0..r {
            let mut dot = k.zero();
            for (j, x) in v.iter().enumerate() {
                let rj = a.get(r, j);
                if !rj.is_exact_zero() && !x.is_exact_zero() {
                    dot = &dot + &(rj * x);
                }
            }
            t.push(-dot);
            if step + 1 < r {
                v = (0..r)
                    .map(|i| {
                        let mut acc = k.zero();
                        for (j, x) in v.iter().enumerate() {
                            let m = a.get(i, j);
                            if !m.is_exact_zero() && !x.is_exact_zero() {
                                acc = &acc + &(m * x);
                            }
                        }
                        acc
                    })
                    .collect();
            }
        }
        let mut next = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut acc = k.zero();
            for j in 0..=r.min(i) {
                if i - j < t.len() && !t[i - j].is_exact_zero() && !p[j].is_exact_zero() {
                    acc = &acc + &(&t[i - j] * &p[j]);
                }
            }
            next.push(acc);
        }
        p = next;
    }
    p.reverse();
    p
}

/// The characteristic polynomial `det(T·I − A)`.
pub fn char_poly(a: &Matrix) -> Polynomial {
    Polynomial::from_coeffs_unchecked(a.field(), char_poly_coeffs(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    #[test]
    fn diagonal_and_nilpotent() {
        let k = Field::padic(5, 10).unwrap();
        let a = Matrix::diag(&k, &[k.one(), k.from_i64(5)]);
        let f = char_poly(&a);
        let g = k.parse_poly("T^2 - 6*T + 5").unwrap();
        assert!(f.eq_at_precision(&g));
        let n = Matrix::parse(&k, &[vec!["0", "1"], vec!["0", "0"]]).unwrap();
        let f = char_poly(&n);
        assert_eq!(f.degree(), 2);
        assert!(f.coeff(0).is_exact_zero() && f.coeff(1).is_exact_zero());
    }

    #[test]
    fn companion_matrix_recovers_polynomial() {
        let k = Field::padic(3, 12).unwrap();
        let f = k.parse_poly("T^4 - 2*T^3 + 1/3*T + 9").unwrap();
        let c = f.companion();
        assert!(char_poly(&c).eq_at_precision(&f));
    }
}
