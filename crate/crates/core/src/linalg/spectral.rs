//! Characteristic subspaces `E_ρ`, Fitting decomposition and hyperbolicity.

use std::ops::Range;

use super::charpoly::char_poly;
use super::matrix::{primitive, Matrix, Vector};
use crate::error::{Error, Result};
use crate::norm::NormValue;
use crate::poly::{Polynomial, Slope};

/// One characteristic subspace `E_ρ`.
#[derive(Clone, Debug)]
pub struct Component {
    pub slope: Slope,
    pub multiplicity: usize,
    /// The slope factor `g_s` of the characteristic polynomial; `E_ρ = ker g_s(A)`.
    pub factor: Polynomial,
    /// Columns span `E_ρ` (primitive vectors).
    pub basis: Matrix,
    /// Matrix of `A|E_ρ` in `basis`.
    pub block: Matrix,
}

impl Component {
    /// `ρ = q^-s`, or 0 on the iterated kernel.
    pub fn char_value(&self) -> NormValue {
        self.slope.char_value()
    }
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub char_poly: Polynomial,
    /// Ordered by increasing characteristic value.
    pub components: Vec<Component>,
    /// `P = [basis_0 | basis_1 | …]`.
    pub change_of_basis: Matrix,
    pub inverse: Matrix,
    /// Absolute precision up to which every reported entry is certified.
    pub certified_precision: i64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.change_of_basis.rows()
    }

    /// Positions of component `i` inside the coordinate vector `P^-1 x`.
    pub fn range(&self, i: usize) -> Range<usize> {
        let start: usize = self.components[..i].iter().map(|c| c.multiplicity).sum();
        start..start + self.components[i].multiplicity
    }

    /// Coordinates `P^-1 x`.
    pub fn coordinates(&self, x: &[crate::FieldElement]) -> Vector {
        self.inverse.mul_vec(x)
    }

    /// `x = Σ x_ρ` with `x_ρ ∈ E_ρ`, in ambient coordinates.
    pub fn split(&self, x: &[crate::FieldElement]) -> Vec<Vector> {
        let c = self.coordinates(x);
        (0..self.components.len())
            .map(|i| self.components[i].basis.mul_vec(&c[self.range(i)]))
            .collect()
    }

    pub fn char_values(&self) -> Vec<NormValue> {
        self.components.iter().map(|c| c.char_value()).collect()
    }

    /// Index of the component with the given slope.
    pub fn find(&self, slope: Slope) -> Option<usize> {
        self.components.iter().position(|c| c.slope == slope)
    }

    /// Index of the iterated kernel `E_0`, if nonzero.
    pub fn zero_component(&self) -> Option<usize> {
        self.find(Slope::ZeroRoot)
    }

    /// Columns spanning the sum of the components selected by `pred` on `ρ`.
    pub fn span_where(&self, pred: impl Fn(&NormValue) -> bool) -> Matrix {
        let n = self.dim();
        let mut cols = Vec::new();
        for c in &self.components {
            if pred(&c.char_value()) {
                cols.extend(c.basis.columns());
            }
        }
        Matrix::from_columns(self.change_of_basis.field(), n, &cols)
    }

    /// `α` is `a`-hyperbolic iff `a` is not a characteristic value.
    pub fn is_hyperbolic(&self, a: &NormValue) -> bool {
        !self.char_values().contains(a)
    }
}

/// Decompose `K^n = ⊕ E_ρ` for a square matrix `A`.
///
/// Each `E_ρ` is the kernel of the slope factor `g_s(A)`; the result is
/// certified by kernel dimensions, joint invertibility of the bases and
/// block-diagonality of `P^-1 A P` at precision.
pub fn spectral_decompose(a: &Matrix) -> Result<SpectralDecomposition> {
    if !a.is_square() {
        return Err(Error::Dimension("spectral decomposition of a non-square matrix".into()));
    }
    let k = a.field();
    let n = a.rows();
    let chi = char_poly(a);
    if n == 0 {
        return Ok(SpectralDecomposition {
            char_poly: chi,
            components: Vec::new(),
            change_of_basis: Matrix::zeros(k, 0, 0),
            inverse: Matrix::zeros(k, 0, 0),
            certified_precision: k.precision(),
        });
    }
    let mut factors = chi.slope_factor()?;
    factors.sort_by_key(|x| x.0);
    let mut bases = Vec::new();
    for (slope, g) in &factors {
        let m = g.degree();
        let ga = g.eval_matrix(a);
        let ker = ga.rref_val()?.kernel;
        if ker.cols() != m {
            return Err(Error::precision(format!(
                "kernel of the slope-{slope} factor has dimension {}, expected {m}",
                ker.cols()
            )));
        }
        let cols: Vec<Vector> = ker.columns().iter().map(|v| primitive(v)).collect();
        bases.push(Matrix::from_columns(k, n, &cols));
    }
    let mut p = bases[0].clone();
    for b in &bases[1..] {
        p = p.hcat(b);
    }
    let pinv = p.inverse().map_err(|e| match e {
        Error::InvalidArgument(_) => Error::precision("characteristic subspaces are not independent at precision"),
        other => other,
    })?;
    let conj = &(&pinv * a) * &p;
    let mut components = Vec::new();
    let mut start = 0;
    for ((slope, g), basis) in factors.into_iter().zip(bases) {
        let m = g.degree();
        for i in 0..n {
            for j in start..start + m {
                if (i < start || i >= start + m) && !conj.get(i, j).is_negligible() {
                    return Err(Error::CertificationFailed(format!(
                        "E for slope {slope} is not invariant: entry ({i},{j}) = {}",
                        conj.get(i, j).render()
                    )));
                }
            }
        }
        components.push(Component {
            slope,
            multiplicity: m,
            factor: g,
            basis,
            block: conj.submatrix(start, start + m, start, start + m),
        });
        start += m;
    }
    let mut certified = k.precision();
    for m in [&p, &pinv] {
        if let Some(x) = m.min_known_to() {
            certified = certified.min(x);
        }
    }
    for c in &components {
        if let Some(x) = c.block.min_known_to() {
            certified = certified.min(x);
        }
    }
    Ok(SpectralDecomposition {
        char_poly: chi,
        components,
        change_of_basis: p,
        inverse: pinv,
        certified_precision: certified,
    })
}

/// Fitting decomposition `K^n = ker(A^n) ⊕ im(A^n)`.
#[derive(Clone, Debug)]
pub struct Fitting {
    /// Columns span the iterated kernel.
    pub ik: Matrix,
    /// Columns span the core `⋂ A^k(K^n)`.
    pub core: Matrix,
    /// Matrix of `A` on the core (invertible).
    pub core_block: Matrix,
}

pub fn fitting(a: &Matrix) -> Result<Fitting> {
    if !a.is_square() {
        return Err(Error::Dimension("fitting of a non-square matrix".into()));
    }
    let n = a.rows();
    let an = a.pow(n as u32);
    let r = an.rref_val()?;
    let ik = Matrix::from_columns(a.field(), n, &r.kernel.columns().iter().map(|v| primitive(v)).collect::<Vec<_>>());
    let core = Matrix::from_columns(a.field(), n, &r.image.columns().iter().map(|v| primitive(v)).collect::<Vec<_>>());
    let joint = ik.hcat(&core);
    let inv = joint.inverse().map_err(|e| match e {
        Error::InvalidArgument(_) => Error::CertificationFailed("ik and core are not complementary".into()),
        other => other,
    })?;
    let d = ik.cols();
    let moved = &inv * &(a * &core);
    for i in 0..d {
        for j in 0..core.cols() {
            if !moved.get(i, j).is_negligible() {
                return Err(Error::CertificationFailed("A does not preserve the core".into()));
            }
        }
    }
    let core_block = moved.submatrix(d, n, 0, core.cols());
    if core_block.rows() > 0 {
        core_block.inverse().map_err(|_| Error::CertificationFailed("A is not bijective on the core".into()))?;
    }
    Ok(Fitting { ik, core, core_block })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::norm::Rational;

    #[test]
    fn diag_one_p() {
        let k = Field::padic(5, 20).unwrap();
        let a = Matrix::diag(&k, &[k.one(), k.from_i64(5)]);
        let d = spectral_decompose(&a).unwrap();
        assert_eq!(d.components.len(), 2);
        // increasing characteristic value: slope 1 (ρ = 1/5) first
        assert_eq!(d.components[0].slope, Slope::Finite(Rational::from_integer(1)));
        assert_eq!(d.components[0].basis.column(0), vec![k.zero(), k.one()]);
        assert_eq!(d.components[1].slope, Slope::Finite(Rational::from_integer(0)));
        assert_eq!(d.components[1].basis.column(0), vec![k.one(), k.zero()]);
    }

    #[test]
    fn zero_matrix() {
        let k = Field::padic(3, 10).unwrap();
        let d = spectral_decompose(&Matrix::zeros(&k, 2, 2)).unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].slope, Slope::ZeroRoot);
        assert_eq!(d.components[0].multiplicity, 2);
    }

    #[test]
    fn laurent_shift_pair() {
        let k = Field::laurent(2, 1, 20).unwrap();
        let a = Matrix::diag(&k, &[k.parse("t^-1").unwrap(), k.parse("t").unwrap()]);
        let d = spectral_decompose(&a).unwrap();
        let vals: Vec<String> = d.char_values().iter().map(|v| v.to_string()).collect();
        assert_eq!(vals, vec!["q^-1", "q^1"]);
        assert!(d.is_hyperbolic(&NormValue::ONE));
        assert!(!d.is_hyperbolic(&NormValue::from_int_exponent(1)));
    }

    #[test]
    fn fitting_split() {
        let k = Field::padic(3, 10).unwrap();
        let a = Matrix::parse(&k, &[vec!["0", "1"], vec!["0", "1"]]).unwrap();
        let f = fitting(&a).unwrap();
        assert_eq!(f.ik.column(0), vec![k.one(), k.zero()]);
        assert_eq!(f.core.column(0), vec![k.one(), k.one()]);
        let z = fitting(&Matrix::zeros(&k, 2, 2)).unwrap();
        assert_eq!((z.ik.cols(), z.core.cols()), (2, 0));
        let i = fitting(&Matrix::identity(&k, 2)).unwrap();
        assert_eq!((i.ik.cols(), i.core.cols()), (0, 2));
    }
}
