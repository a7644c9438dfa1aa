//! Norms adapted to a linear endomorphism.
//!
//! Every norm here is given by an orthogonal basis `f_i` and weights
//! `q^{e_i}`: `‖Σ c_i f_i‖ = max |c_i|·q^{e_i}`.
//!
//! On a component with `ρ = q^-s > 0`, `s = a/b`, the block `B` satisfies
//! `B^b = π^a·C` with `C` having unit eigenvalues. A lattice `L` stable under
//! `C^{±1}` is found by saturation, and
//! `‖x‖ = max_{j<b} q^{js}·‖B^j x‖_L`
//! scales exactly by `ρ`. An orthogonal basis for it is read off the chain of
//! balls `M_0 ⊇ M_{-1/b} ⊇ … ⊇ π·M_0` through ranks over the residue field.
//!
//! On `E_0` a basis adapted to `ker N ⊂ ker N^2 ⊂ …` with geometrically
//! growing weights makes the nilpotent part as contracting as requested.

use super::lattice::Lattice;
use super::matrix::{Matrix, Vector};
use super::spectral::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement, ResidueField};
use crate::norm::{ceil_rational, floor_rational, NormValue, Rational};
use crate::poly::Slope;

/// Saturation rounds allowed beyond the dimension before giving up.
const EXTRA_SATURATION_ROUNDS: usize = 2;

/// A norm with an orthogonal basis: `‖x‖ = max_i |c_i|·q^{e_i}` where
/// `x = Σ c_i f_i`.
#[derive(Clone, Debug)]
pub struct WeightedNorm {
    /// Columns `f_i`.
    pub basis: Matrix,
    pub inverse: Matrix,
    /// Exponents `e_i` of the weights.
    pub exponents: Vec<Rational>,
}

/// Exact maximum of the determined terms and the largest bound among the
/// undetermined ones.
struct Terms {
    exact: NormValue,
    bound: NormValue,
    undetermined: bool,
}

fn weigh(c: &FieldElement, e: Rational, t: &mut Terms) {
    let w = NormValue::pow(e);
    if c.is_exact_zero() {
        return;
    }
    if c.is_zero_at_precision() {
        t.undetermined = true;
        t.bound = t.bound.max(c.abs_bound().mul(w));
    } else {
        t.exact = t.exact.max(c.abs_bound().mul(w));
    }
}

impl Terms {
    fn new() -> Self {
        Terms {
            exact: NormValue::Zero,
            bound: NormValue::Zero,
            undetermined: false,
        }
    }

    fn value(&self) -> Result<NormValue> {
        if self.undetermined && self.bound > self.exact {
            return Err(Error::precision("norm undetermined: a coordinate is zero at precision"));
        }
        Ok(self.exact)
    }

    fn upper(&self) -> NormValue {
        self.exact.max(self.bound)
    }
}

impl WeightedNorm {
    pub fn new(basis: Matrix, exponents: Vec<Rational>) -> Result<WeightedNorm> {
        let inverse = basis.inverse()?;
        Ok(WeightedNorm {
            basis,
            inverse,
            exponents,
        })
    }

    /// The max norm `max |x_i|`.
    pub fn max_norm(field: &Field, n: usize) -> WeightedNorm {
        WeightedNorm {
            basis: Matrix::identity(field, n),
            inverse: Matrix::identity(field, n),
            exponents: vec![Rational::from_integer(0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn weights(&self) -> Vec<NormValue> {
        self.exponents.iter().map(|e| NormValue::pow(*e)).collect()
    }

    pub fn coordinates(&self, x: &[FieldElement]) -> Vector {
        self.inverse.mul_vec(x)
    }

    fn terms(&self, x: &[FieldElement]) -> Terms {
        let mut t = Terms::new();
        for (c, e) in self.coordinates(x).iter().zip(&self.exponents) {
            weigh(c, *e, &mut t);
        }
        t
    }

    /// Exact norm; fails if a coordinate that is zero at precision could
    /// still dominate.
    pub fn norm(&self, x: &[FieldElement]) -> Result<NormValue> {
        self.terms(x).value()
    }

    /// Least upper bound compatible with the known digits.
    pub fn norm_bound(&self, x: &[FieldElement]) -> NormValue {
        self.terms(x).upper()
    }

    fn op_terms(&self, a: &Matrix) -> Terms {
        let mut total = Terms::new();
        for (i, e) in self.exponents.iter().enumerate() {
            let img = a.mul_vec(&self.basis.column(i));
            let t = self.terms(&img);
            let inv = NormValue::pow(-*e);
            total.exact = total.exact.max(t.exact.mul(inv));
            total.bound = total.bound.max(t.bound.mul(inv));
            total.undetermined |= t.undetermined;
        }
        total
    }

    /// Exact operator norm `sup ‖Ax‖/‖x‖` (attained on the orthogonal basis).
    pub fn op_norm(&self, a: &Matrix) -> Result<NormValue> {
        self.op_terms(a).value()
    }

    /// Upper bound on the operator norm, valid whatever the undetermined digits are.
    pub fn op_norm_bound(&self, a: &Matrix) -> NormValue {
        self.op_terms(a).upper()
    }

    /// The closed ball `{x : ‖x‖ ≤ q^r}`.
    pub fn ball(&self, r: Rational) -> Result<Lattice> {
        let cols: Vec<Vector> = (0..self.dim())
            .map(|i| {
                let k = ceil_rational(&(self.exponents[i] - r));
                self.basis.column(i).iter().map(|x| x.mul_pi_pow(k)).collect()
            })
            .collect();
        Lattice::new(&Matrix::from_columns(self.basis.field(), self.basis.rows(), &cols))
    }
}

/// The adapted norm restricted to one characteristic subspace, in the
/// coordinates of that component's basis.
#[derive(Clone, Debug)]
pub struct NormPart {
    pub slope: Slope,
    pub local: WeightedNorm,
    /// Certified operator norm of the block: `ρ` for `ρ > 0`, an upper bound
    /// below `ε` on `E_0`.
    pub op_norm: NormValue,
}

#[derive(Clone, Debug)]
pub struct AdaptedNorm {
    /// Global orthogonal basis (component bases times local bases).
    pub norm: WeightedNorm,
    pub parts: Vec<NormPart>,
    pub epsilon: NormValue,
    pub certified_precision: i64,
}

impl AdaptedNorm {
    pub fn norm(&self, x: &[FieldElement]) -> Result<NormValue> {
        self.norm.norm(x)
    }

    pub fn op_norm(&self, a: &Matrix) -> Result<NormValue> {
        self.norm.op_norm(a)
    }

    pub fn weights(&self) -> Vec<NormValue> {
        self.norm.weights()
    }
}

/// Incremental row echelon form over the residue field.
struct ResidueEchelon<'a> {
    field: &'a ResidueField,
    rows: Vec<(usize, Vec<u32>)>,
}

impl<'a> ResidueEchelon<'a> {
    /// Adds `v` if independent of the rows so far.
    fn insert(&mut self, mut v: Vec<u32>) -> bool {
        let f = self.field;
        for (p, r) in &self.rows {
            let c = v[*p];
            if c != 0 {
                for (x, y) in v.iter_mut().zip(r) {
                    *x = f.sub(*x, f.mul(c, *y));
                }
            }
        }
        let Some(p) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv(v[p]).unwrap();
        for x in v.iter_mut() {
            *x = f.mul(*x, inv);
        }
        self.rows.push((p, v));
        true
    }
}

/// Stable lattice of `C` and `C^-1` containing `O^m`, by saturation.
fn saturate(c: &Matrix, cinv: &Matrix) -> Result<Lattice> {
    let m = c.rows();
    let mut l = Lattice::standard(c.field(), m);
    for _ in 0..=m + EXTRA_SATURATION_ROUNDS {
        let next = Lattice::new(&l.basis().hcat(&(c * l.basis())).hcat(&(cinv * l.basis())))?;
        if next.same_as(&l)? {
            return Ok(l);
        }
        l = next;
    }
    Err(Error::precision("orbit lattice saturation did not stabilize"))
}

/// Orthogonal basis of the `ρ`-scaling norm on a block with `ρ = q^-s > 0`.
fn positive_part(block: &Matrix, s: Rational) -> Result<WeightedNorm> {
    let k = block.field();
    let m = block.rows();
    let (a, b) = (*s.numer(), *s.denom());
    let binv = block.inverse()?;
    let c = block.pow(b as u32).mul_pi_pow(-a);
    let cinv = binv.pow(b as u32).mul_pi_pow(a);
    let lat = saturate(&c, &cinv)?;
    let linv = lat.basis().inverse()?;
    let mut powers = vec![Matrix::identity(k, m)];
    for j in 1..b as usize {
        powers.push(block * &powers[j - 1]);
    }
    let ball = |r: Rational| -> Result<Lattice> {
        // {x : π^{floor(r - j s)} L^-1 B^j x integral for all j}
        let mut rows_t = Matrix::zeros(k, m, 0);
        for (j, bj) in powers.iter().enumerate() {
            let f = floor_rational(&(r - s * Rational::from_integer(j as i64)));
            let blockrow = (&linv * bj).mul_pi_pow(f);
            rows_t = rows_t.hcat(&blockrow.transpose());
        }
        Lattice::new(&rows_t)?.dual()
    };
    let top = ball(Rational::from_integer(0))?;
    let qinv = top.basis().inverse()?;
    let rf = k.residue();
    let mut ech = ResidueEchelon { field: rf, rows: Vec::new() };
    let mut chosen: Vec<Vector> = Vec::new();
    let mut exps = Vec::new();
    for step in (0..b).rev() {
        let r = Rational::new(-step, b);
        let lk = if step == 0 { top.clone() } else { ball(r)? };
        let rel = &qinv * lk.basis();
        for j in 0..m {
            let res: Vec<u32> = (0..m).map(|i| rel.get(i, j).residue()).collect::<Result<_>>()?;
            if ech.insert(res) {
                chosen.push(lk.basis().column(j));
                exps.push(r);
            }
        }
    }
    if chosen.len() != m {
        return Err(Error::CertificationFailed(format!(
            "residue flag yields {} of {m} basis vectors",
            chosen.len()
        )));
    }
    WeightedNorm::new(Matrix::from_columns(k, m, &chosen), exps)
}

/// Flag basis for a nilpotent block with weights `q^{g·level}`, `g` chosen so
/// the operator norm drops below `q^eps_exp`.
fn nilpotent_part(block: &Matrix, eps_exp: Rational) -> Result<WeightedNorm> {
    let k = block.field();
    let m = block.rows();
    let mut chosen: Vec<Vector> = Vec::new();
    let mut levels: Vec<i64> = Vec::new();
    let mut power = Matrix::identity(k, m);
    for level in 0..m {
        power = &power * block;
        let ker = power.rref_val()?.kernel;
        let cand = Matrix::from_columns(k, m, &chosen).hcat(&ker);
        let piv = cand.rref_val()?.pivots;
        let have = chosen.len();
        for &j in piv.iter().filter(|&&j| j >= have) {
            levels.push(level as i64);
            chosen.push(super::matrix::primitive(&cand.column(j)));
        }
        if chosen.len() == m {
            break;
        }
    }
    if chosen.len() != m {
        return Err(Error::precision("block on the iterated kernel is not nilpotent at precision"));
    }
    let f = Matrix::from_columns(k, m, &chosen);
    let nf = &f.inverse()? * &(block * &f);
    // μ: largest exponent |entry| = q^μ (or bound) of N in the flag basis
    let mut mu: Option<i64> = None;
    for x in nf.entries() {
        let e = match (x.val(), x.known_to()) {
            (Some(v), _) => -v,
            (None, Some(kt)) => -kt,
            (None, None) => continue,
        };
        mu = Some(mu.map_or(e, |u: i64| u.max(e)));
    }
    let g = match mu {
        None => 0,
        Some(mu) => (floor_rational(&(Rational::from_integer(mu) - eps_exp)) + 1).max(0),
    };
    let exps = levels.iter().map(|&l| Rational::from_integer(g * l)).collect();
    WeightedNorm::new(f, exps)
}

/// Build and certify a norm adapted to `A` with `‖A|E_0‖_op < ε`, `0 < ε ≤ 1`.
pub fn adapted_norm(a: &Matrix, dec: &SpectralDecomposition, epsilon: NormValue) -> Result<AdaptedNorm> {
    let eps_exp = match epsilon.exponent() {
        Some(e) if e <= Rational::from_integer(0) => e,
        _ => return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside ]0,1]"))),
    };
    let k = a.field();
    let n = a.rows();
    let mut parts = Vec::new();
    let mut cols = Vec::new();
    let mut exps = Vec::new();
    for comp in &dec.components {
        let local = match comp.slope {
            Slope::ZeroRoot => nilpotent_part(&comp.block, eps_exp)?,
            Slope::Finite(s) => positive_part(&comp.block, s)?,
        };
        let op = match comp.slope {
            Slope::ZeroRoot => {
                let bound = local.op_norm_bound(&comp.block);
                if bound >= epsilon {
                    return Err(Error::CertificationFailed(format!(
                        "operator norm bound {bound} on E_0 is not below {epsilon}"
                    )));
                }
                bound
            }
            Slope::Finite(s) => {
                let rho = NormValue::pow(-s);
                let up = local.op_norm_bound(&comp.block);
                let down = local.op_norm_bound(&comp.block.inverse()?);
                if up > rho || down > NormValue::pow(s) {
                    return Err(Error::CertificationFailed(format!(
                        "norm on the slope-{} component does not scale by {rho} (bounds {up}, {down})",
                        comp.slope
                    )));
                }
                rho
            }
        };
        let global = &comp.basis * &local.basis;
        cols.extend(global.columns());
        exps.extend(local.exponents.iter().copied());
        parts.push(NormPart {
            slope: comp.slope,
            local,
            op_norm: op,
        });
    }
    let basis = Matrix::from_columns(k, n, &cols);
    let norm = WeightedNorm::new(basis, exps)?;
    let certified = norm
        .inverse
        .min_known_to()
        .into_iter()
        .chain(norm.basis.min_known_to())
        .fold(dec.certified_precision, i64::min);
    Ok(AdaptedNorm {
        norm,
        parts,
        epsilon,
        certified_precision: certified,
    })
}

/// `α(B_r^{E_ρ}) = B_{ρr}^{E_ρ}`: checks the lattice identity on component
/// `index` and returns `ρ·r`.
pub fn ball_image(dec: &SpectralDecomposition, norm: &AdaptedNorm, r: NormValue, index: usize) -> Result<NormValue> {
    let comp = &dec.components[index];
    let Slope::Finite(s) = comp.slope else {
        return Err(Error::InvalidArgument("ball identity needs a component with ρ > 0".into()));
    };
    let Some(e) = r.exponent() else {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    };
    let part = &norm.parts[index];
    let src = part.local.ball(e)?;
    let dst = part.local.ball(e - s)?;
    let img = src.image(&comp.block)?;
    if !img.same_as(&dst)? {
        return Err(Error::CertificationFailed(format!(
            "image of the radius-{r} ball on the slope-{} component is not the expected ball",
            comp.slope
        )));
    }
    Ok(r.mul(comp.char_value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral::spectral_decompose;

    fn q(p: u32) -> Field {
        Field::padic(p, 20).unwrap()
    }

    #[test]
    fn diagonal_gives_max_norm() {
        let k = q(5);
        let a = Matrix::diag(&k, &[k.one(), k.from_i64(5)]);
        let d = spectral_decompose(&a).unwrap();
        let nm = adapted_norm(&a, &d, NormValue::ONE).unwrap();
        assert!(nm.weights().iter().all(|w| *w == NormValue::ONE));
        let e2 = vec![k.zero(), k.one()];
        assert_eq!(nm.norm(&a.mul_vec(&e2)).unwrap(), NormValue::from_int_exponent(-1));
        let id = Matrix::identity(&k, 3);
        let d = spectral_decompose(&id).unwrap();
        let nm = adapted_norm(&id, &d, NormValue::ONE).unwrap();
        assert!(nm.weights().iter().all(|w| *w == NormValue::ONE));
    }

    #[test]
    fn nilpotent_contracts_below_epsilon() {
        let k = q(3);
        let a = Matrix::parse(&k, &[vec!["0", "1"], vec!["0", "0"]]).unwrap();
        let d = spectral_decompose(&a).unwrap();
        let eps = NormValue::from_int_exponent(-1);
        let nm = adapted_norm(&a, &d, eps).unwrap();
        let op = nm.op_norm(&a).unwrap();
        assert!(op <= eps && op < eps, "{op}");
    }

    #[test]
    fn max_norm_operator_norms() {
        let k = q(5);
        let mx = WeightedNorm::max_norm(&k, 2);
        let a = Matrix::diag(&k, &[k.from_i64(5), k.one()]);
        assert_eq!(mx.op_norm(&a).unwrap(), NormValue::ONE);
        let b = Matrix::parse(&k, &[vec!["0", "1/5"], vec!["0", "0"]]).unwrap();
        assert_eq!(mx.op_norm(&b).unwrap(), NormValue::from_int_exponent(1));
    }

    #[test]
    fn fractional_slope_scales_exactly() {
        let k = q(2);
        // companion of T^2 - 2: roots of valuation 1/2
        let a = Matrix::parse(&k, &[vec!["0", "2"], vec!["1", "0"]]).unwrap();
        let d = spectral_decompose(&a).unwrap();
        let nm = adapted_norm(&a, &d, NormValue::ONE).unwrap();
        let rho = NormValue::pow(Rational::new(-1, 2));
        for v in [["1", "0"], ["0", "1"], ["3", "5"], ["1/2", "7"]] {
            let x: Vec<FieldElement> = v.iter().map(|s| k.parse(s).unwrap()).collect();
            assert_eq!(nm.norm(&a.mul_vec(&x)).unwrap(), nm.norm(&x).unwrap().mul(rho));
        }
        for e in -2..=2 {
            let r = NormValue::from_int_exponent(e);
            assert_eq!(ball_image(&d, &nm, r, 0).unwrap(), r.mul(rho));
        }
    }

    #[test]
    fn ball_identity_for_multiplication_by_p() {
        let k = q(7);
        let a = Matrix::diag(&k, &[k.from_i64(7)]);
        let d = spectral_decompose(&a).unwrap();
        let nm = adapted_norm(&a, &d, NormValue::ONE).unwrap();
        assert_eq!(ball_image(&d, &nm, NormValue::ONE, 0).unwrap(), NormValue::from_int_exponent(-1));
    }
}
