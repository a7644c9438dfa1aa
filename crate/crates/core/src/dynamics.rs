//! Contraction, Levi and anti-contraction parts of a linear map, the big
//! cell, orbits, tidy lattices and the scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::gen;
use crate::linalg::{
    adapted_norm, elementary_divisors, AdaptedNorm, Lattice, Matrix, SpectralDecomposition, Vector,
};
use crate::linalg::matrix::{vec_add, vec_is_negligible, vec_sub};
use crate::norm::{ceil_rational, NormValue, Rational};
use crate::poly::Slope;

/// Bases (as columns) of the linear subgroup models.
#[derive(Clone, Debug)]
pub struct Classification {
    /// `E_{<1}`, including `E_0`.
    pub con: Matrix,
    /// `E_1`.
    pub lev: Matrix,
    /// `E_{>1}`.
    pub con_minus: Matrix,
    /// `E_{≤1}`.
    pub parb: Matrix,
    /// `E_{≥1}`.
    pub parb_minus: Matrix,
}

pub fn classify(dec: &SpectralDecomposition) -> Classification {
    Classification {
        con: dec.span_where(|r| *r < NormValue::ONE),
        lev: dec.span_where(|r| *r == NormValue::ONE),
        con_minus: dec.span_where(|r| *r > NormValue::ONE),
        parb: dec.span_where(|r| *r <= NormValue::ONE),
        parb_minus: dec.span_where(|r| *r >= NormValue::ONE),
    }
}

/// `x = s + c + u` with `s ∈ E_{<1}`, `c ∈ E_1`, `u ∈ E_{>1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BigCell {
    pub s: Vector,
    pub c: Vector,
    pub u: Vector,
}

pub fn big_cell_decompose(dec: &SpectralDecomposition, x: &[FieldElement]) -> BigCell {
    let k = dec.change_of_basis.field();
    let n = dec.dim();
    let zero = vec![k.zero(); n];
    let (mut s, mut c, mut u) = (zero.clone(), zero.clone(), zero);
    for (comp, part) in dec.components.iter().zip(dec.split(x)) {
        let rho = comp.char_value();
        let target = if rho < NormValue::ONE {
            &mut s
        } else if rho == NormValue::ONE {
            &mut c
        } else {
            &mut u
        };
        *target = vec_add(target, &part);
    }
    BigCell { s, c, u }
}

pub fn forward_orbit(a: &Matrix, x: &[FieldElement], k: usize) -> Vec<Vector> {
    let mut out = vec![x.to_vec()];
    for i in 0..k {
        let next = a.mul_vec(&out[i]);
        out.push(next);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitCertificate {
    /// `x = 0`.
    Fixed,
    /// `‖A^k x‖ ≤ rate^k·‖x‖`; `x ∈ E_{<1}`.
    Contracting { rate: String, checked_steps: usize },
    /// Nonzero `E_1` part and no `E_{>1}` part.
    Bounded { checked_steps: usize },
    /// Nonzero `E_{>1}` part; grows like `rate^k` eventually.
    Escaping { rate: String, checked_steps: usize },
}

/// A norm known exactly, or only bounded when the vector is zero at precision.
#[derive(Clone, Copy, Debug, Default)]
struct Measured {
    exact: Option<NormValue>,
    bound: Option<NormValue>,
}

impl Measured {
    fn exact(v: NormValue) -> Self {
        Measured { exact: Some(v), bound: None }
    }

    fn of(norm: &AdaptedNorm, v: &[FieldElement]) -> Result<Self> {
        if vec_is_negligible(v) {
            Ok(Measured {
                exact: None,
                bound: Some(norm.norm.norm_bound(v)),
            })
        } else {
            Ok(Measured::exact(norm.norm(v)?))
        }
    }

    fn max(self, other: Self) -> Self {
        let pick = |a: Option<NormValue>, b: Option<NormValue>| match (a, b) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, None) => x,
            (None, y) => y,
        };
        Measured {
            exact: pick(self.exact, other.exact),
            bound: pick(self.bound, other.bound),
        }
    }

    fn agrees_with(&self, predicted: &Measured) -> bool {
        match (self.exact, predicted.exact) {
            // orthogonal parts: the norm is max(p, t) for some t below the bound
            (Some(a), Some(p)) => a >= p && a <= p.max(predicted.bound.unwrap_or(NormValue::Zero)),
            (None, None) => true,
            (Some(a), None) => predicted.bound.is_some_and(|b| a <= b),
            (None, Some(p)) => self.bound.is_some_and(|b| p <= b),
        }
    }

    fn describe(&self) -> String {
        match (self.exact, self.bound) {
            (Some(e), _) => e.to_string(),
            (None, Some(b)) => format!("<= {b}"),
            (None, None) => "0".into(),
        }
    }
}

/// Classify the forward orbit of `x` from its component projections and
/// verify the predicted norms `‖A^k x‖` exactly for `k` up to
/// `dim E_0 + max denominator + 1`.
pub fn orbit_certificate(
    a: &Matrix,
    dec: &SpectralDecomposition,
    norm: &AdaptedNorm,
    x: &[FieldElement],
) -> Result<OrbitCertificate> {
    let parts = dec.split(x);
    let nonzero: Vec<bool> = parts.iter().map(|p| !vec_is_negligible(p)).collect();
    if nonzero.iter().all(|z| !z) {
        return Ok(OrbitCertificate::Fixed);
    }
    let steps = horizon(dec);
    let mut part_norms = Vec::new();
    for (p, nz) in parts.iter().zip(&nonzero) {
        part_norms.push(if *nz { norm.norm(p)? } else { NormValue::Zero });
    }
    let x_norm = norm.norm(x)?;
    let mut e0_orbit: Option<Vec<Vector>> = None;
    if let Some(z) = dec.zero_component() {
        e0_orbit = Some(forward_orbit(a, &parts[z], steps));
    }
    let orbit = forward_orbit(a, x, steps);
    let mut max_rho = NormValue::Zero;
    let mut rate = NormValue::Zero;
    for (i, comp) in dec.components.iter().enumerate() {
        if !nonzero[i] {
            continue;
        }
        let rho = comp.char_value();
        max_rho = max_rho.max(rho);
        let r = if rho.is_zero() { norm.parts[i].op_norm } else { rho };
        rate = rate.max(r);
    }
    for (k, y) in orbit.iter().enumerate().skip(1) {
        // exact prediction from the determined terms; a dead nilpotent part
        // only contributes an upper bound
        let mut predicted = Measured::default();
        for (i, comp) in dec.components.iter().enumerate() {
            if !nonzero[i] {
                continue;
            }
            let term = if comp.slope == Slope::ZeroRoot {
                Measured::of(norm, &e0_orbit.as_ref().unwrap()[k])?
            } else {
                Measured::exact(part_norms[i].mul(comp.char_value().powi(k as i64)))
            };
            predicted = predicted.max(term);
        }
        let actual = Measured::of(norm, y)?;
        if !actual.agrees_with(&predicted) {
            return Err(Error::CertificationFailed(format!(
                "orbit step {k}: norm {} differs from the predicted {}",
                actual.describe(),
                predicted.describe()
            )));
        }
        let over = actual.exact.is_some_and(|e| e > rate.powi(k as i64).mul(x_norm));
        if max_rho < NormValue::ONE && over {
            return Err(Error::CertificationFailed(format!("orbit step {k} violates the contraction rate")));
        }
    }
    Ok(if max_rho < NormValue::ONE {
        OrbitCertificate::Contracting {
            rate: rate.to_string(),
            checked_steps: steps,
        }
    } else if max_rho == NormValue::ONE {
        OrbitCertificate::Bounded { checked_steps: steps }
    } else {
        OrbitCertificate::Escaping {
            rate: max_rho.to_string(),
            checked_steps: steps,
        }
    })
}

/// Steps after which the nilpotent part has died and every fractional
/// slope has completed a full period.
pub fn horizon(dec: &SpectralDecomposition) -> usize {
    let mut h = 0usize;
    for c in &dec.components {
        let span = match c.slope {
            Slope::ZeroRoot => c.multiplicity,
            Slope::Finite(s) => *s.denom() as usize,
        };
        h = h.max(span);
    }
    h + 1
}

#[derive(Clone, Debug, PartialEq)]
pub enum Regressive {
    /// `x_0 = x, x_{-1}, …, x_{-k}` with `A·x_{-n} = x_{-n+1}`.
    Trajectory(Vec<Vector>),
    /// `x_{-(step-1)}` has no preimage; its part on `component` leaves the image.
    NoPreimage { step: usize, component: Slope },
}

/// Canonical regressive trajectory: inverse of `A` on `E_ρ`, `ρ > 0`, and a
/// step-by-step preimage inside `E_0`.
pub fn regressive_trajectory(a: &Matrix, dec: &SpectralDecomposition, x: &[FieldElement], k: usize) -> Result<Regressive> {
    let field = a.field();
    let mut coords = dec.coordinates(x);
    let mut inverses = Vec::new();
    for c in &dec.components {
        inverses.push(match c.slope {
            Slope::ZeroRoot => None,
            Slope::Finite(_) => Some(c.block.inverse()?),
        });
    }
    let mut out = vec![x.to_vec()];
    for step in 1..=k {
        let mut next = vec![field.zero(); coords.len()];
        for (i, comp) in dec.components.iter().enumerate() {
            let r = dec.range(i);
            let cur = &coords[r.clone()];
            let pre = match &inverses[i] {
                Some(inv) => inv.mul_vec(cur),
                None => match solve_in(&comp.block, cur)? {
                    Some(y) => y,
                    None => {
                        return Ok(Regressive::NoPreimage {
                            step,
                            component: comp.slope,
                        })
                    }
                },
            };
            for (j, v) in r.zip(pre) {
                next[j] = v;
            }
        }
        let y = dec.change_of_basis.mul_vec(&next);
        if !vec_is_negligible(&vec_sub(&a.mul_vec(&y), out.last().unwrap())) {
            return Err(Error::CertificationFailed(format!("regressive step {step} is not a preimage")));
        }
        out.push(y);
        coords = next;
    }
    Ok(Regressive::Trajectory(out))
}

/// Some `y` with `N·y = b`, or `None` when `b ∉ im N`.
fn solve_in(n: &Matrix, b: &[FieldElement]) -> Result<Option<Vector>> {
    let m = n.rows();
    let aug = n.hcat(&Matrix::from_columns(n.field(), m, &[b.to_vec()]));
    let r = aug.rref_val()?;
    if r.pivots.last() == Some(&n.cols()) {
        return Ok(None);
    }
    let mut y = vec![n.field().zero(); n.cols()];
    for (row, &pc) in r.pivots.iter().enumerate() {
        y[pc] = r.reduced.get(row, n.cols()).clone();
    }
    Ok(Some(y))
}

/// Exponent `m` of the index `[A(L) : A(L) ∩ L] = [A(L) + L : L] = q^m`.
pub fn displacement_index(a: &Matrix, l: &Lattice) -> Result<i64> {
    let n = a.rows();
    let linv = l.basis().inverse()?;
    let moved = &linv * &(a * l.basis());
    let gens = moved.hcat(&Matrix::identity(a.field(), n));
    let d = elementary_divisors(&gens);
    if d.len() != n {
        return Err(Error::precision("displacement lattice rank undetermined"));
    }
    if d.iter().any(|&e| e > 0) {
        return Err(Error::CertificationFailed("A(L) + L does not contain L".into()));
    }
    Ok(-d.iter().sum::<i64>())
}

#[derive(Clone, Debug)]
pub struct TidyLattice {
    pub u: Lattice,
    /// Columns generating `U ∩ E_{≤1}`.
    pub u_minus: Matrix,
    /// Columns generating `U ∩ E_{≥1}`.
    pub u_plus: Matrix,
    /// Exponent of `[A(U) : A(U) ∩ U]`.
    pub index_exponent: i64,
    /// Number of steps over which forward and regressive containments were checked.
    pub horizon: usize,
}

/// `U` = unit ball of the adapted norm, split along `E_{≤1}` and `E_{≥1}`.
pub fn tidy_lattice(a: &Matrix, dec: &SpectralDecomposition, norm: &AdaptedNorm) -> Result<TidyLattice> {
    let k = a.field();
    let n = a.rows();
    let mut minus = Vec::new();
    let mut plus = Vec::new();
    let mut all = Vec::new();
    let mut offset = 0;
    let mut kinds = Vec::new();
    for (comp, part) in dec.components.iter().zip(&norm.parts) {
        let rho = comp.char_value();
        for e in &part.local.exponents {
            let v: Vector = norm
                .norm
                .basis
                .column(offset)
                .iter()
                .map(|x| x.mul_pi_pow(ceil_rational(e)))
                .collect();
            if rho <= NormValue::ONE {
                minus.push(v.clone());
            }
            if rho >= NormValue::ONE {
                plus.push(v.clone());
            }
            kinds.push(rho);
            all.push(v);
            offset += 1;
        }
    }
    let u = Lattice::new(&Matrix::from_columns(k, n, &all))?;
    let u_minus = Matrix::from_columns(k, n, &minus);
    let u_plus = Matrix::from_columns(k, n, &plus);
    if !Lattice::new(&u_minus.hcat(&u_plus))?.same_as(&u)? {
        return Err(Error::CertificationFailed("U ≠ U_+ + U_-".into()));
    }
    let h = horizon(dec);
    for (v, rho) in all.iter().zip(&kinds) {
        // forward: stays in U iff ρ ≤ 1
        let orbit = forward_orbit(a, v, h);
        let stays = orbit.iter().skip(1).map(|y| u.contains_vector(y)).collect::<Result<Vec<_>>>()?;
        if *rho <= NormValue::ONE && !stays.iter().all(|&b| b) {
            return Err(Error::CertificationFailed("U_- is not forward invariant".into()));
        }
        if *rho > NormValue::ONE && stays.iter().all(|&b| b) {
            return Err(Error::CertificationFailed(format!("a vector of E_>1 stays in U for {h} steps")));
        }
        // backward: the canonical regressive trajectory stays in U iff ρ ≥ 1
        match regressive_trajectory(a, dec, v, h)? {
            Regressive::Trajectory(t) => {
                let stays = t.iter().skip(1).map(|y| u.contains_vector(y)).collect::<Result<Vec<_>>>()?;
                if *rho >= NormValue::ONE && !stays.iter().all(|&b| b) {
                    return Err(Error::CertificationFailed("U_+ regressive trajectory leaves U".into()));
                }
                if *rho < NormValue::ONE && stays.iter().all(|&b| b) {
                    return Err(Error::CertificationFailed(format!(
                        "a vector of E_<1 has a regressive trajectory inside U for {h} steps"
                    )));
                }
            }
            Regressive::NoPreimage { .. } => {
                if !rho.is_zero() {
                    return Err(Error::CertificationFailed("missing preimage outside E_0".into()));
                }
            }
        }
    }
    let index_exponent = displacement_index(a, &u)?;
    Ok(TidyLattice {
        u,
        u_minus,
        u_plus,
        index_exponent,
        horizon: h,
    })
}

/// `base^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScaleValue {
    pub base: u64,
    pub exponent: i64,
}

/// `Σ_{s<0} (−s)·mult`.
pub fn scale_closed_form(dec: &SpectralDecomposition) -> i64 {
    let mut total = Rational::from_integer(0);
    for c in &dec.components {
        if let Slope::Finite(s) = c.slope {
            if s < Rational::from_integer(0) {
                total += -s * Rational::from_integer(c.multiplicity as i64);
            }
        }
    }
    assert!(total.is_integer(), "segment lengths are multiples of slope denominators");
    total.to_integer()
}

/// The scale, computed from the slopes, from `−val det(A|E_{>1})` and as the
/// displacement index of the tidy lattice; all three must agree.
pub fn scale(a: &Matrix, dec: &SpectralDecomposition) -> Result<ScaleValue> {
    let closed = scale_closed_form(dec);
    let mut det_val = 0;
    for c in &dec.components {
        if c.char_value() > NormValue::ONE {
            det_val += c
                .block
                .det()
                .val()
                .ok_or_else(|| Error::precision("determinant on E_>1 undetermined"))?;
        }
    }
    let norm = adapted_norm(a, dec, NormValue::ONE)?;
    let tidy = tidy_lattice(a, dec, &norm)?;
    if closed != -det_val || closed != tidy.index_exponent {
        return Err(Error::CertificationFailed(format!(
            "scale routes disagree: slopes {closed}, determinant {}, tidy index {}",
            -det_val, tidy.index_exponent
        )));
    }
    Ok(ScaleValue {
        base: a.field().q(),
        exponent: closed,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub seed: u64,
    pub trials: usize,
    pub scale_exponent: i64,
    /// Index exponents, in trial order.
    pub indices: Vec<i64>,
    pub min_index: i64,
    /// Trials reaching the scale.
    pub equalities: usize,
    /// Trials below the scale; must be empty.
    pub violations: Vec<usize>,
}

/// Perturb `U` by random unimodular column mixes and pivot shifts in
/// `[-2, 2]`, and record the displacement index of each perturbation.
/// Trial `t` draws from stream `t` of a generator seeded by `seed`, so
/// serial and concurrent runs agree.
pub fn tidiness_gap(
    a: &Matrix,
    tidy: &TidyLattice,
    scale_exponent: i64,
    trials: usize,
    seed: u64,
    concurrent: bool,
) -> Result<GapReport> {
    let k = a.field();
    let n = a.rows();
    let trial = |t: usize| -> Result<i64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let (g, _) = gen::unimodular(k, &mut rng, n);
        let shifts: Vec<FieldElement> = (0..n).map(|_| k.pi_pow_exact(rng.gen_range(-2..=2))).collect();
        let basis = &(tidy.u.basis() * &g) * &Matrix::diag(k, &shifts);
        displacement_index(a, &Lattice::new(&basis)?)
    };
    let indices: Vec<i64> = if concurrent {
        (0..trials).into_par_iter().map(trial).collect::<Result<Vec<_>>>()?
    } else {
        (0..trials).map(trial).collect::<Result<Vec<_>>>()?
    };
    let violations = indices
        .iter()
        .enumerate()
        .filter(|(_, &m)| m < scale_exponent)
        .map(|(i, _)| i)
        .collect();
    Ok(GapReport {
        seed,
        trials,
        scale_exponent,
        min_index: indices.iter().copied().min().unwrap_or(scale_exponent),
        equalities: indices.iter().filter(|&&m| m == scale_exponent).count(),
        indices,
        violations,
    })
}

/// Basis of `ker(A^n)`, grown one preimage at a time:
/// `K_1 = ker A`, `K_{j+1} = {x : Ax ∈ K_j}`. Forming `A^n` first would
/// lose `n` times the digits and can turn a small pivot into a fake kernel.
pub fn iterated_kernel(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let minus_one = -a.field().one();
    let mut ik = a.rref_val()?.kernel;
    while ik.cols() > 0 && ik.cols() < n {
        // (x, c) with Ax = K c
        let pairs = a.hcat(&ik.scale(&minus_one)).rref_val()?.kernel;
        let pre = pairs.submatrix(0, n, 0, pairs.cols()).rref_val()?.image;
        if pre.cols() == ik.cols() {
            break;
        }
        ik = pre;
    }
    Ok(ik)
}

/// `(A invertible, ik(A) = 0)`; the two must agree.
pub fn etale_iff_trivial_ik(a: &Matrix) -> Result<(bool, bool)> {
    let invertible = match a.inverse() {
        Ok(_) => true,
        Err(Error::InvalidArgument(_)) => false,
        Err(e) => return Err(e),
    };
    let trivial = iterated_kernel(a)?.cols() == 0;
    if invertible != trivial {
        return Err(Error::CertificationFailed(format!(
            "invertible = {invertible} but trivial iterated kernel = {trivial}"
        )));
    }
    Ok((invertible, trivial))
}

/// Kernel laws every decomposition must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KernelLaws {
    pub ker_in_e0: bool,
    pub ik_meets_lev_trivially: bool,
    pub ker_meets_parb_minus_trivially: bool,
    pub invertible_iff_trivial_ik: bool,
}

impl KernelLaws {
    pub fn all_hold(&self) -> bool {
        self.ker_in_e0 && self.ik_meets_lev_trivially && self.ker_meets_parb_minus_trivially && self.invertible_iff_trivial_ik
    }
}

fn rank_of(cols: &[&Matrix], n: usize, k: &crate::Field) -> Result<usize> {
    let mut all = Vec::new();
    for m in cols {
        all.extend(m.columns());
    }
    if all.is_empty() {
        return Ok(0);
    }
    Matrix::from_columns(k, n, &all).rank()
}

pub fn kernel_laws(a: &Matrix, dec: &SpectralDecomposition) -> Result<KernelLaws> {
    let k = a.field();
    let n = a.rows();
    let ker = a.rref_val()?.kernel;
    let ik = iterated_kernel(a)?;
    let cls = classify(dec);
    let e0 = dec.span_where(|r| r.is_zero());
    let ker_in_e0 = rank_of(&[&e0, &ker], n, k)? == e0.cols();
    let ik_lev = rank_of(&[&ik, &cls.lev], n, k)? == ik.cols() + cls.lev.cols();
    let ker_pm = rank_of(&[&ker, &cls.parb_minus], n, k)? == ker.cols() + cls.parb_minus.cols();
    let iff = etale_iff_trivial_ik(a).is_ok();
    Ok(KernelLaws {
        ker_in_e0,
        ik_meets_lev_trivially: ik_lev,
        ker_meets_parb_minus_trivially: ker_pm,
        invertible_iff_trivial_ik: iff,
    })
}

/// Least `n` with `x ∈ A^n(B_r ∩ E_{>1})`, for `x ∈ E_{>1}`; checked by
/// exhibiting `A^-n x` inside the ball.
pub fn exhaustion_bound(
    dec: &SpectralDecomposition,
    norm: &AdaptedNorm,
    x: &[FieldElement],
    r: NormValue,
) -> Result<usize> {
    let Some(u) = r.exponent() else {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    };
    let parts = dec.split(x);
    let mut n = 0i64;
    for (i, comp) in dec.components.iter().enumerate() {
        if vec_is_negligible(&parts[i]) {
            continue;
        }
        if comp.char_value() <= NormValue::ONE {
            return Err(Error::InvalidArgument("vector has a component outside E_>1".into()));
        }
        let sigma = -comp.slope.finite().unwrap();
        let t = norm.norm(&parts[i])?.exponent().unwrap();
        n = n.max(ceil_rational(&((t - u) / sigma)));
    }
    let back = |steps: i64| -> Result<NormValue> {
        let mut coords = dec.coordinates(x);
        for (i, comp) in dec.components.iter().enumerate() {
            let rng = dec.range(i);
            if comp.char_value() <= NormValue::ONE {
                continue;
            }
            let inv = comp.block.inverse()?;
            let mut y = coords[rng.clone()].to_vec();
            for _ in 0..steps {
                y = inv.mul_vec(&y);
            }
            for (j, v) in rng.zip(y) {
                coords[j] = v;
            }
        }
        norm.norm(&dec.change_of_basis.mul_vec(&coords))
    };
    if back(n)? > r || (n > 0 && back(n - 1)? <= r) {
        return Err(Error::CertificationFailed(format!("exhaustion bound {n} is not minimal or not reached")));
    }
    Ok(n as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::linalg::spectral_decompose;

    fn qp(p: u32) -> Field {
        Field::padic(p, 20).unwrap()
    }

    fn hyperbolic_diag(k: &Field) -> Matrix {
        let p = k.p() as i64;
        Matrix::diag(k, &[k.from_i64(p), k.one(), k.from_rational(1, p).unwrap()])
    }

    fn v(k: &Field, xs: &[&str]) -> Vector {
        xs.iter().map(|s| k.parse(s).unwrap()).collect()
    }

    #[test]
    fn classify_diag() {
        let k = qp(3);
        let a = hyperbolic_diag(&k);
        let dec = spectral_decompose(&a).unwrap();
        let c = classify(&dec);
        assert_eq!(c.con.columns(), vec![v(&k, &["1", "0", "0"])]);
        assert_eq!(c.lev.columns(), vec![v(&k, &["0", "1", "0"])]);
        assert_eq!(c.con_minus.columns(), vec![v(&k, &["0", "0", "1"])]);
        assert_eq!((c.parb.cols(), c.parb_minus.cols()), (2, 2));

        let b = Matrix::diag(&k, &[k.from_i64(3), k.from_i64(3)]);
        let c = classify(&spectral_decompose(&b).unwrap());
        assert_eq!((c.con.cols(), c.lev.cols(), c.con_minus.cols()), (2, 0, 0));
        let z = Matrix::zeros(&k, 2, 2);
        let c = classify(&spectral_decompose(&z).unwrap());
        assert_eq!((c.con.cols(), c.lev.cols(), c.con_minus.cols()), (2, 0, 0));
    }

    #[test]
    fn big_cell_of_diag() {
        let k = qp(5);
        let a = hyperbolic_diag(&k);
        let dec = spectral_decompose(&a).unwrap();
        let b = big_cell_decompose(&dec, &v(&k, &["1", "1", "1"]));
        assert_eq!(b.s, v(&k, &["1", "0", "0"]));
        assert_eq!(b.c, v(&k, &["0", "1", "0"]));
        assert_eq!(b.u, v(&k, &["0", "0", "1"]));
        let z = big_cell_decompose(&dec, &v(&k, &["0", "0", "0"]));
        assert!(vec_is_negligible(&z.s) && vec_is_negligible(&z.c) && vec_is_negligible(&z.u));
    }

    #[test]
    fn orbit_certificates() {
        let k = qp(5);
        let a = Matrix::diag(&k, &[k.from_i64(5)]);
        let dec = spectral_decompose(&a).unwrap();
        let nm = adapted_norm(&a, &dec, NormValue::ONE).unwrap();
        let x = v(&k, &["1"]);
        for (n, y) in forward_orbit(&a, &x, 6).iter().enumerate() {
            assert_eq!(nm.norm(y).unwrap(), NormValue::from_int_exponent(-(n as i64)));
        }
        assert_eq!(
            orbit_certificate(&a, &dec, &nm, &x).unwrap(),
            OrbitCertificate::Contracting { rate: "q^-1".into(), checked_steps: 2 }
        );

        let a = hyperbolic_diag(&k);
        let dec = spectral_decompose(&a).unwrap();
        let nm = adapted_norm(&a, &dec, NormValue::ONE).unwrap();
        assert!(matches!(
            orbit_certificate(&a, &dec, &nm, &v(&k, &["0", "7", "0"])).unwrap(),
            OrbitCertificate::Bounded { .. }
        ));
        let e3 = v(&k, &["0", "0", "1"]);
        assert!(matches!(
            orbit_certificate(&a, &dec, &nm, &e3).unwrap(),
            OrbitCertificate::Escaping { ref rate, .. } if rate == "q^1"
        ));
        for (n, y) in forward_orbit(&a, &e3, 5).iter().enumerate() {
            assert_eq!(nm.norm(y).unwrap(), NormValue::from_int_exponent(n as i64));
        }
        assert_eq!(orbit_certificate(&a, &dec, &nm, &v(&k, &["0", "0", "0"])).unwrap(), OrbitCertificate::Fixed);
    }

    #[test]
    fn regressive_trajectories() {
        let k = qp(3);
        let a = hyperbolic_diag(&k);
        let dec = spectral_decompose(&a).unwrap();
        let Regressive::Trajectory(t) = regressive_trajectory(&a, &dec, &v(&k, &["0", "0", "1"]), 4).unwrap() else {
            panic!("expected a trajectory");
        };
        for (n, y) in t.iter().enumerate() {
            let expect = vec![k.zero(), k.zero(), k.from_i64(3i64.pow(n as u32))];
            assert!(vec_is_negligible(&vec_sub(y, &expect)));
        }

        let nil = Matrix::parse(&k, &[vec!["0", "1"], vec!["0", "0"]]).unwrap();
        let dec = spectral_decompose(&nil).unwrap();
        assert_eq!(
            regressive_trajectory(&nil, &dec, &v(&k, &["0", "1"]), 3).unwrap(),
            Regressive::NoPreimage { step: 1, component: Slope::ZeroRoot }
        );
    }

    #[test]
    fn displacement_examples() {
        let k = qp(3);
        let std1 = Lattice::standard(&k, 1);
        let up = Matrix::diag(&k, &[k.from_rational(1, 3).unwrap()]);
        assert_eq!(displacement_index(&up, &std1).unwrap(), 1);
        let down = Matrix::diag(&k, &[k.from_i64(3)]);
        assert_eq!(displacement_index(&down, &std1).unwrap(), 0);
        let a = hyperbolic_diag(&k);
        assert_eq!(displacement_index(&a, &Lattice::standard(&k, 3)).unwrap(), 1);
    }

    #[test]
    fn tidy_lattice_of_diag() {
        let k = qp(3);
        let a = hyperbolic_diag(&k);
        let dec = spectral_decompose(&a).unwrap();
        let nm = adapted_norm(&a, &dec, NormValue::ONE).unwrap();
        let t = tidy_lattice(&a, &dec, &nm).unwrap();
        assert!(t.u.same_as(&Lattice::standard(&k, 3)).unwrap());
        let um = Lattice::new(&t.u_minus.hcat(&Matrix::diag(&k, &[k.zero(), k.zero(), k.one()]))).unwrap();
        assert!(um.same_as(&Lattice::standard(&k, 3)).unwrap());
        let span = |m: &Matrix| -> Vec<usize> {
            let mut s: Vec<usize> = m.columns().iter().map(|c| c.iter().position(|x| !x.is_exact_zero()).unwrap()).collect();
            s.sort();
            s
        };
        assert_eq!(span(&t.u_minus), vec![0, 1]);
        assert_eq!(span(&t.u_plus), vec![1, 2]);
        assert_eq!(t.index_exponent, 1);

        let z = Matrix::zeros(&k, 2, 2);
        let dz = spectral_decompose(&z).unwrap();
        let tz = tidy_lattice(&z, &dz, &adapted_norm(&z, &dz, NormValue::ONE).unwrap()).unwrap();
        assert_eq!((tz.u_minus.cols(), tz.u_plus.cols(), tz.index_exponent), (2, 0, 0));
    }

    #[test]
    fn scales() {
        let k = qp(3);
        let a = hyperbolic_diag(&k);
        let dec = spectral_decompose(&a).unwrap();
        assert_eq!(scale(&a, &dec).unwrap(), ScaleValue { base: 3, exponent: 1 });
        let b = Matrix::diag(&k, &[k.from_i64(3), k.one()]);
        assert_eq!(scale(&b, &spectral_decompose(&b).unwrap()).unwrap().exponent, 0);

        let f = Field::laurent(2, 1, 20).unwrap();
        let c = Matrix::diag(&f, &[f.parse("t^-1").unwrap(), f.parse("t").unwrap()]);
        assert_eq!(scale(&c, &spectral_decompose(&c).unwrap()).unwrap(), ScaleValue { base: 2, exponent: 1 });
    }

    #[test]
    fn perturbations_never_beat_the_scale() {
        let k = qp(3);
        let a = hyperbolic_diag(&k);
        let dec = spectral_decompose(&a).unwrap();
        let nm = adapted_norm(&a, &dec, NormValue::ONE).unwrap();
        let t = tidy_lattice(&a, &dec, &nm).unwrap();
        let skew = Lattice::new(&Matrix::diag(&k, &[k.one(), k.one(), k.from_i64(3)])).unwrap();
        assert!(displacement_index(&a, &skew).unwrap() >= 1);
        let serial = tidiness_gap(&a, &t, 1, 100, 11, false).unwrap();
        let parallel = tidiness_gap(&a, &t, 1, 100, 11, true).unwrap();
        assert_eq!(serial, parallel);
        assert!(serial.violations.is_empty());
        assert_eq!(serial.min_index, 1);
    }

    #[test]
    fn kernels() {
        let k = qp(3);
        assert_eq!(etale_iff_trivial_ik(&Matrix::diag(&k, &[k.from_i64(3)])).unwrap(), (true, true));
        assert_eq!(iterated_kernel(&Matrix::zeros(&k, 2, 2)).unwrap().cols(), 2);
        let f = Matrix::parse(&k, &[vec!["0", "1"], vec!["0", "1"]]).unwrap();
        assert_eq!(etale_iff_trivial_ik(&f).unwrap(), (false, false));
        assert_eq!(iterated_kernel(&f).unwrap().column(0), v(&k, &["1", "0"]));
        let laws = kernel_laws(&f, &spectral_decompose(&f).unwrap()).unwrap();
        assert!(laws.all_hold());
        // a Jordan chain needs every preimage step
        let j = Matrix::parse(&k, &[vec!["0", "1", "0"], vec!["0", "0", "1"], vec!["0", "0", "0"]]).unwrap();
        assert_eq!(iterated_kernel(&j).unwrap().cols(), 3);
        let m = Matrix::parse(&k, &[vec!["0", "1", "5"], vec!["0", "0", "1/3"], vec!["0", "0", "9"]]).unwrap();
        assert_eq!(iterated_kernel(&m).unwrap().cols(), 2);
    }

    #[test]
    fn exhaustion() {
        let k = qp(3);
        let a = hyperbolic_diag(&k);
        let dec = spectral_decompose(&a).unwrap();
        let nm = adapted_norm(&a, &dec, NormValue::ONE).unwrap();
        let r = NormValue::ONE;
        assert_eq!(exhaustion_bound(&dec, &nm, &v(&k, &["0", "0", "1"]), r).unwrap(), 0);
        assert_eq!(exhaustion_bound(&dec, &nm, &v(&k, &["0", "0", "1/3"]), r).unwrap(), 1);
        assert_eq!(exhaustion_bound(&dec, &nm, &v(&k, &["0", "0", "1/27"]), r).unwrap(), 3);
        assert!(exhaustion_bound(&dec, &nm, &v(&k, &["1", "0", "1"]), r).is_err());
    }
}
