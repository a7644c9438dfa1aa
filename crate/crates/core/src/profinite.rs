//! Truncated models of compact groups built from a finite field `F`:
//! two-sided sequences `F^Z` seen through a finite window, power series
//! known modulo `X^N`, and the level-one congruence subgroup of `SL_2(F_2((X)))`.
//!
//! Every value carries its scope (window or truncation). Results are exact
//! statements about the representative and never about the untruncated group.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldElement, ResidueField, Valuation};

/// Coefficients of `(a_k)_{k∈Z}` known on `lo..hi`.
#[derive(Clone, Debug)]
pub struct Window {
    field: Arc<ResidueField>,
    lo: i64,
    hi: i64,
    coeffs: Vec<u32>,
}

impl PartialEq for Window {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.lo == other.lo && self.hi == other.hi && self.coeffs == other.coeffs
    }
}

impl Window {
    pub fn new(field: Arc<ResidueField>, lo: i64, coeffs: Vec<u32>) -> Result<Window> {
        if coeffs.is_empty() {
            return Err(Error::Range("empty window".into()));
        }
        if coeffs.iter().any(|&c| c >= field.q()) {
            return Err(Error::InvalidArgument(format!("coefficient outside F_{}", field.q())));
        }
        let hi = lo + coeffs.len() as i64;
        Ok(Window { field, lo, hi, coeffs })
    }

    /// The sequence with the given support (all coefficients 1).
    pub fn indicator(field: Arc<ResidueField>, lo: i64, hi: i64, support: &[i64]) -> Result<Window> {
        if lo >= hi {
            return Err(Error::Range(format!("window [{lo},{hi}) is empty")));
        }
        let mut c = vec![0; (hi - lo) as usize];
        for &i in support {
            if i < lo || i >= hi {
                return Err(Error::Range(format!("index {i} outside [{lo},{hi})")));
            }
            c[(i - lo) as usize] = 1;
        }
        Window::new(field, lo, c)
    }

    pub fn random<R: Rng>(field: Arc<ResidueField>, lo: i64, hi: i64, rng: &mut R) -> Result<Window> {
        let q = field.q();
        let c = (lo..hi).map(|_| rng.gen_range(0..q)).collect();
        Window::new(field, lo, c)
    }

    pub fn field(&self) -> &ResidueField {
        &self.field
    }

    pub fn range(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn get(&self, i: i64) -> Option<u32> {
        (self.lo <= i && i < self.hi).then(|| self.coeffs[(i - self.lo) as usize])
    }

    /// Indices with a nonzero coefficient.
    pub fn support(&self) -> Vec<i64> {
        (self.lo..self.hi).filter(|&i| self.get(i) != Some(0)).collect()
    }

    /// The same representative seen through the smaller window `lo..hi`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<Window> {
        if lo < self.lo || hi > self.hi || lo >= hi {
            return Err(Error::Range(format!(
                "[{lo},{hi}) is not a nonempty part of [{},{})",
                self.lo, self.hi
            )));
        }
        let c = self.coeffs[(lo - self.lo) as usize..(hi - self.lo) as usize].to_vec();
        Window::new(self.field.clone(), lo, c)
    }
}

/// Right shift `(a_k) ↦ (a_{k-1})`: the window moves one step to the right.
pub fn two_sided_shift(w: &Window) -> Window {
    Window {
        field: w.field.clone(),
        lo: w.lo + 1,
        hi: w.hi + 1,
        coeffs: w.coeffs.clone(),
    }
}

/// Inverse of [`two_sided_shift`].
pub fn two_sided_unshift(w: &Window) -> Window {
    Window {
        field: w.field.clone(),
        lo: w.lo - 1,
        hi: w.hi - 1,
        coeffs: w.coeffs.clone(),
    }
}

/// A power series `Σ a_k X^k` known modulo `X^trunc`, with `a_k = 0` for
/// `k < start` (`start = 1` models `X·F[[X]]`).
#[derive(Clone, Debug)]
pub struct SeriesTrunc {
    field: Arc<ResidueField>,
    start: usize,
    coeffs: Vec<u32>,
}

impl PartialEq for SeriesTrunc {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.start == other.start && self.coeffs == other.coeffs
    }
}

impl SeriesTrunc {
    /// `coeffs[k]` is the coefficient of `X^k`; its length is the truncation.
    pub fn new(field: Arc<ResidueField>, start: usize, coeffs: Vec<u32>) -> Result<SeriesTrunc> {
        if coeffs.iter().any(|&c| c >= field.q()) {
            return Err(Error::InvalidArgument(format!("coefficient outside F_{}", field.q())));
        }
        if coeffs.iter().take(start).any(|&c| c != 0) {
            return Err(Error::Range(format!("nonzero coefficient below X^{start}")));
        }
        Ok(SeriesTrunc { field, start, coeffs })
    }

    pub fn zero(field: Arc<ResidueField>, start: usize, trunc: usize) -> SeriesTrunc {
        SeriesTrunc {
            field,
            start,
            coeffs: vec![0; trunc],
        }
    }

    /// `X^k` modulo `X^trunc`.
    pub fn monomial(field: Arc<ResidueField>, k: usize, trunc: usize) -> SeriesTrunc {
        let mut s = SeriesTrunc::zero(field, 0, trunc);
        if k < trunc {
            s.coeffs[k] = 1;
        }
        s
    }

    pub fn random<R: Rng>(field: Arc<ResidueField>, start: usize, trunc: usize, rng: &mut R) -> SeriesTrunc {
        let q = field.q();
        let coeffs = (0..trunc).map(|k| if k < start { 0 } else { rng.gen_range(0..q) }).collect();
        SeriesTrunc { field, start, coeffs }
    }

    pub fn field(&self) -> &ResidueField {
        &self.field
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Option<u32> {
        self.coeffs.get(k).copied()
    }

    /// Index of the first nonzero coefficient, or `None` if zero at truncation.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0)
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    /// Keep the coefficients below `X^n` (`n ≤ trunc`).
    pub fn truncate(&self, n: usize) -> SeriesTrunc {
        let mut s = self.clone();
        s.coeffs.truncate(n);
        s
    }

    /// The same series regarded as an element of `F[[X]]`.
    pub fn relax(&self) -> SeriesTrunc {
        SeriesTrunc { start: 0, ..self.clone() }
    }

    fn check(&self, other: &SeriesTrunc) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &SeriesTrunc) -> Result<SeriesTrunc> {
        self.check(other)?;
        let n = self.trunc().min(other.trunc());
        let f = &self.field;
        Ok(SeriesTrunc {
            field: self.field.clone(),
            start: self.start.min(other.start),
            coeffs: (0..n).map(|k| f.add(self.coeffs[k], other.coeffs[k])).collect(),
        })
    }

    pub fn sub(&self, other: &SeriesTrunc) -> Result<SeriesTrunc> {
        self.check(other)?;
        let n = self.trunc().min(other.trunc());
        let f = &self.field;
        Ok(SeriesTrunc {
            field: self.field.clone(),
            start: 0,
            coeffs: (0..n).map(|k| f.sub(self.coeffs[k], other.coeffs[k])).collect(),
        })
    }

    /// Product modulo `X^min(trunc)` (more is known when a factor has
    /// positive valuation, but the shorter truncation is kept).
    pub fn mul(&self, other: &SeriesTrunc) -> Result<SeriesTrunc> {
        self.check(other)?;
        let n = self.trunc().min(other.trunc());
        let f = &self.field;
        let mut c = vec![0u32; n];
        for (i, &a) in self.coeffs.iter().enumerate().take(n) {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(n - i) {
                c[i + j] = f.add(c[i + j], f.mul(a, b));
            }
        }
        Ok(SeriesTrunc {
            field: self.field.clone(),
            start: 0,
            coeffs: c,
        })
    }

    /// Inverse of a series with nonzero constant term.
    pub fn inverse(&self) -> Result<SeriesTrunc> {
        let f = &self.field;
        let n = self.trunc();
        let a0 = self.coeffs.first().copied().unwrap_or(0);
        let inv0 = f.inv(a0).ok_or(Error::DivisionByZero)?;
        let mut b = vec![0u32; n];
        b[0] = inv0;
        for k in 1..n {
            let mut s = 0;
            for i in 1..=k {
                s = f.add(s, f.mul(self.coeffs[i], b[k - i]));
            }
            b[k] = f.mul(f.neg(s), inv0);
        }
        Ok(SeriesTrunc {
            field: self.field.clone(),
            start: 0,
            coeffs: b,
        })
    }

    /// Multiplication by `X`: one more coefficient becomes known.
    pub fn mul_by_x(&self) -> SeriesTrunc {
        let mut c = vec![0];
        c.extend_from_slice(&self.coeffs);
        SeriesTrunc {
            field: self.field.clone(),
            start: self.start + 1,
            coeffs: c,
        }
    }
}

impl fmt::Display for SeriesTrunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let x = match k {
                0 => String::new(),
                1 => "X".to_string(),
                _ => format!("X^{k}"),
            };
            terms.push(match (c, k) {
                (_, 0) => c.to_string(),
                (1, _) => x,
                _ => format!("{c}*{x}"),
            });
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        write!(f, "{} + O(X^{})", terms.join(" + "), self.trunc())
    }
}

/// `φ(a) = (Σ_{k≥1} a_{-k} X^k, Σ_{k≥0} a_k X^k)` on the window `[-m, m)`.
///
/// The window must be exactly symmetric; the parts are known modulo
/// `X^{m+1}` and `X^m`.
pub fn phi_split(w: &Window) -> Result<(SeriesTrunc, SeriesTrunc)> {
    let (lo, hi) = w.range();
    if lo != -hi || hi < 1 {
        return Err(Error::Range(format!("window [{lo},{hi}) is not of the form [-m,m) with m ≥ 1")));
    }
    let m = hi as usize;
    let mut neg = vec![0u32; m + 1];
    for (k, c) in neg.iter_mut().enumerate().skip(1) {
        *c = w.get(-(k as i64)).unwrap();
    }
    let pos = (0..m).map(|k| w.get(k as i64).unwrap()).collect();
    Ok((
        SeriesTrunc::new(w.field.clone(), 1, neg)?,
        SeriesTrunc::new(w.field.clone(), 0, pos)?,
    ))
}

/// Inverse of [`phi_split`].
pub fn phi_join(z: &SeriesTrunc, w: &SeriesTrunc) -> Result<Window> {
    if z.field != w.field {
        return Err(Error::FieldMismatch);
    }
    let m = w.trunc();
    if z.trunc() != m + 1 || z.coeff(0).is_some_and(|c| c != 0) {
        return Err(Error::Range(format!(
            "parts known modulo X^{} and X^{m} do not come from a symmetric window",
            z.trunc()
        )));
    }
    let mut c: Vec<u32> = (1..=m).rev().map(|k| z.coeffs[k]).collect();
    c.extend_from_slice(&w.coeffs);
    Window::new(w.field.clone(), -(m as i64), c)
}

/// The linear map `(z, w) ↦ (X^{-1} z, X w)`, defined where `X^{-1} z` stays
/// in `X·F[[X]]` (the coefficient of `X` in `z` vanishes). Returns `None`
/// outside that open set.
pub fn chart_shift(z: &SeriesTrunc, w: &SeriesTrunc) -> Option<(SeriesTrunc, SeriesTrunc)> {
    if z.coeff(1).unwrap_or(0) != 0 {
        return None;
    }
    let mut zc = z.coeffs[1..].to_vec();
    zc[0] = 0;
    Some((
        SeriesTrunc {
            field: z.field.clone(),
            start: 1,
            coeffs: zc,
        },
        w.mul_by_x().relax(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConKind {
    /// Zero at both edges of the window.
    FiniteSupport,
    /// Zero at the left edge only: support looks bounded to the left.
    InConAtScope,
    /// Zero at the right edge only: support looks bounded to the right.
    InConMinusAtScope,
    Undecided,
}

/// Membership evidence for the right shift, read off one window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConCertificate {
    pub kind: ConKind,
    /// `[lo, hi)`.
    pub window: (i64, i64),
    /// Smallest and largest index with a nonzero coefficient.
    pub support: Option<(i64, i64)>,
    pub scope: String,
}

/// Classify the representative seen in `w`. A finite window never decides
/// membership of the full sequence; the certificate says so.
pub fn con_certificate(w: &Window) -> ConCertificate {
    let (lo, hi) = w.range();
    let s = w.support();
    let support = s.first().map(|&a| (a, *s.last().unwrap()));
    let left_clear = w.get(lo) == Some(0);
    let right_clear = w.get(hi - 1) == Some(0);
    let kind = match (left_clear, right_clear) {
        (true, true) => ConKind::FiniteSupport,
        (true, false) => ConKind::InConAtScope,
        (false, true) => ConKind::InConMinusAtScope,
        (false, false) => ConKind::Undecided,
    };
    ConCertificate {
        kind,
        window: (lo, hi),
        support,
        scope: format!("window [{lo},{hi}) only; coefficients outside it are unknown"),
    }
}

/// Left shift `Σ a_k X^k ↦ Σ a_{k+1} X^k`; the truncation drops by one.
pub fn left_shift_series(s: &SeriesTrunc) -> SeriesTrunc {
    SeriesTrunc {
        field: s.field.clone(),
        start: 0,
        coeffs: s.coeffs.iter().skip(1).copied().collect(),
    }
}

/// Valuations of `z, pz, …, p^n z` in `Z_p`.
pub fn mul_by_p_orbit(z: &FieldElement, n: usize) -> Result<Vec<Valuation>> {
    if z.val().is_some_and(|v| v < 0) {
        return Err(Error::InvalidArgument("z must lie in Z_p".into()));
    }
    let p = z.field().pi_pow_exact(1);
    let mut out = Vec::with_capacity(n + 1);
    let mut x = z.clone();
    for _ in 0..=n {
        out.push(x.valuation());
        x = &x * &p;
    }
    Ok(out)
}

/// A value computed at a fixed truncation, with a note when terms that were
/// known had to be dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Truncated<T> {
    pub value: T,
    pub truncation_loss: bool,
}

/// Frobenius `Σ a_k X^k ↦ Σ a_k^p X^{pk}`, kept at the input truncation.
pub fn frobenius_series(s: &SeriesTrunc) -> Truncated<SeriesTrunc> {
    let f = &s.field;
    let p = f.p() as usize;
    let n = s.trunc();
    let mut c = vec![0u32; n];
    let mut loss = false;
    for (k, &a) in s.coeffs.iter().enumerate() {
        if a == 0 {
            continue;
        }
        if p * k < n {
            c[p * k] = f.frobenius(a);
        } else {
            loss = true;
        }
    }
    Truncated {
        value: SeriesTrunc {
            field: s.field.clone(),
            start: s.start,
            coeffs: c,
        },
        truncation_loss: loss,
    }
}

/// The linear term of `z ↦ z^p` at 0 vanishes: the `X` coefficient of the
/// image of `c·X` is 0 for every `c ∈ F`.
pub fn frobenius_derivative_vanishes(field: Arc<ResidueField>) -> bool {
    (0..field.q()).all(|c| {
        let s = SeriesTrunc {
            field: field.clone(),
            start: 1,
            coeffs: vec![0, c, 0],
        };
        frobenius_series(&s).value.coeff(1) == Some(0)
    })
}

/// `[[a, b], [c, d]]` over `F_2[[X]]` modulo `X^N`, congruent to the
/// identity mod `X`, with determinant 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CongruenceMatrix {
    entries: [SeriesTrunc; 4],
}

impl CongruenceMatrix {
    pub fn new(a: SeriesTrunc, b: SeriesTrunc, c: SeriesTrunc, d: SeriesTrunc) -> Result<CongruenceMatrix> {
        if a.field().q() != 2 {
            return Err(Error::InvalidArgument("the congruence subgroup model is over F_2 only".into()));
        }
        let n = a.trunc();
        if [&b, &c, &d].iter().any(|e| e.field != a.field || e.trunc() != n) {
            return Err(Error::InvalidArgument("entries must share field and truncation".into()));
        }
        if n == 0 {
            return Err(Error::Range("truncation must be at least 1".into()));
        }
        if a.coeff(0) != Some(1) || d.coeff(0) != Some(1) || b.coeff(0) != Some(0) || c.coeff(0) != Some(0) {
            return Err(Error::Range("matrix is not congruent to the identity mod X".into()));
        }
        let m = CongruenceMatrix {
            entries: [a.relax(), b.relax(), c.relax(), d.relax()],
        };
        if !m.det()?.eq_one() {
            return Err(Error::Range("determinant is not 1 at truncation".into()));
        }
        Ok(m)
    }

    pub fn identity(field: Arc<ResidueField>, trunc: usize) -> Result<CongruenceMatrix> {
        let one = SeriesTrunc::monomial(field.clone(), 0, trunc);
        let zero = SeriesTrunc::zero(field, 0, trunc);
        CongruenceMatrix::new(one.clone(), zero.clone(), zero, one)
    }

    /// The unique `d` with `ad − bc = 1`, given `a ≡ 1`, `b ≡ c ≡ 0 mod X`.
    pub fn completing(a: SeriesTrunc, b: SeriesTrunc, c: SeriesTrunc) -> Result<CongruenceMatrix> {
        let one = SeriesTrunc::monomial(a.field.clone(), 0, a.trunc());
        let d = one.add(&b.mul(&c)?)?.mul(&a.inverse()?)?;
        CongruenceMatrix::new(a, b, c, d)
    }

    pub fn random<R: Rng>(field: Arc<ResidueField>, trunc: usize, rng: &mut R) -> Result<CongruenceMatrix> {
        let one = SeriesTrunc::monomial(field.clone(), 0, trunc);
        let a = one.add(&SeriesTrunc::random(field.clone(), 1, trunc, rng))?;
        let b = SeriesTrunc::random(field.clone(), 1, trunc, rng);
        let c = SeriesTrunc::random(field, 1, trunc, rng);
        CongruenceMatrix::completing(a, b, c)
    }

    pub fn entries(&self) -> &[SeriesTrunc; 4] {
        &self.entries
    }

    pub fn trunc(&self) -> usize {
        self.entries[0].trunc()
    }

    pub fn det(&self) -> Result<SeriesTrunc> {
        let [a, b, c, d] = &self.entries;
        a.mul(d)?.sub(&b.mul(c)?)
    }

    /// Least valuation of the entries of `M − I`, or `None` if `M = I` at truncation.
    pub fn distance_valuation(&self) -> Option<usize> {
        let one = SeriesTrunc::monomial(self.entries[0].field.clone(), 0, self.trunc());
        let [a, b, c, d] = &self.entries;
        let diffs = [a.sub(&one).ok()?, b.clone(), c.clone(), d.sub(&one).ok()?];
        diffs.iter().filter_map(|e| e.valuation()).min()
    }
}

impl SeriesTrunc {
    fn eq_one(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(k, &c)| c == u32::from(k == 0))
    }
}

/// Entrywise Frobenius on the congruence subgroup.
pub fn sl2_frobenius(m: &CongruenceMatrix) -> Result<Truncated<CongruenceMatrix>> {
    let mut loss = false;
    let imgs: Vec<SeriesTrunc> = m
        .entries
        .iter()
        .map(|e| {
            let t = frobenius_series(e);
            loss |= t.truncation_loss;
            t.value
        })
        .collect();
    let [a, b, c, d]: [SeriesTrunc; 4] = imgs.try_into().unwrap();
    Ok(Truncated {
        value: CongruenceMatrix::new(a, b, c, d)?,
        truncation_loss: loss,
    })
}
