use std::cmp::{min, Ordering};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Field, FieldKind};
use crate::error::{Error, Result};
use crate::norm::NormValue;

/// Valuation of an element as far as it is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    /// The element is zero at its precision: its valuation is at least this.
    AtLeast(i64),
    Infinite,
}

/// Unit part `u` of `π^v·u`, known modulo `π^k` (`k` = relative precision).
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Unit {
    /// Integer `0 < u < p^k` with `p ∤ u`.
    Padic(BigUint),
    /// Coefficients of `u` in `F_q`, length `k`, leading (constant) digit nonzero.
    Laurent(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Repr {
    /// The exact zero.
    Zero,
    /// Zero modulo `π^known_to`; no significant digit is known.
    Small { known_to: i64 },
    Unit { valuation: i64, known_to: i64, unit: Unit },
}

/// An element of a local field known modulo `π^known_to`.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    repr: Repr,
}

// ---------------------------------------------------------------------------
// unit-level helpers

fn padic_strip(field: &Field, u: BigUint) -> (i64, BigUint) {
    // number of factors of p dividing u (u != 0)
    let p = field.p_big();
    let mut u = u;
    let mut t = 0;
    if field.p() == 2 {
        let z = u.trailing_zeros().unwrap_or(0);
        return (z as i64, u >> z);
    }
    loop {
        let (qt, r) = u.div_rem(p);
        if !r.is_zero() {
            return (t, u);
        }
        u = qt;
        t += 1;
    }
}

impl FieldElement {
    pub(crate) fn from_repr(field: &Field, repr: Repr) -> Self {
        FieldElement {
            field: field.clone(),
            repr,
        }
    }

    pub(crate) fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn exact_zero(field: &Field) -> Self {
        Self::from_repr(field, Repr::Zero)
    }

    /// An element with no significant digits modulo `π^known_to`.
    pub fn zero_at(field: &Field, known_to: i64) -> Self {
        Self::from_repr(field, Repr::Small { known_to })
    }

    /// Build `π^valuation · u` from a p-adic integer `u` (any integer,
    /// need not be a unit) known modulo `π^known_to`.
    pub(crate) fn padic_from_int_at(field: &Field, value: &BigInt, shift: i64, known_to: i64) -> Self {
        if value.is_zero() {
            return Self::exact_zero(field);
        }
        let (sign, mag) = value.clone().into_parts();
        let (t, u) = padic_strip(field, mag);
        let v = shift + t;
        if v >= known_to {
            return Self::zero_at(field, known_to);
        }
        let k = known_to - v;
        let m = field.p_pow(k);
        let mut u = u % &m;
        if sign == Sign::Minus {
            u = &m - u;
        }
        Self::from_repr(
            field,
            Repr::Unit {
                valuation: v,
                known_to,
                unit: Unit::Padic(u),
            },
        )
    }

    /// Build `Σ digits[i]·π^(shift+i)` for Laurent fields, known modulo `π^known_to`.
    pub(crate) fn laurent_from_digits_at(field: &Field, digits: &[u32], shift: i64, known_to: i64) -> Self {
        let first = match digits.iter().position(|&d| d != 0) {
            None => {
                return if known_to == i64::MAX {
                    Self::exact_zero(field)
                } else {
                    Self::zero_at(field, known_to)
                }
            }
            Some(i) => i,
        };
        let v = shift + first as i64;
        if v >= known_to {
            return Self::zero_at(field, known_to);
        }
        let k = (known_to - v) as usize;
        let mut u: Vec<u32> = digits[first..].iter().copied().take(k).collect();
        u.resize(k, 0);
        Self::from_repr(
            field,
            Repr::Unit {
                valuation: v,
                known_to,
                unit: Unit::Laurent(u),
            },
        )
    }

    /// Normalize `π^v·w` with `w` known modulo `π^k` but possibly divisible by π.
    fn normalize(field: &Field, v: i64, k: i64, w: Unit) -> Self {
        let known_to = v + k;
        match w {
            Unit::Padic(u) => {
                if u.is_zero() {
                    return Self::zero_at(field, known_to);
                }
                let (t, u) = padic_strip(field, u);
                if t >= k {
                    return Self::zero_at(field, known_to);
                }
                Self::from_repr(
                    field,
                    Repr::Unit {
                        valuation: v + t,
                        known_to,
                        unit: Unit::Padic(u),
                    },
                )
            }
            Unit::Laurent(mut d) => match d.iter().position(|&x| x != 0) {
                None => Self::zero_at(field, known_to),
                Some(t) => {
                    if t > 0 {
                        d.drain(..t);
                    }
                    Self::from_repr(
                        field,
                        Repr::Unit {
                            valuation: v + t as i64,
                            known_to,
                            unit: Unit::Laurent(d),
                        },
                    )
                }
            },
        }
    }

    // -----------------------------------------------------------------------
    // queries

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Zero => Valuation::Infinite,
            Repr::Small { known_to } => Valuation::AtLeast(*known_to),
            Repr::Unit { valuation, .. } => Valuation::Finite(*valuation),
        }
    }

    /// Determined valuation, if the element has a significant digit.
    pub fn val(&self) -> Option<i64> {
        match &self.repr {
            Repr::Unit { valuation, .. } => Some(*valuation),
            _ => None,
        }
    }

    /// Absolute precision; `None` for the exact zero.
    pub fn known_to(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Small { known_to } | Repr::Unit { known_to, .. } => Some(*known_to),
        }
    }

    /// Number of significant digits (0 for zero-like elements).
    pub fn relative_precision(&self) -> i64 {
        match &self.repr {
            Repr::Unit { valuation, known_to, .. } => known_to - valuation,
            _ => 0,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    pub fn is_zero_at_precision(&self) -> bool {
        matches!(self.repr, Repr::Small { .. })
    }

    /// True for the exact zero and for elements that are zero at precision.
    pub fn is_negligible(&self) -> bool {
        !matches!(self.repr, Repr::Unit { .. })
    }

    /// Normalized absolute value `q^-val`. Fails on elements that are zero at
    /// precision, whose absolute value is only bounded.
    pub fn abs(&self) -> Result<NormValue> {
        match &self.repr {
            Repr::Zero => Ok(NormValue::Zero),
            Repr::Small { known_to } => Err(Error::precision(format!(
                "absolute value of O({}^{}) is undetermined",
                self.field.symbol(),
                known_to
            ))),
            Repr::Unit { valuation, .. } => Ok(NormValue::from_int_exponent(-valuation)),
        }
    }

    /// Least upper bound on the absolute value compatible with the known digits.
    pub fn abs_bound(&self) -> NormValue {
        match &self.repr {
            Repr::Zero => NormValue::Zero,
            Repr::Small { known_to } => NormValue::from_int_exponent(-known_to),
            Repr::Unit { valuation, .. } => NormValue::from_int_exponent(-valuation),
        }
    }

    /// `Some(true)` if provably in the valuation ring, `Some(false)` if
    /// provably outside, `None` if undetermined.
    pub fn is_integral(&self) -> Option<bool> {
        match &self.repr {
            Repr::Zero => Some(true),
            Repr::Small { known_to } => (*known_to >= 0).then_some(true),
            Repr::Unit { valuation, .. } => Some(*valuation >= 0),
        }
    }

    /// Reduction modulo `π` of an integral element.
    pub fn residue(&self) -> Result<u32> {
        match &self.repr {
            Repr::Zero => Ok(0),
            Repr::Small { known_to } if *known_to >= 1 => Ok(0),
            Repr::Small { .. } => Err(Error::precision("residue of an element below precision")),
            Repr::Unit { valuation, unit, .. } => match valuation.cmp(&0) {
                Ordering::Greater => Ok(0),
                Ordering::Less => Err(Error::InvalidArgument("residue of a non-integral element".into())),
                Ordering::Equal => Ok(match unit {
                    Unit::Padic(u) => (u % self.field.p_big()).to_u32().unwrap(),
                    Unit::Laurent(d) => d[0],
                }),
            },
        }
    }

    /// Coefficient of `π^i` in the canonical expansion (digits in `0..p` for
    /// `Q_p`, residue field codes for Laurent series). `None` if `i` is beyond
    /// the known precision.
    pub fn digit(&self, i: i64) -> Option<u32> {
        match &self.repr {
            Repr::Zero => Some(0),
            Repr::Small { known_to } => (i < *known_to).then_some(0),
            Repr::Unit { valuation, known_to, unit } => {
                if i >= *known_to {
                    return None;
                }
                if i < *valuation {
                    return Some(0);
                }
                let off = (i - valuation) as usize;
                Some(match unit {
                    Unit::Laurent(d) => d[off],
                    Unit::Padic(u) => {
                        let shifted = u / self.field.p_pow(off as i64);
                        (shifted % self.field.p_big()).to_u32().unwrap()
                    }
                })
            }
        }
    }

    /// The part of the canonical expansion with exponents `< bound`.
    pub fn truncate_below(&self, bound: i64) -> FieldElement {
        match &self.repr {
            Repr::Unit { valuation, known_to, unit } if *valuation < bound => {
                let k = min(bound, *known_to) - valuation;
                let keep = match unit {
                    Unit::Padic(u) => Unit::Padic(u % self.field.p_pow(k)),
                    Unit::Laurent(d) => Unit::Laurent(d[..k as usize].to_vec()),
                };
                let kt = *known_to;
                // digits beyond `bound` are dropped; digits between the kept
                // part and `known_to` are exact zeros
                let mut out = Self::normalize(&self.field, *valuation, k, keep);
                out = out.extend_precision_exact(kt);
                out
            }
            Repr::Zero => self.clone(),
            _ => Self::exact_zero(&self.field),
        }
    }

    /// Pad the known digits with zeros up to `known_to` (used only where the
    /// padded digits are known to vanish).
    fn extend_precision_exact(self, known_to: i64) -> FieldElement {
        match self.repr {
            Repr::Unit { valuation, known_to: kt, unit } if known_to > kt => {
                let unit = match unit {
                    Unit::Padic(u) => Unit::Padic(u),
                    Unit::Laurent(mut d) => {
                        d.resize((known_to - valuation) as usize, 0);
                        Unit::Laurent(d)
                    }
                };
                FieldElement::from_repr(&self.field, Repr::Unit { valuation, known_to, unit })
            }
            Repr::Small { known_to: kt } if known_to > kt => FieldElement::zero_at(&self.field, known_to),
            repr => FieldElement { field: self.field, repr },
        }
    }

    /// Forget digits at or beyond `π^known_to`.
    pub fn with_precision(&self, known_to: i64) -> FieldElement {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Small { known_to: k } => Self::zero_at(&self.field, min(*k, known_to)),
            Repr::Unit { valuation, known_to: k, unit } => {
                if known_to >= *k {
                    return self.clone();
                }
                if known_to <= *valuation {
                    return Self::zero_at(&self.field, known_to);
                }
                let r = known_to - valuation;
                let unit = match unit {
                    Unit::Padic(u) => Unit::Padic(u % self.field.p_pow(r)),
                    Unit::Laurent(d) => Unit::Laurent(d[..r as usize].to_vec()),
                };
                Self::from_repr(
                    &self.field,
                    Repr::Unit {
                        valuation: *valuation,
                        known_to,
                        unit,
                    },
                )
            }
        }
    }

    /// Exact multiplication by `π^k` (shifts valuation and precision).
    pub fn mul_pi_pow(&self, k: i64) -> FieldElement {
        let repr = match &self.repr {
            Repr::Zero => Repr::Zero,
            Repr::Small { known_to } => Repr::Small { known_to: known_to + k },
            Repr::Unit { valuation, known_to, unit } => Repr::Unit {
                valuation: valuation + k,
                known_to: known_to + k,
                unit: unit.clone(),
            },
        };
        Self::from_repr(&self.field, repr)
    }

    fn check_field(&self, other: &FieldElement) {
        assert!(self.field.same(&other.field), "field mismatch: {} vs {}", self.field, other.field);
    }

    // -----------------------------------------------------------------------
    // arithmetic

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement> {
        if !self.field.same(&other.field) {
            return Err(Error::FieldMismatch);
        }
        Ok(self.add_impl(other))
    }

    fn add_impl(&self, other: &FieldElement) -> FieldElement {
        match (&self.repr, &other.repr) {
            (Repr::Zero, _) => other.clone(),
            (_, Repr::Zero) => self.clone(),
            (Repr::Small { known_to: a }, Repr::Small { known_to: b }) => Self::zero_at(&self.field, min(*a, *b)),
            (Repr::Small { known_to: k }, _) => other.with_precision(*k),
            (_, Repr::Small { known_to: k }) => self.with_precision(*k),
            (
                Repr::Unit {
                    valuation: v1,
                    known_to: k1,
                    unit: u1,
                },
                Repr::Unit {
                    valuation: v2,
                    known_to: k2,
                    unit: u2,
                },
            ) => {
                let known_to = min(*k1, *k2);
                let v = min(*v1, *v2);
                if v >= known_to {
                    return Self::zero_at(&self.field, known_to);
                }
                let k = known_to - v;
                let w = match (u1, u2) {
                    (Unit::Padic(a), Unit::Padic(b)) => {
                        let m = self.field.p_pow(k);
                        let a = if *v1 > v { (a * self.field.p_pow(v1 - v)) % &m } else { a % &m };
                        let b = if *v2 > v { (b * self.field.p_pow(v2 - v)) % &m } else { b % &m };
                        let mut s = a + b;
                        if s >= m {
                            s -= &m;
                        }
                        Unit::Padic(s)
                    }
                    (Unit::Laurent(a), Unit::Laurent(b)) => {
                        let rf = self.field.residue();
                        let k = k as usize;
                        let mut s = vec![0u32; k];
                        let oa = (v1 - v) as usize;
                        for (i, &d) in a.iter().enumerate() {
                            if oa + i >= k {
                                break;
                            }
                            s[oa + i] = d;
                        }
                        let ob = (v2 - v) as usize;
                        for (i, &d) in b.iter().enumerate() {
                            if ob + i >= k {
                                break;
                            }
                            s[ob + i] = rf.add(s[ob + i], d);
                        }
                        Unit::Laurent(s)
                    }
                    _ => unreachable!("unit kinds agree within a field"),
                };
                Self::normalize(&self.field, v, k, w)
            }
        }
    }

    fn neg_impl(&self) -> FieldElement {
        match &self.repr {
            Repr::Unit { valuation, known_to, unit } => {
                let k = known_to - valuation;
                let unit = match unit {
                    Unit::Padic(u) => Unit::Padic(self.field.p_pow(k) - u),
                    Unit::Laurent(d) => {
                        let rf = self.field.residue();
                        Unit::Laurent(d.iter().map(|&x| rf.neg(x)).collect())
                    }
                };
                Self::from_repr(
                    &self.field,
                    Repr::Unit {
                        valuation: *valuation,
                        known_to: *known_to,
                        unit,
                    },
                )
            }
            _ => self.clone(),
        }
    }

    fn mul_impl(&self, other: &FieldElement) -> FieldElement {
        match (&self.repr, &other.repr) {
            (Repr::Zero, _) | (_, Repr::Zero) => Self::exact_zero(&self.field),
            (Repr::Small { known_to: a }, Repr::Small { known_to: b }) => Self::zero_at(&self.field, a + b),
            (Repr::Small { known_to: a }, Repr::Unit { valuation, .. })
            | (Repr::Unit { valuation, .. }, Repr::Small { known_to: a }) => Self::zero_at(&self.field, a + valuation),
            (
                Repr::Unit {
                    valuation: v1,
                    known_to: k1,
                    unit: u1,
                },
                Repr::Unit {
                    valuation: v2,
                    known_to: k2,
                    unit: u2,
                },
            ) => {
                let k = min(k1 - v1, k2 - v2);
                let v = v1 + v2;
                let unit = match (u1, u2) {
                    (Unit::Padic(a), Unit::Padic(b)) => {
                        let prod = a * b;
                        Unit::Padic(self.field.with_p_pow(k, |m| prod % m))
                    }
                    (Unit::Laurent(a), Unit::Laurent(b)) => Unit::Laurent(laurent_mul(&self.field, a, b, k as usize)),
                    _ => unreachable!("unit kinds agree within a field"),
                };
                // product of units is a unit
                Self::from_repr(
                    &self.field,
                    Repr::Unit {
                        valuation: v,
                        known_to: v + k,
                        unit,
                    },
                )
            }
        }
    }

    /// Multiplicative inverse. Relative precision is preserved.
    pub fn inv(&self) -> Result<FieldElement> {
        match &self.repr {
            Repr::Zero => Err(Error::DivisionByZero),
            Repr::Small { known_to } => Err(Error::precision(format!(
                "inverse of an element that is zero modulo {}^{}",
                self.field.symbol(),
                known_to
            ))),
            Repr::Unit { valuation, known_to, unit } => {
                let k = known_to - valuation;
                let unit = match unit {
                    Unit::Padic(u) => {
                        let m = BigInt::from(self.field.p_pow(k));
                        let e = BigInt::from(u.clone()).extended_gcd(&m);
                        debug_assert!(e.gcd.is_one());
                        let x = e.x.mod_floor(&m);
                        Unit::Padic(x.to_biguint().unwrap())
                    }
                    Unit::Laurent(d) => Unit::Laurent(laurent_inv(&self.field, d)),
                };
                Ok(Self::from_repr(
                    &self.field,
                    Repr::Unit {
                        valuation: -valuation,
                        known_to: -valuation + k,
                        unit,
                    },
                ))
            }
        }
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement> {
        if self.is_exact_zero() {
            if other.is_exact_zero() {
                return Err(Error::DivisionByZero);
            }
            other.inv()?;
            return Ok(self.clone());
        }
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: u32) -> FieldElement {
        let mut acc = FieldElement::one_like(self);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn one_like(x: &FieldElement) -> FieldElement {
        x.field.one()
    }

    /// True when `self - other` has no significant digit.
    pub fn eq_at_precision(&self, other: &FieldElement) -> bool {
        (self - other).is_negligible()
    }

    /// The value of an element of `Q_p` as the rational `num / p^e`, where
    /// `num` is the balanced representative of the known digits.
    pub(crate) fn padic_parts(&self) -> Option<(BigInt, i64)> {
        match &self.repr {
            Repr::Unit {
                valuation,
                known_to,
                unit: Unit::Padic(u),
            } => {
                let k = known_to - valuation;
                let m = BigInt::from(self.field.p_pow(k));
                let mut s = BigInt::from(u.clone());
                if &s * 2 > m {
                    s -= &m;
                }
                Some((s, *valuation))
            }
            _ => None,
        }
    }

    pub(crate) fn laurent_digits(&self) -> Option<(&[u32], i64)> {
        match &self.repr {
            Repr::Unit {
                valuation,
                unit: Unit::Laurent(d),
                ..
            } => Some((d, *valuation)),
            _ => None,
        }
    }
}

fn laurent_mul(field: &Field, a: &[u32], b: &[u32], k: usize) -> Vec<u32> {
    let rf = field.residue();
    let mut out = vec![0u32; k];
    if rf.is_prime_field() {
        let p = rf.p() as u64;
        // accumulate without reduction while it is safe to do so
        let bound = u64::MAX / ((p - 1) * (p - 1)).max(1);
        let mut acc = vec![0u64; k];
        for (n, slot) in acc.iter_mut().enumerate() {
            let mut s = 0u64;
            let mut terms = 0u64;
            for i in 0..=n {
                let x = a[i] as u64;
                if x == 0 {
                    continue;
                }
                let y = b[n - i] as u64;
                s += x * y;
                terms += 1;
                if terms >= bound {
                    s %= p;
                    terms = 0;
                }
            }
            *slot = s % p;
        }
        for (o, s) in out.iter_mut().zip(acc) {
            *o = s as u32;
        }
    } else {
        for n in 0..k {
            let mut s = 0;
            for i in 0..=n {
                if a[i] != 0 && b[n - i] != 0 {
                    s = rf.add(s, rf.mul(a[i], b[n - i]));
                }
            }
            out[n] = s;
        }
    }
    out
}

fn laurent_inv(field: &Field, a: &[u32]) -> Vec<u32> {
    let rf = field.residue();
    let k = a.len();
    let a0inv = rf.inv(a[0]).expect("unit has nonzero constant digit");
    let mut b = vec![0u32; k];
    b[0] = a0inv;
    for n in 1..k {
        let mut s = 0;
        for i in 1..=n {
            if a[i] != 0 && b[n - i] != 0 {
                s = rf.add(s, rf.mul(a[i], b[n - i]));
            }
        }
        b[n] = rf.neg(rf.mul(a0inv, s));
    }
    b
}

// ---------------------------------------------------------------------------
// constructors on Field

impl Field {
    pub fn zero(&self) -> FieldElement {
        FieldElement::exact_zero(self)
    }

    pub fn one(&self) -> FieldElement {
        self.from_i64(1)
    }

    /// The image of an integer, known to the field precision.
    pub fn from_i64(&self, n: i64) -> FieldElement {
        self.from_int_at(&BigInt::from(n), self.precision())
    }

    pub(crate) fn from_int_at(&self, n: &BigInt, known_to: i64) -> FieldElement {
        match self.kind() {
            FieldKind::Padic => FieldElement::padic_from_int_at(self, n, 0, known_to),
            FieldKind::Laurent => {
                let p = BigInt::from(self.p());
                let d = n.mod_floor(&p).to_u32().unwrap();
                if d == 0 {
                    FieldElement::exact_zero(self)
                } else {
                    FieldElement::laurent_from_digits_at(self, &[d], 0, known_to)
                }
            }
        }
    }

    /// `num/den`; for Laurent fields the quotient is taken in the prime field.
    pub fn from_rational(&self, num: i64, den: i64) -> Result<FieldElement> {
        self.from_rational_at(&BigInt::from(num), &BigInt::from(den), self.precision())
    }

    pub(crate) fn from_rational_at(&self, num: &BigInt, den: &BigInt, known_to: i64) -> Result<FieldElement> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self.kind() {
            FieldKind::Padic => {
                if num.is_zero() {
                    return Ok(self.zero());
                }
                let (_, dmag) = den.clone().into_parts();
                let (e, dunit) = padic_strip(self, dmag);
                let sign_flip = den.is_negative();
                // num / (p^e·dunit): compute num·dunit^{-1} with enough digits
                let (_, nmag) = num.clone().into_parts();
                let (tn, _) = padic_strip(self, nmag);
                let v = tn - e;
                if v >= known_to {
                    return Ok(FieldElement::zero_at(self, known_to));
                }
                let k = known_to - v;
                let m = BigInt::from(self.p_pow(k + tn));
                let dinv = BigInt::from(dunit).extended_gcd(&m).x.mod_floor(&m);
                let mut value = (num * dinv).mod_floor(&m);
                if sign_flip {
                    value = (-value).mod_floor(&m);
                }
                Ok(FieldElement::padic_from_int_at(self, &value, -e, known_to))
            }
            FieldKind::Laurent => {
                let rf = self.residue();
                let c = if rf.is_prime_field() {
                    let p = BigInt::from(self.p());
                    let d = den.mod_floor(&p).to_u32().unwrap();
                    let dinv = rf.inv(d).ok_or(Error::DivisionByZero)?;
                    let n = num.mod_floor(&p).to_u32().unwrap();
                    rf.mul(n, dinv)
                } else {
                    if !den.is_one() {
                        return Err(Error::InvalidArgument("extension field codes cannot be divided".into()));
                    }
                    let code: i64 = num
                        .try_into()
                        .map_err(|_| Error::InvalidArgument("residue code out of range".into()))?;
                    rf.from_code(code)
                        .ok_or_else(|| Error::InvalidArgument(format!("residue code {code} out of range")))?
                };
                if c == 0 {
                    return Ok(self.zero());
                }
                Ok(FieldElement::laurent_from_digits_at(self, &[c], 0, known_to))
            }
        }
    }

    /// `π^k` known to the field precision (zero at precision when `k >= N`).
    pub fn pi_pow(&self, k: i64) -> FieldElement {
        self.one().mul_pi_pow(k).with_precision(self.precision())
    }

    /// `π^k` with relative precision `N`, independent of `k`.
    pub fn pi_pow_exact(&self, k: i64) -> FieldElement {
        self.one().mul_pi_pow(k)
    }

    /// Lift of a residue field element (a constant digit).
    pub fn lift_residue(&self, d: u32) -> FieldElement {
        match self.kind() {
            FieldKind::Padic => self.from_int_at(&BigInt::from(d), self.precision()),
            FieldKind::Laurent => FieldElement::laurent_from_digits_at(self, &[d], 0, self.precision()),
        }
    }

    /// `Σ digits[i]·π^(shift+i)`, known to the field precision.
    pub fn from_digits(&self, digits: &[u32], shift: i64) -> FieldElement {
        self.from_digits_at(digits, shift, self.precision())
    }

    pub fn from_digits_at(&self, digits: &[u32], shift: i64, known_to: i64) -> FieldElement {
        match self.kind() {
            FieldKind::Laurent => {
                if digits.iter().all(|&d| d == 0) {
                    return self.zero();
                }
                FieldElement::laurent_from_digits_at(self, digits, shift, known_to)
            }
            FieldKind::Padic => {
                let p = BigInt::from(self.p());
                let n = digits.iter().rev().fold(BigInt::zero(), |acc, &d| acc * &p + BigInt::from(d));
                FieldElement::padic_from_int_at(self, &n, shift, known_to)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// operator impls

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.check_field(rhs);
        self.add_impl(rhs)
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.check_field(rhs);
        self.add_impl(&rhs.neg_impl())
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.check_field(rhs);
        self.mul_impl(rhs)
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.neg_impl()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &FieldElement) -> FieldElement {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.neg_impl()
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Helpers used by valuation-based pivoting.
impl FieldElement {
    /// Ordering key for pivot selection: determined valuations first (smaller
    /// is better); zero-like elements are never pivots.
    pub fn pivot_key(&self) -> Option<i64> {
        self.val()
    }

    /// `max(known_to)` style helper for reporting.
    pub fn precision_or(&self, default: i64) -> i64 {
        self.known_to().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(p: u32, n: i64) -> Field {
        Field::padic(p, n).unwrap()
    }

    #[test]
    fn two_plus_three_is_five_in_q5() {
        let k = qp(5, 4);
        let s = &k.from_i64(2) + &k.from_i64(3);
        assert_eq!(s.val(), Some(1));
        assert_eq!(s.digit(1), Some(1));
        assert_eq!(s, k.from_i64(5));
    }

    #[test]
    fn zero_is_additive_identity() {
        let k = qp(5, 4);
        let x = k.from_rational(3, 25).unwrap();
        assert_eq!(&x + &k.zero(), x);
        assert_eq!(&k.zero() + &x, x);
    }

    #[test]
    fn characteristic_two_cancellation() {
        let k = Field::laurent(2, 1, 5).unwrap();
        let x = k.from_digits(&[1, 1], 0);
        let s = &x + &x;
        assert!(s.is_negligible());
    }

    #[test]
    fn inverse_laws() {
        let k = qp(5, 6);
        let five = k.from_i64(5);
        let prod = &five * &five.inv().unwrap();
        assert!(prod.eq_at_precision(&k.one()));
        assert_eq!((&five * &five).val(), Some(2));
        assert_eq!(k.zero().inv(), Err(Error::DivisionByZero));
        assert!(FieldElement::zero_at(&k, 3).inv().unwrap_err().is_precision());
    }

    #[test]
    fn laurent_inverse_of_one_plus_t() {
        let k = Field::laurent(2, 1, 3).unwrap();
        let x = k.from_digits(&[1, 1], 0);
        let y = x.inv().unwrap();
        assert_eq!(y, k.from_digits(&[1, 1, 1], 0));
        assert!((&x * &y).eq_at_precision(&k.one()));
    }

    #[test]
    fn valuation_and_abs() {
        let k = qp(5, 10);
        assert_eq!(k.from_i64(50).val(), Some(2));
        assert_eq!(k.from_i64(5).abs().unwrap(), NormValue::from_int_exponent(-1));
        assert_eq!(k.zero().valuation(), Valuation::Infinite);
        assert_eq!(k.zero().abs().unwrap(), NormValue::Zero);
    }

    #[test]
    fn cancellation_loses_digits_not_soundness() {
        let k = qp(3, 5);
        let a = k.from_i64(1);
        let b = k.from_i64(1 + 243); // equal modulo 3^5
        let d = &a - &b;
        assert!(d.is_zero_at_precision());
        assert_eq!(d.known_to(), Some(5));
    }

    #[test]
    fn absolute_precision_of_products() {
        let k = qp(2, 10);
        let x = k.from_rational(1, 2).unwrap(); // valuation -1, known to 10
        let y = &x * &x;
        assert_eq!(y.val(), Some(-2));
        assert_eq!(y.known_to(), Some(9));
    }

    #[test]
    fn rational_construction() {
        let k = qp(5, 6);
        let x = k.from_rational(3, 25).unwrap();
        assert_eq!(x.val(), Some(-2));
        assert_eq!(x.digit(-2), Some(3));
        assert_eq!(x.digit(-1), Some(0));
        let back = &x * &k.from_i64(25);
        assert!(back.eq_at_precision(&k.from_i64(3)));
        let m = k.from_rational(-1, 3).unwrap();
        assert!((&m * &k.from_i64(3)).eq_at_precision(&k.from_i64(-1)));
    }

    #[test]
    fn truncate_below_keeps_low_digits() {
        let k = qp(5, 8);
        let x = k.from_i64(1 + 2 * 5 + 3 * 125);
        let low = x.truncate_below(2);
        assert_eq!(low, k.from_i64(11).extend_precision_exact(8));
        assert!((&x - &low).val().unwrap() >= 2);
    }
}
