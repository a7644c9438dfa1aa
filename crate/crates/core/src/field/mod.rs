//! Local fields `Q_p` and `F_q((t))` with absolute precision tracking.
//!
//! Every element is known modulo `π^known_to`, where `π` is the uniformizer
//! (`p`, resp. `t`). The normalized absolute value is `|π| = q^-1` with `q`
//! the residue field size.

mod element;
mod parse;
pub mod residue;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use element::{FieldElement, Valuation};
pub use residue::ResidueField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    /// The `p`-adic numbers `Q_p`.
    Padic,
    /// Laurent series `F_q((t))`.
    Laurent,
}

/// Wire-level description of a local field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    /// Residue characteristic.
    pub p: u32,
    /// Residue degree `f` (`q = p^f`); always 1 for `Q_p`.
    #[serde(default = "one")]
    pub degree: u32,
    /// Monic irreducible polynomial defining `F_q` over `F_p`, constant term first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
    /// Absolute precision exponent `N`.
    pub precision: i64,
    /// Printed name of the uniformizer.
    #[serde(default)]
    pub symbol: String,
}

fn one() -> u32 {
    1
}

impl FieldSpec {
    pub fn padic(p: u32, precision: i64) -> Self {
        FieldSpec {
            kind: FieldKind::Padic,
            p,
            degree: 1,
            modulus: None,
            precision,
            symbol: "p".into(),
        }
    }

    pub fn laurent(p: u32, degree: u32, precision: i64) -> Self {
        FieldSpec {
            kind: FieldKind::Laurent,
            p,
            degree,
            modulus: None,
            precision,
            symbol: "t".into(),
        }
    }

    pub fn with_symbol(mut self, symbol: &str) -> Self {
        self.symbol = symbol.into();
        self
    }

    pub fn with_precision(mut self, precision: i64) -> Self {
        self.precision = precision;
        self
    }
}

pub(crate) struct FieldInner {
    spec: FieldSpec,
    residue: ResidueField,
    q: u64,
    p_big: BigUint,
    p_powers: Vec<BigUint>,
}

/// Shared handle to a configured field. Cheap to clone.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

impl Field {
    pub fn new(mut spec: FieldSpec) -> Result<Field> {
        if spec.precision < 1 {
            return Err(Error::InvalidSpec("precision must be >= 1".into()));
        }
        if spec.symbol.is_empty() {
            spec.symbol = match spec.kind {
                FieldKind::Padic => "p".into(),
                FieldKind::Laurent => "t".into(),
            };
        }
        if !spec.symbol.chars().all(|c| c.is_ascii_alphabetic()) || spec.symbol == "O" || spec.symbol == "T" {
            return Err(Error::InvalidSpec(format!("unusable uniformizer symbol {:?}", spec.symbol)));
        }
        let residue = match spec.kind {
            FieldKind::Padic => {
                if spec.degree != 1 {
                    return Err(Error::InvalidSpec("Q_p has residue degree 1".into()));
                }
                ResidueField::new(spec.p, 1, None)?
            }
            FieldKind::Laurent => ResidueField::new(spec.p, spec.degree, spec.modulus.clone())?,
        };
        if spec.kind == FieldKind::Laurent && spec.degree > 1 {
            spec.modulus = Some(residue.modulus().to_vec());
        }
        let q = residue.q() as u64;
        let p_big = BigUint::from(spec.p);
        let mut p_powers = Vec::new();
        if spec.kind == FieldKind::Padic {
            let limit = (4 * spec.precision + 64) as usize;
            let mut acc = BigUint::from(1u32);
            for _ in 0..=limit {
                p_powers.push(acc.clone());
                acc *= &p_big;
            }
        }
        Ok(Field(Arc::new(FieldInner {
            spec,
            residue,
            q,
            p_big,
            p_powers,
        })))
    }

    pub fn padic(p: u32, precision: i64) -> Result<Field> {
        Field::new(FieldSpec::padic(p, precision))
    }

    pub fn laurent(p: u32, degree: u32, precision: i64) -> Result<Field> {
        Field::new(FieldSpec::laurent(p, degree, precision))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn kind(&self) -> FieldKind {
        self.0.spec.kind
    }

    /// Residue field size.
    pub fn q(&self) -> u64 {
        self.0.q
    }

    pub fn p(&self) -> u32 {
        self.0.spec.p
    }

    pub fn precision(&self) -> i64 {
        self.0.spec.precision
    }

    pub fn symbol(&self) -> &str {
        &self.0.spec.symbol
    }

    pub fn residue(&self) -> &ResidueField {
        &self.0.residue
    }

    pub(crate) fn p_big(&self) -> &BigUint {
        &self.0.p_big
    }

    /// `p^k` for the p-adic unit arithmetic.
    pub(crate) fn p_pow(&self, k: i64) -> BigUint {
        debug_assert!(k >= 0);
        let k = k as usize;
        match self.0.p_powers.get(k) {
            Some(v) => v.clone(),
            None => num_traits::pow::pow(self.0.p_big.clone(), k),
        }
    }

    pub(crate) fn with_p_pow<R>(&self, k: i64, f: impl FnOnce(&BigUint) -> R) -> R {
        let k = k as usize;
        match self.0.p_powers.get(k) {
            Some(v) => f(v),
            None => f(&num_traits::pow::pow(self.0.p_big.clone(), k)),
        }
    }

    pub fn same(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.0.spec;
        match s.kind {
            FieldKind::Padic => write!(f, "Q_{} (N={})", s.p, s.precision),
            FieldKind::Laurent => write!(f, "F_{}(({})) (N={})", self.0.q, s.symbol, s.precision),
        }
    }
}
