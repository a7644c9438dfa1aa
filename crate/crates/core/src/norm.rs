//! Exact absolute values `q^r` with rational exponent `r`.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;

/// Rational exponent type used for slopes and norm exponents.
pub type Rational = Ratio<i64>;

/// A non-negative real of the form `q^r` (or `0`), where `q` is the residue
/// field size of the ambient field. Comparison and multiplication act on the
/// exponent only, so no floating point is ever involved.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum NormValue {
    Zero,
    Pow(Rational),
}

impl NormValue {
    pub const ONE: NormValue = NormValue::Pow(Ratio::new_raw(0, 1));

    pub fn pow(exponent: Rational) -> Self {
        NormValue::Pow(exponent)
    }

    pub fn from_int_exponent(exponent: i64) -> Self {
        NormValue::Pow(Rational::from_integer(exponent))
    }

    /// `None` encodes the exponent `-inf` of the zero value.
    pub fn exponent(&self) -> Option<Rational> {
        match self {
            NormValue::Zero => None,
            NormValue::Pow(r) => Some(*r),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, NormValue::Zero)
    }

    pub fn mul(self, other: NormValue) -> NormValue {
        match (self, other) {
            (NormValue::Pow(a), NormValue::Pow(b)) => NormValue::Pow(a + b),
            _ => NormValue::Zero,
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(self) -> Option<NormValue> {
        match self {
            NormValue::Zero => None,
            NormValue::Pow(a) => Some(NormValue::Pow(-a)),
        }
    }

    /// `self / other`; `None` when dividing by zero.
    pub fn div(self, other: NormValue) -> Option<NormValue> {
        other.recip().map(|r| self.mul(r))
    }

    pub fn powi(self, k: i64) -> NormValue {
        match self {
            NormValue::Zero if k > 0 => NormValue::Zero,
            NormValue::Zero if k == 0 => NormValue::ONE,
            NormValue::Zero => panic!("negative power of zero norm value"),
            NormValue::Pow(a) => NormValue::Pow(a * Rational::from_integer(k)),
        }
    }

    pub fn max(self, other: NormValue) -> NormValue {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Render the exponent as `a` or `a/b`, or `-inf` for zero.
    pub fn exponent_string(&self) -> String {
        match self {
            NormValue::Zero => "-inf".to_string(),
            NormValue::Pow(r) => rational_string(r),
        }
    }
}

pub fn rational_string(r: &Rational) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `a` or `a/b` into a reduced rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => text.parse::<i64>().ok().map(Rational::from_integer),
    }
}

/// Smallest integer `>= r`.
pub fn ceil_rational(r: &Rational) -> i64 {
    r.ceil().to_integer()
}

/// Largest integer `<= r`.
pub fn floor_rational(r: &Rational) -> i64 {
    r.floor().to_integer()
}

impl PartialOrd for NormValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NormValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NormValue::Zero, NormValue::Zero) => Ordering::Equal,
            (NormValue::Zero, _) => Ordering::Less,
            (_, NormValue::Zero) => Ordering::Greater,
            (NormValue::Pow(a), NormValue::Pow(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Zero => write!(f, "0"),
            NormValue::Pow(r) => write!(f, "q^{}", rational_string(r)),
        }
    }
}
