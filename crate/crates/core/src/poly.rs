//! Polynomials over a local field, Newton polygons and slope factorization.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::linalg::Matrix;
use crate::norm::{NormValue, Rational};

/// Newton iterations allowed per split before giving up.
const MAX_LIFT_STEPS: usize = 64;

/// Univariate polynomial in `T`, constant term first.
#[derive(Clone, PartialEq)]
pub struct Polynomial {
    field: Field,
    coeffs: Vec<FieldElement>,
}

/// Root valuation attached to a factor or a spectral component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slope {
    /// Roots equal to zero (characteristic value 0).
    ZeroRoot,
    /// Roots of valuation `s` (characteristic value `q^-s`).
    Finite(Rational),
}

impl Slope {
    /// Characteristic value `q^-s`, or 0 for zero roots.
    pub fn char_value(&self) -> NormValue {
        match self {
            Slope::ZeroRoot => NormValue::Zero,
            Slope::Finite(s) => NormValue::pow(-*s),
        }
    }

    pub fn finite(&self) -> Option<Rational> {
        match self {
            Slope::ZeroRoot => None,
            Slope::Finite(s) => Some(*s),
        }
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered by characteristic value: zero roots first, then decreasing root valuation.
impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        self.char_value().cmp(&other.char_value())
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::ZeroRoot => write!(f, "zero-root"),
            Slope::Finite(s) => write!(f, "{}", crate::norm::rational_string(s)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    /// Common valuation of the roots on this segment.
    pub slope: Rational,
    /// Number of roots.
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// Hull vertices `(i, val a_i)`, left to right, starting at the lowest
    /// nonzero coefficient.
    pub vertices: Vec<(usize, i64)>,
    /// Segments with strictly increasing root valuation.
    pub segments: Vec<Segment>,
    pub zero_root_multiplicity: usize,
}

impl NewtonPolygon {
    pub fn degree(&self) -> usize {
        self.zero_root_multiplicity + self.segments.iter().map(|s| s.length).sum::<usize>()
    }
}

impl Polynomial {
    /// Trailing exact zeros are dropped. The leading coefficient must be
    /// nonzero at precision.
    pub fn new(field: &Field, mut coeffs: Vec<FieldElement>) -> Result<Polynomial> {
        while coeffs.len() > 1 && coeffs.last().unwrap().is_exact_zero() {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(field.zero());
        }
        if coeffs.iter().any(|c| !c.field().same(field)) {
            return Err(Error::FieldMismatch);
        }
        if coeffs.last().unwrap().is_zero_at_precision() {
            return Err(Error::precision("leading coefficient is zero at precision"));
        }
        Ok(Polynomial {
            field: field.clone(),
            coeffs,
        })
    }

    pub(crate) fn from_coeffs_unchecked(field: &Field, coeffs: Vec<FieldElement>) -> Polynomial {
        Polynomial {
            field: field.clone(),
            coeffs,
        }
    }

    /// `T^k`.
    pub fn monomial(field: &Field, k: usize) -> Polynomial {
        let mut c = vec![field.zero(); k + 1];
        c[k] = field.one();
        Polynomial::from_coeffs_unchecked(field, c)
    }

    /// `Π (T − r)`.
    pub fn from_roots(field: &Field, roots: &[FieldElement]) -> Polynomial {
        let mut acc = Polynomial::monomial(field, 0);
        for r in roots {
            let lin = Polynomial::from_coeffs_unchecked(field, vec![-r, field.one()]);
            acc = acc.mul(&lin);
        }
        acc
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn leading(&self) -> &FieldElement {
        self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_exact_zero()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().eq_at_precision(&self.field.one())
    }

    /// Smallest absolute precision among the coefficients.
    pub fn min_known_to(&self) -> Option<i64> {
        self.coeffs.iter().filter_map(|c| c.known_to()).min()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|i| &self.coeff(i) + &other.coeff(i)).collect();
        Polynomial::trimmed(&self.field, c)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|i| &self.coeff(i) - &other.coeff(i)).collect();
        Polynomial::trimmed(&self.field, c)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut c = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_exact_zero() {
                    continue;
                }
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        Polynomial::trimmed(&self.field, c)
    }

    pub fn scale(&self, s: &FieldElement) -> Polynomial {
        Polynomial::trimmed(&self.field, self.coeffs.iter().map(|c| c * s).collect())
    }

    fn trimmed(field: &Field, mut c: Vec<FieldElement>) -> Polynomial {
        while c.len() > 1 && c.last().unwrap().is_exact_zero() {
            c.pop();
        }
        Polynomial::from_coeffs_unchecked(field, c)
    }

    /// Coefficientwise equality at precision (missing coefficients count as 0).
    pub fn eq_at_precision(&self, other: &Polynomial) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|i| self.coeff(i).eq_at_precision(&other.coeff(i)))
    }

    /// Horner evaluation at a field element.
    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, a: &Matrix) -> Matrix {
        assert!(a.is_square(), "eval_matrix needs a square matrix");
        let n = a.rows();
        let mut acc = Matrix::zeros(&self.field, n, n);
        for c in self.coeffs.iter().rev() {
            acc = &acc * a;
            if !c.is_exact_zero() {
                for i in 0..n {
                    let y = acc.get(i, i) + c;
                    acc.set(i, i, y);
                }
            }
        }
        acc
    }

    /// Companion matrix of a monic polynomial (last column carries `-a_i`).
    pub fn companion(&self) -> Matrix {
        let n = self.degree();
        let mut m = Matrix::zeros(&self.field, n, n);
        for i in 1..n {
            m.set(i, i - 1, self.field.one());
        }
        for i in 0..n {
            m.set(i, n - 1, -&self.coeffs[i]);
        }
        m
    }

    /// Newton polygon of the coefficient valuations.
    ///
    /// Zero roots are read only from trailing coefficients that are exact
    /// zeros. Every coefficient that is zero at precision must provably lie
    /// on or above the hull of the determined points.
    pub fn newton_polygon(&self) -> Result<NewtonPolygon> {
        if self.is_zero() {
            return Err(Error::InvalidArgument("Newton polygon of the zero polynomial".into()));
        }
        let z = self.coeffs.iter().take_while(|c| c.is_exact_zero()).count();
        if self.coeffs[z].is_zero_at_precision() {
            return Err(Error::precision(format!(
                "coefficient of T^{z} is zero at precision; root multiplicity at 0 undetermined"
            )));
        }
        if self.leading().is_zero_at_precision() {
            return Err(Error::precision("leading coefficient is zero at precision"));
        }
        let pts: Vec<(usize, i64)> = self.coeffs.iter().enumerate().skip(z).filter_map(|(i, c)| c.val().map(|v| (i, v))).collect();
        let mut hull: Vec<(usize, i64)> = Vec::new();
        for &p in &pts {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                // drop b if it is on or above the chord a–p
                let lhs = (b.1 - a.1) as i128 * (p.0 - a.0) as i128;
                let rhs = (p.1 - a.1) as i128 * (b.0 - a.0) as i128;
                if lhs >= rhs {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        for (i, c) in self.coeffs.iter().enumerate().skip(z) {
            if let Some(k) = c.known_to().filter(|_| c.is_zero_at_precision()) {
                let h = hull_value(&hull, i);
                if Rational::from_integer(k) < h {
                    return Err(Error::precision(format!(
                        "coefficient of T^{i} known only to O(π^{k}), below the hull value {}",
                        crate::norm::rational_string(&h)
                    )));
                }
            }
        }
        let mut segments: Vec<Segment> = hull
            .windows(2)
            .map(|w| Segment {
                slope: Rational::new(w[0].1 - w[1].1, (w[1].0 - w[0].0) as i64),
                length: w[1].0 - w[0].0,
            })
            .collect();
        segments.reverse();
        Ok(NewtonPolygon {
            vertices: hull,
            segments,
            zero_root_multiplicity: z,
        })
    }

    /// Split a monic polynomial into factors with pure Newton polygons.
    ///
    /// Returns the zero-root factor `T^z` first (if any), then one factor per
    /// segment in order of increasing root valuation.
    pub fn slope_factor(&self) -> Result<Vec<(Slope, Polynomial)>> {
        if !self.is_monic() {
            return Err(Error::InvalidArgument("slope_factor needs a monic polynomial".into()));
        }
        let np = self.newton_polygon()?;
        let z = np.zero_root_multiplicity;
        let mut out = Vec::new();
        if z > 0 {
            out.push((Slope::ZeroRoot, Polynomial::monomial(&self.field, z)));
        }
        if np.segments.is_empty() {
            return Ok(out);
        }
        let shifted = Polynomial::from_coeffs_unchecked(&self.field, self.coeffs[z..].to_vec());
        // vertices left to right carry decreasing root valuations
        let verts: Vec<usize> = np.vertices.iter().map(|&(i, _)| i - z).collect();
        let mut rest = shifted;
        let mut offset = 0;
        let mut factors = Vec::new();
        for w in 1..verts.len() {
            let slope = Rational::new(
                np.vertices[w - 1].1 - np.vertices[w].1,
                (verts[w] - verts[w - 1]) as i64,
            );
            if w + 1 == verts.len() {
                factors.push((Slope::Finite(slope), rest.clone()));
                break;
            }
            let (g, h) = hensel_split(&rest, verts[w] - offset).map_err(|e| match e {
                Error::PrecisionExhausted(m) => Error::PrecisionExhausted(format!(
                    "separating root valuation {} at vertex T^{}: {m}",
                    crate::norm::rational_string(&slope),
                    verts[w] + z
                )),
                other => other,
            })?;
            factors.push((Slope::Finite(slope), g));
            rest = h;
            offset = verts[w];
        }
        factors.reverse();
        out.extend(factors);
        Ok(out)
    }

    /// Text form, highest degree first; coefficients are parenthesized.
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_exact_zero() && self.coeffs.len() > 1 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "T".to_string(),
                k => format!("T^{k}"),
            };
            parts.push(if i == 0 {
                format!("({})", c.render())
            } else {
                format!("({})*{mono}", c.render())
            });
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Height of the hull at abscissa `i` (must lie within the hull's range).
fn hull_value(hull: &[(usize, i64)], i: usize) -> Rational {
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.0 <= i && i <= b.0 {
            let t = Rational::new((i - a.0) as i64, (b.0 - a.0) as i64);
            return Rational::from_integer(a.1) + t * Rational::from_integer(b.1 - a.1);
        }
    }
    Rational::from_integer(hull[0].1)
}

/// Factor `f = g·h` where `g` is monic of degree `i` collecting the roots
/// left of the hull vertex at `T^i` (the larger root valuations) and `h`
/// collects the rest. Newton iteration on the Sylvester system
/// `g·Δh + h·Δg = f − g·h` until the correction is zero at precision.
fn hensel_split(f: &Polynomial, i: usize) -> Result<(Polynomial, Polynomial)> {
    let k = f.field().clone();
    let n = f.degree();
    assert!(0 < i && i < n);
    let a = f.coeffs();
    let ai_inv = a[i].inv()?;
    let mut g: Vec<FieldElement> = a[..i].iter().map(|c| c * &ai_inv).collect();
    g.push(k.one());
    let mut h: Vec<FieldElement> = a[i..].to_vec();
    for step in 0..MAX_LIFT_STEPS {
        let gp = Polynomial::from_coeffs_unchecked(&k, g.clone());
        let hp = Polynomial::from_coeffs_unchecked(&k, h.clone());
        let prod = gp.mul(&hp);
        let e: Vec<FieldElement> = (0..n).map(|j| &a[j] - &prod.coeff(j)).collect();
        let mut s = Matrix::zeros(&k, n, n);
        for l in 0..n - i {
            for (j, c) in g.iter().enumerate() {
                s.set(j + l, l, c.clone());
            }
        }
        for m in 0..i {
            for (j, c) in h.iter().enumerate() {
                if j + m < n {
                    s.set(j + m, n - i + m, c.clone());
                }
            }
        }
        let x = s
            .solve_vec(&e)
            .map_err(|err| match err {
                Error::PrecisionExhausted(m) => Error::precision(format!("lift step {step}: {m}")),
                Error::InvalidArgument(_) => Error::precision(format!("lift step {step}: Sylvester system singular")),
                other => other,
            })?;
        let done = x.iter().all(|c| c.is_negligible());
        for l in 0..n - i {
            h[l] = &h[l] + &x[l];
        }
        for m in 0..i {
            g[m] = &g[m] + &x[n - i + m];
        }
        if done {
            return Ok((
                Polynomial::from_coeffs_unchecked(&k, g),
                Polynomial::from_coeffs_unchecked(&k, h),
            ));
        }
    }
    Err(Error::precision(format!(
        "lift did not converge in {MAX_LIFT_STEPS} steps"
    )))
}

// ---------------------------------------------------------------------------
// text form

impl Field {
    /// Parse a polynomial in `T`, e.g. `T^3 - 2*T + 1/5` or `(t^-1 + 1)*T^2 + t`.
    /// Coefficients use the element grammar; compound coefficients go in parentheses.
    pub fn parse_poly(&self, text: &str) -> Result<Polynomial> {
        let bytes = text.as_bytes();
        let mut terms: Vec<(usize, usize, bool)> = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        let mut neg = false;
        let mut prev: Option<u8> = None;
        let mut seen = false;
        let mut signed = false;
        for (pos, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if depth == 0 && prev != Some(b'^') => {
                    if seen {
                        terms.push((start, pos, neg));
                    } else if signed {
                        return Err(Error::Syntax {
                            pos,
                            msg: "expected a term".into(),
                        });
                    }
                    signed = true;
                    neg = b == b'-';
                    start = pos + 1;
                    seen = false;
                }
                _ => {}
            }
            if !b.is_ascii_whitespace() {
                if !(matches!(b, b'+' | b'-') && depth == 0 && prev != Some(b'^')) {
                    seen = true;
                }
                prev = Some(b);
            }
            if depth < 0 {
                return Err(Error::Syntax {
                    pos,
                    msg: "unbalanced ')'".into(),
                });
            }
        }
        if depth != 0 {
            return Err(Error::Syntax {
                pos: text.len(),
                msg: "unbalanced '('".into(),
            });
        }
        if !seen {
            return Err(Error::Syntax {
                pos: text.len(),
                msg: "empty term".into(),
            });
        }
        terms.push((start, text.len(), neg));
        let mut coeffs: Vec<FieldElement> = Vec::new();
        for (s, e, neg) in terms {
            let (deg, c) = self.parse_poly_term(&text[s..e], s)?;
            if coeffs.len() <= deg {
                coeffs.resize(deg + 1, self.zero());
            }
            let c = if neg { -c } else { c };
            coeffs[deg] = &coeffs[deg] + &c;
        }
        Polynomial::new(self, coeffs)
    }

    fn parse_poly_term(&self, term: &str, offset: usize) -> Result<(usize, FieldElement)> {
        let shift = |e: Error| match e {
            Error::Syntax { pos, msg } => Error::Syntax {
                pos: pos + offset,
                msg,
            },
            other => other,
        };
        // locate `T` outside parentheses
        let mut depth = 0;
        let mut tpos = None;
        for (i, b) in term.bytes().enumerate() {
            match b {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'T' if depth == 0 => tpos = Some(i),
                _ => {}
            }
        }
        let (coeff_text, deg) = match tpos {
            None => (term, 0usize),
            Some(i) => {
                let rest = term[i + 1..].trim();
                let deg = if rest.is_empty() {
                    1
                } else if let Some(d) = rest.strip_prefix('^') {
                    d.trim().parse::<usize>().map_err(|_| Error::Syntax {
                        pos: offset + i + 1,
                        msg: "expected a nonnegative degree".into(),
                    })?
                } else {
                    return Err(Error::Syntax {
                        pos: offset + i + 1,
                        msg: "unexpected text after T".into(),
                    });
                };
                let c = term[..i].trim_end();
                let c = c.strip_suffix('*').unwrap_or(c);
                (c, deg)
            }
        };
        let trimmed = coeff_text.trim();
        if trimmed.is_empty() {
            if tpos.is_none() {
                return Err(Error::Syntax {
                    pos: offset,
                    msg: "empty term".into(),
                });
            }
            return Ok((deg, self.one()));
        }
        let lead = coeff_text.len() - coeff_text.trim_start().len();
        let (inner, inner_off) = if trimmed.starts_with('(') && trimmed.ends_with(')') {
            (&trimmed[1..trimmed.len() - 1], offset + lead + 1)
        } else {
            (trimmed, offset + lead)
        };
        let c = self.parse(inner).map_err(|e| {
            shift(match e {
                Error::Syntax { pos, msg } => Error::Syntax {
                    pos: pos + inner_off - offset,
                    msg,
                },
                other => other,
            })
        })?;
        Ok((deg, c))
    }
}

/// Root valuation multiset `{val(c)}` as `(slope, multiplicity)` pairs,
/// increasing; exact zeros are counted separately.
pub fn valuation_multiset(roots: &[FieldElement]) -> (usize, Vec<(Rational, usize)>) {
    let zeros = roots.iter().filter(|r| r.is_exact_zero()).count();
    let mut vals: Vec<i64> = roots.iter().filter_map(|r| r.val()).collect();
    vals.sort();
    let mut out: Vec<(Rational, usize)> = Vec::new();
    for v in vals {
        let r = Rational::from_integer(v);
        match out.last_mut() {
            Some((s, m)) if *s == r => *m += 1,
            _ => out.push((r, 1)),
        }
    }
    (zeros, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u32) -> Field {
        Field::padic(p, 20).unwrap()
    }

    fn segs(np: &NewtonPolygon) -> Vec<(Rational, usize)> {
        np.segments.iter().map(|s| (s.slope, s.length)).collect()
    }

    #[test]
    fn two_integer_slopes() {
        let k = q(5);
        let f = k.parse_poly("T^2 - 6*T + 5").unwrap();
        let np = f.newton_polygon().unwrap();
        assert_eq!(segs(&np), vec![(Rational::from_integer(0), 1), (Rational::from_integer(1), 1)]);
        let fac = f.slope_factor().unwrap();
        assert_eq!(fac.len(), 2);
        assert!(fac[0].1.eq_at_precision(&k.parse_poly("T - 1").unwrap()));
        assert!(fac[1].1.eq_at_precision(&k.parse_poly("T - 5").unwrap()));
        assert!(fac[0].1.mul(&fac[1].1).eq_at_precision(&f));
    }

    #[test]
    fn fractional_slope_is_unsplit() {
        let k = q(5);
        let f = k.parse_poly("T^2 - 5").unwrap();
        let np = f.newton_polygon().unwrap();
        assert_eq!(segs(&np), vec![(Rational::new(1, 2), 2)]);
        let fac = f.slope_factor().unwrap();
        assert_eq!(fac.len(), 1);
        assert_eq!(fac[0].0, Slope::Finite(Rational::new(1, 2)));
        assert!(fac[0].1.eq_at_precision(&f));
    }

    #[test]
    fn zero_roots() {
        let k = q(3);
        let f = k.parse_poly("T^3").unwrap();
        let np = f.newton_polygon().unwrap();
        assert_eq!(np.zero_root_multiplicity, 3);
        assert!(np.segments.is_empty());
        let f = k.parse_poly("T^3 - 3*T").unwrap();
        let fac = f.slope_factor().unwrap();
        assert_eq!(fac[0].0, Slope::ZeroRoot);
        assert_eq!(fac[0].1.degree(), 1);
        assert_eq!(fac[1].0, Slope::Finite(Rational::new(1, 2)));
        assert!(fac[1].1.eq_at_precision(&k.parse_poly("T^2 - 3").unwrap()));
    }

    #[test]
    fn undetermined_constant_term() {
        let k = q(5);
        let f = k.parse_poly("T^2 + T + O(p^3)").unwrap();
        assert!(f.newton_polygon().unwrap_err().is_precision());
        // a small middle coefficient above the hull is harmless
        let f = k.parse_poly("T^2 + O(p^3)*T + 5").unwrap();
        let np = f.newton_polygon().unwrap();
        assert_eq!(segs(&np), vec![(Rational::new(1, 2), 2)]);
        let f = k.parse_poly("T^2 + O(p)*T + 125").unwrap();
        assert!(f.newton_polygon().unwrap_err().is_precision());
    }

    #[test]
    fn evaluation() {
        let k = q(5);
        let f = k.parse_poly("T - 1").unwrap();
        assert!(f.eval(&k.one()).is_negligible());
        let sq = k.parse_poly("T^2").unwrap();
        let a = Matrix::diag(&k, &[k.from_i64(5), k.one()]);
        let r = sq.eval_matrix(&a);
        assert!(r.get(0, 0).eq_at_precision(&k.from_i64(25)));
        assert!(r.get(1, 1).eq_at_precision(&k.one()));
        let g = k.parse_poly("T^2 - 5").unwrap();
        let r = g.eval_matrix(&Matrix::zeros(&k, 2, 2));
        assert!(r.get(0, 0).eq_at_precision(&k.from_i64(-5)));
    }

    #[test]
    fn parse_forms() {
        let k = q(5);
        let f = k.parse_poly("T^3 - 2*T + 1/5").unwrap();
        assert_eq!(f.degree(), 3);
        assert_eq!(f.coeff(0).val(), Some(-1));
        assert!(f.coeff(1).eq_at_precision(&k.from_i64(-2)));
        let l = Field::laurent(2, 1, 10).unwrap();
        let g = l.parse_poly("(t^-1 + 1)*T^2 + t*T + t^3").unwrap();
        assert_eq!(g.coeff(2).val(), Some(-1));
        assert_eq!(g.coeff(1).val(), Some(1));
        assert!(matches!(k.parse_poly("T^2 + + 1"), Err(Error::Syntax { .. })));
        assert!(matches!(k.parse_poly("T^"), Err(Error::Syntax { .. })));
        let r = k.parse_poly(&f.render()).unwrap();
        assert!(r.eq_at_precision(&f));
    }

    #[test]
    fn three_way_split_over_laurent() {
        let k = Field::laurent(3, 1, 30).unwrap();
        let roots: Vec<FieldElement> = ["t^-2 + 1", "2 + t", "t^3", "2*t^3 + t^5"]
            .iter()
            .map(|s| k.parse(s).unwrap())
            .collect();
        let f = Polynomial::from_roots(&k, &roots);
        let np = f.newton_polygon().unwrap();
        assert_eq!(
            segs(&np),
            vec![(Rational::from_integer(-2), 1), (Rational::from_integer(0), 1), (Rational::from_integer(3), 2)]
        );
        let fac = f.slope_factor().unwrap();
        let mut prod = Polynomial::monomial(&k, 0);
        for (_, g) in &fac {
            assert_eq!(g.newton_polygon().unwrap().segments.len(), 1);
            prod = prod.mul(g);
        }
        assert!(prod.eq_at_precision(&f));
    }
}
