//! Text grammar for field elements.
//!
//! ```text
//! element := ["-"] term (("+" | "-") term)*
//! term    := coeff ["*" mono] | mono | "O(" base "^" int ")"
//! coeff   := int ["/" int]
//! mono    := sym ["^" int]
//! ```
//!
//! `sym` is the uniformizer symbol of the field; for `Q_p` the numeric prime
//! is accepted as well. An `O(...)` term caps the absolute precision. Laurent
//! coefficients are residue field codes (see [`super::residue`]).

use std::cmp::min;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::element::Repr;
use super::{Field, FieldElement, FieldKind};
use crate::error::{Error, Result};

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn unsigned(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(text.parse().unwrap())
    }

    fn signed_small(&mut self) -> Result<i64> {
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let at = self.pos;
        let n = self.unsigned()?;
        let n: i64 = n.try_into().map_err(|_| Error::Syntax {
            pos: at,
            msg: "exponent out of range".into(),
        })?;
        Ok(if neg { -n } else { n })
    }

    fn word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        (start != self.pos).then(|| std::str::from_utf8(&self.s[start..self.pos]).unwrap())
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

/// A parsed term before precision is applied.
enum Term {
    Monomial { num: BigInt, den: BigInt, exp: i64 },
    BigO(i64),
}

impl Field {
    /// Parse an element; the absolute precision is the field precision unless
    /// an `O(π^M)` term lowers it.
    pub fn parse(&self, text: &str) -> Result<FieldElement> {
        let mut cur = Cursor {
            s: text.as_bytes(),
            pos: 0,
        };
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let neg = if first {
                cur.eat(b'-')
            } else if cur.eat(b'+') {
                false
            } else if cur.eat(b'-') {
                true
            } else if cur.at_end() {
                break;
            } else {
                return Err(cur.err("expected '+' or '-'"));
            };
            first = false;
            let t = self.parse_term(&mut cur)?;
            terms.push(match t {
                Term::Monomial { num, den, exp } => Term::Monomial {
                    num: if neg { -num } else { num },
                    den,
                    exp,
                },
                Term::BigO(m) => {
                    if neg {
                        return Err(cur.err("O-term cannot be negated"));
                    }
                    Term::BigO(m)
                }
            });
        }
        if terms.is_empty() {
            return Err(cur.err("empty element"));
        }
        let mut known_to = self.precision();
        let mut capped = false;
        for t in &terms {
            if let Term::BigO(m) = t {
                known_to = if capped { min(known_to, *m) } else { *m };
                capped = true;
            }
        }
        let mut acc = self.zero();
        let mut any_monomial = false;
        for t in terms {
            if let Term::Monomial { num, den, exp } = t {
                any_monomial = true;
                let c = self.from_rational_at(&num, &den, known_to - exp)?;
                acc = &acc + &c.mul_pi_pow(exp);
            }
        }
        if capped {
            acc = if acc.is_exact_zero() {
                FieldElement::zero_at(self, known_to)
            } else {
                acc.with_precision(known_to)
            };
            if !any_monomial {
                return Ok(FieldElement::zero_at(self, known_to));
            }
        }
        Ok(acc)
    }

    fn parse_base(&self, cur: &mut Cursor) -> Result<()> {
        let at = cur.pos;
        if let Some(w) = cur.word() {
            if w == self.symbol() {
                return Ok(());
            }
            return Err(Error::Syntax {
                pos: at,
                msg: format!("unknown symbol {w:?}"),
            });
        }
        if self.kind() == FieldKind::Padic {
            let n = cur.unsigned()?;
            if n == BigInt::from(self.p()) {
                return Ok(());
            }
        }
        Err(Error::Syntax {
            pos: at,
            msg: "expected uniformizer".into(),
        })
    }

    fn parse_term(&self, cur: &mut Cursor) -> Result<Term> {
        let save = cur.pos;
        if let Some(w) = cur.word() {
            if w == "O" {
                cur.expect(b'(')?;
                self.parse_base(cur)?;
                let exp = if cur.eat(b'^') { cur.signed_small()? } else { 1 };
                cur.expect(b')')?;
                return Ok(Term::BigO(exp));
            }
            if w == self.symbol() {
                let exp = if cur.eat(b'^') { cur.signed_small()? } else { 1 };
                return Ok(Term::Monomial {
                    num: BigInt::one(),
                    den: BigInt::one(),
                    exp,
                });
            }
            cur.pos = save;
            return Err(cur.err(format!("unknown symbol {w:?}")));
        }
        let num_at = cur.pos;
        let num = cur.unsigned()?;
        let mut den = BigInt::one();
        if cur.eat(b'/') {
            let at = cur.pos;
            den = cur.unsigned()?;
            if den.is_zero() {
                return Err(Error::Syntax {
                    pos: at,
                    msg: "zero denominator".into(),
                });
            }
        }
        // a bare `p^k` in Q_p reads as a monomial in the uniformizer
        if self.kind() == FieldKind::Padic && den.is_one() && num == BigInt::from(self.p()) && cur.peek() == Some(b'^') {
            cur.eat(b'^');
            let exp = cur.signed_small()?;
            return Ok(Term::Monomial {
                num: BigInt::one(),
                den,
                exp,
            });
        }
        let num = if self.kind() == FieldKind::Laurent && !self.residue().is_prime_field() {
            if den != BigInt::one() {
                return Err(Error::Syntax {
                    pos: num_at,
                    msg: "fractions are not allowed as extension field codes".into(),
                });
            }
            let code: i64 = (&num).try_into().unwrap_or(i64::MAX);
            if code >= self.q() as i64 {
                return Err(Error::Syntax {
                    pos: num_at,
                    msg: format!("residue code {num} out of range 0..{}", self.q()),
                });
            }
            num
        } else {
            num
        };
        let mut exp = 0;
        if cur.eat(b'*') {
            self.parse_base(cur)?;
            exp = if cur.eat(b'^') { cur.signed_small()? } else { 1 };
        }
        Ok(Term::Monomial { num, den, exp })
    }
}

impl FieldElement {
    /// Canonical text form; `parse(render(x)) == x`.
    pub fn render(&self) -> String {
        let field = self.field();
        let sym = field.symbol();
        let big_o = |k: i64| format!("O({sym}^{k})");
        match self.repr() {
            Repr::Zero => "0".to_string(),
            Repr::Small { known_to } => big_o(*known_to),
            Repr::Unit { known_to, .. } => {
                let body = match field.kind() {
                    FieldKind::Padic => {
                        let (num, v) = self.padic_parts().unwrap();
                        if v >= 0 {
                            let scaled = num * BigInt::from(field.p_pow(v));
                            format!("{scaled}")
                        } else {
                            let den = BigInt::from(field.p_pow(-v));
                            format!("{num}/{den}")
                        }
                    }
                    FieldKind::Laurent => {
                        let (digits, v) = self.laurent_digits().unwrap();
                        let mut parts = Vec::new();
                        for (i, &d) in digits.iter().enumerate() {
                            if d == 0 {
                                continue;
                            }
                            let e = v + i as i64;
                            parts.push(match (d, e) {
                                (d, 0) => format!("{d}"),
                                (1, e) => format!("{sym}^{e}"),
                                (d, e) => format!("{d}*{sym}^{e}"),
                            });
                        }
                        parts.join(" + ")
                    }
                };
                format!("{body} + {}", big_o(*known_to))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    #[test]
    fn parses_padic_rationals() {
        let k = Field::padic(5, 4).unwrap();
        let x = k.parse("3/25").unwrap();
        assert_eq!(x.val(), Some(-2));
        assert_eq!(x.digit(-2), Some(3));
        assert_eq!(x.digit(-1), Some(0));
        assert_eq!(x.digit(0), Some(0));
        assert_eq!(k.parse("0").unwrap(), k.zero());
        assert_eq!(k.parse("-1").unwrap(), k.from_i64(-1));
        assert_eq!(k.parse("2*p^3").unwrap(), k.from_i64(250));
        assert_eq!(k.parse("5^-1").unwrap(), k.from_rational(1, 5).unwrap());
    }

    #[test]
    fn parses_laurent_monomials() {
        let k = Field::laurent(2, 1, 6).unwrap();
        let x = k.parse("t^-1 + 1").unwrap();
        assert_eq!(x.val(), Some(-1));
        assert_eq!(x.digit(0), Some(1));
        let y = k.parse("1*t^2 + t + O(t^3)").unwrap();
        assert_eq!(y.known_to(), Some(3));
        assert_eq!(y.val(), Some(1));
        let kx = Field::new(FieldSpec::laurent(2, 1, 6).with_symbol("X")).unwrap();
        assert_eq!(kx.parse("X^-1").unwrap().val(), Some(-1));
    }

    #[test]
    fn big_o_caps_precision() {
        let k = Field::padic(3, 10).unwrap();
        let x = k.parse("1 + O(p^2)").unwrap();
        assert_eq!(x.known_to(), Some(2));
        let z = k.parse("O(3^4)").unwrap();
        assert!(z.is_zero_at_precision());
        assert_eq!(z.known_to(), Some(4));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let k = Field::padic(5, 4).unwrap();
        match k.parse("1 + + 2") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(k.parse("1/0"), Err(Error::Syntax { .. })));
        assert!(matches!(k.parse("x"), Err(Error::Syntax { .. })));
        assert!(matches!(k.parse(""), Err(Error::Syntax { .. })));
    }

    #[test]
    fn render_round_trips() {
        let k = Field::padic(5, 6).unwrap();
        for text in ["3/25", "-7", "0", "125", "O(p^3)", "1/5 + O(p^2)"] {
            let x = k.parse(text).unwrap();
            assert_eq!(k.parse(&x.render()).unwrap(), x, "{text}");
        }
        let f4 = Field::laurent(2, 2, 5).unwrap();
        for text in ["3*t^-2 + 2", "t", "1 + 3*t^4"] {
            let x = f4.parse(text).unwrap();
            assert_eq!(f4.parse(&x.render()).unwrap(), x, "{text}");
        }
    }
}
