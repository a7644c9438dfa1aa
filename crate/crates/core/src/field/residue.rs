//! Finite residue fields `F_q`, `q = p^f`.
//!
//! Elements are encoded as integers `0..q`: the base-`p` digits of the code
//! are the coefficients (constant first) of a polynomial in the generator
//! `g`, reduced modulo a fixed monic irreducible polynomial of degree `f`.
//! Prime fields use direct modular arithmetic; extension fields use
//! precomputed tables.

use crate::error::{Error, Result};

/// Largest extension field size for which tables are built.
pub const MAX_EXTENSION_SIZE: u64 = 1 << 12;

#[derive(Clone, Debug)]
pub struct ResidueField {
    p: u32,
    degree: u32,
    q: u32,
    modulus: Vec<u32>,
    tables: Option<Tables>,
}

#[derive(Clone, Debug)]
struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl ResidueField {
    /// Build `F_{p^degree}`. When `modulus` is `None`, the lexicographically
    /// first monic irreducible polynomial of the given degree is used
    /// (`x^2+x+1` for `F_4`, `x^3+x+1` for `F_8`, `x^2+1` for `F_9`).
    pub fn new(p: u32, degree: u32, modulus: Option<Vec<u32>>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidSpec(format!("{p} is not prime")));
        }
        if p >= 1 << 31 {
            return Err(Error::InvalidSpec(format!("prime {p} too large")));
        }
        if degree == 0 {
            return Err(Error::InvalidSpec("residue degree must be >= 1".into()));
        }
        if degree == 1 {
            if let Some(m) = &modulus {
                if m.len() != 2 || m[1] != 1 {
                    return Err(Error::InvalidSpec("degree-1 modulus must be monic linear".into()));
                }
            }
            return Ok(ResidueField {
                p,
                degree,
                q: p,
                modulus: vec![0, 1],
                tables: None,
            });
        }
        let q64 = (p as u64).checked_pow(degree).unwrap_or(u64::MAX);
        if q64 > MAX_EXTENSION_SIZE {
            return Err(Error::InvalidSpec(format!(
                "extension field of size {q64} exceeds supported {MAX_EXTENSION_SIZE}"
            )));
        }
        let modulus = match modulus {
            Some(m) => {
                if m.len() != degree as usize + 1
                    || m[degree as usize] != 1
                    || m.iter().any(|&c| c >= p)
                {
                    return Err(Error::InvalidSpec(
                        "modulus must be monic of the field degree with coefficients < p".into(),
                    ));
                }
                if !poly_irreducible(&m, p) {
                    return Err(Error::InvalidSpec(format!("modulus {m:?} is reducible")));
                }
                m
            }
            None => default_modulus(p, degree),
        };
        let q = q64 as u32;
        let mut field = ResidueField {
            p,
            degree,
            q,
            modulus,
            tables: None,
        };
        field.tables = Some(field.build_tables());
        Ok(field)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.degree == 1
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            None => {
                let s = a as u64 + b as u64;
                (s % self.p as u64) as u32
            }
            Some(t) => t.add[(a * self.q + b) as usize],
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        match &self.tables {
            None => {
                if a == 0 {
                    0
                } else {
                    self.p - a
                }
            }
            Some(t) => t.neg[a as usize],
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            None => ((a as u64 * b as u64) % self.p as u64) as u32,
            Some(t) => t.mul[(a * self.q + b) as usize],
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        match &self.tables {
            None => Some(pow_mod(a as u64, self.p as u64 - 2, self.p as u64) as u32),
            Some(t) => Some(t.inv[a as usize]),
        }
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// The absolute Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.p as u64)
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }

    /// Interpret a code (possibly negative) as a field element: codes in
    /// `0..q` are taken as is, negative codes are negated.
    pub fn from_code(&self, code: i64) -> Option<u32> {
        if self.degree == 1 {
            return Some(self.from_int(code));
        }
        if code >= 0 {
            (code < self.q as i64).then_some(code as u32)
        } else {
            let c = -code;
            (c < self.q as i64).then(|| self.neg(c as u32))
        }
    }

    fn digits(&self, a: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.degree as usize);
        let mut a = a;
        for _ in 0..self.degree {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    fn encode(&self, digits: &[u32]) -> u32 {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    fn build_tables(&self) -> Tables {
        let q = self.q as usize;
        let p = self.p;
        let f = self.degree as usize;
        let digits: Vec<Vec<u32>> = (0..self.q).map(|a| self.digits(a)).collect();
        let mut add = vec![0u32; q * q];
        let mut mul = vec![0u32; q * q];
        let mut neg = vec![0u32; q];
        for a in 0..q {
            let da = &digits[a];
            let nd: Vec<u32> = da.iter().map(|&x| (p - x) % p).collect();
            neg[a] = self.encode(&nd);
            for b in 0..q {
                let db = &digits[b];
                let s: Vec<u32> = da.iter().zip(db).map(|(&x, &y)| (x + y) % p).collect();
                add[a * q + b] = self.encode(&s);
                // schoolbook product then reduce by the monic modulus
                let mut prod = vec![0u64; 2 * f - 1];
                for (i, &x) in da.iter().enumerate() {
                    for (j, &y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
                    }
                }
                for k in (f..prod.len()).rev() {
                    let c = prod[k];
                    if c == 0 {
                        continue;
                    }
                    prod[k] = 0;
                    for (i, &m) in self.modulus[..f].iter().enumerate() {
                        let idx = k - f + i;
                        prod[idx] = (prod[idx] + (p as u64 - c) * m as u64) % p as u64;
                    }
                }
                let r: Vec<u32> = prod[..f].iter().map(|&x| x as u32).collect();
                mul[a * q + b] = self.encode(&r);
            }
        }
        let mut inv = vec![0u32; q];
        for a in 1..q {
            for b in 1..q {
                if mul[a * q + b] == 1 {
                    inv[a] = b as u32;
                    break;
                }
            }
        }
        Tables { add, mul, neg, inv }
    }
}

impl PartialEq for ResidueField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.degree == other.degree && self.modulus == other.modulus
    }
}

impl Eq for ResidueField {}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// Remainder of `a` modulo monic `b` over `F_p` (constant term first).
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&x| x as u64).collect();
    let db = b.len() - 1;
    while r.len() > db {
        let c = r.pop().unwrap() % p as u64;
        if c != 0 {
            let off = r.len() - db;
            for (i, &m) in b[..db].iter().enumerate() {
                r[off + i] = (r[off + i] + (p as u64 - c) * m as u64) % p as u64;
            }
        }
    }
    r.into_iter().map(|x| (x % p as u64) as u32).collect()
}

fn poly_irreducible(m: &[u32], p: u32) -> bool {
    let f = m.len() - 1;
    for d in 1..=f / 2 {
        // every monic polynomial of degree d
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut cand = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                cand.push((c % p as u64) as u32);
                c /= p as u64;
            }
            cand.push(1);
            if poly_rem(m, &cand, p).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

fn default_modulus(p: u32, degree: u32) -> Vec<u32> {
    let f = degree as usize;
    let count = (p as u64).pow(degree);
    for code in 0..count {
        // lexicographic in (c_{f-1}, ..., c_0)
        let mut m = vec![0u32; f + 1];
        let mut c = code;
        for i in 0..f {
            m[i] = (c % p as u64) as u32;
            c /= p as u64;
        }
        m[f] = 1;
        if m[0] != 0 && poly_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_moduli() {
        assert_eq!(ResidueField::new(2, 2, None).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(ResidueField::new(2, 3, None).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(ResidueField::new(3, 2, None).unwrap().modulus(), &[1, 0, 1]);
    }

    #[test]
    fn rejects_reducible_modulus() {
        assert!(ResidueField::new(2, 2, Some(vec![1, 0, 1])).is_err());
        assert!(ResidueField::new(4, 1, None).is_err());
    }

    #[test]
    fn extension_field_axioms() {
        for (p, f) in [(2, 2), (2, 3), (3, 2)] {
            let k = ResidueField::new(p, f, None).unwrap();
            let q = k.q();
            for a in 0..q {
                assert_eq!(k.add(a, k.neg(a)), 0);
                if a != 0 {
                    assert_eq!(k.mul(a, k.inv(a).unwrap()), 1);
                }
                // Frobenius is additive and a^q = a
                assert_eq!(k.pow(a, q as u64), a);
                for b in 0..q {
                    assert_eq!(k.frobenius(k.add(a, b)), k.add(k.frobenius(a), k.frobenius(b)));
                    assert_eq!(k.mul(a, b), k.mul(b, a));
                }
            }
        }
    }

    #[test]
    fn prime_field_arithmetic() {
        let k = ResidueField::new(5, 1, None).unwrap();
        assert_eq!(k.add(3, 4), 2);
        assert_eq!(k.mul(3, 4), 2);
        assert_eq!(k.inv(2), Some(3));
        assert_eq!(k.from_int(-1), 4);
        assert_eq!(k.inv(0), None);
    }
}
