//! Independent reference computations used by the integration tests.
//!
//! Nothing here calls the lattice, Smith form or decomposition code; only
//! field arithmetic and matrix products are shared with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use ultradyn_core::{FieldElement, FieldKind, Matrix, Rational, Slope};

/// `[A(U) + U : U]` by enumerating cosets: the subgroup of `(K/O)^n`
/// generated by the columns of `M = U^-1 A U` and their `π`-multiples.
/// `u` holds a basis of `U` in its columns. Prime residue fields only.
pub fn coset_count(a: &Matrix, u: &Matrix, limit: usize) -> Option<usize> {
    let k = a.field();
    assert!(
        k.kind() == FieldKind::Padic || k.residue().is_prime_field(),
        "coset enumeration assumes a prime residue field"
    );
    let m = &(&u.inverse().unwrap() * a) * u;
    let n = m.rows();
    let depth = m
        .entries()
        .iter()
        .filter_map(|x| x.val())
        .map(|v| (-v).max(0))
        .max()
        .unwrap_or(0);
    let frac = |v: &[FieldElement]| -> Vec<FieldElement> { v.iter().map(|x| x.truncate_below(0)).collect() };
    let key = |v: &[FieldElement]| -> Vec<u32> {
        v.iter()
            .flat_map(|x| (-depth..0).map(move |i| x.digit(i).expect("fractional digit known")))
            .collect()
    };
    let mut gens = Vec::new();
    for j in 0..n {
        let col = m.column(j);
        for i in 0..depth {
            gens.push(frac(&col.iter().map(|x| x.mul_pi_pow(i)).collect::<Vec<_>>()));
        }
    }
    let zero = vec![k.zero(); n];
    let mut seen: HashSet<Vec<u32>> = HashSet::from([key(&zero)]);
    let mut frontier = vec![zero];
    while let Some(x) = frontier.pop() {
        for g in &gens {
            let y: Vec<FieldElement> = frac(&x.iter().zip(g).map(|(a, b)| a + b).collect::<Vec<_>>());
            if seen.insert(key(&y)) {
                if seen.len() > limit {
                    return None;
                }
                frontier.push(y);
            }
        }
    }
    Some(seen.len())
}

/// `log_q` of a count that must be a power of `q`.
pub fn log_q(count: usize, q: u64) -> i64 {
    let mut c = count as u64;
    let mut e = 0;
    while c > 1 {
        assert_eq!(c % q, 0, "{count} is not a power of {q}");
        c /= q;
        e += 1;
    }
    e
}

/// Scale exponent read off planted slopes: `Σ_{s<0} (−s)·mult`.
pub fn planted_scale(slopes: &BTreeMap<Slope, usize>) -> i64 {
    let mut total = Rational::from_integer(0);
    for (s, m) in slopes {
        if let Slope::Finite(s) = s {
            if *s < Rational::from_integer(0) {
                total += -*s * Rational::from_integer(*m as i64);
            }
        }
    }
    assert!(total.is_integer());
    total.to_integer()
}
