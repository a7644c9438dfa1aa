use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ultradyn_core::field::ResidueField;
use ultradyn_core::profinite::*;
use ultradyn_core::{Field, Valuation};

fn residue(p: u32, d: u32) -> Arc<ResidueField> {
    Arc::new(ResidueField::new(p, d, None).unwrap())
}

/// Schoolbook product over F_2 modulo X^n.
fn mul_f2(a: &[u32], b: &[u32], n: usize) -> Vec<u32> {
    let mut c = vec![0u32; n];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            if i + j < n {
                c[i + j] ^= x & y;
            }
        }
    }
    c
}

#[test]
fn chart_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..500 {
        let f = if i % 2 == 0 { residue(2, 1) } else { residue(3, 2) };
        let m = rng.gen_range(1..12);
        let w = Window::random(f, -m, m, &mut rng).unwrap();
        let (z, y) = phi_split(&w).unwrap();
        assert_eq!((z.trunc(), y.trunc()), (m as usize + 1, m as usize));
        assert_eq!(z.coeff(0), Some(0));
        assert_eq!(phi_join(&z, &y).unwrap(), w);
    }
}

#[test]
fn asymmetric_windows_are_rejected() {
    let f = residue(2, 1);
    for (lo, hi) in [(-3, 4), (0, 3), (-2, 1), (0, 0)] {
        if let Ok(w) = Window::random(f.clone(), lo, hi, &mut ChaCha8Rng::seed_from_u64(0)) {
            assert!(phi_split(&w).is_err(), "[{lo},{hi})");
        }
    }
}

#[test]
fn shift_is_conjugate_to_the_chart_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    for _ in 0..500 {
        let f = residue(2, 1);
        let m = rng.gen_range(2..12);
        let w = Window::random(f, -m, m, &mut rng).unwrap();
        let (z, y) = phi_split(&w).unwrap();
        let image = chart_shift(&z, &y);
        // the chart map is defined exactly where a_{-1} vanishes
        assert_eq!(image.is_some(), w.get(-1) == Some(0));
        let Some((z1, y1)) = image else { continue };
        let shifted = two_sided_shift(&w).restrict(-(m - 1), m - 1).unwrap();
        let (z2, y2) = phi_split(&shifted).unwrap();
        let n = m as usize;
        assert_eq!(z1.coeffs()[..n], z2.coeffs()[..n]);
        assert_eq!(y1.coeffs()[..n - 1], y2.coeffs()[..n - 1]);
        checked += 1;
    }
    assert!(checked > 150);
}

#[test]
fn left_shift_undoes_multiplication_by_x() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let f = residue(3, 1);
        let n = rng.gen_range(1..20);
        let s = SeriesTrunc::random(f.clone(), 0, n, &mut rng);
        assert_eq!(left_shift_series(&s.mul_by_x()).coeffs(), s.coeffs());
        // every X^k dies after k + 1 left shifts
        let k = rng.gen_range(0..n);
        let mut x = SeriesTrunc::monomial(f, k, n);
        for _ in 0..=k {
            assert!(!x.is_zero());
            x = left_shift_series(&x);
        }
        assert!(x.is_zero());
    }
}

#[test]
fn multiplication_by_p_raises_valuation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in [2u32, 3, 5, 7] {
        let k = Field::padic(p, 30).unwrap();
        for _ in 0..50 {
            let v0 = rng.gen_range(0..5);
            let z = ultradyn_core::gen::element(&k, &mut rng, v0, v0, 5);
            let vals = mul_by_p_orbit(&z, 10).unwrap();
            for (n, v) in vals.iter().enumerate() {
                assert_eq!(*v, Valuation::Finite(v0 + n as i64));
            }
        }
    }
}

#[test]
fn frobenius_multiplies_valuation_by_p() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (p, d) in [(2, 1), (3, 1), (2, 2)] {
        let f = residue(p, d);
        for _ in 0..200 {
            let n = rng.gen_range(4..30);
            let s = SeriesTrunc::random(f.clone(), 1, n, &mut rng);
            let t = frobenius_series(&s);
            match s.valuation() {
                None => assert!(t.value.is_zero()),
                Some(v) if (p as usize) * v < n => assert_eq!(t.value.valuation(), Some(p as usize * v)),
                Some(_) => assert!(t.truncation_loss),
            }
            // additive in characteristic p, at truncation
            let u = SeriesTrunc::random(f.clone(), 1, n, &mut rng);
            let lhs = frobenius_series(&s.add(&u).unwrap()).value;
            let rhs = frobenius_series(&s).value.add(&frobenius_series(&u).value).unwrap();
            assert_eq!(lhs.coeffs(), rhs.coeffs());
        }
        assert!(frobenius_derivative_vanishes(f));
    }
}

#[test]
fn congruence_subgroup() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = residue(2, 1);
    for _ in 0..500 {
        let n = rng.gen_range(2..40);
        let m = CongruenceMatrix::random(f.clone(), n, &mut rng).unwrap();
        let [a, b, c, d] = m.entries().clone().map(|e| e.coeffs().to_vec());
        // determinant recomputed from scratch
        let ad = mul_f2(&a, &d, n);
        let bc = mul_f2(&b, &c, n);
        let det: Vec<u32> = ad.iter().zip(&bc).map(|(x, y)| x ^ y).collect();
        assert_eq!(det[0], 1);
        assert!(det[1..].iter().all(|&x| x == 0));
        assert_eq!((a[0], b[0], c[0], d[0]), (1, 0, 0, 1));

        let img = sl2_frobenius(&m).unwrap();
        for (x, y) in m.entries().iter().zip(img.value.entries()) {
            for (k, &cf) in x.coeffs().iter().enumerate() {
                if 2 * k < n {
                    assert_eq!(y.coeff(2 * k), Some(cf));
                }
                if 2 * k + 1 < n {
                    assert_eq!(y.coeff(2 * k + 1), Some(0));
                }
            }
        }
        // distance to the identity doubles until it leaves the truncation
        let v = m.distance_valuation();
        let w = img.value.distance_valuation();
        match v {
            None => assert_eq!(w, None),
            Some(v) => assert_eq!(w, Some(2 * v).filter(|&x| x < n)),
        }
    }
}

#[test]
fn certificates_match_the_window_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = residue(2, 1);
    for _ in 0..300 {
        let lo = rng.gen_range(-10..0);
        let hi = rng.gen_range(1..10);
        let support: Vec<i64> = (lo..hi).filter(|_| rng.gen_ratio(1, 3)).collect();
        let w = Window::indicator(f.clone(), lo, hi, &support).unwrap();
        let cert = con_certificate(&w);
        // support kept off an edge reads as bounded on that side
        let left = support.first().is_none_or(|&a| a > lo);
        let right = support.last().is_none_or(|&b| b < hi - 1);
        let expected = match (left, right) {
            (true, true) => ConKind::FiniteSupport,
            (true, false) => ConKind::InConAtScope,
            (false, true) => ConKind::InConMinusAtScope,
            (false, false) => ConKind::Undecided,
        };
        assert_eq!(cert.kind, expected, "{support:?} in [{lo},{hi})");
        assert!(cert.scope.contains(&format!("[{lo},{hi})")));
    }
}
