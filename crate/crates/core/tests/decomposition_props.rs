use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ultradyn_core::gen::{self, Planted};
use ultradyn_core::linalg::{adapted_norm, char_poly, spectral_decompose, AdaptedNorm, SpectralDecomposition};
use ultradyn_core::{Field, FieldElement, Matrix, NormValue, Polynomial, Slope};

fn fields() -> Vec<Field> {
    vec![
        Field::padic(2, 40).unwrap(),
        Field::padic(3, 40).unwrap(),
        Field::padic(5, 40).unwrap(),
        Field::laurent(2, 1, 40).unwrap(),
        Field::laurent(3, 1, 40).unwrap(),
    ]
}

/// 50 matrices per field and size, every other one with a kernel.
fn corpus() -> Vec<Planted> {
    let mut out = Vec::new();
    for (fi, k) in fields().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(31 + fi as u64);
        for n in 2..=6 {
            for i in 0..50 {
                out.push(if i % 2 == 0 {
                    gen::planted(k, &mut rng, n)
                } else {
                    gen::planted_with_kernel(k, &mut rng, n)
                });
            }
        }
    }
    out
}

fn combination(k: &Field, basis: &Matrix, rng: &mut ChaCha8Rng) -> Vec<FieldElement> {
    let c = gen::vector(k, rng, basis.cols(), -2, 2);
    basis.mul_vec(&c)
}

fn check_decomposition(a: &Matrix, d: &SpectralDecomposition, planted: &BTreeMap<Slope, usize>) {
    let k = a.field();
    let n = a.rows();
    let got: BTreeMap<Slope, usize> = d.components.iter().map(|c| (c.slope, c.multiplicity)).collect();
    assert_eq!(&got, planted);
    assert_eq!(got.values().sum::<usize>(), n);
    assert!((&(&d.inverse * &d.change_of_basis) - &Matrix::identity(k, n)).is_negligible());

    let conj = &(&d.inverse * a) * &d.change_of_basis;
    for i in 0..d.components.len() {
        for j in 0..d.components.len() {
            if i == j {
                continue;
            }
            for r in d.range(i) {
                for c in d.range(j) {
                    assert!(conj.get(r, c).is_negligible(), "off-block entry ({r},{c})");
                }
            }
        }
    }

    // E_0 against an independent kernel of A^n
    let ik = a.pow(n as u32).rref_val().unwrap().kernel;
    let e0 = d.span_where(|r| r.is_zero());
    assert_eq!(ik.cols(), e0.cols());
    if ik.cols() > 0 {
        assert_eq!(ik.hcat(&e0).rank().unwrap(), ik.cols());
    }

    // char poly is the product over the components
    let mut prod = Polynomial::monomial(k, 0);
    for c in &d.components {
        prod = prod.mul(&char_poly(&c.block));
    }
    assert!(prod.eq_at_precision(&char_poly(a)));
}

/// Exact norm of a vector, or `None` with an upper bound when it is zero at precision.
fn measured(nm: &AdaptedNorm, v: &[FieldElement]) -> (Option<NormValue>, NormValue) {
    if v.iter().all(|x| x.is_negligible()) {
        (None, nm.norm.norm_bound(v))
    } else {
        let e = nm.norm(v).unwrap();
        (Some(e), e)
    }
}

fn check_norm(a: &Matrix, d: &SpectralDecomposition, nm: &AdaptedNorm, rng: &mut ChaCha8Rng) {
    let k = a.field();
    for _ in 0..100 {
        // (a) max splitting; parts that vanish at precision only carry a bound
        let x = gen::vector(k, rng, a.rows(), -3, 3);
        let (Some(nx), _) = measured(nm, &x) else { continue };
        let mut exact = NormValue::Zero;
        let mut bound = NormValue::Zero;
        for p in d.split(&x) {
            match measured(nm, &p) {
                (Some(e), _) => exact = exact.max(e),
                (None, b) => bound = bound.max(b),
            }
        }
        assert!(nx >= exact && nx <= exact.max(bound));
        if bound < exact {
            assert_eq!(nx, exact);
        }
    }
    for c in &d.components {
        for _ in 0..20 {
            let y = combination(k, &c.basis, rng);
            let (Some(ny), _) = measured(nm, &y) else { continue };
            let (nay, bay) = measured(nm, &a.mul_vec(&y));
            match c.slope {
                // (b) strict contraction below ε on E_0
                Slope::ZeroRoot => assert!(bay < nm.epsilon.mul(ny)),
                // (c) exact scaling by ρ
                Slope::Finite(_) => assert_eq!(nay, Some(ny.mul(c.char_value()))),
            }
        }
    }
}

#[test]
fn planted_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in corpus() {
        let a = &p.matrix;
        let d = spectral_decompose(a).unwrap();
        check_decomposition(a, &d, &p.slopes);
        let eps = NormValue::from_int_exponent(-1);
        let nm = adapted_norm(a, &d, eps).unwrap();
        check_norm(a, &d, &nm, &mut rng);
    }
}

#[test]
fn extension_residue_field() {
    let k = Field::laurent(2, 2, 30).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for n in 2..=4 {
        for _ in 0..10 {
            let p = gen::planted(&k, &mut rng, n);
            let d = spectral_decompose(&p.matrix).unwrap();
            check_decomposition(&p.matrix, &d, &p.slopes);
            let nm = adapted_norm(&p.matrix, &d, NormValue::ONE).unwrap();
            check_norm(&p.matrix, &d, &nm, &mut rng);
        }
    }
}

#[test]
fn nilpotent_weights() {
    // A(x, y) = (y, 0) with weights (1, q^2) has operator norm q^-2 < q^-1
    let k = Field::padic(3, 20).unwrap();
    let a = Matrix::parse(&k, &[vec!["0", "1"], vec!["0", "0"]]).unwrap();
    let d = spectral_decompose(&a).unwrap();
    let nm = adapted_norm(&a, &d, NormValue::from_int_exponent(-1)).unwrap();
    let w: Vec<String> = nm.weights().iter().map(|w| w.to_string()).collect();
    assert_eq!(w, vec!["q^0", "q^2"]);
    assert_eq!(nm.op_norm(&a).unwrap(), NormValue::from_int_exponent(-2));
}
