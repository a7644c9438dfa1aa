use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ultradyn_core::{gen, Field, Polynomial, Rational, Slope};

fn fields() -> Vec<Field> {
    vec![
        Field::padic(2, 40).unwrap(),
        Field::padic(3, 40).unwrap(),
        Field::padic(7, 40).unwrap(),
        Field::laurent(2, 1, 40).unwrap(),
        Field::laurent(3, 1, 40).unwrap(),
    ]
}

#[test]
fn products_of_linear_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for round in 0..200 {
        let fields = fields();
        let k = &fields[round % fields.len()];
        let deg = rng.gen_range(1..=6);
        let mut roots = Vec::new();
        let mut expected: BTreeMap<Slope, usize> = BTreeMap::new();
        for _ in 0..deg {
            if rng.gen_ratio(1, 10) {
                roots.push(k.zero());
                *expected.entry(Slope::ZeroRoot).or_default() += 1;
            } else {
                let v = rng.gen_range(-3..=3);
                roots.push(gen::element(k, &mut rng, v, v, 5));
                *expected.entry(Slope::Finite(Rational::from_integer(v))).or_default() += 1;
            }
        }
        let f = Polynomial::from_roots(k, &roots);
        let np = f.newton_polygon().unwrap();
        assert_eq!(np.degree(), f.degree());
        let mut got: BTreeMap<Slope, usize> = np
            .segments
            .iter()
            .map(|s| (Slope::Finite(s.slope), s.length))
            .collect();
        if np.zero_root_multiplicity > 0 {
            got.insert(Slope::ZeroRoot, np.zero_root_multiplicity);
        }
        assert_eq!(got, expected, "round {round}: {}", f.render());

        let factors = f.slope_factor().unwrap();
        let mut prod = Polynomial::monomial(k, 0);
        for (slope, g) in &factors {
            prod = prod.mul(g);
            let gp = g.newton_polygon().unwrap();
            match slope {
                Slope::ZeroRoot => assert!(gp.segments.is_empty()),
                Slope::Finite(s) => {
                    assert_eq!(gp.segments.len(), 1, "factor {} is not pure", g.render());
                    assert_eq!(gp.segments[0].slope, *s);
                    assert_eq!(gp.zero_root_multiplicity, 0);
                }
            }
        }
        assert!(prod.eq_at_precision(&f), "round {round}: {} vs {}", prod.render(), f.render());
    }
}

#[test]
fn fractional_slopes_stay_unsplit() {
    let k = Field::padic(3, 30).unwrap();
    // (T^2 - 3)(T - 9): slopes 1/2 (twice) and 2
    let f = k.parse_poly("T^2 - 3").unwrap().mul(&k.parse_poly("T - 9").unwrap());
    let factors = f.slope_factor().unwrap();
    let shape: Vec<(String, usize)> = factors.iter().map(|(s, g)| (s.to_string(), g.degree())).collect();
    assert_eq!(shape, vec![("1/2".to_string(), 2), ("2".to_string(), 1)]);
}
