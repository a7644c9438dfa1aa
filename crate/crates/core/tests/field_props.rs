use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ultradyn_core::{gen, Field, FieldElement};

fn fields() -> Vec<Field> {
    vec![
        Field::padic(2, 24).unwrap(),
        Field::padic(3, 24).unwrap(),
        Field::padic(5, 24).unwrap(),
        Field::laurent(2, 1, 24).unwrap(),
        Field::laurent(3, 1, 24).unwrap(),
        Field::laurent(2, 2, 24).unwrap(),
    ]
}

fn sample(k: &Field, seed: u64, count: usize) -> Vec<FieldElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| gen::element(k, &mut rng, -3, 3, 6)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ultrametric_inequality(seed in any::<u64>(), which in 0usize..6) {
        let k = &fields()[which];
        let xs = sample(k, seed, 2);
        let (x, y) = (&xs[0], &xs[1]);
        let s = x + y;
        let (ax, ay) = (x.abs().unwrap(), y.abs().unwrap());
        prop_assert!(s.abs_bound() <= ax.max(ay));
        if ax != ay {
            prop_assert_eq!(s.abs().unwrap(), ax.max(ay));
        }
    }

    #[test]
    fn multiplicativity(seed in any::<u64>(), which in 0usize..6) {
        let k = &fields()[which];
        let xs = sample(k, seed, 2);
        let p = &xs[0] * &xs[1];
        prop_assert_eq!(p.abs().unwrap(), xs[0].abs().unwrap().mul(xs[1].abs().unwrap()));
    }

    #[test]
    fn ring_laws_at_precision(seed in any::<u64>(), which in 0usize..6) {
        let k = &fields()[which];
        let xs = sample(k, seed, 3);
        let (x, y, z) = (&xs[0], &xs[1], &xs[2]);
        prop_assert!((&(x + y) + z).eq_at_precision(&(x + &(y + z))));
        prop_assert!((x + y).eq_at_precision(&(y + x)));
        prop_assert!((&(x * y) * z).eq_at_precision(&(x * &(y * z))));
        prop_assert!((x * y).eq_at_precision(&(y * x)));
        prop_assert!((x * &(y + z)).eq_at_precision(&(&(x * y) + &(x * z))));
        let q = x.div(y).unwrap();
        prop_assert!((&q * y).eq_at_precision(x));
    }
}

#[test]
fn render_parse_round_trip() {
    for (i, k) in fields().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        for _ in 0..1000 {
            let x = if rand::Rng::gen_ratio(&mut rng, 1, 20) {
                k.zero()
            } else {
                gen::element(k, &mut rng, -5, 5, 8)
            };
            let text = x.render();
            let y = k.parse(&text).unwrap();
            assert!(y.eq_at_precision(&x), "{text}");
            assert_eq!(y.known_to(), x.known_to(), "{text}");
        }
    }
}

#[test]
fn cancellation_is_reported() {
    let k = Field::padic(5, 4).unwrap();
    let x = k.from_i64(7);
    let d = &x - &x;
    assert!(d.is_zero_at_precision());
    assert!(d.abs().unwrap_err().is_precision());
    assert_eq!(d.abs_bound().to_string(), "q^-4");
}
