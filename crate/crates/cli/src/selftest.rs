//! Seeded property suites over planted matrices and the profinite examples.
//!
//! Every case draws from its own ChaCha stream, so the report depends only
//! on the options, never on scheduling.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use ultradyn_core::dynamics::{self, OrbitCertificate};
use ultradyn_core::field::ResidueField;
use ultradyn_core::gen::{self, Planted};
use ultradyn_core::linalg::{adapted_norm, ball_image, spectral_decompose};
use ultradyn_core::profinite::*;
use ultradyn_core::{Field, FieldElement, NormValue, Rational, Slope};

use crate::request::parse_field_name;
use crate::report::field_json;
use crate::CliResult;

pub const DEFAULT_SIZES: [usize; 3] = [2, 3, 4];
pub const DEFAULT_FIELDS: [&str; 4] = ["Q_2", "Q_3", "F_2((t))", "F_3((t))"];

#[derive(Clone, Debug)]
pub struct Options {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub fields: Vec<String>,
    pub precision: i64,
    /// Planted matrices per field and size.
    pub matrices: usize,
    /// Random vectors per matrix and perturbations per tidy lattice.
    pub trials: usize,
    pub epsilon_exp: i64,
    pub concurrent: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: 0,
            sizes: DEFAULT_SIZES.to_vec(),
            fields: DEFAULT_FIELDS.iter().map(|s| s.to_string()).collect(),
            precision: 40,
            matrices: 10,
            trials: 10,
            epsilon_exp: -1,
            concurrent: true,
        }
    }
}

const SUITES: [&str; 10] = [
    "decomposition",
    "adapted_norm",
    "ball_identity",
    "big_cell",
    "orbits",
    "scale",
    "tidy_minimality",
    "kernel_laws",
    "chart",
    "frobenius",
];

#[derive(Default)]
struct Tally {
    checks: BTreeMap<&'static str, usize>,
    failures: Vec<(String, String, String)>,
}

impl Tally {
    fn check(&mut self, suite: &'static str, case: &str, ok: bool, detail: impl FnOnce() -> String) {
        *self.checks.entry(suite).or_default() += 1;
        if !ok {
            self.failures.push((suite.to_string(), case.to_string(), detail()));
        }
    }

    fn fail(&mut self, suite: &'static str, case: &str, detail: String) {
        *self.checks.entry(suite).or_default() += 1;
        self.failures.push((suite.to_string(), case.to_string(), detail));
    }
}

fn negligible(v: &[FieldElement]) -> bool {
    v.iter().all(|x| x.is_negligible())
}

/// Scale exponent read off the planted slopes.
fn planted_scale(slopes: &BTreeMap<Slope, usize>) -> Option<i64> {
    let mut total = Rational::from_integer(0);
    for (s, m) in slopes {
        if let Slope::Finite(s) = s {
            if *s < Rational::from_integer(0) {
                total += -*s * Rational::from_integer(*m as i64);
            }
        }
    }
    total.is_integer().then(|| total.to_integer())
}

fn matrix_case(k: &Field, p: &Planted, opts: &Options, rng: &mut ChaCha8Rng, id: &str, t: &mut Tally) {
    let a = &p.matrix;
    let n = a.rows();
    let d = match spectral_decompose(a) {
        Ok(d) => d,
        Err(e) => return t.fail("decomposition", id, e.to_string()),
    };
    let got: BTreeMap<Slope, usize> = d.components.iter().map(|c| (c.slope, c.multiplicity)).collect();
    t.check("decomposition", id, got == p.slopes, || format!("slopes {got:?}, planted {:?}", p.slopes));
    let conj = &(&d.inverse * a) * &d.change_of_basis;
    let mut invariant = true;
    for i in 0..d.components.len() {
        for j in 0..d.components.len() {
            if i != j {
                invariant &= d.range(i).all(|r| d.range(j).all(|c| conj.get(r, c).is_negligible()));
            }
        }
    }
    t.check("decomposition", id, invariant, || "a subspace is not A-invariant at precision".into());

    let eps = NormValue::from_int_exponent(opts.epsilon_exp);
    let nm = match adapted_norm(a, &d, eps) {
        Ok(nm) => nm,
        Err(e) => return t.fail("adapted_norm", id, e.to_string()),
    };
    for _ in 0..opts.trials {
        let x = gen::vector(k, rng, n, -3, 3);
        if negligible(&x) {
            continue;
        }
        let Ok(nx) = nm.norm(&x) else { continue };
        let b = dynamics::big_cell_decompose(&d, &x);
        let sum_ok = (0..n).all(|i| (&(&(&b.s[i] + &b.c[i]) + &b.u[i]) - &x[i]).is_negligible());
        t.check("big_cell", id, sum_ok, || "s + c + u differs from x".into());
        let mut exact = NormValue::Zero;
        let mut bound = NormValue::Zero;
        for part in [&b.s, &b.c, &b.u] {
            if negligible(part) {
                bound = bound.max(nm.norm.norm_bound(part));
            } else {
                match nm.norm(part) {
                    Ok(v) => exact = exact.max(v),
                    Err(_) => bound = bound.max(nm.norm.norm_bound(part)),
                }
            }
        }
        t.check("big_cell", id, nx >= exact && nx <= exact.max(bound), || {
            format!("‖x‖ = {nx} but the parts give {exact} (bound {bound})")
        });
        match dynamics::orbit_certificate(a, &d, &nm, &x) {
            Ok(c) => {
                let escaping = matches!(c, OrbitCertificate::Escaping { .. });
                t.check("orbits", id, escaping == !negligible(&b.u), || format!("{c:?} with u = {:?}", b.u));
            }
            Err(e) => t.fail("orbits", id, e.to_string()),
        }
    }
    for (i, c) in d.components.iter().enumerate() {
        let y = c.basis.mul_vec(&gen::vector(k, rng, c.basis.cols(), -2, 2));
        if negligible(&y) {
            continue;
        }
        let Ok(ny) = nm.norm(&y) else { continue };
        let ay = a.mul_vec(&y);
        match c.slope {
            Slope::ZeroRoot => {
                let bay = if negligible(&ay) { nm.norm.norm_bound(&ay) } else { nm.norm(&ay).unwrap_or(NormValue::Zero) };
                t.check("adapted_norm", id, bay == NormValue::Zero || bay < eps.mul(ny), || format!("E_0 vector grows to {bay}"));
            }
            Slope::Finite(_) => {
                let ok = nm.norm(&ay).ok() == Some(ny.mul(c.char_value()));
                t.check("adapted_norm", id, ok, || format!("slope {} vector not scaled exactly", c.slope));
                for r in -2..=2 {
                    let res = ball_image(&d, &nm, NormValue::from_int_exponent(r), i);
                    t.check("ball_identity", id, res.is_ok(), || format!("{res:?}"));
                }
            }
        }
    }

    match dynamics::kernel_laws(a, &d) {
        Ok(l) => t.check("kernel_laws", id, l.all_hold(), || format!("{l:?}")),
        Err(e) => t.fail("kernel_laws", id, e.to_string()),
    }
    match dynamics::scale(a, &d) {
        Ok(s) => {
            let expect = planted_scale(&p.slopes);
            t.check("scale", id, Some(s.exponent) == expect && s.base == k.q(), || {
                format!("scale {s:?}, planted {expect:?}")
            });
            let tidy = adapted_norm(a, &d, NormValue::ONE).and_then(|nm1| dynamics::tidy_lattice(a, &d, &nm1));
            match tidy.and_then(|tidy| dynamics::tidiness_gap(a, &tidy, s.exponent, opts.trials, rng.gen(), false)) {
                Ok(g) => t.check("tidy_minimality", id, g.violations.is_empty(), || format!("violations {:?}", g.violations)),
                Err(e) => t.fail("tidy_minimality", id, e.to_string()),
            }
        }
        Err(e) => t.fail("scale", id, e.to_string()),
    }
}

fn profinite_case(opts: &Options, rng: &mut ChaCha8Rng, id: &str, t: &mut Tally) {
    let f = Arc::new(ResidueField::new(2, 1, None).expect("F_2"));
    for _ in 0..opts.trials {
        let m = rng.gen_range(2..10);
        let w = Window::random(f.clone(), -m, m, rng).expect("valid window");
        let (z, y) = phi_split(&w).expect("symmetric window");
        t.check("chart", id, phi_join(&z, &y).ok().as_ref() == Some(&w), || "round trip".into());
        if let Some((z1, y1)) = chart_shift(&z, &y) {
            let (z2, y2) = phi_split(&two_sided_shift(&w).restrict(-(m - 1), m - 1).expect("inner window"))
                .expect("symmetric window");
            let n = m as usize;
            let ok = z1.coeffs()[..n] == z2.coeffs()[..n] && y1.coeffs()[..n - 1] == y2.coeffs()[..n - 1];
            t.check("chart", id, ok, || "shift conjugation".into());
        }
        let trunc = rng.gen_range(4..24);
        let s = SeriesTrunc::random(f.clone(), 1, trunc, rng);
        let img = frobenius_series(&s);
        let ok = match s.valuation() {
            Some(v) if 2 * v < trunc => img.value.valuation() == Some(2 * v),
            Some(_) => img.truncation_loss,
            None => img.value.is_zero(),
        };
        t.check("frobenius", id, ok, || format!("valuation law for {s}"));
        match CongruenceMatrix::random(f.clone(), trunc, rng).and_then(|g| sl2_frobenius(&g).map(|h| (g, h.value))) {
            Ok((g, h)) => {
                let det_one = h.det().map(|x| x.coeff(0) == Some(1) && x.coeffs()[1..].iter().all(|&c| c == 0));
                t.check("frobenius", id, det_one == Ok(true), || "determinant".into());
                let doubled = match g.distance_valuation() {
                    Some(v) => h.distance_valuation() == Some(2 * v).filter(|&x| x < trunc),
                    None => h.distance_valuation().is_none(),
                };
                t.check("frobenius", id, doubled, || "distance to the identity".into());
            }
            Err(e) => t.fail("frobenius", id, e.to_string()),
        }
    }
}

enum Job {
    Matrix { field: usize, size: usize, index: usize },
    Profinite,
}

fn run_job(job: &Job, stream: u64, fields: &[Field], opts: &Options) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let mut t = Tally::default();
    match *job {
        Job::Matrix { field, size, index } => {
            let k = &fields[field];
            let id = format!("{}/n={size}/#{index}", opts.fields[field]);
            let p = if index % 2 == 1 {
                gen::planted_with_kernel(k, &mut rng, size)
            } else {
                gen::planted(k, &mut rng, size)
            };
            matrix_case(k, &p, opts, &mut rng, &id, &mut t);
        }
        Job::Profinite => profinite_case(opts, &mut rng, "profinite", &mut t),
    }
    t
}

/// Run the suites. The report is identical for serial and concurrent runs.
pub fn run(opts: &Options) -> CliResult<(Value, bool)> {
    let fields: Vec<Field> = opts
        .fields
        .iter()
        .map(|name| Ok(Field::new(parse_field_name(name, opts.precision)?)?))
        .collect::<CliResult<_>>()?;
    let mut jobs = vec![Job::Profinite];
    for field in 0..fields.len() {
        for &size in &opts.sizes {
            for index in 0..opts.matrices {
                jobs.push(Job::Matrix { field, size, index });
            }
        }
    }
    let tallies: Vec<Tally> = if opts.concurrent {
        jobs.par_iter().enumerate().map(|(i, j)| run_job(j, i as u64, &fields, opts)).collect()
    } else {
        jobs.iter().enumerate().map(|(i, j)| run_job(j, i as u64, &fields, opts)).collect()
    };
    let mut checks: BTreeMap<&str, usize> = SUITES.iter().map(|s| (*s, 0)).collect();
    let mut failures = Vec::new();
    for t in tallies {
        for (s, c) in t.checks {
            *checks.entry(s).or_default() += c;
        }
        failures.extend(t.failures);
    }
    let mut per_suite = serde_json::Map::new();
    for (s, c) in &checks {
        let f = failures.iter().filter(|x| x.0 == *s).count();
        per_suite.insert(s.to_string(), json!({ "checks": c, "failures": f }));
    }
    let subset = opts.sizes != DEFAULT_SIZES;
    let label = if subset {
        format!("sizes {:?} only", opts.sizes)
    } else {
        format!("sizes {:?}", opts.sizes)
    };
    let passed = failures.is_empty();
    let report = json!({
        "command": "selftest",
        "seed": opts.seed,
        "sizes": opts.sizes,
        "subset": subset,
        "label": label,
        "fields": fields.iter().map(field_json).collect::<Vec<_>>(),
        "matrices_per_size": opts.matrices,
        "trials": opts.trials,
        "epsilon_exp": opts.epsilon_exp,
        "cases": jobs.len(),
        "suites": per_suite,
        "failures": failures
            .iter()
            .map(|(s, c, d)| json!({ "suite": s, "case": c, "detail": d }))
            .collect::<Vec<_>>(),
        "passed": passed,
    });
    Ok((report, passed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_is_labeled() {
        let opts = Options {
            sizes: vec![2],
            matrices: 2,
            trials: 3,
            precision: 20,
            ..Default::default()
        };
        let (v, ok) = run(&opts).unwrap();
        assert!(ok, "{v}");
        assert_eq!(v["subset"], true);
        assert_eq!(v["label"], "sizes [2] only");
        assert!(v["suites"]["scale"]["checks"].as_u64().unwrap() > 0);
    }
}
