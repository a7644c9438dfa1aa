//! Runner for the example corpus: each case computes a set of certificates
//! and compares the ones named in `expect`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Map, Value};
use ultradyn_core::dynamics;
use ultradyn_core::field::ResidueField;
use ultradyn_core::linalg::{adapted_norm, fitting, spectral_decompose};
use ultradyn_core::profinite::*;
use ultradyn_core::{Field, FieldElement, Matrix, NormValue, Valuation};

use crate::request::parse_field_name;
use crate::{CliError, CliResult};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub id: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub expect: Map<String, Value>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corpus {
    pub cases: Vec<Case>,
}

impl Corpus {
    pub fn from_json(text: &str) -> CliResult<Corpus> {
        let c: Corpus = serde_json::from_str(text).map_err(|e| CliError::Input(format!("corpus file: {e}")))?;
        for case in &c.cases {
            if !KNOWN.contains(&case.id.as_str()) {
                return Err(CliError::Input(format!("unknown corpus case id '{}'", case.id)));
            }
        }
        Ok(c)
    }
}

const KNOWN: [&str; 6] = ["E1.9", "E1.11", "E1.12", "E1.13", "E1.15", "E1.16"];

struct Params<'a>(&'a Map<String, Value>);

impl Params<'_> {
    fn uint(&self, key: &str, default: u64) -> CliResult<u64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| CliError::Input(format!("parameter '{key}' must be a non-negative integer"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> CliResult<usize> {
        self.uint(key, default as u64).map(|v| v as usize)
    }

    fn string(&self, key: &str, default: &str) -> CliResult<String> {
        match self.0.get(key) {
            None => Ok(default.to_string()),
            Some(v) => v
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| CliError::Input(format!("parameter '{key}' must be a string"))),
        }
    }

    fn strings2(&self, key: &str) -> CliResult<Vec<Vec<String>>> {
        let v = self.0.get(key).ok_or_else(|| CliError::Input(format!("missing parameter '{key}'")))?;
        serde_json::from_value(v.clone()).map_err(|_| CliError::Input(format!("parameter '{key}' must be rows of strings")))
    }

    fn digits(&self, key: &str) -> CliResult<Vec<u32>> {
        let v = self.0.get(key).ok_or_else(|| CliError::Input(format!("missing parameter '{key}'")))?;
        serde_json::from_value(v.clone()).map_err(|_| CliError::Input(format!("parameter '{key}' must be a digit list")))
    }
}

fn residue(q: u64) -> CliResult<Arc<ResidueField>> {
    let spec = parse_field_name(&format!("F_{q}((X))"), 4)?;
    Ok(Arc::new(ResidueField::new(spec.p, spec.degree, None)?))
}

/// Certificates for one case.
pub fn certificates(case: &Case) -> CliResult<Value> {
    let p = Params(&case.params);
    match case.id.as_str() {
        "E1.9" => valuation_ladder(&p),
        "E1.11" => two_sided_shift_case(&p),
        "E1.12" => left_shift_case(&p),
        "E1.13" => fitting_case(&p),
        "E1.15" => frobenius_case(&p),
        "E1.16" => congruence_case(&p),
        other => Err(CliError::Input(format!("unknown corpus case id '{other}'"))),
    }
}

/// `z ↦ p z` on `Z_p`.
fn valuation_ladder(p: &Params) -> CliResult<Value> {
    let prime = p.uint("p", 5)? as u32;
    let steps = p.usize("steps", 4)?;
    let k = Field::padic(prime, p.uint("precision", 20)? as i64)?;
    let z = k.parse(&p.string("z", "1")?)?;
    let vals: Vec<Value> = mul_by_p_orbit(&z, steps)?
        .into_iter()
        .map(|v| match v {
            Valuation::Finite(x) => json!(x),
            Valuation::AtLeast(x) => json!({ "at_least": x }),
            Valuation::Infinite => json!("inf"),
        })
        .collect();
    let a = Matrix::diag(&k, &[k.from_i64(prime as i64)]);
    let d = spectral_decompose(&a)?;
    let cls = dynamics::classify(&d);
    let nm = adapted_norm(&a, &d, NormValue::ONE)?;
    let norms: Vec<String> = dynamics::forward_orbit(&a, std::slice::from_ref(&z), steps)
        .iter()
        .map(|y| nm.norm(y).map(|v| v.to_string()))
        .collect::<Result<_, _>>()?;
    let cert = dynamics::orbit_certificate(&a, &d, &nm, &[z])?;
    Ok(json!({
        "valuations": vals,
        "norms": norms,
        "con_dim": cls.con.cols(),
        "lev_dim": cls.lev.cols(),
        "con_minus_dim": cls.con_minus.cols(),
        "ik_dim": dynamics::iterated_kernel(&a)?.cols(),
        "orbit": serde_json::to_value(cert).expect("plain enum"),
    }))
}

/// Right shift on `F^Z` and the chart `φ`.
fn two_sided_shift_case(p: &Params) -> CliResult<Value> {
    let f = residue(p.uint("q", 2)?)?;
    let m = p.uint("m", 6)? as i64;
    let windows = p.usize("windows", 500)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.uint("seed", 0)?);
    let split = |support: &[i64]| -> CliResult<Value> {
        let (z, w) = phi_split(&Window::indicator(f.clone(), -m, m, support)?)?;
        Ok(json!({ "z": z.to_string(), "w": w.to_string() }))
    };
    let (mut round_trip_failures, mut checked, mut conjugation_failures) = (0, 0, 0);
    for _ in 0..windows {
        let w = Window::random(f.clone(), -m, m, &mut rng)?;
        let (z, y) = phi_split(&w)?;
        if phi_join(&z, &y)? != w {
            round_trip_failures += 1;
        }
        let Some((z1, y1)) = chart_shift(&z, &y) else { continue };
        checked += 1;
        let (z2, y2) = phi_split(&two_sided_shift(&w).restrict(-(m - 1), m - 1)?)?;
        let n = m as usize;
        if z1.coeffs()[..n] != z2.coeffs()[..n] || y1.coeffs()[..n - 1] != y2.coeffs()[..n - 1] {
            conjugation_failures += 1;
        }
    }
    let fin = con_certificate(&Window::indicator(f.clone(), -5, 6, &[0, 1])?);
    Ok(json!({
        "delta_0": split(&[0])?,
        "delta_minus_1": split(&[-1])?,
        "round_trip_failures": round_trip_failures,
        "conjugation_checked": checked,
        "conjugation_failures": conjugation_failures,
        "support_0_1": serde_json::to_value(fin).expect("plain struct"),
    }))
}

/// Left shift on `F[[X]]`.
fn left_shift_case(p: &Params) -> CliResult<Value> {
    let f = residue(p.uint("q", 2)?)?;
    let q = f.q();
    let small = p.usize("kernel_truncation", 4)?;
    let n = p.usize("truncation", 10)?;
    let k_max = p.usize("k_max", 5)?;
    // every series mod X^small, by brute force
    let mut kernel = 0;
    let mut kernel_constant = true;
    let total = (q as usize).pow(small as u32);
    for mut code in 0..total {
        let coeffs: Vec<u32> = (0..small)
            .map(|_| {
                let c = (code % q as usize) as u32;
                code /= q as usize;
                c
            })
            .collect();
        let s = SeriesTrunc::new(f.clone(), 0, coeffs.clone())?;
        if left_shift_series(&s).is_zero() {
            kernel += 1;
            kernel_constant &= coeffs[1..].iter().all(|&c| c == 0);
        }
    }
    let mut deaths = Vec::new();
    for k in 0..=k_max {
        let mut x = SeriesTrunc::monomial(f.clone(), k, n);
        let mut steps = 0;
        while !x.is_zero() {
            x = left_shift_series(&x);
            steps += 1;
        }
        deaths.push(steps);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.uint("seed", 0)?);
    let witness_failures = (0..100)
        .filter(|_| {
            let z = SeriesTrunc::random(f.clone(), 0, n, &mut rng);
            left_shift_series(&z.mul_by_x()).coeffs() != z.coeffs()
        })
        .count();
    Ok(json!({
        "kernel_size": kernel,
        "kernel_is_constants": kernel_constant,
        "death_steps": deaths,
        "left_inverse_failures": witness_failures,
    }))
}

/// Entries that agree at precision with a small integer print as that integer.
fn short(x: &FieldElement) -> String {
    let k = x.field();
    (-10..=10)
        .find(|&n| x.eq_at_precision(&k.from_i64(n)))
        .map_or_else(|| x.render(), |n| n.to_string())
}

/// Basis vectors scaled so the first determined entry is 1.
fn normalized(m: &Matrix) -> CliResult<Vec<Vec<String>>> {
    m.columns()
        .iter()
        .map(|c| {
            let lead = c
                .iter()
                .find(|x| !x.is_negligible())
                .ok_or_else(|| CliError::Core(ultradyn_core::Error::PrecisionExhausted("basis vector vanishes".into())))?;
            let inv = lead.inv()?;
            Ok(c.iter().map(|x| short(&(x * &inv))).collect())
        })
        .collect()
}

/// Fitting decomposition `ik ⊕ core`.
fn fitting_case(p: &Params) -> CliResult<Value> {
    let spec = parse_field_name(&p.string("field", "Q_3")?, p.uint("precision", 20)? as i64)?;
    let k = Field::new(spec)?;
    let a = Matrix::parse(&k, &p.strings2("matrix")?)?;
    let fit = fitting(&a)?;
    let d = spectral_decompose(&a)?;
    let slopes: Map<String, Value> = d
        .components
        .iter()
        .map(|c| (c.slope.to_string(), json!(c.multiplicity)))
        .collect();
    Ok(json!({
        "ik": normalized(&fit.ik)?,
        "core": normalized(&fit.core)?,
        "slopes": slopes,
    }))
}

/// Frobenius on `X F[[X]]`.
fn frobenius_case(p: &Params) -> CliResult<Value> {
    let f = residue(p.uint("q", 2)?)?;
    let n = p.usize("truncation", 24)?;
    let steps = p.usize("steps", 3)?;
    let mut digits = p.digits("z")?;
    if digits.len() > n {
        return Err(CliError::Input("z has more digits than the truncation".into()));
    }
    digits.resize(n, 0);
    let mut x = SeriesTrunc::new(f.clone(), 1, digits)?;
    let mut vals = vec![json!(x.valuation())];
    let mut loss = false;
    for _ in 0..steps {
        let t = frobenius_series(&x);
        loss |= t.truncation_loss;
        x = t.value;
        vals.push(json!(x.valuation()));
    }
    Ok(json!({
        "valuations": vals,
        "truncation_loss": loss,
        "derivative_vanishes": frobenius_derivative_vanishes(f),
    }))
}

/// Frobenius on the congruence subgroup of `SL_2(F_2[[X]])`.
fn congruence_case(p: &Params) -> CliResult<Value> {
    let f = residue(2)?;
    let n = p.usize("truncation", 32)?;
    let count = p.usize("matrices", 500)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.uint("seed", 0)?);
    let (mut det_failures, mut doubling_failures, mut checked_doubling) = (0, 0, 0);
    for _ in 0..count {
        let trunc = rng.gen_range(2..=n);
        let m = CongruenceMatrix::random(f.clone(), trunc, &mut rng)?;
        let img = sl2_frobenius(&m)?.value;
        let det = img.det()?;
        if det.coeff(0) != Some(1) || det.coeffs()[1..].iter().any(|&c| c != 0) {
            det_failures += 1;
        }
        if let Some(v) = m.distance_valuation() {
            if 2 * v < trunc {
                checked_doubling += 1;
                if img.distance_valuation() != Some(2 * v) {
                    doubling_failures += 1;
                }
            }
        }
    }
    let id = CongruenceMatrix::identity(f, n)?;
    Ok(json!({
        "det_failures": det_failures,
        "doubling_checked": checked_doubling,
        "doubling_failures": doubling_failures,
        "identity_fixed": sl2_frobenius(&id)?.value == id,
    }))
}

/// One row of the corpus summary.
pub fn run_case(case: &Case) -> Value {
    match certificates(case) {
        Ok(cert) => {
            let mismatches: Vec<&String> = case
                .expect
                .iter()
                .filter(|(k, v)| cert.get(k.as_str()) != Some(v))
                .map(|(k, _)| k)
                .collect();
            json!({
                "id": case.id,
                "pass": mismatches.is_empty(),
                "mismatches": mismatches,
                "certificates": cert,
            })
        }
        Err(e) => json!({ "id": case.id, "pass": false, "error": e.to_json() }),
    }
}

/// Run every case (concurrently when asked) and assemble the report in
/// corpus order. The boolean is true when every row passed.
pub fn run(corpus: &Corpus, concurrent: bool) -> (Value, bool) {
    let rows: Vec<Value> = if concurrent {
        corpus.cases.par_iter().map(run_case).collect()
    } else {
        corpus.cases.iter().map(run_case).collect()
    };
    let passed = rows.iter().filter(|r| r["pass"] == json!(true)).count();
    let ok = passed == rows.len();
    (
        json!({
            "command": "corpus",
            "cases": rows.len(),
            "passed": passed,
            "failed": rows.len() - passed,
            "rows": rows,
        }),
        ok,
    )
}

/// Plain-text table: one line per case.
pub fn table(report: &Value) -> String {
    let mut out = format!("{:<8} {:<6} {}\n", "id", "result", "certificates");
    for r in report["rows"].as_array().into_iter().flatten() {
        let names: Vec<&str> = r["certificates"]
            .as_object()
            .map(|m| m.keys().map(String::as_str).collect())
            .unwrap_or_default();
        let status = if r["pass"] == json!(true) { "pass" } else { "FAIL" };
        out.push_str(&format!("{:<8} {:<6} {}\n", r["id"].as_str().unwrap_or("?"), status, names.join(",")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus() {
        let c = Corpus::from_json(r#"{"cases":[]}"#).unwrap();
        let (v, ok) = run(&c, false);
        assert!(ok);
        assert_eq!(v["cases"], 0);
    }

    #[test]
    fn wrong_expectation_fails_its_row() {
        let c = Corpus::from_json(
            r#"{"cases":[
                {"id":"E1.9","params":{"p":3,"steps":2},"expect":{"valuations":[0,1,2]}},
                {"id":"E1.9","params":{"p":3,"steps":2},"expect":{"valuations":[0,1,3]}}
            ]}"#,
        )
        .unwrap();
        let (v, ok) = run(&c, true);
        assert!(!ok);
        assert_eq!(v["rows"][0]["pass"], true);
        assert_eq!(v["rows"][1]["pass"], false);
        assert_eq!(v["rows"][1]["mismatches"], json!(["valuations"]));
    }

    #[test]
    fn unknown_ids_are_input_errors() {
        assert!(Corpus::from_json(r#"{"cases":[{"id":"E9.9"}]}"#).is_err());
    }
}
