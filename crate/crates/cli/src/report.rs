//! JSON reports for `analyze`.
//!
//! Norms are `{base, exponent}` objects with the exponent as an exact
//! rational string; field elements are rendered with their `O(π^k)` term,
//! so every number carries the precision it is certified to.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use ultradyn_core::dynamics::{self, BigCell};
use ultradyn_core::gen;
use ultradyn_core::linalg::{adapted_norm, spectral_decompose, AdaptedNorm, SpectralDecomposition};
use ultradyn_core::{Field, FieldElement, Matrix, NormValue};

use crate::request::{AnalysisRequest, Output};
use crate::{CliError, CliResult, EXIT_OK, EXIT_PROPERTY};

pub fn norm_json(v: NormValue, q: u64) -> Value {
    json!({ "base": q, "exponent": v.exponent_string() })
}

pub fn vector_json(v: &[FieldElement]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.render())).collect())
}

pub fn columns_json(m: &Matrix) -> Value {
    Value::Array(m.columns().iter().map(|c| vector_json(c)).collect())
}

pub fn rows_json(m: &Matrix) -> Value {
    Value::Array((0..m.rows()).map(|i| vector_json(&m.row(i))).collect())
}

pub fn field_json(k: &Field) -> Value {
    let s = k.spec();
    json!({
        "kind": s.kind,
        "p": s.p,
        "degree": s.degree,
        "q": k.q(),
        "precision": s.precision,
        "symbol": s.symbol,
    })
}

/// Exact norm, or an upper bound when the vector vanishes at precision.
fn measured_json(norm: &AdaptedNorm, v: &[FieldElement], q: u64) -> CliResult<Value> {
    if v.iter().all(|x| x.is_negligible()) {
        Ok(json!({ "at_most": norm_json(norm.norm.norm_bound(v), q) }))
    } else {
        Ok(norm_json(norm.norm(v)?, q))
    }
}

fn decomposition_json(d: &SpectralDecomposition, q: u64) -> Value {
    let comps: Vec<Value> = d
        .components
        .iter()
        .map(|c| {
            json!({
                "slope": c.slope.to_string(),
                "char_value": norm_json(c.char_value(), q),
                "multiplicity": c.multiplicity,
                "basis": columns_json(&c.basis),
                "block": rows_json(&c.block),
            })
        })
        .collect();
    json!({
        "char_poly": d.char_poly.render(),
        "components": comps,
        "certified_precision": d.certified_precision,
    })
}

fn classification_json(d: &SpectralDecomposition) -> Value {
    let c = dynamics::classify(d);
    let part = |m: &Matrix| json!({ "dim": m.cols(), "basis": columns_json(m) });
    json!({
        "con": part(&c.con),
        "lev": part(&c.lev),
        "con_minus": part(&c.con_minus),
        "parb": part(&c.parb),
        "parb_minus": part(&c.parb_minus),
    })
}

fn norm_section(nm: &AdaptedNorm, q: u64) -> Value {
    let parts: Vec<Value> = nm
        .parts
        .iter()
        .map(|p| json!({ "slope": p.slope.to_string(), "op_norm": norm_json(p.op_norm, q) }))
        .collect();
    json!({
        "epsilon": norm_json(nm.epsilon, q),
        "weights": nm.weights().into_iter().map(|w| norm_json(w, q)).collect::<Vec<_>>(),
        "basis": columns_json(&nm.norm.basis),
        "parts": parts,
        "certified_precision": nm.certified_precision,
    })
}

fn request_vectors(req: &AnalysisRequest) -> CliResult<Vec<Vec<FieldElement>>> {
    let k = &req.field;
    match &req.vectors {
        Some(vs) => vs
            .iter()
            .map(|v| v.iter().map(|s| k.parse(s).map_err(CliError::from)).collect())
            .collect(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
            Ok((0..req.trials).map(|_| gen::vector(k, &mut rng, req.matrix.rows(), -2, 2)).collect())
        }
    }
}

struct Builder {
    doc: Map<String, Value>,
    precision: i64,
    property_failures: Vec<String>,
}

impl Builder {
    fn put(&mut self, key: &str, v: Value) {
        self.doc.insert(key.to_string(), v);
    }

    fn certify(&mut self, n: i64) {
        self.precision = self.precision.min(n);
    }
}

/// Run an analysis. Returns the report and the process exit code; errors
/// are recorded in the report rather than returned.
pub fn analyze(req: &AnalysisRequest) -> (Value, i32) {
    let k = &req.field;
    let mut b = Builder {
        doc: Map::new(),
        precision: k.precision(),
        property_failures: Vec::new(),
    };
    b.put("command", json!("analyze"));
    b.put("field", field_json(k));
    b.put("seed", json!(req.seed));
    b.put("trials", json!(req.trials));
    b.put("epsilon_exp", json!(req.epsilon_exp));
    b.put("outputs", json!(req.outputs.iter().map(|o| o.name()).collect::<Vec<_>>()));
    b.put("matrix", rows_json(&req.matrix));
    let code = match run(req, &mut b) {
        Ok(()) if b.property_failures.is_empty() => {
            b.put("status", json!("ok"));
            EXIT_OK
        }
        Ok(()) => {
            let e = CliError::Property(b.property_failures.join("; "));
            b.put("status", json!("error"));
            b.put("error", e.to_json());
            EXIT_PROPERTY
        }
        Err(e) => {
            b.put("status", json!("error"));
            b.put("error", e.to_json());
            e.exit_code()
        }
    };
    let p = b.precision;
    b.put("certified_precision", json!(p));
    (Value::Object(b.doc), code)
}

fn run(req: &AnalysisRequest, b: &mut Builder) -> CliResult<()> {
    let a = &req.matrix;
    let q = req.field.q();
    let d = spectral_decompose(a)?;
    b.certify(d.certified_precision);
    let wants = |o: Output| req.outputs.contains(&o);
    if wants(Output::Decompose) {
        b.put("decompose", decomposition_json(&d, q));
    }
    if wants(Output::Classify) {
        b.put("classify", classification_json(&d));
    }
    if wants(Output::Kernel) {
        let laws = dynamics::kernel_laws(a, &d)?;
        if !laws.all_hold() {
            b.property_failures.push(format!("kernel laws violated: {laws:?}"));
        }
        let ik = dynamics::iterated_kernel(a)?;
        let mut v = serde_json::to_value(laws).expect("plain struct");
        v["ik_dim"] = json!(ik.cols());
        b.put("kernel", v);
    }
    let needs_norm = [Output::Norm, Output::Bigcell, Output::Orbit].iter().any(|&o| wants(o));
    if needs_norm {
        let nm = adapted_norm(a, &d, NormValue::from_int_exponent(req.epsilon_exp))?;
        b.certify(nm.certified_precision);
        if wants(Output::Norm) {
            b.put("norm", norm_section(&nm, q));
        }
        if wants(Output::Bigcell) || wants(Output::Orbit) {
            let xs = request_vectors(req)?;
            if wants(Output::Bigcell) {
                let mut rows = Vec::new();
                for x in &xs {
                    let BigCell { s, c, u } = dynamics::big_cell_decompose(&d, x);
                    rows.push(json!({
                        "x": vector_json(x),
                        "s": vector_json(&s),
                        "c": vector_json(&c),
                        "u": vector_json(&u),
                        "norms": {
                            "x": measured_json(&nm, x, q)?,
                            "s": measured_json(&nm, &s, q)?,
                            "c": measured_json(&nm, &c, q)?,
                            "u": measured_json(&nm, &u, q)?,
                        },
                    }));
                }
                b.put("bigcell", Value::Array(rows));
            }
            if wants(Output::Orbit) {
                let mut rows = Vec::new();
                for x in &xs {
                    let cert = dynamics::orbit_certificate(a, &d, &nm, x)?;
                    rows.push(json!({ "x": vector_json(x), "certificate": cert }));
                }
                b.put("orbit", Value::Array(rows));
            }
        }
    }
    if wants(Output::Scale) {
        let s = dynamics::scale(a, &d)?;
        b.put(
            "scale",
            json!({
                "base": s.base,
                "exponent": s.exponent,
                "routes": ["closed_form", "determinant", "tidy_index"],
            }),
        );
    }
    if wants(Output::Tidy) {
        let nm = adapted_norm(a, &d, NormValue::ONE)?;
        let tidy = dynamics::tidy_lattice(a, &d, &nm)?;
        let scale = dynamics::scale_closed_form(&d);
        let gap = dynamics::tidiness_gap(a, &tidy, scale, req.trials, req.seed, true)?;
        if !gap.violations.is_empty() {
            b.property_failures.push(format!(
                "{} perturbed lattices beat the scale",
                gap.violations.len()
            ));
        }
        b.put(
            "tidy",
            json!({
                "basis": columns_json(tidy.u.basis()),
                "u_minus_dim": tidy.u_minus.cols(),
                "u_plus_dim": tidy.u_plus.cols(),
                "index_exponent": tidy.index_exponent,
                "horizon": tidy.horizon,
                "perturbations": {
                    "seed": gap.seed,
                    "trials": gap.trials,
                    "min_index": gap.min_index,
                    "equalities": gap.equalities,
                    "violations": gap.violations,
                },
            }),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::request::{Overrides, RequestFile};

    fn request(text: &str) -> AnalysisRequest {
        AnalysisRequest::build(RequestFile::from_json(text).unwrap(), Overrides::default()).unwrap()
    }

    #[test]
    fn hyperbolic_diagonal() {
        let r = request(r#"{"field":"Q_3","matrix":[["3","0","0"],["0","1","0"],["0","0","1/3"]],"trials":5}"#);
        let (v, code) = analyze(&r);
        assert_eq!(code, 0, "{v}");
        assert_eq!(v["scale"]["base"], 3);
        assert_eq!(v["scale"]["exponent"], 1);
        assert_eq!(v["classify"]["lev"]["dim"], 1);
        assert_eq!(v["decompose"]["components"][0]["char_value"], json!({"base": 3, "exponent": "-1"}));
        assert_eq!(v["tidy"]["index_exponent"], 1);
        assert_eq!(v["kernel"]["ik_dim"], 0);
        assert_eq!(v["seed"], 0);
    }

    #[test]
    fn precision_failure_is_reported() {
        let r = request(
            r#"{"field":"Q_2","precision":4,"outputs":["decompose"],"matrix":[
                ["1","1","0","0","0"],["0","4","1","0","0"],["0","0","8","1","0"],
                ["0","0","0","24","1"],["0","0","0","0","40"]]}"#,
        );
        let (v, code) = analyze(&r);
        assert_eq!(code, 2);
        assert_eq!(v["error"]["kind"], "PrecisionExhausted");
        assert!(v["error"]["message"].as_str().unwrap().contains("lift step"));
        assert!(v.get("decompose").is_none());
    }

    #[test]
    fn reports_are_deterministic() {
        let text = r#"{"field":"F_2((t))","matrix":[["t^-1","1"],["0","t"]],"seed":3,"trials":4}"#;
        let a = crate::render_json(&analyze(&request(text)).0);
        let b = crate::render_json(&analyze(&request(text)).0);
        assert_eq!(a, b);
    }
}
