//! Analysis requests: the JSON input document plus command-line overrides.

use std::collections::BTreeSet;
use std::str::FromStr;

use serde::Deserialize;
use ultradyn_core::{Field, FieldSpec, Matrix};

use crate::{CliError, CliResult};

pub const DEFAULT_PRECISION: i64 = 20;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_EPSILON_EXP: i64 = -1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Output {
    Decompose,
    Classify,
    Norm,
    Scale,
    Tidy,
    Kernel,
    Bigcell,
    Orbit,
}

impl Output {
    pub const ALL: [Output; 8] = [
        Output::Decompose,
        Output::Classify,
        Output::Norm,
        Output::Scale,
        Output::Tidy,
        Output::Kernel,
        Output::Bigcell,
        Output::Orbit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::Decompose => "decompose",
            Output::Classify => "classify",
            Output::Norm => "norm",
            Output::Scale => "scale",
            Output::Tidy => "tidy",
            Output::Kernel => "kernel",
            Output::Bigcell => "bigcell",
            Output::Orbit => "orbit",
        }
    }
}

impl FromStr for Output {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Output> {
        Output::ALL
            .into_iter()
            .find(|o| o.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<&str> = Output::ALL.iter().map(|o| o.name()).collect();
                CliError::Input(format!("unknown output '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Field names accepted on the command line and in request files:
/// `Q_5`, `Q5`, `F_2((t))`, `F4((X))`.
pub fn parse_field_name(name: &str, precision: i64) -> CliResult<FieldSpec> {
    let s = name.trim();
    let bad = || CliError::Input(format!("cannot read field name '{name}' (try Q_5 or F_2((t)))"));
    if let Some(rest) = s.strip_prefix('Q') {
        let p: u32 = rest.trim_start_matches('_').parse().map_err(|_| bad())?;
        return Ok(FieldSpec::padic(p, precision));
    }
    if let Some(rest) = s.strip_prefix('F') {
        let rest = rest.trim_start_matches('_');
        let (q, tail) = rest.split_once("((").ok_or_else(bad)?;
        let symbol = tail.strip_suffix("))").ok_or_else(bad)?;
        if symbol.is_empty() || !symbol.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(bad());
        }
        let q: u64 = q.parse().map_err(|_| bad())?;
        let (p, degree) = prime_power(q).ok_or_else(|| CliError::Input(format!("{q} is not a prime power")))?;
        return Ok(FieldSpec::laurent(p, degree, precision).with_symbol(symbol));
    }
    Err(bad())
}

fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let (mut r, mut e) = (q, 0u32);
    while r % p == 0 {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p as u32, e))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum FieldInput {
    Name(String),
    Spec(FieldSpec),
}

/// Request document as read from disk. Every field may also come from a flag.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestFile {
    pub field: Option<FieldInput>,
    pub precision: Option<i64>,
    pub matrix: Option<Vec<Vec<String>>>,
    pub outputs: Option<Vec<String>>,
    pub epsilon_exp: Option<i64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    /// Vectors for `bigcell` and `orbit`; random ones are drawn when absent.
    pub vectors: Option<Vec<Vec<String>>>,
}

impl RequestFile {
    pub fn from_json(text: &str) -> CliResult<RequestFile> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("request file: {e}")))
    }
}

/// Flag values that override the request file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub field: Option<String>,
    pub precision: Option<i64>,
    pub epsilon_exp: Option<i64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub outputs: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct AnalysisRequest {
    pub field: Field,
    pub matrix: Matrix,
    pub outputs: BTreeSet<Output>,
    pub epsilon_exp: i64,
    pub seed: u64,
    pub trials: usize,
    pub vectors: Option<Vec<Vec<String>>>,
}

impl AnalysisRequest {
    pub fn build(file: RequestFile, o: Overrides) -> CliResult<AnalysisRequest> {
        let precision = o.precision.or(file.precision);
        let spec = match (o.field, file.field) {
            (Some(name), _) => parse_field_name(&name, precision.unwrap_or(DEFAULT_PRECISION))?,
            (None, Some(FieldInput::Name(name))) => parse_field_name(&name, precision.unwrap_or(DEFAULT_PRECISION))?,
            (None, Some(FieldInput::Spec(s))) => match precision {
                Some(n) => s.with_precision(n),
                None => s,
            },
            (None, None) => return Err(CliError::Input("no field given (use --field or a \"field\" entry)".into())),
        };
        if spec.precision < 4 {
            return Err(CliError::Input(format!("precision must be at least 4, got {}", spec.precision)));
        }
        let field = Field::new(spec)?;
        let rows = file.matrix.ok_or_else(|| CliError::Input("request has no \"matrix\"".into()))?;
        if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
            return Err(CliError::Input("matrix must be square and nonempty".into()));
        }
        let matrix = Matrix::parse(&field, &rows)?;
        let outputs = match o.outputs.or(file.outputs) {
            None => Output::ALL.into_iter().collect(),
            Some(list) => list.iter().map(|s| s.parse()).collect::<CliResult<BTreeSet<_>>>()?,
        };
        let trials = o.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(CliError::Input("trial count must be at least 1".into()));
        }
        if let Some(vs) = &file.vectors {
            if vs.iter().any(|v| v.len() != rows.len()) {
                return Err(CliError::Input(format!("every vector needs {} entries", rows.len())));
            }
        }
        Ok(AnalysisRequest {
            field,
            matrix,
            outputs,
            epsilon_exp: o.epsilon_exp.or(file.epsilon_exp).unwrap_or(DEFAULT_EPSILON_EXP),
            seed: o.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            trials,
            vectors: file.vectors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ultradyn_core::FieldKind;

    #[test]
    fn field_names() {
        let s = parse_field_name("Q_5", 10).unwrap();
        assert_eq!((s.kind, s.p, s.precision), (FieldKind::Padic, 5, 10));
        assert_eq!(parse_field_name("Q3", 8).unwrap().p, 3);
        let s = parse_field_name("F_4((X))", 12).unwrap();
        assert_eq!((s.kind, s.p, s.degree, s.symbol.as_str()), (FieldKind::Laurent, 2, 2, "X"));
        assert!(parse_field_name("F_6((t))", 12).is_err());
        assert!(parse_field_name("R", 12).is_err());
        assert!(parse_field_name("F_2(t)", 12).is_err());
    }

    #[test]
    fn overrides_win() {
        let file = RequestFile::from_json(r#"{"field":"Q_3","precision":10,"matrix":[["1","0"],["0","3"]],"seed":4}"#).unwrap();
        let r = AnalysisRequest::build(
            file,
            Overrides {
                precision: Some(12),
                seed: Some(9),
                outputs: Some(vec!["scale".into()]),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!((r.field.precision(), r.seed), (12, 9));
        assert_eq!(r.outputs.into_iter().collect::<Vec<_>>(), vec![Output::Scale]);
    }

    #[test]
    fn rejects_bad_requests() {
        let low = RequestFile::from_json(r#"{"field":"Q_3","precision":3,"matrix":[["1"]]}"#).unwrap();
        assert!(matches!(AnalysisRequest::build(low, Overrides::default()), Err(CliError::Input(_))));
        let ragged = RequestFile::from_json(r#"{"field":"Q_3","matrix":[["1","2"],["3"]]}"#).unwrap();
        assert!(AnalysisRequest::build(ragged, Overrides::default()).is_err());
        assert!(RequestFile::from_json(r#"{"feild":"Q_3"}"#).is_err());
        let syntax = RequestFile::from_json(r#"{"field":"Q_3","matrix":[["1+"]]}"#).unwrap();
        let e = AnalysisRequest::build(syntax, Overrides::default()).unwrap_err();
        assert_eq!(e.kind(), "SyntaxError");
        assert_eq!(e.exit_code(), 1);
    }
}
