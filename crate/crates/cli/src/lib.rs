//! Library side of the `ultradyn` command: request parsing, report assembly,
//! the example corpus runner and the self-test driver.

pub mod corpus;
pub mod report;
pub mod request;
pub mod selftest;

use serde_json::{json, Value};
use thiserror::Error;
use ultradyn_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PRECISION: i32 = 2;
pub const EXIT_PROPERTY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Property(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Property(_) => EXIT_PROPERTY,
            CliError::Core(e) => match e {
                CoreError::PrecisionExhausted(_) => EXIT_PRECISION,
                CoreError::CertificationFailed(_) => EXIT_PROPERTY,
                _ => EXIT_INPUT,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "InputError",
            CliError::Property(_) => "PropertyFailure",
            CliError::Core(e) => match e {
                CoreError::PrecisionExhausted(_) => "PrecisionExhausted",
                CoreError::DivisionByZero => "DivisionByZero",
                CoreError::Syntax { .. } => "SyntaxError",
                CoreError::FieldMismatch => "FieldMismatch",
                CoreError::Dimension(_) => "DimensionError",
                CoreError::InvalidSpec(_) => "InvalidSpec",
                CoreError::CertificationFailed(_) => "CertificationFailed",
                CoreError::Range(_) => "RangeError",
                CoreError::InvalidArgument(_) => "InvalidArgument",
            },
        }
    }

    /// Machine-readable error object for reports.
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Core(CoreError::Syntax { pos, .. }) = self {
            v["position"] = json!(pos);
        }
        v
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Canonical serialization used for every report: sorted keys, two-space
/// indentation, trailing newline.
pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
