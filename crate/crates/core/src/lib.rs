//! Exact spectral machinery for linear endomorphisms of finite-dimensional
//! vector spaces over totally disconnected local fields (`Q_p`, `F_q((t))`).

pub mod dynamics;
pub mod error;
pub mod field;
pub mod gen;
pub mod linalg;
pub mod norm;
pub mod poly;
pub mod profinite;

pub use error::{Error, Result};
pub use field::{Field, FieldElement, FieldKind, FieldSpec, Valuation};
pub use norm::{NormValue, Rational};
pub use linalg::Matrix;
pub use poly::{NewtonPolygon, Polynomial, Slope};
