//! Linear algebra over a local field: elimination, characteristic
//! polynomials, lattices, characteristic subspaces and adapted norms.

pub mod adapted;
pub mod charpoly;
pub mod lattice;
pub mod matrix;
pub mod spectral;

pub use adapted::{adapted_norm, ball_image, AdaptedNorm, NormPart, WeightedNorm};
pub use charpoly::char_poly;
pub use lattice::{elementary_divisors, Lattice};
pub use matrix::{Matrix, Rref, Vector};
pub use spectral::{fitting, spectral_decompose, Component, Fitting, SpectralDecomposition};
