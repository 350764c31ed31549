//! Spectral objects of discrete periodic Schrödinger operators `-Δ + V` on `Z^d`:
//! Floquet matrices, characteristic Laurent polynomials, Fermi and Bloch
//! varieties, spectral bands, and desk-scale checks of their algebraic
//! structure.

pub mod eigen;
pub mod error;
pub mod floquet;
pub mod irreducibility;
pub mod isospec;
pub mod lattice;
pub mod laurent;
pub mod perturb;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
