//! Spectral computations for periodic Dirac operators
//!
//! ```text
//! D = sum_j (-i d/dx_j - A_j) alpha_j + V0 + V1
//! ```
//!
//! with periodic vector potential `A` and matrix potentials `V0` (commuting
//! with every `alpha_j`) and `V1` (anticommuting with every `alpha_j`).
//!
//! The crate works entirely with trigonometric polynomials on a period
//! lattice. Bloch fibers `D(k + i kappa e)` are assembled on truncated
//! Fourier mode sets and queried through dense eigen/singular-value
//! decompositions. Around that core sit the averaged-potential and gauge
//! constructions used by Thomas-type lower bounds and the harnesses that
//! check those bounds numerically.

pub mod bands;
pub mod clifford;
pub mod error;
pub mod fiber;
pub mod fields;
pub mod gauge;
pub mod lattice;
pub mod linalg;
pub mod quad;
pub mod smooth;
pub mod table;
pub mod verify;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
