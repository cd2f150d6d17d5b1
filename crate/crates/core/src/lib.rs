//! Exact arithmetic for weak Jacobi forms, level-1 modular forms, and the
//! characters of even-lattice vertex operator algebras, together with a
//! numeric harness that verifies their modular and elliptic transformation
//! laws at sample points in the upper half-plane.
//!
//! Everything symbolic is computed over exact rationals on a fixed
//! fractional exponent grid; floating point enters only at evaluation time,
//! with explicit truncation-tail estimates.

// index loops mirror the (i, j) matrix notation throughout the linear
// algebra and Gram-matrix code
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod jacobi;
pub mod lattice;
pub mod linalg;
pub mod modular;
pub mod qseries;
pub mod rat;
pub mod verify;

pub use error::{Error, Result};
pub use qseries::{eta, NumericEval, QSeries, EXP_DEN};
pub use rat::Rat;
