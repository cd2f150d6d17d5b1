//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inversion of a series that is zero to its truncation order.
    #[error("series is not invertible: zero to truncation order")]
    NonInvertible,

    /// Eisenstein series requested at an unsupported weight.
    #[error("bad weight {0}: Eisenstein series require even weight >= 4")]
    BadWeight(i64),

    /// A form supplied to the structure map has the wrong weight.
    #[error("weight mismatch at slot {slot}: expected {expected}, got {got}")]
    WeightMismatch { slot: usize, expected: i64, got: i64 },

    /// The q^0 layer is not symmetric under zeta <-> 1/zeta.
    #[error("q^0 layer is not a polynomial in x = zeta + 1/zeta (asymmetric at r = {0})")]
    NotPolynomialInX(i64),

    /// An operation was called outside the hypotheses it needs.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// `h` fails the pairing-integrality precondition for the requested character.
    #[error("integrality violation: {0}")]
    IntegralityViolation(String),

    /// No R below the configured bound gives an integral multiple of the twist vector.
    #[error("twist vector has order exceeding the bound {0}")]
    InfiniteOrder(u64),

    /// Gram matrix fails the even positive-definite checks.
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    /// Numeric evaluation cannot meet the requested accuracy.
    #[error("precision loss: error estimate {estimate:.3e} exceeds {limit:.3e}")]
    PrecisionLoss { estimate: f64, limit: f64 },

    /// Fitted transformation constants disagree across sample-point subsets.
    #[error("unstable fit: constants deviate by {deviation:.3e} across point subsets (tol {tol:.3e})")]
    UnstableFit { deviation: f64, tol: f64 },

    /// No module permutation satisfies the elliptic identity within tolerance.
    #[error("no module permutation satisfies the elliptic transformation within tolerance")]
    PermutationMismatch,

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
