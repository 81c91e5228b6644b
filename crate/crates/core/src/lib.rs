//! Exact computer algebra for basic invariants of reflection groups.
//!
//! This crate constructs the basic invariant polynomials of the reflection
//! groups E6, E7, and E8 (plus the small test groups D4 and B3), transforms
//! them into a canonical basis characterized by vanishing differential
//! pairings, normalizes the result, and verifies everything bit-exactly.
//!
//! Everything is exact: coefficients are arbitrary-precision rationals or
//! elements of the real quartic field Q(√2, √3), and no floating point is
//! used anywhere.
//!
//! Module layout:
//! - [`exactnum`]: rationals, the number field Q(√2, √3), and square-root
//!   radicals in lowest form.
//! - [`poly`]: sparse homogeneous multivariate polynomials over either
//!   coefficient type, with a fixed graded-reverse-lexicographic term order.
//! - [`pairing`]: the differential bilinear pairing (p, q)(x) = p(∂)q(x) and
//!   the norm it induces.
//! - [`groups`]: the group catalog (degrees, defining linear forms, simple
//!   roots), construction of the starting invariant bases, and root
//!   generation.
//! - [`canonicalize`]: the basis-transformation algorithm: weighted ansatz,
//!   exact linear system assembly and null-space solve, scale fixing, and the
//!   degenerate-degree branch for D4.
//! - [`verify`]: independent checks (full pairwise pairing conditions,
//!   harmonicity, Jacobian factorization, regression against reference
//!   coefficient tables) and structured reports.

pub mod canonicalize;
pub mod exactnum;
pub mod groups;
pub mod pairing;
pub mod poly;
pub mod verify;

use thiserror::Error;

/// Crate-wide error type. Hard errors indicate either invalid input at an
/// API boundary or a violated internal invariant; verification *failures*
/// are not errors; they are reported as data by the `verify` module.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("radicand must be positive")]
    NonPositiveRadicand,
    #[error("mismatched variable counts: {0} vs {1}")]
    NvarsMismatch(u8, u8),
    #[error("operands must have equal degree: {0} vs {1}")]
    DegreeMismatch(u8, u8),
    #[error("variable index {0} out of range for {1} variables")]
    VarIndex(usize, u8),
    #[error("evaluation point has length {0}, polynomial has {1} variables")]
    PointLength(usize, u8),
    #[error("exponent {0} exceeds the supported maximum of {1}")]
    ExponentRange(u32, u32),
    #[error("expected rational coefficients: {0}")]
    IrrationalCoefficient(String),
    #[error("unknown group name: {0:?} (expected one of E6, E7, E8, D4, B3)")]
    UnknownGroup(String),
    #[error("root closure did not stabilize within the iteration cap (bad simple-root data?)")]
    RootClosure,
    #[error("null space at degree {degree} has dimension {got}, expected {expected}")]
    NullSpaceDim { degree: u8, got: usize, expected: usize },
    #[error("solved vector has zero coefficient on the pure generator of degree {0}")]
    ZeroPureCoefficient(u8),
    #[error("modular prefilter exhausted its prime list without a consistent solution")]
    PrimesExhausted,
    #[error("invalid serialized data: {0}")]
    InvalidData(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
