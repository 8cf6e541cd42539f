use thiserror::Error;

/// Errors raised by the element construction and verification pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spatial dimension {0} is outside the supported range 1..=6")]
    DimensionOutOfRange(usize),

    #[error("closed-form counts are only available for n = 2, 3, 4 (got n = {0})")]
    NoClosedForm(usize),

    #[error("level {level} is outside 0..={n}")]
    LevelOutOfRange { level: usize, n: usize },

    #[error("smoothness order m must be at least 1 (got {0})")]
    InvalidSmoothness(i64),

    #[error("excess degree k1 must be non-negative (got {0})")]
    NegativeExcess(i64),

    #[error("polynomial degree must be non-negative (got {0})")]
    NegativeDegree(i64),

    #[error(
        "lattice of degree {k} in dimension {n} has {size} points, above the limit of {limit}"
    )]
    LatticeTooLarge {
        n: usize,
        k: u32,
        size: u64,
        limit: u64,
    },

    #[error("{count} multi-indices were left unassigned after the interior pass")]
    Unassigned { count: usize },

    #[error("level {level} sub-simplices received different member counts: {counts:?}")]
    Inhomogeneous { level: usize, counts: Vec<u64> },

    #[error("closed-form division is not exact: {numerator} / {denominator}")]
    InexactDivision { numerator: i128, denominator: i128 },

    #[error("degenerate simplex: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("components sum to {got}, expected {expected}")]
    SumMismatch { expected: u32, got: u32 },

    #[error("realized functionals {first} and {second} coincide")]
    DuplicateFunctional { first: usize, second: usize },

    #[error("matrix is singular to working precision (pivot {pivot:e} at step {step})")]
    Singular { step: usize, pivot: f64 },

    #[error("shared-facet functional has no counterpart in the neighbouring cell: {0}")]
    Identification(String),

    #[error("invalid DOF table: {0}")]
    InvalidTable(String),

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
