use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("invalid model: {0}")]
    InvalidSpec(String),

    #[error("compute budget exceeded: {required} trajectory-steps required, {allowed} allowed")]
    BudgetExceeded { required: u128, allowed: u128 },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not antisymmetric (deviation {deviation:e})")]
    NotAntisymmetric { deviation: f64 },

    #[error("not a permutation: {0}")]
    NotPermutation(String),

    #[error("c-bit doubled representation needs an even dimension, got {0}")]
    OddCbitDimension(usize),

    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error(
        "coupling on pair ({i}, {j}) needs {needed} crossings but the sublattice has only {capacity} sites; \
         use a larger lambda or a smaller time quantum"
    )]
    Unreachable { i: usize, j: usize, needed: u128, capacity: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
