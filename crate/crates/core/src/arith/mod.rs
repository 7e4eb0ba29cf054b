//! Exact linear algebra over arbitrary-precision rationals.
//!
//! Everything on the encryption, decryption and scoring path runs through
//! this module so results are bit-reproducible; there is no floating point
//! here apart from display helpers.

mod matrix;
mod perm;
mod rational;

pub use matrix::{dot, sample_invertible, vec_mat_mul, EntryRange, Matrix};
pub use perm::{apply_perm_columns, Permutation};
pub use rational::{
    format_rational, parse_rational, rational_from_f64_str, round_to_decimals, round_to_integer,
    serde_bigint_vec, serde_rational, serde_rational_rows, serde_rational_vec, to_f64, Rational,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("no invertible matrix found after {0} attempts")]
    ResampleExhausted(usize),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}
