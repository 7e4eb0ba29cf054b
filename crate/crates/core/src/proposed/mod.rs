//! The enhanced scheme: query randomizers derived from the query itself.
//!
//! Data owner (DO) holds an [`OwnerKey`]; tuples are lifted to
//! `η = d + 2 + c + ε` dimensions and multiplied by `M̂⁻¹`. A query user (QU)
//! Paillier-encrypts its point, the DO folds its secrets in homomorphically
//! ([`do_blind_query`]), the QU decrypts the result into a [`CspQuery`], and
//! the cloud (CSP) ranks tuples by `p′·q′`.

mod ephemeral;
mod key;
mod params;
mod query;
mod tuple;

pub use ephemeral::{sample, EphemeralSource};
pub use key::{keygen, OwnerKey};
pub use params::{AlphaForm, SecurityParams};
pub use query::{
    csp_knn, csp_score, do_blind_query, planned_paillier_ops, qu_build_request, qu_unwrap,
    BlindedQuery, CspQuery, EphemeralQuerySecrets, QueryPolicy, QueryRequest,
};
pub use tuple::{
    augment, decrypt_tuple, encrypt_database, encrypt_database_parallel, encrypt_tuple,
    encrypt_tuple_traced, encrypt_with, gen_tau, tuple_secrets, EphemeralTupleSecrets,
};

use thiserror::Error;

use crate::arith::ArithError;
use crate::knn::KnnError;
use crate::paillier::PaillierError;

/// Errors shared by both encryption schemes.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("coordinate {index} = {value} exceeds the bound {bound}")]
    CoordinateOutOfBound {
        index: usize,
        value: i64,
        bound: i64,
    },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("query refused by the data owner")]
    Refused,
    #[error("blinded plaintexts could reach {bits} bits, beyond the Paillier range")]
    NormalizerOverflow { bits: u64 },
    #[error("decrypted coordinate does not fit in 64 bits")]
    DecryptionOverflow,
    #[error(transparent)]
    Paillier(#[from] PaillierError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Knn(#[from] KnnError),
}

/// Rejects the first coordinate whose magnitude exceeds `bound`.
pub fn check_bounds(point: &[i64], bound: i64) -> Result<(), SchemeError> {
    match point
        .iter()
        .enumerate()
        .find(|(_, v)| v.unsigned_abs() > bound.unsigned_abs())
    {
        Some((index, &value)) => Err(SchemeError::CoordinateOutOfBound {
            index,
            value,
            bound,
        }),
        None => Ok(()),
    }
}
