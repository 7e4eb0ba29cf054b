//! Encrypted tuples and the CSP-side nearest-neighbour selection shared by
//! both schemes.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{dot, serde_rational_vec, ArithError, Rational};

/// One encrypted database row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncTuple {
    pub index: usize,
    #[serde(with = "serde_rational_vec")]
    pub coords: Vec<Rational>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnnError {
    #[error("k = {k} but the database holds {size} tuples")]
    KTooLarge { k: usize, size: usize },
    #[error("k must be at least 1")]
    KZero,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// `p′ · q′` for an integer query vector.
pub fn score(tuple: &EncTuple, query: &[BigInt]) -> Result<Rational, ArithError> {
    let q: Vec<Rational> = query.iter().cloned().map(Rational::from_integer).collect();
    dot(&tuple.coords, &q)
}

/// Indices of the `k` lowest-scoring tuples, ties broken by ascending index.
pub fn top_k(edb: &[EncTuple], query: &[BigInt], k: usize) -> Result<Vec<usize>, KnnError> {
    if k == 0 {
        return Err(KnnError::KZero);
    }
    if k > edb.len() {
        return Err(KnnError::KTooLarge { k, size: edb.len() });
    }
    let mut scored = edb
        .iter()
        .map(|t| Ok((score(t, query)?, t.index)))
        .collect::<Result<Vec<_>, ArithError>>()?;
    scored.sort();
    Ok(scored.into_iter().take(k).map(|(_, idx)| idx).collect())
}

/// Plaintext reference: the `k` points nearest to `query` by squared
/// Euclidean distance, ties by ascending position.
pub fn brute_force(points: &[Vec<i64>], query: &[i64], k: usize) -> Vec<usize> {
    let mut dists: Vec<(i128, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (squared_distance(p, query), i))
        .collect();
    dists.sort();
    dists.into_iter().take(k).map(|(_, i)| i).collect()
}

pub fn squared_distance(a: &[i64], b: &[i64]) -> i128 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i128 - y as i128;
            d * d
        })
        .sum()
}
