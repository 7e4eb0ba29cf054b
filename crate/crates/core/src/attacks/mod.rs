//! Cryptanalysis of the baseline scheme and resistance probes against the
//! proposed one.
//!
//! The attack functions only see what an adversary would: encrypted tuples,
//! query answers and (for the known-sample model) some plaintext points.
//! Judging success against the real key is left to [`crate::harness::verdict`].

mod level1;
mod level2;
mod oracle;
mod query;
mod resistance;

pub use level1::{default_n, level1_attack, level1_recover_column, Level1Column};
pub use level2::{
    level2_attack, level2_recover_s, recover_database, CollisionTable, FINGERPRINT_DIGITS,
};
pub use oracle::{BaselineOracle, ProposedOracle, QueryOracle};
pub use query::{query_recovery_attack, recover_query, MAX_PAIR_ATTEMPTS};
pub use resistance::{probe_proposed_resistance, residual_check, ProbeCase};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{serde_rational_rows, serde_rational_vec, ArithError, Rational};
use crate::proposed::SchemeError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("no common factor could be isolated from the query answer")]
    AmbiguousBeta,
    #[error("no unique secret-point candidate ({candidates} confirmed in every column)")]
    NoUniqueCandidate { candidates: usize },
    #[error("every selection of plaintext pairs gave a singular system ({attempts} tried)")]
    SingularAfterRetries { attempts: usize },
    #[error("need {needed} plaintext/ciphertext pairs, got {got}")]
    NotEnoughPairs { needed: usize, got: usize },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    Level1,
    Level2,
    QueryRecovery,
    Resistance,
}

/// Material an attack claims to have recovered. Unused parts stay empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recovered {
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_bigint")]
    pub beta: Option<BigInt>,
    #[serde(
        default,
        skip_serializing_if = "Vec::is_empty",
        with = "serde_rational_rows"
    )]
    pub columns: Vec<Vec<Rational>>,
    #[serde(
        default,
        skip_serializing_if = "Vec::is_empty",
        with = "serde_rational_vec"
    )]
    pub shift: Vec<Rational>,
    #[serde(
        default,
        skip_serializing_if = "Vec::is_empty",
        with = "serde_rational_rows"
    )]
    pub database: Vec<Vec<Rational>>,
    #[serde(
        default,
        skip_serializing_if = "Vec::is_empty",
        with = "serde_rational_vec"
    )]
    pub query: Vec<Rational>,
}

/// Outcome of comparing recovered material with the ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// True when the recovered material equals the secret it targets.
    pub matched: bool,
    pub matches: usize,
    pub total: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AttackStats {
    /// Table fingerprints shared by more than one encrypted row.
    pub collisions: usize,
    /// Singular pair selections skipped while solving for a query.
    pub rank_failures: usize,
    pub retries: usize,
    /// Answers where no common factor could be isolated.
    pub beta_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinct_candidates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_collision_probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub attack: AttackKind,
    pub trials: usize,
    pub recovered: Recovered,
    pub stats: AttackStats,
    /// Filled in by the harness, which alone knows the real key.
    pub verdict: Option<Verdict>,
}

impl AttackReport {
    pub fn new(attack: AttackKind, trials: usize) -> Self {
        Self {
            attack,
            trials,
            recovered: Recovered::default(),
            stats: AttackStats::default(),
            verdict: None,
        }
    }
}

mod opt_bigint {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(b) => s.serialize_str(&b.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| t.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Predicted chance that two of `t` rows share a fingerprint of `w` digits
/// per element over `d` elements: `1 − e^(−4t² / 10^(w·d))`.
pub fn collision_probability(t: f64, w: u32, d: u32) -> f64 {
    let exponent = -4.0 * t * t / 10f64.powi((w * d) as i32);
    1.0 - exponent.exp()
}

/// Strips the common factor `β_q` from an integer query answer.
///
/// GCDs are taken over every cyclic window of `subset_size` positions;
/// windows with a GCD above 1 are candidates and the answer is their common
/// GCD. A vector whose full GCD is 1 yields 1 only when the window covers the
/// whole vector, since smaller windows cannot rule out a hidden factor.
pub fn recover_beta(q_prime: &[BigInt], subset_size: usize) -> Result<BigInt, AttackError> {
    if q_prime.is_empty() || subset_size == 0 {
        return Err(AttackError::AmbiguousBeta);
    }
    let len = q_prime.len();
    let size = subset_size.min(len);
    let windows = if size == len { 1 } else { len };
    let candidates: Vec<BigInt> = (0..windows)
        .map(|start| (0..size).fold(BigInt::zero(), |g, k| g.gcd(&q_prime[(start + k) % len])))
        .filter(|g| *g > BigInt::one())
        .collect();
    if candidates.is_empty() {
        return if size == len && q_prime.iter().any(|v| !v.is_zero()) {
            Ok(BigInt::one())
        } else {
            Err(AttackError::AmbiguousBeta)
        };
    }
    let g = candidates.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_one() {
        Err(AttackError::AmbiguousBeta)
    } else {
        Ok(g)
    }
}
