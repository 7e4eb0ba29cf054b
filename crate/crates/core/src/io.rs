//! Key files and encrypted-database files.
//!
//! Keys are pretty-printed JSON with exact decimal strings; encrypted
//! databases are JSON lines, one tuple per line. Both carry a `scheme` tag.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{serde_bigint_vec, serde_rational_vec, Matrix, Permutation, Rational};
use crate::baseline::{BaselineKey, BaselineParams};
use crate::knn::EncTuple;
use crate::proposed::{OwnerKey, SchemeError, SecurityParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Proposed,
    Baseline,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Proposed => "proposed",
            Scheme::Baseline => "baseline",
        })
    }
}

impl FromStr for Scheme {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, IoError> {
        match s {
            "proposed" => Ok(Scheme::Proposed),
            "baseline" => Ok(Scheme::Baseline),
            other => Err(IoError::UnknownScheme(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),
    #[error("missing scheme tag")]
    MissingScheme,
    #[error("line {line}: scheme {found} does not match {expected}")]
    SchemeMismatch {
        line: usize,
        expected: Scheme,
        found: Scheme,
    },
    #[error("bit string may only contain 0 and 1: {0:?}")]
    BadBits(String),
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Key(#[from] SchemeError),
}

/// A key of either scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyKey {
    Proposed(OwnerKey),
    Baseline(BaselineKey),
}

impl AnyKey {
    pub fn scheme(&self) -> Scheme {
        match self {
            AnyKey::Proposed(_) => Scheme::Proposed,
            AnyKey::Baseline(_) => Scheme::Baseline,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ProposedKeyFile {
    scheme: Scheme,
    params: SecurityParams,
    coord_bound: i64,
    m: Matrix,
    #[serde(with = "serde_rational_vec")]
    s: Vec<Rational>,
    #[serde(with = "serde_rational_vec")]
    sigma: Vec<Rational>,
    b: String,
    #[serde(with = "serde_bigint_vec")]
    w: Vec<BigInt>,
    pi: Permutation,
}

#[derive(Serialize, Deserialize)]
struct BaselineKeyFile {
    scheme: Scheme,
    params: BaselineParams,
    coord_bound: i64,
    m: Matrix,
    #[serde(with = "serde_rational_vec")]
    s: Vec<Rational>,
    #[serde(with = "serde_rational_vec")]
    tau: Vec<Rational>,
    pi: Permutation,
}

fn parse_bits(text: &str) -> Result<Vec<bool>, IoError> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(IoError::BadBits(text.to_string())),
        })
        .collect()
}

pub fn key_to_json(key: &AnyKey) -> String {
    let value = match key {
        AnyKey::Proposed(k) => serde_json::to_value(ProposedKeyFile {
            scheme: Scheme::Proposed,
            params: k.params().clone(),
            coord_bound: k.coord_bound(),
            m: k.m().clone(),
            s: k.shift().to_vec(),
            sigma: k.sigma().to_vec(),
            b: k.bit_string(),
            w: k.weights().to_vec(),
            pi: k.perm().clone(),
        }),
        AnyKey::Baseline(k) => serde_json::to_value(BaselineKeyFile {
            scheme: Scheme::Baseline,
            params: k.params().clone(),
            coord_bound: k.coord_bound(),
            m: k.m().clone(),
            s: k.shift().to_vec(),
            tau: k.tau().to_vec(),
            pi: k.perm().clone(),
        }),
    }
    .expect("key files serialize");
    serde_json::to_string_pretty(&value).expect("json renders") + "\n"
}

/// Parses and fully validates a key file.
pub fn key_from_json(text: &str) -> Result<AnyKey, IoError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let scheme: Scheme = match value.get("scheme") {
        Some(tag) => serde_json::from_value(tag.clone())?,
        None => return Err(IoError::MissingScheme),
    };
    Ok(match scheme {
        Scheme::Proposed => {
            let f: ProposedKeyFile = serde_json::from_value(value)?;
            AnyKey::Proposed(OwnerKey::from_parts(
                f.params,
                f.coord_bound,
                f.m,
                f.s,
                f.sigma,
                parse_bits(&f.b)?,
                f.w,
                f.pi,
            )?)
        }
        Scheme::Baseline => {
            let f: BaselineKeyFile = serde_json::from_value(value)?;
            AnyKey::Baseline(BaselineKey::from_parts(
                f.params,
                f.coord_bound,
                f.m,
                f.s,
                f.tau,
                f.pi,
            )?)
        }
    })
}

#[derive(Serialize, Deserialize)]
struct EdbLine {
    scheme: Scheme,
    #[serde(flatten)]
    tuple: EncTuple,
}

pub fn edb_to_jsonl(scheme: Scheme, edb: &[EncTuple]) -> String {
    edb.iter()
        .map(|t| {
            let line = EdbLine {
                scheme,
                tuple: t.clone(),
            };
            serde_json::to_string(&line).expect("tuples serialize") + "\n"
        })
        .collect()
}

/// Reads an encrypted database; every line must carry `expected`'s tag.
pub fn edb_from_jsonl(text: &str, expected: Scheme) -> Result<Vec<EncTuple>, IoError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line: EdbLine = serde_json::from_str(l).map_err(|source| IoError::Line {
                line: i + 1,
                source,
            })?;
            if line.scheme != expected {
                return Err(IoError::SchemeMismatch {
                    line: i + 1,
                    expected,
                    found: line.scheme,
                });
            }
            Ok(line.tuple)
        })
        .collect()
}
