use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{recover_beta, AttackError, AttackKind, AttackReport, QueryOracle};
use crate::arith::{dot, Rational};
use crate::knn::EncTuple;
use crate::proposed::{CspQuery, SecurityParams};

/// Query shapes from the security analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeCase {
    /// `q = 0`.
    ZeroQuery,
    /// `q = e_0`.
    UnitQuery,
    /// `q = N·e_0`, the Level-1 query.
    ScaledUnitQuery,
}

impl std::str::FromStr for ProbeCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zero" | "zero-query" => Ok(Self::ZeroQuery),
            "unit" | "unit-query" => Ok(Self::UnitQuery),
            "scaled" | "scaled-unit" | "scaled-unit-query" => Ok(Self::ScaledUnitQuery),
            other => Err(format!("unknown probe case {other:?}")),
        }
    }
}

/// Runs the Level-1 extraction `trials` times against a proposed-scheme
/// oracle and collects the candidate column each answer yields.
pub fn probe_proposed_resistance(
    oracle: &mut dyn QueryOracle,
    case: ProbeCase,
    trials: usize,
    n: &BigInt,
) -> Result<AttackReport, AttackError> {
    let d = oracle.dim();
    let mut q = vec![BigInt::from(0); d];
    let divisor = match case {
        ProbeCase::ZeroQuery => BigInt::from(1),
        ProbeCase::UnitQuery => {
            q[0] = BigInt::from(1);
            BigInt::from(1)
        }
        ProbeCase::ScaledUnitQuery => {
            q[0] = n.clone();
            n.clone()
        }
    };
    let mut report = AttackReport::new(AttackKind::Resistance, trials);
    for _ in 0..trials {
        let answer = oracle.query(&q)?;
        let beta = recover_beta(&answer, answer.len()).unwrap_or_else(|_| {
            report.stats.beta_failures += 1;
            BigInt::from(1)
        });
        let candidate = answer
            .iter()
            .map(|t| Rational::from_integer((t / &beta).div_floor(&divisor)))
            .collect();
        report.recovered.columns.push(candidate);
    }
    let distinct: BTreeSet<_> = report.recovered.columns.iter().collect();
    report.stats.distinct_candidates = Some(distinct.len());
    Ok(report)
}

/// With the key-side knowledge of both plaintexts, the query and `β2`,
/// returns `(p′_i − p′_j)·q′ / (scale) − β2·[(‖p_i‖² − ‖p_j‖²) − 2(p_i − p_j)·q]`,
/// which the scheme makes equal to `β1(α_i − α_j)`: a term the attacker
/// cannot eliminate.
pub fn residual_check(
    edb: &[EncTuple],
    q_prime: &CspQuery,
    pair: (usize, usize),
    plaintexts: &[Vec<i64>],
    query: &[i64],
    beta2: &BigInt,
    params: &SecurityParams,
) -> Result<Rational, AttackError> {
    let (i, j) = pair;
    let diff: Vec<Rational> = edb[i]
        .coords
        .iter()
        .zip(&edb[j].coords)
        .map(|(a, b)| a - b)
        .collect();
    let q: Vec<Rational> = q_prime
        .coords
        .iter()
        .cloned()
        .map(Rational::from_integer)
        .collect();
    let scale = BigInt::from(params.matrix_scale) * BigInt::from(params.query_scale);
    let lhs = dot(&diff, &q)? / Rational::from_integer(scale);
    let norm = |p: &[i64]| -> i128 { p.iter().map(|&x| (x as i128) * (x as i128)).sum() };
    let cross: i128 = plaintexts[i]
        .iter()
        .zip(&plaintexts[j])
        .zip(query)
        .map(|((&a, &b), &c)| (a as i128 - b as i128) * c as i128)
        .sum();
    let distance_term = norm(&plaintexts[i]) - norm(&plaintexts[j]) - 2 * cross;
    Ok(lhs - Rational::from_integer(beta2 * BigInt::from(distance_term)))
}
