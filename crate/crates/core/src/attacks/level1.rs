use num_bigint::BigInt;
use num_integer::Integer;

use super::{recover_beta, AttackError, AttackKind, AttackReport, QueryOracle};
use crate::arith::Rational;

/// One column isolated by a scaled unit query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level1Column {
    pub j: usize,
    pub beta: BigInt,
    pub answer: Vec<BigInt>,
    pub column: Vec<BigInt>,
}

/// `2³² · entry_max · ephemeral_max`: comfortably above anything the
/// non-query part of an answer can contribute.
pub fn default_n(entry_max: u64, ephemeral_max: u64) -> BigInt {
    (BigInt::from(1u64) << 32) * entry_max * ephemeral_max
}

/// Queries `N·e_j`, strips `β_q` and keeps `⌊t / N⌋`, i.e.
/// `(t − t mod N) / N` with a non-negative remainder.
pub fn level1_recover_column(
    oracle: &mut dyn QueryOracle,
    j: usize,
    n: &BigInt,
) -> Result<Level1Column, AttackError> {
    let mut q = vec![BigInt::from(0); oracle.dim()];
    q[j] = n.clone();
    let answer = oracle.query(&q)?;
    let beta = recover_beta(&answer, answer.len())?;
    let column = answer.iter().map(|t| (t / &beta).div_floor(n)).collect();
    Ok(Level1Column {
        j,
        beta,
        answer,
        column,
    })
}

/// Recovers the first `d` columns of the scaled `M̂`, one query each.
pub fn level1_attack(
    oracle: &mut dyn QueryOracle,
    n: &BigInt,
) -> Result<AttackReport, AttackError> {
    let d = oracle.dim();
    let mut report = AttackReport::new(AttackKind::Level1, d);
    for j in 0..d {
        let col = level1_recover_column(oracle, j, n)?;
        report.recovered.beta = Some(col.beta);
        report
            .recovered
            .columns
            .push(col.column.into_iter().map(Rational::from_integer).collect());
    }
    Ok(report)
}
