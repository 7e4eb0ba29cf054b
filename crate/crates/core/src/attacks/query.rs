use num_bigint::BigInt;

use super::{recover_beta, AttackError, AttackKind, AttackReport};
use crate::arith::{dot, ArithError, Matrix, Rational};
use crate::knn::EncTuple;

/// Upper limit on pair selections tried before giving up.
pub const MAX_PAIR_ATTEMPTS: usize = 10_000;

/// Lexicographic `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        match (0..k).rev().find(|&i| self.idx[i] < self.n - k + i) {
            Some(i) => {
                self.idx[i] += 1;
                for t in i + 1..k {
                    self.idx[t] = self.idx[t - 1] + 1;
                }
            }
            None => self.done = true,
        }
        Some(out)
    }
}

fn norm_sq(p: &[Rational]) -> Rational {
    p.iter().map(|x| x * x).sum()
}

/// Solves `2(p_a − p_b)·q = ‖p_a‖² − ‖p_b‖² − ⟨p′_a − p′_b, q′/β⟩ / scale`
/// for `q`, using `d + 1` pairs at a time and moving to the next selection
/// whenever the system is singular. Returns the query and the number of
/// selections that were skipped.
pub fn recover_query(
    q_over_beta: &[Rational],
    pairs: &[(Vec<Rational>, Vec<Rational>)],
    matrix_scale: u32,
) -> Result<(Vec<Rational>, usize), AttackError> {
    let d = match pairs.first() {
        Some((p, _)) => p.len(),
        None => return Err(AttackError::NotEnoughPairs { needed: 1, got: 0 }),
    };
    if pairs.len() < d + 1 {
        return Err(AttackError::NotEnoughPairs {
            needed: d + 1,
            got: pairs.len(),
        });
    }
    let scale = Rational::from_integer(BigInt::from(matrix_scale));
    let two = Rational::from_integer(2.into());
    let mut skipped = 0;
    for selection in Combinations::new(pairs.len(), d + 1).take(MAX_PAIR_ATTEMPTS) {
        let (pa, ca) = &pairs[selection[0]];
        let mut rows = Vec::with_capacity(d);
        let mut rhs = Vec::with_capacity(d);
        for &b in &selection[1..] {
            let (pb, cb) = &pairs[b];
            rows.push(pa.iter().zip(pb).map(|(x, y)| (x - y) * &two).collect());
            let diff: Vec<Rational> = ca.iter().zip(cb).map(|(x, y)| x - y).collect();
            rhs.push(norm_sq(pa) - norm_sq(pb) - dot(&diff, q_over_beta)? / &scale);
        }
        match Matrix::from_rows(rows)?.invert() {
            Ok(inv) => return Ok((inv.mul_vec(&rhs)?, skipped)),
            Err(ArithError::Singular) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Err(AttackError::SingularAfterRetries { attempts: skipped })
}

/// The CSP-side attack: strip `β_q` from an observed answer, then solve
/// against plaintexts paired with their ciphertexts (for example from
/// [`super::recover_database`]).
pub fn query_recovery_attack(
    answer: &[BigInt],
    plaintexts: &[Vec<Rational>],
    edb: &[EncTuple],
    matrix_scale: u32,
) -> Result<AttackReport, AttackError> {
    let beta = recover_beta(answer, answer.len())?;
    let beta_r = Rational::from_integer(beta.clone());
    let q_over_beta: Vec<Rational> = answer
        .iter()
        .map(|v| Rational::from_integer(v.clone()) / &beta_r)
        .collect();
    let pairs: Vec<_> = plaintexts
        .iter()
        .cloned()
        .zip(edb.iter().map(|t| t.coords.clone()))
        .collect();
    let (query, skipped) = recover_query(&q_over_beta, &pairs, matrix_scale)?;
    let mut report = AttackReport::new(AttackKind::QueryRecovery, 1);
    report.recovered.beta = Some(beta);
    report.recovered.query = query;
    report.stats.rank_failures = skipped;
    report.stats.retries = skipped;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_enumerate_in_order() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1]);
        assert_eq!(all[5], vec![2, 3]);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }
}
