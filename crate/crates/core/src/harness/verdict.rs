//! Ground-truth judgement of attack reports. These functions hold the real
//! key material, which the attack code never sees.

use num_bigint::BigInt;

use crate::arith::Rational;
use crate::attacks::{AttackReport, Verdict};
use crate::baseline::BaselineKey;
use crate::proposed::OwnerKey;

fn ints(v: &[BigInt]) -> Vec<Rational> {
    v.iter().cloned().map(Rational::from_integer).collect()
}

fn verdict(matches: usize, total: usize, detail: impl Into<String>) -> Verdict {
    Verdict {
        matched: total > 0 && matches == total,
        matches,
        total,
        detail: detail.into(),
    }
}

/// The first `d` columns of the exponent matrix, the Level-1 targets.
pub fn baseline_columns(key: &BaselineKey) -> Vec<Vec<Rational>> {
    (0..key.params().dim)
        .map(|j| ints(&key.scaled_column(j)))
        .collect()
}

pub fn judge_columns(report: &mut AttackReport, key: &BaselineKey) -> Verdict {
    let truth = baseline_columns(key);
    let got = &report.recovered.columns;
    let matches = truth.iter().zip(got).filter(|(t, g)| t == g).count();
    let v = verdict(
        matches,
        truth.len(),
        "recovered columns equal to the key's columns",
    );
    report.verdict = Some(v.clone());
    v
}

pub fn judge_shift(report: &AttackReport, key: &BaselineKey) -> bool {
    report.recovered.shift.as_slice() == &key.shift()[..key.params().dim]
}

/// Compares the recovered database (and the shift it came from) with the truth.
pub fn judge_database(report: &mut AttackReport, key: &BaselineKey, truth: &[Vec<i64>]) -> Verdict {
    let got = &report.recovered.database;
    let matches = truth
        .iter()
        .zip(got)
        .filter(|(t, g)| {
            t.len() == g.len()
                && t.iter()
                    .zip(g.iter())
                    .all(|(&a, b)| Rational::from_integer(a.into()) == *b)
        })
        .count();
    let shift_ok = judge_shift(report, key);
    let mut v = verdict(
        if got.len() == truth.len() { matches } else { 0 },
        truth.len(),
        format!(
            "rows recovered exactly; shift {}",
            if shift_ok { "matches" } else { "differs" }
        ),
    );
    v.matched &= shift_ok;
    report.verdict = Some(v.clone());
    v
}

pub fn judge_query(report: &mut AttackReport, query: &[i64]) -> Verdict {
    let truth: Vec<Rational> = query
        .iter()
        .map(|&x| Rational::from_integer(x.into()))
        .collect();
    let ok = report.recovered.query == truth;
    let v = verdict(
        usize::from(ok),
        1,
        "recovered query equals the issued query",
    );
    report.verdict = Some(v.clone());
    v
}

pub fn judge_beta(reported: &BigInt, truth: &BigInt) -> Verdict {
    verdict(
        usize::from(reported == truth),
        1,
        format!("reported {reported}, true {truth}"),
    )
}

/// Counts candidates equal to any column of `M̂` or its integer scaling.
/// `matched` is true when at least one candidate hit, i.e. the probe broke
/// the key.
pub fn judge_resistance(report: &mut AttackReport, key: &OwnerKey) -> Verdict {
    let eta = key.params().eta();
    let columns: Vec<Vec<Rational>> = (0..eta)
        .flat_map(|j| {
            let plain = key.m_hat().column(j);
            let scaled = ints(
                &key.m_hat_scaled()
                    .iter()
                    .map(|r| r[j].clone())
                    .collect::<Vec<_>>(),
            );
            [plain, scaled]
        })
        .collect();
    let hits = report
        .recovered
        .columns
        .iter()
        .filter(|cand| columns.contains(cand))
        .count();
    let total = report.recovered.columns.len();
    let v = Verdict {
        matched: hits > 0,
        matches: hits,
        total,
        detail: format!(
            "{hits}/{total} candidates equal a key column; {} distinct",
            report.stats.distinct_candidates.unwrap_or(0)
        ),
    };
    report.verdict = Some(v.clone());
    v
}
