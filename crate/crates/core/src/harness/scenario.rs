//! Ready-made attack runs on freshly generated instances, used by the CLI
//! and the test suites.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::verdict::{judge_columns, judge_database, judge_query, judge_resistance};
use super::HarnessError;
use crate::attacks::{
    default_n, level1_attack, level2_attack, probe_proposed_resistance, query_recovery_attack,
    AttackReport, BaselineOracle, ProbeCase, ProposedOracle, QueryOracle,
};
use crate::baseline::{
    baseline_encrypt_database, baseline_keygen, BaselineKey, BaselineParams, QUERY_RAND_MAX,
};
use crate::knn::EncTuple;
use crate::paillier;
use crate::proposed::{encrypt_database, keygen, OwnerKey, SecurityParams};

/// Coordinates of generated points lie in `0..=COORD_MAX`.
pub const COORD_MAX: i64 = 100;
/// Largest entry of an integerized baseline matrix.
pub const ENTRY_MAX: u64 = 99;

pub struct BaselineInstance {
    pub key: BaselineKey,
    pub points: Vec<Vec<i64>>,
    pub edb: Vec<EncTuple>,
    pub rng: ChaCha20Rng,
}

/// An integerized baseline key (`c = 5, ε = 5`) and `m` encrypted random points.
pub fn baseline_instance(d: usize, m: usize, seed: u64) -> Result<BaselineInstance, HarnessError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let key = baseline_keygen(BaselineParams::new(d, 5, 5), COORD_MAX, &mut rng)?;
    let points: Vec<Vec<i64>> = (0..m)
        .map(|_| (0..d).map(|_| rng.gen_range(0..=COORD_MAX)).collect())
        .collect();
    let edb = baseline_encrypt_database(&key, &points, &mut rng)?;
    Ok(BaselineInstance {
        key,
        points,
        edb,
        rng,
    })
}

/// `N` for a baseline key: the non-query part of an answer is at most
/// `entry_max · (1 + c · r_max)`.
pub fn baseline_n(key: &BaselineKey) -> BigInt {
    let scale = u64::from(key.params().matrix_scale());
    default_n(
        ENTRY_MAX * scale,
        1 + key.params().split as u64 * QUERY_RAND_MAX as u64,
    )
}

pub struct BaselineAttackRun {
    pub level1: AttackReport,
    pub level2: AttackReport,
    pub query: AttackReport,
    pub issued_query: Vec<i64>,
}

/// Level 1 → Level 2 → database recovery → query recovery, each judged
/// against the instance's key. `known` is how many plaintexts the attacker
/// holds (the first rows of the database).
pub fn run_baseline_attack(
    inst: &mut BaselineInstance,
    known: usize,
    n: &BigInt,
    paillier_bits: u64,
) -> Result<BaselineAttackRun, HarnessError> {
    let (pk, sk) = paillier::keygen(paillier_bits, &mut inst.rng)?;
    let scale = inst.key.params().matrix_scale();
    let mut oracle = BaselineOracle::new(&inst.key, pk, sk, inst.rng.clone());
    let mut level1 = level1_attack(&mut oracle, n)?;
    judge_columns(&mut level1, &inst.key);

    let known_points = &inst.points[..known.min(inst.points.len())];
    let mut level2 = level2_attack(&inst.edb, known_points, &level1.recovered.columns, scale)?;
    judge_database(&mut level2, &inst.key, &inst.points);

    let d = inst.key.params().dim;
    let issued_query: Vec<i64> = (0..d).map(|_| inst.rng.gen_range(0..=COORD_MAX)).collect();
    let q: Vec<BigInt> = issued_query.iter().map(|&x| BigInt::from(x)).collect();
    let answer = oracle.query(&q)?;
    let mut query = query_recovery_attack(&answer, &level2.recovered.database, &inst.edb, scale)?;
    judge_query(&mut query, &issued_query);
    Ok(BaselineAttackRun {
        level1,
        level2,
        query,
        issued_query,
    })
}

pub struct ProposedInstance {
    pub key: OwnerKey,
    pub points: Vec<Vec<i64>>,
    pub edb: Vec<EncTuple>,
    pub rng: ChaCha20Rng,
}

/// A proposed-scheme key (`c = min(5, d)`, `ε = 10`) and `m` encrypted random points.
pub fn proposed_instance(d: usize, m: usize, seed: u64) -> Result<ProposedInstance, HarnessError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let key = keygen(SecurityParams::new(d, d.min(5), 10), COORD_MAX, &mut rng)?;
    let points: Vec<Vec<i64>> = (0..m)
        .map(|_| (0..d).map(|_| rng.gen_range(0..=COORD_MAX)).collect())
        .collect();
    let edb = encrypt_database(&key, &points, &mut rng)?;
    Ok(ProposedInstance {
        key,
        points,
        edb,
        rng,
    })
}

/// The Level-1 procedure against the proposed scheme, judged against its key.
pub fn run_resistance(
    inst: &mut ProposedInstance,
    case: ProbeCase,
    trials: usize,
    n: &BigInt,
    paillier_bits: u64,
) -> Result<AttackReport, HarnessError> {
    let (pk, sk) = paillier::keygen(paillier_bits, &mut inst.rng)?;
    let mut oracle = ProposedOracle::new(&inst.key, pk, sk, inst.rng.clone());
    let mut report = probe_proposed_resistance(&mut oracle, case, trials, n)?;
    judge_resistance(&mut report, &inst.key);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_pipeline_recovers_everything() {
        let mut inst = baseline_instance(3, 10, 7).unwrap();
        let n = BigInt::from(1_000_000_000u64);
        let run = run_baseline_attack(&mut inst, 2, &n, 256).unwrap();
        assert!(run.level1.verdict.as_ref().unwrap().matched);
        assert!(run.level2.verdict.as_ref().unwrap().matched);
        assert!(run.query.verdict.as_ref().unwrap().matched);
    }

    #[test]
    fn proposed_resists_level1() {
        let mut inst = proposed_instance(3, 5, 8).unwrap();
        let n = BigInt::from(1_000_000_000u64);
        let report = run_resistance(&mut inst, ProbeCase::ScaledUnitQuery, 5, &n, 512).unwrap();
        let v = report.verdict.unwrap();
        assert_eq!(v.matches, 0);
        assert_eq!(report.stats.distinct_candidates, Some(5));
    }
}
