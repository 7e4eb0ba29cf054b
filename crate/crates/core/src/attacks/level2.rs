use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use super::{collision_probability, AttackError, AttackKind, AttackReport};
use crate::arith::{dot, format_rational, round_to_decimals, Rational};
use crate::knn::EncTuple;

/// Decimal digits kept per element when fingerprinting candidates.
pub const FINGERPRINT_DIGITS: u32 = 3;

/// Candidate secret shifts keyed by fingerprint, with every
/// `(known plaintext, encrypted row)` pair that produced them.
#[derive(Debug, Clone, Default)]
pub struct CollisionTable {
    entries: BTreeMap<String, BTreeSet<(usize, usize)>>,
    values: BTreeMap<String, Vec<Rational>>,
    digits: u32,
}

impl CollisionTable {
    pub fn new(digits: u32) -> Self {
        Self {
            digits,
            ..Self::default()
        }
    }

    pub fn fingerprint(&self, candidate: &[Rational]) -> String {
        candidate
            .iter()
            .map(|v| format_rational(&round_to_decimals(v, self.digits)))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn insert(&mut self, candidate: Vec<Rational>, known: usize, row: usize) {
        let key = self.fingerprint(&candidate);
        self.entries
            .entry(key.clone())
            .or_default()
            .insert((known, row));
        self.values.entry(key).or_insert(candidate);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn occurrences(&self, fingerprint: &str) -> Option<&BTreeSet<(usize, usize)>> {
        self.entries.get(fingerprint)
    }

    /// Fingerprints reached from two or more distinct rows.
    pub fn collisions(&self) -> usize {
        self.entries
            .values()
            .filter(|occ| occ.iter().map(|(_, r)| r).collect::<BTreeSet<_>>().len() > 1)
            .count()
    }

    /// Candidates produced by every one of the `known` plaintexts.
    pub fn confirmed(&self, known: usize) -> Vec<Vec<Rational>> {
        self.entries
            .iter()
            .filter(|(_, occ)| occ.iter().map(|(k, _)| k).collect::<BTreeSet<_>>().len() == known)
            .map(|(key, _)| self.values[key].clone())
            .collect()
    }
}

fn unscale(columns: &[Vec<Rational>], matrix_scale: u32) -> Vec<Vec<Rational>> {
    let scale = Rational::from_integer(BigInt::from(matrix_scale));
    columns
        .iter()
        .map(|c| c.iter().map(|v| v / &scale).collect())
        .collect()
}

/// Builds the table: for known point `u` and row `r`,
/// `s_i = 2·p_{u,i} + ⟨p′_r, col_i⟩`. The true shift shows up once per known
/// point, so it is the candidate present in every column.
pub fn level2_recover_s(
    edb: &[EncTuple],
    known: &[Vec<i64>],
    columns: &[Vec<Rational>],
    matrix_scale: u32,
) -> Result<(Vec<Rational>, CollisionTable), AttackError> {
    let cols = unscale(columns, matrix_scale);
    let mut table = CollisionTable::new(FINGERPRINT_DIGITS);
    for (u, p) in known.iter().enumerate() {
        if p.len() != cols.len() {
            return Err(crate::proposed::SchemeError::DimensionMismatch {
                expected: cols.len(),
                actual: p.len(),
            }
            .into());
        }
        for t in edb {
            let candidate = p
                .iter()
                .zip(&cols)
                .map(|(&x, col)| {
                    Ok(Rational::from_integer(BigInt::from(2 * x)) + dot(&t.coords, col)?)
                })
                .collect::<Result<Vec<_>, AttackError>>()?;
            table.insert(candidate, u, t.index);
        }
    }
    let confirmed = if known.len() < 2 {
        Vec::new()
    } else {
        table.confirmed(known.len())
    };
    match confirmed.as_slice() {
        [s] => Ok((s.clone(), table)),
        _ => Err(AttackError::NoUniqueCandidate {
            candidates: confirmed.len(),
        }),
    }
}

/// `p_{u,i} = (s_i − ⟨p′_u, col_i⟩) / 2` for every row.
pub fn recover_database(
    shift: &[Rational],
    columns: &[Vec<Rational>],
    matrix_scale: u32,
    edb: &[EncTuple],
) -> Result<Vec<Vec<Rational>>, AttackError> {
    let cols = unscale(columns, matrix_scale);
    let two = Rational::from_integer(2.into());
    edb.iter()
        .map(|t| {
            shift
                .iter()
                .zip(&cols)
                .map(|(s, col)| Ok((s - dot(&t.coords, col)?) / &two))
                .collect()
        })
        .collect()
}

/// Level 2 end to end: table, unique shift, then every plaintext.
pub fn level2_attack(
    edb: &[EncTuple],
    known: &[Vec<i64>],
    columns: &[Vec<Rational>],
    matrix_scale: u32,
) -> Result<AttackReport, AttackError> {
    let (shift, table) = level2_recover_s(edb, known, columns, matrix_scale)?;
    let mut report = AttackReport::new(AttackKind::Level2, known.len());
    report.stats.table_size = Some(table.len());
    report.stats.collisions = table.collisions();
    report.stats.predicted_collision_probability = Some(collision_probability(
        edb.len() as f64,
        FINGERPRINT_DIGITS,
        columns.len() as u32,
    ));
    report.recovered.database = recover_database(&shift, columns, matrix_scale, edb)?;
    report.recovered.columns = columns.to_vec();
    report.recovered.shift = shift;
    Ok(report)
}
