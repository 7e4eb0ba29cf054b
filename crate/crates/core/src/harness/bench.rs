use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ops::run_instrumented;
use super::{HarnessError, RunDescriptor};
use crate::io::Scheme;

pub const BENCH_HEADER: [&str; 8] = [
    "phase",
    "scheme",
    "d",
    "m",
    "k",
    "wall_ns",
    "mac_count",
    "paillier_ops",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub phase: String,
    pub scheme: Scheme,
    pub d: usize,
    pub m: usize,
    pub k: usize,
    pub wall_ns: u128,
    pub mac_count: u64,
    pub paillier_ops: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchGrid {
    pub schemes: Vec<Scheme>,
    pub dims: Vec<usize>,
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub k: usize,
    pub paillier_bits: u64,
    pub seed: u64,
}

impl Default for BenchGrid {
    fn default() -> Self {
        Self {
            schemes: vec![Scheme::Baseline, Scheme::Proposed],
            dims: vec![2, 4, 8],
            sizes: vec![100, 200],
            repetitions: 1,
            k: 1,
            paillier_bits: 1024,
            seed: 0,
        }
    }
}

/// Runs every grid point `repetitions` times; four rows per run.
pub fn bench(grid: &BenchGrid) -> Result<Vec<BenchRow>, HarnessError> {
    let mut rows = Vec::new();
    for rep in 0..grid.repetitions {
        for &scheme in &grid.schemes {
            for &d in &grid.dims {
                for &m in &grid.sizes {
                    let desc = RunDescriptor {
                        k: grid.k,
                        paillier_bits: grid.paillier_bits,
                        seed: grid.seed.wrapping_add(rep as u64),
                        ..RunDescriptor::new(scheme, d, m)
                    };
                    let (counts, times) = run_instrumented(&desc)?;
                    let phases = [
                        ("keygen", counts.keygen, times.keygen),
                        ("db-encrypt", counts.db_encrypt, times.db_encrypt),
                        ("query-blind", counts.query_blind, times.query_blind),
                        ("knn", counts.knn, times.knn),
                    ];
                    rows.extend(phases.into_iter().map(|(phase, c, t)| BenchRow {
                        phase: phase.to_string(),
                        scheme,
                        d,
                        m,
                        k: grid.k,
                        wall_ns: t,
                        mac_count: c.macs,
                        paillier_ops: c.paillier_ops(),
                    }));
                }
            }
        }
    }
    Ok(rows)
}

/// Writes the header and one line per row; no rows still yields the header.
pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
