//! Three-party simulation, operation counting, dataset ingestion,
//! benchmarking and ground-truth verdicts for attack runs.

mod bench;
mod ingest;
mod ops;
mod protocol;
pub mod scenario;
pub mod verdict;

pub use bench::{bench, write_bench_csv, BenchGrid, BenchRow, BENCH_HEADER};
pub use ingest::{format_csv, ingest_csv, ingest_csv_path};
pub use ops::{count_ops, OpCounters, RunDescriptor};
pub use protocol::{
    simulate_baseline_session, simulate_session, CloudProvider, DataOwner, InMemoryBus, Message,
    MessageBus, MessageKind, Party, QueryUser, SessionConfig, Transcript,
};

use thiserror::Error;

use crate::attacks::AttackError;
use crate::paillier::PaillierError;
use crate::proposed::SchemeError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: expected {expected} fields, found {actual}")]
    DimensionMismatch {
        line: u64,
        expected: usize,
        actual: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Paillier(#[from] PaillierError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
