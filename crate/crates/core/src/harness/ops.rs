use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::baseline::{
    baseline_blind_query, baseline_encrypt_database, baseline_keygen, baseline_knn, BaselineParams,
};
use crate::io::Scheme;
use crate::metrics::{measure, Counts};
use crate::paillier;
use crate::proposed::{
    csp_knn, do_blind_query, encrypt_database, keygen, qu_build_request, qu_unwrap, QueryPolicy,
    SecurityParams,
};

/// Coordinates of generated data lie in `0..=COORD_MAX`.
const COORD_MAX: i64 = 100;

/// One instrumented run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunDescriptor {
    pub scheme: Scheme,
    pub d: usize,
    pub m: usize,
    pub k: usize,
    pub split: usize,
    pub padding: usize,
    pub paillier_bits: u64,
    pub seed: u64,
}

impl RunDescriptor {
    /// Evaluation defaults: `c = 5, ε = 5` for the baseline; `ε = 10` and
    /// `c = min(5, d)` for the proposed scheme.
    pub fn new(scheme: Scheme, d: usize, m: usize) -> Self {
        let (split, padding) = match scheme {
            Scheme::Baseline => (5, 5),
            Scheme::Proposed => (d.min(5), 10),
        };
        Self {
            scheme,
            d,
            m,
            k: 1.min(m),
            split,
            padding,
            paillier_bits: 1024,
            seed: 0,
        }
    }

    pub fn eta(&self) -> usize {
        match self.scheme {
            Scheme::Baseline => self.d + 1 + self.split + self.padding,
            Scheme::Proposed => self.d + 2 + self.split + self.padding,
        }
    }
}

/// Per-phase operation counts of one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub eta: usize,
    pub keygen: Counts,
    pub db_encrypt: Counts,
    pub query_blind: Counts,
    pub knn: Counts,
}

/// Wall time of each phase alongside the counters.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct PhaseTimes {
    pub keygen: u128,
    pub db_encrypt: u128,
    pub query_blind: u128,
    pub knn: u128,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Counts, u128) {
    let start = std::time::Instant::now();
    let (out, counts) = measure(f);
    (out, counts, start.elapsed().as_nanos())
}

pub(crate) fn run_instrumented(
    desc: &RunDescriptor,
) -> Result<(OpCounters, PhaseTimes), HarnessError> {
    let mut rng = ChaCha20Rng::seed_from_u64(desc.seed);
    let points: Vec<Vec<i64>> = (0..desc.m)
        .map(|_| (0..desc.d).map(|_| rng.gen_range(0..=COORD_MAX)).collect())
        .collect();
    let query: Vec<i64> = (0..desc.d).map(|_| rng.gen_range(0..=COORD_MAX)).collect();
    let (pk, sk) = paillier::keygen(desc.paillier_bits, &mut rng)?;
    let mut out = OpCounters {
        eta: desc.eta(),
        ..OpCounters::default()
    };
    let mut times = PhaseTimes::default();
    let k = desc.k.max(1).min(desc.m.max(1));
    match desc.scheme {
        Scheme::Proposed => {
            let params = SecurityParams::new(desc.d, desc.split, desc.padding);
            let (key, c, t) = timed(|| keygen(params, COORD_MAX, &mut rng));
            let key = key?;
            (out.keygen, times.keygen) = (c, t);
            let (edb, c, t) = timed(|| encrypt_database(&key, &points, &mut rng));
            let edb = edb?;
            (out.db_encrypt, times.db_encrypt) = (c, t);
            let req = qu_build_request(&query, key.query_bound(), &pk, &mut rng)?;
            let (bq, c, t) = timed(|| do_blind_query(&key, &req, QueryPolicy::AllowAll, &mut rng));
            let (bq, _) = bq?;
            (out.query_blind, times.query_blind) = (c, t);
            let q = qu_unwrap(&sk, &bq)?;
            if desc.m > 0 {
                let (res, c, t) = timed(|| csp_knn(&edb, &q, k));
                res?;
                (out.knn, times.knn) = (c, t);
            }
        }
        Scheme::Baseline => {
            let params = BaselineParams::new(desc.d, desc.split, desc.padding);
            let (key, c, t) = timed(|| baseline_keygen(params, COORD_MAX, &mut rng));
            let key = key?;
            (out.keygen, times.keygen) = (c, t);
            let (edb, c, t) = timed(|| baseline_encrypt_database(&key, &points, &mut rng));
            let edb = edb?;
            (out.db_encrypt, times.db_encrypt) = (c, t);
            let req = qu_build_request(&query, COORD_MAX, &pk, &mut rng)?;
            let (bq, c, t) = timed(|| baseline_blind_query(&key, &req, &mut rng));
            let (bq, _) = bq?;
            (out.query_blind, times.query_blind) = (c, t);
            let q = qu_unwrap(&sk, &bq)?;
            if desc.m > 0 {
                let (res, c, t) = timed(|| baseline_knn(&edb, &q, k));
                res?;
                (out.knn, times.knn) = (c, t);
            }
        }
    }
    Ok((out, times))
}

/// Exact, deterministic operation counts for one run.
pub fn count_ops(desc: &RunDescriptor) -> Result<OpCounters, HarnessError> {
    run_instrumented(desc).map(|(c, _)| c)
}
