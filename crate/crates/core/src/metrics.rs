//! Deterministic per-thread operation counters.
//!
//! Linear-algebra and Paillier routines report what they do here; the harness
//! reads deltas around each protocol phase. Counters are thread-local so
//! concurrent sessions never see each other's work.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

thread_local! {
    static MACS: Cell<u64> = const { Cell::new(0) };
    static PAILLIER_EXPS: Cell<u64> = const { Cell::new(0) };
    static PAILLIER_ENCS: Cell<u64> = const { Cell::new(0) };
    static PAILLIER_DECS: Cell<u64> = const { Cell::new(0) };
}

/// A snapshot of the counters on the current thread.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// Multiply-accumulate steps in matrix and vector products.
    pub macs: u64,
    /// Homomorphic scalar multiplications (modular exponentiations).
    pub paillier_exps: u64,
    /// Fresh Paillier encryptions.
    pub paillier_encs: u64,
    pub paillier_decs: u64,
}

impl Counts {
    pub fn paillier_ops(&self) -> u64 {
        self.paillier_exps + self.paillier_encs
    }
}

impl std::ops::Sub for Counts {
    type Output = Counts;

    fn sub(self, rhs: Counts) -> Counts {
        Counts {
            macs: self.macs - rhs.macs,
            paillier_exps: self.paillier_exps - rhs.paillier_exps,
            paillier_encs: self.paillier_encs - rhs.paillier_encs,
            paillier_decs: self.paillier_decs - rhs.paillier_decs,
        }
    }
}

fn bump(cell: &'static std::thread::LocalKey<Cell<u64>>, n: u64) {
    cell.with(|c| c.set(c.get() + n));
}

pub fn record_macs(n: u64) {
    bump(&MACS, n);
}

pub fn record_paillier_exp() {
    bump(&PAILLIER_EXPS, 1);
}

pub fn record_paillier_enc() {
    bump(&PAILLIER_ENCS, 1);
}

pub fn record_paillier_dec() {
    bump(&PAILLIER_DECS, 1);
}

pub fn snapshot() -> Counts {
    Counts {
        macs: MACS.with(Cell::get),
        paillier_exps: PAILLIER_EXPS.with(Cell::get),
        paillier_encs: PAILLIER_ENCS.with(Cell::get),
        paillier_decs: PAILLIER_DECS.with(Cell::get),
    }
}

/// Runs `f` and returns its output together with the counts it produced.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, Counts) {
    let before = snapshot();
    let out = f();
    (out, snapshot() - before)
}
