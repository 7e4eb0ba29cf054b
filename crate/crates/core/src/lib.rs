//! Secure k-nearest-neighbour search over outsourced encrypted databases.
//!
//! The crate contains two matrix-based encryption schemes for k-NN queries:
//!
//! * [`proposed`]: the enhanced scheme whose query-blinding randomness is a
//!   function of the query point, with a Paillier-protected query protocol.
//! * [`baseline`]: the earlier ASPE-style scheme, kept as a faithful attack
//!   target.
//!
//! Around them sit the supporting layers: [`paillier`] (additively
//! homomorphic encryption with signed plaintexts), [`arith`] (exact rational
//! linear algebra), [`attacks`] (key, database and query recovery against the
//! baseline plus resistance probes against the proposed scheme) and
//! [`harness`] (three-party protocol simulation, operation counters, CSV
//! ingestion and benchmarking).

pub mod arith;
pub mod attacks;
pub mod baseline;
pub mod harness;
pub mod io;
pub mod knn;
pub mod metrics;
pub mod paillier;
pub mod proposed;
pub mod toy;

pub use arith::{Matrix, Permutation, Rational};
pub use knn::EncTuple;
