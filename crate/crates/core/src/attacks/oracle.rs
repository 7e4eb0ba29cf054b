use num_bigint::BigInt;

use super::AttackError;
use crate::baseline::{baseline_blind_query, BaselineKey, BaselineQueryEphemerals};
use crate::paillier::{PrivateKey, PublicKey};
use crate::proposed::{
    do_blind_query, qu_unwrap, EphemeralQuerySecrets, EphemeralSource, OwnerKey, QueryPolicy,
    QueryRequest,
};

/// Query access as a query user sees it: submit a point, get back the
/// decrypted blinded query `q′`.
pub trait QueryOracle {
    fn dim(&self) -> usize;
    fn query(&mut self, q: &[BigInt]) -> Result<Vec<BigInt>, AttackError>;
}

/// A baseline data owner answering through the full Paillier exchange.
pub struct BaselineOracle<'a, R> {
    key: &'a BaselineKey,
    pk: PublicKey,
    sk: PrivateKey,
    rng: R,
    /// Ephemerals behind the most recent answer (harness-side only).
    pub last: Option<BaselineQueryEphemerals>,
}

impl<'a, R: rand::Rng> BaselineOracle<'a, R> {
    pub fn new(key: &'a BaselineKey, pk: PublicKey, sk: PrivateKey, rng: R) -> Self {
        Self {
            key,
            pk,
            sk,
            rng,
            last: None,
        }
    }
}

impl<R: rand::Rng> QueryOracle for BaselineOracle<'_, R> {
    fn dim(&self) -> usize {
        self.key.params().dim
    }

    fn query(&mut self, q: &[BigInt]) -> Result<Vec<BigInt>, AttackError> {
        let req = QueryRequest::encrypt(q, &self.pk, &mut self.rng)?;
        let (bq, eph) = baseline_blind_query(self.key, &req, &mut self.rng)?;
        self.last = Some(eph);
        Ok(qu_unwrap(&self.sk, &bq)?.coords)
    }
}

/// A proposed-scheme data owner answering through the full Paillier exchange.
pub struct ProposedOracle<'a, S> {
    key: &'a OwnerKey,
    pk: PublicKey,
    sk: PrivateKey,
    src: S,
    /// Ephemerals behind the most recent answer (harness-side only).
    pub last: Option<EphemeralQuerySecrets>,
}

impl<'a, S: EphemeralSource> ProposedOracle<'a, S> {
    pub fn new(key: &'a OwnerKey, pk: PublicKey, sk: PrivateKey, src: S) -> Self {
        Self {
            key,
            pk,
            sk,
            src,
            last: None,
        }
    }
}

impl<S: EphemeralSource> QueryOracle for ProposedOracle<'_, S> {
    fn dim(&self) -> usize {
        self.key.params().dim
    }

    fn query(&mut self, q: &[BigInt]) -> Result<Vec<BigInt>, AttackError> {
        let req = QueryRequest::encrypt(q, &self.pk, &mut self.src)?;
        let (bq, secrets) = do_blind_query(self.key, &req, QueryPolicy::AllowAll, &mut self.src)?;
        self.last = Some(secrets);
        Ok(qu_unwrap(&self.sk, &bq)?.coords)
    }
}
