use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::HarnessError;
use crate::baseline::{baseline_blind_query, BaselineKey};
use crate::knn::EncTuple;
use crate::paillier::{self, PrivateKey, PublicKey};
use crate::proposed::{
    csp_knn, do_blind_query, qu_build_request, qu_unwrap, BlindedQuery, CspQuery, EphemeralSource,
    OwnerKey, QueryPolicy, QueryRequest, SchemeError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Party {
    Do,
    Qu,
    Csp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MessageKind {
    QueryRequest,
    BlindedQuery,
    Refusal,
    CspQuery,
    KnnRequest,
    KnnResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub seq: u64,
    pub sender: Party,
    pub receiver: Party,
    pub kind: MessageKind,
    pub payload: Value,
}

/// Where actors post messages. Delivery is synchronous; a networked
/// transport would implement the same trait.
pub trait MessageBus {
    fn send(
        &mut self,
        sender: Party,
        receiver: Party,
        kind: MessageKind,
        payload: Value,
    ) -> &Message;
    fn messages(&self) -> &[Message];
}

#[derive(Debug, Default, Clone)]
pub struct InMemoryBus {
    log: Vec<Message>,
}

impl MessageBus for InMemoryBus {
    fn send(
        &mut self,
        sender: Party,
        receiver: Party,
        kind: MessageKind,
        payload: Value,
    ) -> &Message {
        let seq = self.log.len() as u64;
        self.log.push(Message {
            seq,
            sender,
            receiver,
            kind,
            payload,
        });
        self.log.last().expect("just pushed")
    }

    fn messages(&self) -> &[Message] {
        &self.log
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub session_id: String,
    pub messages: Vec<Message>,
    pub result: Option<Vec<usize>>,
}

impl Transcript {
    /// One JSON object per message.
    pub fn to_jsonl(&self) -> String {
        self.messages
            .iter()
            .map(|m| {
                let mut v = serde_json::to_value(m).expect("messages serialize");
                v["session"] = Value::String(self.session_id.clone());
                v.to_string() + "\n"
            })
            .collect()
    }

    pub fn kinds(&self) -> Vec<MessageKind> {
        self.messages.iter().map(|m| m.kind).collect()
    }

    /// Checks `QueryRequest → (Refusal | BlindedQuery → CspQuery → KnnRequest → KnnResult)`
    /// and strictly increasing sequence numbers.
    pub fn is_well_ordered(&self) -> bool {
        use MessageKind::*;
        let ordered = self.messages.windows(2).all(|w| w[0].seq < w[1].seq);
        let kinds = self.kinds();
        ordered
            && (kinds == [QueryRequest, Refusal]
                || kinds == [QueryRequest, BlindedQuery, CspQuery, KnnRequest, KnnResult])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub k: usize,
    pub policy: QueryPolicy,
    pub paillier_bits: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            k: 1,
            policy: QueryPolicy::AllowAll,
            paillier_bits: 1024,
        }
    }
}

/// Holds a fresh Paillier keypair for the session.
pub struct QueryUser {
    pk: PublicKey,
    sk: PrivateKey,
}

impl QueryUser {
    pub fn new<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<Self, HarnessError> {
        let (pk, sk) = paillier::keygen(bits, rng)?;
        Ok(Self { pk, sk })
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.pk
    }

    pub fn request<R: Rng + ?Sized>(
        &self,
        q: &[i64],
        bound: i64,
        rng: &mut R,
    ) -> Result<QueryRequest, SchemeError> {
        qu_build_request(q, bound, &self.pk, rng)
    }

    pub fn unwrap(&self, bq: &BlindedQuery) -> Result<CspQuery, SchemeError> {
        qu_unwrap(&self.sk, bq)
    }
}

pub struct DataOwner<'a> {
    pub key: &'a OwnerKey,
    pub policy: QueryPolicy,
}

impl DataOwner<'_> {
    pub fn answer<S: EphemeralSource + ?Sized>(
        &self,
        req: &QueryRequest,
        src: &mut S,
    ) -> Result<BlindedQuery, SchemeError> {
        do_blind_query(self.key, req, self.policy, src).map(|(bq, _)| bq)
    }
}

pub struct CloudProvider<'a> {
    pub edb: &'a [EncTuple],
}

impl CloudProvider<'_> {
    pub fn knn(&self, q: &CspQuery, k: usize) -> Result<Vec<usize>, SchemeError> {
        csp_knn(self.edb, q, k)
    }
}

/// Runs one query through QU → DO → QU → CSP → QU and records every message.
pub fn simulate_session<S: EphemeralSource + ?Sized>(
    key: &OwnerKey,
    edb: &[EncTuple],
    query: &[i64],
    config: SessionConfig,
    src: &mut S,
) -> Result<Transcript, HarnessError> {
    let owner = DataOwner {
        key,
        policy: config.policy,
    };
    drive_session(key.query_bound(), edb, query, config, src, |req, src| {
        owner.answer(req, src)
    })
}

/// The same exchange against a baseline data owner.
pub fn simulate_baseline_session<R: Rng + ?Sized>(
    key: &BaselineKey,
    edb: &[EncTuple],
    query: &[i64],
    config: SessionConfig,
    rng: &mut R,
) -> Result<Transcript, HarnessError> {
    drive_session(key.coord_bound(), edb, query, config, rng, |req, rng| {
        if !config.policy.admits(req) {
            return Err(SchemeError::Refused);
        }
        baseline_blind_query(key, req, rng).map(|(bq, _)| bq)
    })
}

fn drive_session<R, F>(
    bound: i64,
    edb: &[EncTuple],
    query: &[i64],
    config: SessionConfig,
    rng: &mut R,
    mut blind: F,
) -> Result<Transcript, HarnessError>
where
    R: Rng + ?Sized,
    F: FnMut(&QueryRequest, &mut R) -> Result<BlindedQuery, SchemeError>,
{
    let session_id = format!("{:016x}", rng.next_u64());
    let mut bus = InMemoryBus::default();
    let qu = QueryUser::new(config.paillier_bits, rng)?;
    let csp = CloudProvider { edb };

    let req = qu.request(query, bound, rng)?;
    bus.send(
        Party::Qu,
        Party::Do,
        MessageKind::QueryRequest,
        serde_json::to_value(&req)?,
    );
    let bq = match blind(&req, rng) {
        Ok(bq) => bq,
        Err(SchemeError::Refused) => {
            bus.send(
                Party::Do,
                Party::Qu,
                MessageKind::Refusal,
                json!({ "reason": "policy" }),
            );
            return Ok(Transcript {
                session_id,
                messages: bus.messages().to_vec(),
                result: None,
            });
        }
        Err(e) => return Err(e.into()),
    };
    bus.send(
        Party::Do,
        Party::Qu,
        MessageKind::BlindedQuery,
        serde_json::to_value(&bq)?,
    );
    let q_prime = qu.unwrap(&bq)?;
    bus.send(
        Party::Qu,
        Party::Csp,
        MessageKind::CspQuery,
        serde_json::to_value(&q_prime)?,
    );
    bus.send(
        Party::Qu,
        Party::Csp,
        MessageKind::KnnRequest,
        json!({ "k": config.k }),
    );
    let result = csp.knn(&q_prime, config.k)?;
    bus.send(
        Party::Csp,
        Party::Qu,
        MessageKind::KnnResult,
        json!({ "indices": result }),
    );
    Ok(Transcript {
        session_id,
        messages: bus.messages().to_vec(),
        result: Some(result),
    })
}
