use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_bounds, EphemeralSource, OwnerKey, SchemeError};
use crate::arith::{serde_bigint_vec, Permutation, Rational};
use crate::knn::{self, EncTuple};
use crate::metrics;
use crate::paillier::{Ciphertext, PrivateKey, PublicKey};

/// QU → DO: the element-wise Paillier encryption of the query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub coords: Vec<Ciphertext>,
    pub public_key: PublicKey,
}

/// DO → QU: the blinded query `a^(q)`, still under the QU's Paillier key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlindedQuery {
    pub coords: Vec<Ciphertext>,
}

/// QU → CSP: the decrypted query `q′`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspQuery {
    #[serde(with = "serde_bigint_vec")]
    pub coords: Vec<BigInt>,
}

/// Whether the DO answers a request at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryPolicy {
    #[default]
    AllowAll,
    DenyAll,
}

impl QueryPolicy {
    pub fn admits(&self, _req: &QueryRequest) -> bool {
        matches!(self, QueryPolicy::AllowAll)
    }
}

/// Everything the DO drew while blinding one query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EphemeralQuerySecrets {
    pub beta1: BigInt,
    pub beta2: BigInt,
    /// The coordinate shuffle `v`.
    pub shuffle: Permutation,
    /// Raw randomizers per `r` slot: set for the `c` block slots and for
    /// every `b_j = 1` slot except the last.
    pub slot_rands: Vec<Option<BigInt>>,
    /// `D`, the factor that keeps `nom_q` integral.
    pub block_scale: BigInt,
    /// The encrypted `r` block (`r^enc`).
    pub r_enc: Vec<Ciphertext>,
}

impl EphemeralQuerySecrets {
    /// Scale shared by every `r` entry: `query_scale · D`.
    pub fn r_scale(&self, key: &OwnerKey) -> BigInt {
        BigInt::from(key.params().query_scale) * &self.block_scale
    }

    /// Plaintext `r^dec` for the query `q`, computed without Paillier.
    pub fn r_dec(&self, key: &OwnerKey, q: &[i64]) -> Vec<BigInt> {
        let plan = RPlan::new(key, self);
        let blocks = block_sums_plain(key, &self.shuffle, q);
        plan.plain(&blocks)
    }

    /// Plaintext `q′ = matrix_scale · M̂ · (qS·β2·q, qS·β2, qS·β1, r^dec)`.
    pub fn expected_query(&self, key: &OwnerKey, q: &[i64]) -> Vec<BigInt> {
        let bar = q_bar_plain(key, self, q);
        key.m_hat_scaled()
            .iter()
            .map(|row| row.iter().zip(&bar).map(|(m, x)| m * x).sum())
            .collect()
    }
}

impl QueryRequest {
    /// Encrypts arbitrary integer coordinates with no bound check.
    pub fn encrypt<R: Rng + ?Sized>(
        q: &[BigInt],
        pk: &PublicKey,
        rng: &mut R,
    ) -> Result<Self, SchemeError> {
        let coords = q
            .iter()
            .map(|x| pk.encrypt(x, rng))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            coords,
            public_key: pk.clone(),
        })
    }
}

/// Encrypts the query coordinates under the QU's own key.
pub fn qu_build_request<R: Rng + ?Sized>(
    q: &[i64],
    coord_bound: i64,
    pk: &PublicKey,
    rng: &mut R,
) -> Result<QueryRequest, SchemeError> {
    check_bounds(q, coord_bound)?;
    let q: Vec<BigInt> = q.iter().map(|&x| BigInt::from(x)).collect();
    QueryRequest::encrypt(&q, pk, rng)
}

/// Decrypts `a^(q)` into the CSP query.
pub fn qu_unwrap(sk: &PrivateKey, bq: &BlindedQuery) -> Result<CspQuery, SchemeError> {
    let coords = bq
        .coords
        .iter()
        .map(|c| sk.decrypt(c))
        .collect::<Result<_, _>>()?;
    Ok(CspQuery { coords })
}

pub fn csp_score(ct: &EncTuple, q: &CspQuery) -> Result<Rational, SchemeError> {
    if ct.coords.len() != q.coords.len() {
        return Err(SchemeError::DimensionMismatch {
            expected: q.coords.len(),
            actual: ct.coords.len(),
        });
    }
    Ok(knn::score(ct, &q.coords)?)
}

pub fn csp_knn(edb: &[EncTuple], q: &CspQuery, k: usize) -> Result<Vec<usize>, SchemeError> {
    if let Some(t) = edb.iter().find(|t| t.coords.len() != q.coords.len()) {
        return Err(SchemeError::DimensionMismatch {
            expected: q.coords.len(),
            actual: t.coords.len(),
        });
    }
    Ok(knn::top_k(edb, &q.coords, k)?)
}

/// Block `j` of the shuffled coordinates: `⌊d/c⌋` entries each, the last
/// block running to the end.
fn block_ranges(d: usize, c: usize) -> Vec<std::ops::Range<usize>> {
    let size = d / c;
    (0..c)
        .map(|j| j * size..if j + 1 == c { d } else { (j + 1) * size })
        .collect()
}

fn block_sums_plain(key: &OwnerKey, shuffle: &Permutation, q: &[i64]) -> Vec<BigInt> {
    block_ranges(key.params().dim, key.params().split)
        .into_iter()
        .map(|r| r.map(|t| BigInt::from(q[shuffle.image(t)])).sum())
        .collect()
}

/// How each `r` slot is formed from the block sums `B_j`:
/// `r_j = Σ_i coeff[j][i] · B_i + constant[j]`.
struct RPlan {
    coeffs: Vec<Vec<BigInt>>,
    constants: Vec<BigInt>,
}

impl RPlan {
    fn new(key: &OwnerKey, secrets: &EphemeralQuerySecrets) -> Self {
        let c = key.params().split;
        let qs = BigInt::from(key.params().query_scale);
        let d_scale = &secrets.block_scale;
        let weights = key.weights();
        let last = key.last_one();
        let mut coeffs = vec![vec![BigInt::zero(); c]; weights.len()];
        let mut constants = vec![BigInt::zero(); weights.len()];
        // Σ_{j≠L} w_j r_j = Σ_i A_i B_i + K, all before the D scale.
        let mut a = vec![BigInt::zero(); c];
        let mut k = BigInt::zero();
        for (j, bit) in key.bits().iter().enumerate() {
            if j == last {
                continue;
            }
            let w = &weights[j];
            if j < c {
                let e = secrets.slot_rands[j].as_ref().expect("block rand");
                coeffs[j][j] = -(d_scale * &qs * e);
                a[j] = &qs * e * w;
            } else if *bit {
                let e = secrets.slot_rands[j].as_ref().expect("slot rand");
                constants[j] = -(d_scale * &qs * e);
                k += &qs * e * w;
            } else {
                constants[j] = -(d_scale * &qs * w);
                k += &qs * w * w;
            }
        }
        let w_last = &weights[last];
        coeffs[last] = a.iter().map(|a| d_scale * a / w_last).collect();
        constants[last] = d_scale * &k / w_last;
        Self { coeffs, constants }
    }

    fn plain(&self, blocks: &[BigInt]) -> Vec<BigInt> {
        self.coeffs
            .iter()
            .zip(&self.constants)
            .map(|(row, k)| row.iter().zip(blocks).map(|(a, b)| a * b).sum::<BigInt>() + k)
            .collect()
    }
}

/// Smallest `D > 0` making `D · A_i / W` and `D · K / W` integers.
fn normalizer_scale(key: &OwnerKey, slot_rands: &[Option<BigInt>]) -> BigInt {
    let c = key.params().split;
    let qs = BigInt::from(key.params().query_scale);
    let weights = key.weights();
    let last = key.last_one();
    let mut g = weights[last].abs();
    let mut k = BigInt::zero();
    for (j, bit) in key.bits().iter().enumerate() {
        if j == last {
            continue;
        }
        let w = &weights[j];
        if j < c {
            g = g.gcd(&(&qs * slot_rands[j].as_ref().expect("block rand") * w));
        } else if *bit {
            k += &qs * slot_rands[j].as_ref().expect("slot rand") * w;
        } else {
            k += &qs * w * w;
        }
    }
    g = g.gcd(&k);
    weights[last].abs() / g
}

fn q_bar_plain(key: &OwnerKey, secrets: &EphemeralQuerySecrets, q: &[i64]) -> Vec<BigInt> {
    let qs = BigInt::from(key.params().query_scale);
    let mut bar: Vec<BigInt> = q.iter().map(|&x| &qs * &secrets.beta2 * x).collect();
    bar.push(&qs * &secrets.beta2);
    bar.push(&qs * &secrets.beta1);
    bar.extend(secrets.r_dec(key, q));
    bar
}

/// Upper bound on `|q̄_j|` for any query within [`OwnerKey::query_bound`].
fn q_bar_bounds(key: &OwnerKey, plan: &RPlan, secrets: &EphemeralQuerySecrets) -> Vec<BigInt> {
    let d = key.params().dim;
    let qs = BigInt::from(key.params().query_scale);
    let bound = BigInt::from(key.query_bound().unsigned_abs());
    let block_bounds: Vec<BigInt> = block_ranges(d, key.params().split)
        .into_iter()
        .map(|r| BigInt::from(r.len()) * &bound)
        .collect();
    let mut out = vec![&qs * secrets.beta2.abs() * &bound; d];
    out.push(&qs * secrets.beta2.abs());
    out.push(&qs * secrets.beta1.abs());
    out.extend(plan.coeffs.iter().zip(&plan.constants).map(|(row, k)| {
        row.iter()
            .zip(&block_bounds)
            .map(|(a, b)| a.abs() * b)
            .sum::<BigInt>()
            + k.abs()
    }));
    out
}

/// The DO's half of the query protocol: folds `β1`, `β2`, `r^enc` and `M̂`
/// into the encrypted query without learning it.
pub fn do_blind_query<S: EphemeralSource + ?Sized>(
    key: &OwnerKey,
    req: &QueryRequest,
    policy: QueryPolicy,
    src: &mut S,
) -> Result<(BlindedQuery, EphemeralQuerySecrets), SchemeError> {
    if !policy.admits(req) {
        return Err(SchemeError::Refused);
    }
    let params = key.params();
    let (d, c) = (params.dim, params.split);
    if req.coords.len() != d {
        return Err(SchemeError::DimensionMismatch {
            expected: d,
            actual: req.coords.len(),
        });
    }
    let pk = &req.public_key;
    if let Some(i) = req.coords.iter().position(|ct| !pk.is_valid_ciphertext(ct)) {
        return Err(SchemeError::InvalidParams(format!(
            "request ciphertext {i} is not valid"
        )));
    }

    let beta1 = src.beta1();
    let sigma_sq = key.sigma_norm_sq();
    let beta2 = src.beta2(&beta1, &sigma_sq);
    if Rational::from_integer(beta2.clone()) <= Rational::from_integer(beta1.clone()) * &sigma_sq {
        log::warn!("beta2 = {beta2} does not exceed beta1 * |sigma|^2; ranking may be wrong");
    }
    let shuffle = Permutation::new(src.coordinate_shuffle(d))?;
    if shuffle.len() != d {
        return Err(SchemeError::DimensionMismatch {
            expected: d,
            actual: shuffle.len(),
        });
    }
    let slot_rands: Vec<Option<BigInt>> = key
        .bits()
        .iter()
        .enumerate()
        .map(|(j, &bit)| (j < c || (bit && j != key.last_one())).then(|| src.query_rand()))
        .collect();
    let block_scale = normalizer_scale(key, &slot_rands);
    let mut secrets = EphemeralQuerySecrets {
        beta1,
        beta2,
        shuffle,
        slot_rands,
        block_scale,
        r_enc: Vec::new(),
    };
    let plan = RPlan::new(key, &secrets);

    // Every intermediate and final plaintext must stay inside (−n/2, n/2).
    let bar_bounds = q_bar_bounds(key, &plan, &secrets);
    let final_bound = key
        .m_hat_scaled()
        .iter()
        .map(|row| {
            row.iter()
                .zip(&bar_bounds)
                .map(|(m, b)| m.abs() * b)
                .sum::<BigInt>()
        })
        .chain(bar_bounds.iter().cloned())
        .max()
        .unwrap_or_default();
    let half_n = BigInt::from(pk.n().clone()) / 2;
    if final_bound >= half_n {
        return Err(SchemeError::NormalizerOverflow {
            bits: final_bound.bits(),
        });
    }

    let qs = BigInt::from(params.query_scale);
    let encrypt = |m: &BigInt, src: &mut S| pk.encrypt(m, src);
    let mut bar: Vec<Ciphertext> = req
        .coords
        .iter()
        .map(|ct| pk.scale(ct, &(&qs * &secrets.beta2)))
        .collect();
    bar.push(encrypt(&(&qs * &secrets.beta2), src)?);
    bar.push(encrypt(&(&qs * &secrets.beta1), src)?);

    let blocks: Vec<Ciphertext> = block_ranges(d, c)
        .into_iter()
        .map(|r| {
            r.map(|t| &req.coords[secrets.shuffle.image(t)])
                .fold(pk.identity(), |acc, ct| pk.add(&acc, ct))
        })
        .collect();
    let mut r_enc = Vec::with_capacity(params.tail_len());
    for (j, (row, k)) in plan.coeffs.iter().zip(&plan.constants).enumerate() {
        let slot = if j < c {
            pk.scale(&blocks[j], &row[j])
        } else if j == key.last_one() {
            let enc_k = encrypt(k, src)?;
            row.iter()
                .zip(&blocks)
                .fold(enc_k, |acc, (a, b)| pk.add(&acc, &pk.scale(b, a)))
        } else {
            encrypt(k, src)?
        };
        r_enc.push(slot);
    }
    bar.extend(r_enc.iter().cloned());
    secrets.r_enc = r_enc;

    let eta = params.eta();
    metrics::record_macs((eta * eta) as u64);
    let coords = key
        .m_hat_scaled()
        .iter()
        .map(|row| {
            row.iter()
                .zip(&bar)
                .fold(pk.identity(), |acc, (m, ct)| pk.add(&acc, &pk.scale(ct, m)))
        })
        .collect();
    Ok((BlindedQuery { coords }, secrets))
}

/// Paillier work done by one [`do_blind_query`] call:
/// `(exponentiations, encryptions) = (d + 2c + η², ε + 2)`.
pub fn planned_paillier_ops(key: &OwnerKey) -> (u64, u64) {
    let p = key.params();
    let eta = p.eta() as u64;
    (
        (p.dim + 2 * p.split) as u64 + eta * eta,
        p.padding as u64 + 2,
    )
}
