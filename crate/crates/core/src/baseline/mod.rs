//! The earlier ASPE-style scheme, reproduced as the target for the attacks.
//!
//! Tuples become `p̂ = (s − 2p, s_{d+1} + ‖p‖², τ, v)` and are multiplied by
//! `M̂⁻¹`; a query becomes `β_q · M̂ · (q, 1, r, 0)`. Both the long-term `τ`
//! and the literal zero padding are deliberate: they are what the attacks
//! exploit.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{
    apply_perm_columns, round_to_integer, sample_invertible, vec_mat_mul, EntryRange, Matrix,
    Permutation, Rational,
};
use crate::knn::{self, EncTuple};
use crate::paillier::{Ciphertext, PublicKey};
use crate::proposed::{check_bounds, BlindedQuery, CspQuery, QueryRequest, SchemeError};

/// Largest randomizer in `r^(q)` and `β_q`.
pub const QUERY_RAND_MAX: i64 = 1 << 16;
const SHIFT_MAX: i64 = 1000;
const PAD_MAX: i64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineMode {
    /// Integer key entries and ephemerals, `M̂` used as-is for exponents.
    #[default]
    Integerized,
    /// One-decimal entries; `M̂` is scaled by 10 for exponents.
    Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineParams {
    #[serde(rename = "d")]
    pub dim: usize,
    #[serde(rename = "c")]
    pub split: usize,
    #[serde(rename = "epsilon")]
    pub padding: usize,
    pub mode: BaselineMode,
}

impl BaselineParams {
    pub fn new(dim: usize, split: usize, padding: usize) -> Self {
        Self {
            dim,
            split,
            padding,
            mode: BaselineMode::Integerized,
        }
    }

    /// `η = d + 1 + c + ε`.
    pub fn eta(&self) -> usize {
        self.dim + 1 + self.split + self.padding
    }

    /// Factor turning `M̂` into integer exponents.
    pub fn matrix_scale(&self) -> u32 {
        match self.mode {
            BaselineMode::Integerized => 1,
            BaselineMode::Decimal => 10,
        }
    }

    fn entry_range(&self) -> EntryRange {
        match self.mode {
            BaselineMode::Integerized => EntryRange::integers(1, 99),
            BaselineMode::Decimal => EntryRange::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        if self.dim == 0 || self.split == 0 || self.padding == 0 {
            return Err(SchemeError::InvalidParams(
                "d, c and epsilon must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `(M, s, τ, π)` plus derived matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineKey {
    params: BaselineParams,
    coord_bound: i64,
    m: Matrix,
    m_hat: Matrix,
    m_hat_inv: Matrix,
    m_hat_scaled: Vec<Vec<BigInt>>,
    shift: Vec<Rational>,
    tau: Vec<Rational>,
    perm: Permutation,
}

/// Per-query secrets `β_q` and `r^(q)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineQueryEphemerals {
    pub beta: BigInt,
    pub r: Vec<BigInt>,
}

impl BaselineQueryEphemerals {
    pub fn sample<R: Rng + ?Sized>(key: &BaselineKey, rng: &mut R) -> Self {
        Self {
            beta: rng.gen_range(1..=QUERY_RAND_MAX).into(),
            r: (0..key.params.split)
                .map(|_| rng.gen_range(1..=QUERY_RAND_MAX).into())
                .collect(),
        }
    }
}

pub fn baseline_keygen<R: Rng + ?Sized>(
    params: BaselineParams,
    coord_bound: i64,
    rng: &mut R,
) -> Result<BaselineKey, SchemeError> {
    params.validate()?;
    let eta = params.eta();
    let m = sample_invertible(eta, rng, params.entry_range())?;
    let shift = (0..=params.dim)
        .map(|_| Rational::from_integer(rng.gen_range(1..=SHIFT_MAX).into()))
        .collect();
    let tau = (0..params.split)
        .map(|_| Rational::from_integer(rng.gen_range(1..=PAD_MAX).into()))
        .collect();
    let perm = Permutation::random(eta, rng);
    BaselineKey::from_parts(params, coord_bound, m, shift, tau, perm)
}

impl BaselineKey {
    pub fn from_parts(
        params: BaselineParams,
        coord_bound: i64,
        m: Matrix,
        shift: Vec<Rational>,
        tau: Vec<Rational>,
        perm: Permutation,
    ) -> Result<Self, SchemeError> {
        params.validate()?;
        let eta = params.eta();
        let invalid = |msg: String| Err(SchemeError::InvalidKey(msg));
        if m.rows() != eta || m.cols() != eta {
            return invalid(format!(
                "M is {}x{}, expected {eta}x{eta}",
                m.rows(),
                m.cols()
            ));
        }
        if shift.len() != params.dim + 1 || tau.len() != params.split || perm.len() != eta {
            return invalid("s, tau or pi has the wrong length".into());
        }
        let m_hat = apply_perm_columns(&m, &perm.inverse())?;
        let m_hat_inv = m_hat
            .invert()
            .map_err(|_| SchemeError::InvalidKey("M is singular".into()))?;
        let m_hat_scaled = m_hat
            .to_integers(&BigInt::from(params.matrix_scale()))
            .ok_or_else(|| {
                SchemeError::InvalidKey("M entries do not fit the mode's scale".into())
            })?;
        Ok(Self {
            params,
            coord_bound,
            m,
            m_hat,
            m_hat_inv,
            m_hat_scaled,
            shift,
            tau,
            perm,
        })
    }

    pub fn params(&self) -> &BaselineParams {
        &self.params
    }

    pub fn coord_bound(&self) -> i64 {
        self.coord_bound
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    pub fn m_hat(&self) -> &Matrix {
        &self.m_hat
    }

    pub fn m_hat_inv(&self) -> &Matrix {
        &self.m_hat_inv
    }

    pub fn m_hat_scaled(&self) -> &[Vec<BigInt>] {
        &self.m_hat_scaled
    }

    pub fn shift(&self) -> &[Rational] {
        &self.shift
    }

    pub fn tau(&self) -> &[Rational] {
        &self.tau
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    /// Column `j` of `matrix_scale · M̂`.
    pub fn scaled_column(&self, j: usize) -> Vec<BigInt> {
        self.m_hat_scaled.iter().map(|row| row[j].clone()).collect()
    }

    /// The query-side plaintext `q̂ = (q, 1, r, 0_ε)`.
    pub fn lift_query(&self, q: &[BigInt], r: &[BigInt]) -> Vec<BigInt> {
        let mut out = q.to_vec();
        out.push(BigInt::from(1));
        out.extend(r.iter().cloned());
        out.extend(std::iter::repeat_n(BigInt::from(0), self.params.padding));
        out
    }

    /// `β · matrix_scale · M̂ · q̂`, computed in the clear.
    pub fn plain_query(&self, q: &[BigInt], eph: &BaselineQueryEphemerals) -> Vec<BigInt> {
        let lifted = self.lift_query(q, &eph.r);
        self.m_hat_scaled
            .iter()
            .map(|row| &eph.beta * row.iter().zip(&lifted).map(|(m, x)| m * x).sum::<BigInt>())
            .collect()
    }
}

/// `p̂ = (s − 2p, s_{d+1} + ‖p‖², τ, v)`.
pub fn baseline_augment(key: &BaselineKey, p: &[i64], v: &[Rational]) -> Vec<Rational> {
    let d = key.params.dim;
    let norm: i128 = p.iter().map(|&x| (x as i128) * (x as i128)).sum();
    let mut out: Vec<Rational> = p
        .iter()
        .zip(&key.shift)
        .map(|(&x, s)| s - Rational::from_integer(BigInt::from(2 * x as i128)))
        .collect();
    out.push(&key.shift[d] + Rational::from_integer(norm.into()));
    out.extend(key.tau.iter().cloned());
    out.extend(v.iter().cloned());
    out
}

pub fn baseline_encrypt_with(
    key: &BaselineKey,
    index: usize,
    p: &[i64],
    v: &[Rational],
) -> Result<EncTuple, SchemeError> {
    if p.len() != key.params.dim {
        return Err(SchemeError::DimensionMismatch {
            expected: key.params.dim,
            actual: p.len(),
        });
    }
    if v.len() != key.params.padding {
        return Err(SchemeError::DimensionMismatch {
            expected: key.params.padding,
            actual: v.len(),
        });
    }
    check_bounds(p, key.coord_bound)?;
    let coords = vec_mat_mul(&baseline_augment(key, p, v), &key.m_hat_inv)?;
    Ok(EncTuple { index, coords })
}

pub fn baseline_encrypt_tuple<R: Rng + ?Sized>(
    key: &BaselineKey,
    index: usize,
    p: &[i64],
    rng: &mut R,
) -> Result<EncTuple, SchemeError> {
    let v: Vec<Rational> = (0..key.params.padding)
        .map(|_| Rational::from_integer(rng.gen_range(1..=PAD_MAX).into()))
        .collect();
    baseline_encrypt_with(key, index, p, &v)
}

pub fn baseline_encrypt_database<R: Rng + ?Sized>(
    key: &BaselineKey,
    points: &[Vec<i64>],
    rng: &mut R,
) -> Result<Vec<EncTuple>, SchemeError> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| baseline_encrypt_tuple(key, i, p, rng))
        .collect()
}

pub fn baseline_decrypt_tuple(key: &BaselineKey, ct: &EncTuple) -> Result<Vec<i64>, SchemeError> {
    let eta = key.params.eta();
    if ct.coords.len() != eta {
        return Err(SchemeError::DimensionMismatch {
            expected: eta,
            actual: ct.coords.len(),
        });
    }
    let lifted = vec_mat_mul(&ct.coords, &key.m_hat)?;
    let two = Rational::from_integer(2.into());
    key.shift[..key.params.dim]
        .iter()
        .zip(&lifted)
        .map(|(s, p)| {
            round_to_integer(&((s - p) / &two))
                .to_i64()
                .ok_or(SchemeError::DecryptionOverflow)
        })
        .collect()
}

/// Homomorphically computes `E(β · matrix_scale · M̂ · q̂)` from `E(q)`.
pub fn baseline_blind_query_with(
    key: &BaselineKey,
    req: &QueryRequest,
    eph: &BaselineQueryEphemerals,
    rng: &mut (impl Rng + ?Sized),
) -> Result<BlindedQuery, SchemeError> {
    let d = key.params.dim;
    if req.coords.len() != d {
        return Err(SchemeError::DimensionMismatch {
            expected: d,
            actual: req.coords.len(),
        });
    }
    if eph.r.len() != key.params.split {
        return Err(SchemeError::DimensionMismatch {
            expected: key.params.split,
            actual: eph.r.len(),
        });
    }
    let pk: &PublicKey = &req.public_key;
    let constant_part: Vec<BigInt> = {
        let zeros = vec![BigInt::from(0); d];
        key.plain_query(&zeros, eph)
    };
    let coords = key
        .m_hat_scaled
        .iter()
        .zip(&constant_part)
        .map(|(row, k)| {
            let init: Ciphertext = pk.encrypt(k, rng)?;
            Ok(row[..d].iter().zip(&req.coords).fold(init, |acc, (m, ct)| {
                pk.add(&acc, &pk.scale(ct, &(&eph.beta * m)))
            }))
        })
        .collect::<Result<Vec<_>, SchemeError>>()?;
    Ok(BlindedQuery { coords })
}

pub fn baseline_blind_query<R: Rng + ?Sized>(
    key: &BaselineKey,
    req: &QueryRequest,
    rng: &mut R,
) -> Result<(BlindedQuery, BaselineQueryEphemerals), SchemeError> {
    let eph = BaselineQueryEphemerals::sample(key, rng);
    let bq = baseline_blind_query_with(key, req, &eph, rng)?;
    Ok((bq, eph))
}

pub fn baseline_knn(edb: &[EncTuple], q: &CspQuery, k: usize) -> Result<Vec<usize>, SchemeError> {
    Ok(knn::top_k(edb, &q.coords, k)?)
}
