use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{check_bounds, AlphaForm, EphemeralSource, OwnerKey, SchemeError};
use crate::arith::{round_to_decimals, round_to_integer, vec_mat_mul, Rational};
use crate::knn::EncTuple;

/// Per-tuple randomness: the padding vector `τ`, the mask `α` and the
/// offsets `t` it was derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EphemeralTupleSecrets {
    pub tau: Vec<Rational>,
    pub alpha: Rational,
    pub offsets: Vec<Rational>,
}

/// Builds `τ`: weights where `b_j = 1`, fresh values where `b_j = 0`, and a
/// normalizer in the last 0 slot so that `w · τ = 0`.
pub fn gen_tau<S: EphemeralSource + ?Sized>(key: &OwnerKey, src: &mut S) -> Vec<Rational> {
    let weights = key.weights();
    let mut tau: Vec<Rational> = key
        .bits()
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(j, (&bit, w))| {
            if bit {
                Rational::from_integer(w.clone())
            } else if j == key.last_zero() {
                Rational::default()
            } else {
                src.tau_free()
            }
        })
        .collect();
    let partial: Rational = tau
        .iter()
        .zip(weights)
        .map(|(t, w)| t * Rational::from_integer(w.clone()))
        .sum();
    let last = key.last_zero();
    tau[last] = -partial / Rational::from_integer(weights[last].clone());
    tau
}

/// Draws `τ` and `α` for one tuple.
pub fn tuple_secrets<S: EphemeralSource + ?Sized>(
    key: &OwnerKey,
    src: &mut S,
) -> EphemeralTupleSecrets {
    let tau = gen_tau(key, src);
    let form = key.params().alpha_form;
    let offsets = src.alpha_offsets(key.sigma(), form);
    let alpha = match form {
        AlphaForm::PerCoordinate => key
            .sigma()
            .iter()
            .zip(&offsets)
            .map(|(s, t)| {
                let gap = s - t;
                &gap * &gap
            })
            .sum(),
        AlphaForm::Scalar => {
            let max = key.sigma().iter().max().cloned().unwrap_or_default();
            let gap = max - &offsets[0];
            &gap * &gap
        }
    };
    EphemeralTupleSecrets {
        tau,
        alpha,
        offsets,
    }
}

/// The lifted plaintext `p̂ = (s − 2p, s_{d+1} + ‖p‖², α, τ)`.
pub fn augment(key: &OwnerKey, p: &[i64], secrets: &EphemeralTupleSecrets) -> Vec<Rational> {
    let s = key.shift();
    let d = key.params().dim;
    let norm: i128 = p.iter().map(|&x| (x as i128) * (x as i128)).sum();
    let mut out = Vec::with_capacity(key.params().eta());
    out.extend(
        p.iter()
            .zip(s)
            .map(|(&x, s)| s - Rational::from_integer(BigInt::from(2 * x as i128))),
    );
    out.push(&s[d] + Rational::from_integer(BigInt::from(norm)));
    out.push(secrets.alpha.clone());
    out.extend(secrets.tau.iter().cloned());
    out
}

/// Encrypts `p` with caller-supplied ephemerals.
pub fn encrypt_with(
    key: &OwnerKey,
    index: usize,
    p: &[i64],
    secrets: &EphemeralTupleSecrets,
) -> Result<EncTuple, SchemeError> {
    if p.len() != key.params().dim {
        return Err(SchemeError::DimensionMismatch {
            expected: key.params().dim,
            actual: p.len(),
        });
    }
    check_bounds(p, key.coord_bound())?;
    let mut coords = vec_mat_mul(&augment(key, p, secrets), key.m_hat_inv())?;
    if let Some(places) = key.params().cipher_decimals {
        coords = coords
            .iter()
            .map(|c| round_to_decimals(c, places))
            .collect();
    }
    Ok(EncTuple { index, coords })
}

pub fn encrypt_tuple_traced<S: EphemeralSource + ?Sized>(
    key: &OwnerKey,
    index: usize,
    p: &[i64],
    src: &mut S,
) -> Result<(EncTuple, EphemeralTupleSecrets), SchemeError> {
    let secrets = tuple_secrets(key, src);
    let ct = encrypt_with(key, index, p, &secrets)?;
    Ok((ct, secrets))
}

pub fn encrypt_tuple<S: EphemeralSource + ?Sized>(
    key: &OwnerKey,
    index: usize,
    p: &[i64],
    src: &mut S,
) -> Result<EncTuple, SchemeError> {
    encrypt_tuple_traced(key, index, p, src).map(|(ct, _)| ct)
}

/// Encrypts every row, indexed by position.
pub fn encrypt_database<S: EphemeralSource + ?Sized>(
    key: &OwnerKey,
    points: &[Vec<i64>],
    src: &mut S,
) -> Result<Vec<EncTuple>, SchemeError> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| encrypt_tuple(key, i, p, src))
        .collect()
}

/// Like [`encrypt_database`] but spreads the matrix products over `jobs`
/// threads. Ephemerals are drawn up front in row order, so the output is
/// identical to the sequential version for the same source. Operation
/// counters only see work done on the calling thread.
pub fn encrypt_database_parallel<S: EphemeralSource + ?Sized>(
    key: &OwnerKey,
    points: &[Vec<i64>],
    src: &mut S,
    jobs: usize,
) -> Result<Vec<EncTuple>, SchemeError> {
    let secrets: Vec<_> = points.iter().map(|_| tuple_secrets(key, src)).collect();
    let jobs = jobs.max(1);
    if jobs == 1 || points.len() < 2 {
        return points
            .iter()
            .zip(&secrets)
            .enumerate()
            .map(|(i, (p, s))| encrypt_with(key, i, p, s))
            .collect();
    }
    let chunk = points.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .zip(secrets.chunks(chunk))
            .enumerate()
            .map(|(c, (pts, secs))| {
                scope.spawn(move || {
                    pts.iter()
                        .zip(secs)
                        .enumerate()
                        .map(|(i, (p, s))| encrypt_with(key, c * chunk + i, p, s))
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(points.len());
        for h in handles {
            out.extend(h.join().expect("encryption worker panicked")?);
        }
        Ok(out)
    })
}

/// Recovers the plaintext as `p_i = (s_i − p̂_i) / 2` with `p̂ = p′ · M̂`.
///
/// A ciphertext produced under a different key decrypts to unrelated
/// numbers; nothing here can detect that.
pub fn decrypt_tuple(key: &OwnerKey, ct: &EncTuple) -> Result<Vec<i64>, SchemeError> {
    let eta = key.params().eta();
    if ct.coords.len() != eta {
        return Err(SchemeError::DimensionMismatch {
            expected: eta,
            actual: ct.coords.len(),
        });
    }
    let lifted = vec_mat_mul(&ct.coords, key.m_hat())?;
    let two = Rational::from_integer(2.into());
    key.shift()[..key.params().dim]
        .iter()
        .zip(&lifted)
        .map(|(s, p)| {
            round_to_integer(&((s - p) / &two))
                .to_i64()
                .ok_or(SchemeError::DecryptionOverflow)
        })
        .collect()
}
