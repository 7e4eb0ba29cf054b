use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

use super::{SchemeError, SecurityParams};
use crate::arith::{
    apply_perm_columns, sample_invertible, EntryRange, Matrix, Permutation, Rational,
};

/// Range of the shift vector entries `s`.
const SHIFT_MAX: i64 = 1000;
/// Largest margin added on top of the coordinate bound to form `σ`.
const SIGMA_MARGIN: i64 = 10;
/// Largest weight `w_j`.
const WEIGHT_MAX: i64 = 50;

/// The data owner's long-term secret `(M, s, σ, b, w, π)` plus derived
/// matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnerKey {
    params: SecurityParams,
    coord_bound: i64,
    m: Matrix,
    m_hat: Matrix,
    m_hat_inv: Matrix,
    m_hat_scaled: Vec<Vec<BigInt>>,
    shift: Vec<Rational>,
    sigma: Vec<Rational>,
    bits: Vec<bool>,
    weights: Vec<BigInt>,
    perm: Permutation,
    last_one: usize,
    last_zero: usize,
}

/// Samples a fresh key for plaintext coordinates bounded by `coord_bound`.
pub fn keygen<R: Rng + ?Sized>(
    params: SecurityParams,
    coord_bound: i64,
    rng: &mut R,
) -> Result<OwnerKey, SchemeError> {
    params.validate()?;
    if coord_bound < 0 {
        return Err(SchemeError::InvalidParams(
            "coordinate bound must be non-negative".into(),
        ));
    }
    let eta = params.eta();
    let m = sample_invertible(eta, rng, EntryRange::default())?;
    let shift = (0..=params.dim)
        .map(|_| Rational::from_integer(rng.gen_range(1..=SHIFT_MAX).into()))
        .collect();
    let sigma = (0..params.dim)
        .map(|_| Rational::from_integer((coord_bound + rng.gen_range(1..=SIGMA_MARGIN)).into()))
        .collect();
    let bits = loop {
        let tail: Vec<bool> = (0..params.padding).map(|_| rng.gen()).collect();
        if tail.contains(&true) && tail.contains(&false) {
            break std::iter::repeat_n(true, params.split)
                .chain(tail)
                .collect();
        }
    };
    let weights = (0..params.tail_len())
        .map(|_| BigInt::from(rng.gen_range(1..=WEIGHT_MAX)))
        .collect();
    let perm = Permutation::random(eta, rng);
    OwnerKey::from_parts(params, coord_bound, m, shift, sigma, bits, weights, perm)
}

impl OwnerKey {
    /// Assembles and validates a key from explicit parts.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        params: SecurityParams,
        coord_bound: i64,
        m: Matrix,
        shift: Vec<Rational>,
        sigma: Vec<Rational>,
        bits: Vec<bool>,
        weights: Vec<BigInt>,
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
        if shift.len() != params.dim + 1 {
            return invalid(format!(
                "s has {} entries, expected {}",
                shift.len(),
                params.dim + 1
            ));
        }
        if sigma.len() != params.dim {
            return invalid(format!(
                "sigma has {} entries, expected {}",
                sigma.len(),
                params.dim
            ));
        }
        if bits.len() != params.tail_len() || weights.len() != params.tail_len() {
            return invalid(format!("b and w must have {} entries", params.tail_len()));
        }
        if perm.len() != eta {
            return invalid(format!("pi has {} entries, expected {eta}", perm.len()));
        }
        if !bits[..params.split].iter().all(|&b| b) {
            return Err(SchemeError::InvalidParams(
                "the first c bits of b must be 1".into(),
            ));
        }
        let tail = &bits[params.split..];
        if !tail.contains(&true) || !tail.contains(&false) {
            return Err(SchemeError::InvalidParams(
                "the last epsilon bits of b need at least one 0 and one 1".into(),
            ));
        }
        let bound = Rational::from_integer(coord_bound.into());
        if let Some(i) = sigma.iter().position(|s| *s <= bound) {
            return invalid(format!(
                "sigma[{i}] does not exceed the coordinate bound {coord_bound}"
            ));
        }
        let last_one = bits.iter().rposition(|&b| b).expect("tail holds a 1");
        let last_zero = bits.iter().rposition(|&b| !b).expect("tail holds a 0");
        if weights[last_one].is_zero() || weights[last_zero].is_zero() {
            return invalid("normalizer weights must be nonzero".into());
        }
        let m_hat = apply_perm_columns(&m, &perm.inverse())?;
        let m_hat_inv = m_hat
            .invert()
            .map_err(|_| SchemeError::InvalidKey("M is singular".into()))?;
        let m_hat_scaled = m_hat
            .to_integers(&BigInt::from(params.matrix_scale))
            .ok_or_else(|| {
                SchemeError::InvalidKey(format!(
                    "matrix_scale {} does not make M integral",
                    params.matrix_scale
                ))
            })?;
        Ok(Self {
            params,
            coord_bound,
            m,
            m_hat,
            m_hat_inv,
            m_hat_scaled,
            shift,
            sigma,
            bits,
            weights,
            perm,
            last_one,
            last_zero,
        })
    }

    pub fn params(&self) -> &SecurityParams {
        &self.params
    }

    pub fn coord_bound(&self) -> i64 {
        self.coord_bound
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    /// `M` with `π` fused into its columns.
    pub fn m_hat(&self) -> &Matrix {
        &self.m_hat
    }

    pub fn m_hat_inv(&self) -> &Matrix {
        &self.m_hat_inv
    }

    /// `matrix_scale · M̂` as integers, the exponents used on Paillier ciphertexts.
    pub fn m_hat_scaled(&self) -> &[Vec<BigInt>] {
        &self.m_hat_scaled
    }

    pub fn shift(&self) -> &[Rational] {
        &self.shift
    }

    pub fn sigma(&self) -> &[Rational] {
        &self.sigma
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn weights(&self) -> &[BigInt] {
        &self.weights
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    /// Position of the last 1 in `b` (the `nom_q` slot).
    pub fn last_one(&self) -> usize {
        self.last_one
    }

    /// Position of the last 0 in `b` (the `nom_p` slot).
    pub fn last_zero(&self) -> usize {
        self.last_zero
    }

    /// Largest query coordinate magnitude the blinding guard accounts for:
    /// queries may range over the box dominated by `σ`, not just the data bound.
    pub fn query_bound(&self) -> i64 {
        let sigma_max = self.sigma.iter().max().map(|s| s.floor().to_integer());
        let sigma_max = sigma_max
            .and_then(|s| num_traits::ToPrimitive::to_i64(&s))
            .unwrap_or(0);
        self.coord_bound.max(sigma_max)
    }

    /// `Σ σ_j²`, the bound `β2 / β1` must exceed.
    pub fn sigma_norm_sq(&self) -> Rational {
        self.sigma.iter().map(|s| s * s).sum()
    }

    /// `‖w‖²`.
    pub fn weight_norm_sq(&self) -> BigInt {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// `b` rendered as a string of `0`/`1`.
    pub fn bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn generated_keys_satisfy_invariants() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for d in 2..6 {
            let params = SecurityParams::new(d, 2, 3);
            let key = keygen(params.clone(), 100, &mut rng).unwrap();
            assert_eq!(key.m().rows(), params.eta());
            assert!(key.m_hat().mul(key.m_hat_inv()).unwrap().is_identity());
            assert!(key.bits()[..2].iter().all(|&b| b));
            assert!(key
                .sigma()
                .iter()
                .all(|s| *s > Rational::from_integer(100.into())));
            assert!(!key.bits()[key.last_zero()] && key.bits()[key.last_one()]);
        }
    }

    #[test]
    fn rejects_all_ones_tail() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let key = keygen(SecurityParams::new(2, 2, 2), 10, &mut rng).unwrap();
        let err = OwnerKey::from_parts(
            key.params().clone(),
            10,
            key.m().clone(),
            key.shift().to_vec(),
            key.sigma().to_vec(),
            vec![true; 4],
            key.weights().to_vec(),
            key.perm().clone(),
        );
        assert!(matches!(err, Err(SchemeError::InvalidParams(_))));
    }

    #[test]
    fn rejects_sigma_at_bound() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let key = keygen(SecurityParams::new(2, 2, 2), 10, &mut rng).unwrap();
        let err = OwnerKey::from_parts(
            key.params().clone(),
            10,
            key.m().clone(),
            key.shift().to_vec(),
            vec![Rational::from_integer(10.into()); 2],
            key.bits().to_vec(),
            key.weights().to_vec(),
            key.perm().clone(),
        );
        assert!(matches!(err, Err(SchemeError::InvalidKey(_))));
    }
}
