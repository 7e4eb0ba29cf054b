use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::AlphaForm;
use crate::arith::Rational;

/// Upper end of the integer ranges used for `β1` and the query randomizers.
pub const RAND_LIMIT: u64 = 1 << 16;

/// Source of the per-tuple and per-query ephemeral secrets.
///
/// Every method has a random default; scripted sources (the worked-example
/// replay in [`crate::toy`]) override individual draws. The same handle also
/// feeds Paillier encryption, hence the `RngCore` bound.
pub trait EphemeralSource: RngCore {
    /// A free `τ` slot (a `b_j = 0` position other than the last).
    fn tau_free(&mut self) -> Rational {
        sample::tau_free(self)
    }

    /// Offsets `t` with `0 < t_j < σ_j` (per coordinate) or `0 < t < σ_max`.
    fn alpha_offsets(&mut self, sigma: &[Rational], form: AlphaForm) -> Vec<Rational> {
        sample::alpha_offsets(self, sigma, form)
    }

    fn beta1(&mut self) -> BigInt {
        sample::beta1(self)
    }

    /// `β2` strictly above `β1 · sigma_norm_sq`.
    fn beta2(&mut self, beta1: &BigInt, sigma_norm_sq: &Rational) -> BigInt {
        sample::beta2(self, beta1, sigma_norm_sq)
    }

    /// A random permutation of `0..d` used to group query coordinates.
    fn coordinate_shuffle(&mut self, d: usize) -> Vec<usize> {
        sample::coordinate_shuffle(self, d)
    }

    /// A query randomizer before query-scale integerization.
    fn query_rand(&mut self) -> BigInt {
        sample::query_rand(self)
    }
}

impl EphemeralSource for rand_chacha::ChaCha20Rng {}
impl EphemeralSource for rand_chacha::ChaCha8Rng {}
impl EphemeralSource for rand::rngs::StdRng {}

/// The default distributions behind [`EphemeralSource`].
pub mod sample {
    use super::*;

    /// One-decimal value in `[0.1, 100.0]`.
    pub fn tau_free<R: Rng + ?Sized>(rng: &mut R) -> Rational {
        Rational::new(BigInt::from(rng.gen_range(1..=1000)), BigInt::from(10))
    }

    fn below<R: Rng + ?Sized>(rng: &mut R, upper: &Rational) -> Rational {
        upper * Rational::new(BigInt::from(rng.gen_range(1..1000)), BigInt::from(1000))
    }

    pub fn alpha_offsets<R: Rng + ?Sized>(
        rng: &mut R,
        sigma: &[Rational],
        form: AlphaForm,
    ) -> Vec<Rational> {
        match form {
            AlphaForm::PerCoordinate => sigma.iter().map(|s| below(rng, s)).collect(),
            AlphaForm::Scalar => {
                let max = sigma.iter().max().cloned().unwrap_or_default();
                vec![below(rng, &max)]
            }
        }
    }

    pub fn beta1<R: Rng + ?Sized>(rng: &mut R) -> BigInt {
        BigInt::from(rng.gen_range(1..=RAND_LIMIT))
    }

    pub fn beta2<R: Rng + ?Sized>(rng: &mut R, beta1: &BigInt, sigma_norm_sq: &Rational) -> BigInt {
        let floor = (Rational::from_integer(beta1.clone()) * sigma_norm_sq)
            .floor()
            .to_integer();
        floor + 1 + BigInt::from(rng.gen_range(0..=RAND_LIMIT))
    }

    pub fn coordinate_shuffle<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..d).collect();
        v.shuffle(rng);
        v
    }

    pub fn query_rand<R: Rng + ?Sized>(rng: &mut R) -> BigInt {
        BigInt::from(rng.gen_range(1..=RAND_LIMIT))
    }

    /// Squared-norm helper used for the `β2` bound.
    pub fn norm_sq(values: &[Rational]) -> Rational {
        values.iter().map(|v| v * v).sum()
    }
}
