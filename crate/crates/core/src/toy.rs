//! The worked two-point example: fixed key, scripted ephemerals and the
//! reference intermediate values, used as golden vectors.

use std::collections::VecDeque;

use num_bigint::BigInt;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::arith::{Matrix, Permutation, Rational};
use crate::proposed::{sample, AlphaForm, EphemeralSource, OwnerKey, SecurityParams};

pub const MATRIX: [[&str; 10]; 10] = [
    [
        "8.5", "3.2", "4.3", "1.8", "2.1", "3.5", "5.9", "8.6", "7.2", "1.3",
    ],
    [
        "1.6", "4.7", "3.1", "2.9", "6.3", "9.1", "3.8", "4.1", "2.3", "2.9",
    ],
    [
        "2.1", "7.2", "8.5", "1.9", "2.5", "8.9", "9.1", "5.1", "7.1", "9.8",
    ],
    [
        "2.3", "4.9", "1.1", "5.6", "4.2", "1.8", "2.6", "5.5", "2.7", "7.3",
    ],
    [
        "5.1", "3.4", "7.2", "3.7", "8.3", "1.5", "6.9", "7.5", "9.2", "6.6",
    ],
    [
        "9.5", "3.5", "1.1", "8.3", "6.3", "1.8", "2.9", "6.1", "5.6", "7.8",
    ],
    [
        "7.9", "9.4", "7.8", "5.6", "3.2", "4.8", "2.3", "3.8", "3.2", "9.4",
    ],
    [
        "5.7", "6.4", "6.9", "2.8", "7.9", "9.6", "4.6", "5.1", "1.4", "8.3",
    ],
    [
        "1.8", "5.8", "1.4", "4.1", "3.8", "4.7", "7.1", "4.4", "3.8", "5.9",
    ],
    [
        "8.4", "3.4", "7.3", "2.9", "5.5", "6.7", "6.1", "6.7", "7.2", "3.3",
    ],
];
pub const SHIFT: [i64; 3] = [15, 63, 17];
pub const SIGMA: [i64; 2] = [8, 11];
pub const BITS: [bool; 6] = [true, true, true, false, true, false];
pub const WEIGHTS: [i64; 6] = [19, 23, 11, 18, 25, 40];
pub const PERM: [usize; 10] = [5, 2, 7, 1, 8, 4, 3, 6, 0, 9];

/// Data bound for the example: `σ = (8, 11)` must dominate every coordinate.
pub const COORD_BOUND: i64 = 7;
pub const DATABASE: [[i64; 2]; 2] = [[6, 7], [4, 5]];
pub const QUERY: [i64; 2] = [3, 9];

/// Reference values.
pub mod expected {
    pub const NOM_P: (i64, i64) = (-169, 4);
    pub const P1_HAT: [&str; 10] = [
        "3", "49", "102", "50", "19", "23", "11", "3", "25", "-42.25",
    ];
    pub const P1_PRIME: [f64; 10] = [
        -2.450, 4.596, -20.674, -4.666, 1.680, -14.833, 16.390, -10.106, 30.685, 11.411,
    ];
    pub const P2_PRIME: [f64; 10] = [
        -21.880, -19.894, -24.697, 15.103, -9.657, -24.043, 4.931, -7.558, 44.538, 54.709,
    ];
    pub const NOM_Q: i64 = 14404;
    pub const R_DEC: [i64; 6] = [-6300, -1800, -600, -1800, 14404, -4000];
    pub const Q_PRIME: [i64; 10] = [
        1575584, 1782952, 1228800, 2905368, 3427432, 4446252, 2539928, 1537316, 2340052, 2188120,
    ];
    pub const SCORES: [f64; 2] = [28048002.560, 28424001.890];
    pub const NEAREST: usize = 0;
    pub const TOLERANCE: f64 = 1e-3;
}

fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// `d = 2, c = 2, ε = 4`; ciphertexts stored to six decimals as in the
/// reference listing.
pub fn params() -> SecurityParams {
    let mut p = SecurityParams::new(2, 2, 4);
    p.data_scale = 1;
    p.cipher_decimals = Some(6);
    p
}

pub fn key() -> OwnerKey {
    let rows: Vec<Vec<&str>> = MATRIX.iter().map(|r| r.to_vec()).collect();
    OwnerKey::from_parts(
        params(),
        COORD_BOUND,
        Matrix::parse_rows(&rows).expect("example matrix parses"),
        SHIFT.iter().map(|&v| int(v)).collect(),
        SIGMA.iter().map(|&v| int(v)).collect(),
        BITS.to_vec(),
        WEIGHTS.iter().map(|&v| BigInt::from(v)).collect(),
        Permutation::new(PERM.to_vec()).expect("example permutation is valid"),
    )
    .expect("example key is valid")
}

pub fn database() -> Vec<Vec<i64>> {
    DATABASE.iter().map(|p| p.to_vec()).collect()
}

/// Replays the example's random draws in order, then falls back to a seeded
/// generator once a script runs dry.
#[derive(Debug, Clone)]
pub struct ToyProfile {
    inner: ChaCha20Rng,
    tau: VecDeque<Rational>,
    offsets: VecDeque<Vec<Rational>>,
    beta1: VecDeque<BigInt>,
    beta2: VecDeque<BigInt>,
    shuffles: VecDeque<Vec<usize>>,
    query_rands: VecDeque<BigInt>,
}

impl ToyProfile {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha20Rng::seed_from_u64(seed),
            // One free τ slot per tuple; both tuples draw 3.
            tau: [3, 3].iter().map(|&v| int(v)).collect(),
            // t = (7, 4) is printed for p₁; (2, 3) reproduces p₂′.
            offsets: [[7, 4], [2, 3]]
                .iter()
                .map(|t| t.iter().map(|&v| int(v)).collect())
                .collect(),
            beta1: [BigInt::from(4)].into(),
            beta2: [BigInt::from(44)].into(),
            shuffles: [vec![0, 1]].into(),
            query_rands: [21, 2, 6].iter().map(|&v| BigInt::from(v)).collect(),
        }
    }
}

impl RngCore for ToyProfile {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

impl EphemeralSource for ToyProfile {
    fn tau_free(&mut self) -> Rational {
        self.tau
            .pop_front()
            .unwrap_or_else(|| sample::tau_free(&mut self.inner))
    }

    fn alpha_offsets(&mut self, sigma: &[Rational], form: AlphaForm) -> Vec<Rational> {
        match self.offsets.front() {
            Some(t) if form == AlphaForm::PerCoordinate && t.len() == sigma.len() => {
                self.offsets.pop_front().expect("front exists")
            }
            _ => sample::alpha_offsets(&mut self.inner, sigma, form),
        }
    }

    fn beta1(&mut self) -> BigInt {
        self.beta1
            .pop_front()
            .unwrap_or_else(|| sample::beta1(&mut self.inner))
    }

    fn beta2(&mut self, beta1: &BigInt, sigma_norm_sq: &Rational) -> BigInt {
        self.beta2
            .pop_front()
            .unwrap_or_else(|| sample::beta2(&mut self.inner, beta1, sigma_norm_sq))
    }

    fn coordinate_shuffle(&mut self, d: usize) -> Vec<usize> {
        match self.shuffles.front() {
            Some(v) if v.len() == d => self.shuffles.pop_front().expect("front exists"),
            _ => sample::coordinate_shuffle(&mut self.inner, d),
        }
    }

    fn query_rand(&mut self) -> BigInt {
        self.query_rands
            .pop_front()
            .unwrap_or_else(|| sample::query_rand(&mut self.inner))
    }
}
