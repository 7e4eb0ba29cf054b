use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sknn_core::arith::{vec_mat_mul, Matrix, Rational};
use sknn_core::baseline::{
    baseline_blind_query, baseline_blind_query_with, baseline_decrypt_tuple,
    baseline_encrypt_database, baseline_encrypt_tuple, baseline_keygen, baseline_knn, BaselineKey,
    BaselineMode, BaselineParams, BaselineQueryEphemerals,
};
use sknn_core::paillier::{self, PrivateKey, PublicKey};
use sknn_core::proposed::{qu_build_request, qu_unwrap, CspQuery, SchemeError};

fn paillier_keys() -> &'static (PublicKey, PrivateKey) {
    static KEYS: OnceLock<(PublicKey, PrivateKey)> = OnceLock::new();
    KEYS.get_or_init(|| paillier::keygen(256, &mut ChaCha20Rng::seed_from_u64(21)).unwrap())
}

fn key(d: usize, seed: u64) -> BaselineKey {
    baseline_keygen(
        BaselineParams::new(d, 5, 5),
        100,
        &mut ChaCha20Rng::seed_from_u64(seed),
    )
    .unwrap()
}

fn unwrap_query(
    key: &BaselineKey,
    q: &[i64],
    eph: &BaselineQueryEphemerals,
    rng: &mut ChaCha20Rng,
) -> CspQuery {
    let (pk, sk) = paillier_keys();
    let req = qu_build_request(q, key.coord_bound(), pk, rng).unwrap();
    let bq = baseline_blind_query_with(key, &req, eph, rng).unwrap();
    qu_unwrap(sk, &bq).unwrap()
}

/// `β · scale · M̂ · (q, 1, r, 0)` from the rational matrix, no shortcuts.
fn expected_query(key: &BaselineKey, q: &[i64], eph: &BaselineQueryEphemerals) -> Vec<BigInt> {
    let mut lifted: Vec<Rational> = q
        .iter()
        .map(|&x| Rational::from_integer(x.into()))
        .collect();
    lifted.push(Rational::from_integer(1.into()));
    lifted.extend(eph.r.iter().cloned().map(Rational::from_integer));
    lifted.extend(std::iter::repeat_n(Rational::zero(), key.params().padding));
    let factor = Rational::from_integer(&eph.beta * BigInt::from(key.params().matrix_scale()));
    key.m_hat()
        .mul_vec(&lifted)
        .unwrap()
        .into_iter()
        .map(|v| {
            let v = v * &factor;
            assert!(v.is_integer());
            v.to_integer()
        })
        .collect()
}

#[test]
fn dimension_formula() {
    let k = baseline_keygen(
        BaselineParams::new(4, 2, 2),
        100,
        &mut ChaCha20Rng::seed_from_u64(0),
    )
    .unwrap();
    assert_eq!(k.m().rows(), 9);
    assert!(k.m().determinant().unwrap() != Rational::zero());
    let mut image = k.perm().as_slice().to_vec();
    image.sort();
    assert_eq!(image, (0..9).collect::<Vec<_>>());
}

#[test]
fn integerized_entries() {
    let k = key(3, 1);
    assert_eq!(k.params().mode, BaselineMode::Integerized);
    assert!(k
        .m()
        .entries()
        .iter()
        .all(|e| e.is_integer() && *e >= Rational::from_integer(1.into())));
}

#[test]
fn decimal_mode_roundtrip() {
    let mut params = BaselineParams::new(3, 2, 2);
    params.mode = BaselineMode::Decimal;
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let k = baseline_keygen(params, 100, &mut rng).unwrap();
    let ct = baseline_encrypt_tuple(&k, 0, &[7, 8, 9], &mut rng).unwrap();
    assert_eq!(baseline_decrypt_tuple(&k, &ct).unwrap(), vec![7, 8, 9]);
}

#[test]
fn roundtrip_and_freshness() {
    let k = key(4, 3);
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let a = baseline_encrypt_tuple(&k, 0, &[1, 2, 3, 4], &mut rng).unwrap();
    let b = baseline_encrypt_tuple(&k, 0, &[1, 2, 3, 4], &mut rng).unwrap();
    assert_ne!(a, b);
    assert_eq!(baseline_decrypt_tuple(&k, &a).unwrap(), vec![1, 2, 3, 4]);
    assert_eq!(baseline_decrypt_tuple(&k, &b).unwrap(), vec![1, 2, 3, 4]);
}

#[test]
fn zero_point_layout() {
    let k = key(3, 4);
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let ct = baseline_encrypt_tuple(&k, 0, &[0, 0, 0], &mut rng).unwrap();
    let hat = vec_mat_mul(&ct.coords, k.m_hat()).unwrap();
    assert_eq!(&hat[..4], k.shift());
    assert_eq!(&hat[4..9], k.tau());
}

#[test]
fn bound_enforced() {
    let k = key(2, 5);
    let err =
        baseline_encrypt_tuple(&k, 0, &[101, 0], &mut ChaCha20Rng::seed_from_u64(5)).unwrap_err();
    assert!(matches!(err, SchemeError::CoordinateOutOfBound { .. }));
}

#[test]
fn unwrapped_query_matches_plain_side() {
    let k = key(4, 6);
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    for _ in 0..5 {
        let q: Vec<i64> = (0..4).map(|_| rng.gen_range(0..=100)).collect();
        let eph = BaselineQueryEphemerals::sample(&k, &mut rng);
        assert_eq!(
            unwrap_query(&k, &q, &eph, &mut rng).coords,
            expected_query(&k, &q, &eph)
        );
    }
}

#[test]
fn zero_query_uses_constant_and_randomizer_columns() {
    let k = key(3, 7);
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let eph = BaselineQueryEphemerals::sample(&k, &mut rng);
    let got = unwrap_query(&k, &[0, 0, 0], &eph, &mut rng).coords;
    let want: Vec<BigInt> = (0..k.m().rows())
        .map(|i| {
            let row = k.m_hat().row(i);
            let mut acc = row[3].clone();
            for (j, r) in eph.r.iter().enumerate() {
                acc += &row[4 + j] * Rational::from_integer(r.clone());
            }
            (acc * Rational::from_integer(eph.beta.clone())).to_integer()
        })
        .collect();
    assert_eq!(got, want);
}

#[test]
fn zero_randomizers_stay_in_low_rank_span() {
    let k = key(3, 8);
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut rows = Vec::new();
    for _ in 0..8 {
        let q: Vec<i64> = (0..3).map(|_| rng.gen_range(0..=100)).collect();
        let eph = BaselineQueryEphemerals {
            beta: rng.gen_range(1..100).into(),
            r: vec![BigInt::zero(); 5],
        };
        let v = unwrap_query(&k, &q, &eph, &mut rng).coords;
        rows.push(
            v.into_iter()
                .map(Rational::from_integer)
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(Matrix::from_rows(rows).unwrap().rank(), 4);
}

#[test]
fn knn_with_ties_and_full_k() {
    let k = key(2, 9);
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let points = vec![vec![5, 5], vec![3, 5], vec![7, 5], vec![5, 5], vec![50, 50]];
    let edb = baseline_encrypt_database(&k, &points, &mut rng).unwrap();
    let (pk, sk) = paillier_keys();
    let req = qu_build_request(&[5, 5], 100, pk, &mut rng).unwrap();
    let (bq, _) = baseline_blind_query(&k, &req, &mut rng).unwrap();
    let q = qu_unwrap(sk, &bq).unwrap();
    assert_eq!(baseline_knn(&edb, &q, 4).unwrap(), vec![0, 3, 1, 2]);
    assert_eq!(baseline_knn(&edb, &q, 5).unwrap(), vec![0, 3, 1, 2, 4]);
}

#[test]
fn query_offset_constant_across_tuples() {
    // τ·r enters every score identically, so score differences depend
    // only on the points.
    let k = key(3, 10);
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let points = vec![vec![1, 2, 3], vec![4, 5, 6]];
    let edb = baseline_encrypt_database(&k, &points, &mut rng).unwrap();
    let q = [9, 9, 9];
    let mut diffs = Vec::new();
    for _ in 0..3 {
        let mut eph = BaselineQueryEphemerals::sample(&k, &mut rng);
        eph.beta = BigInt::from(1);
        let csp = unwrap_query(&k, &q, &eph, &mut rng);
        let s: Vec<Rational> = edb
            .iter()
            .map(|t| sknn_core::knn::score(t, &csp.coords).unwrap())
            .collect();
        diffs.push(&s[0] - &s[1]);
    }
    assert!(diffs.windows(2).all(|w| w[0] == w[1]));
    // ‖p0 − q‖² − ‖p1 − q‖² = 149 − 50
    assert_eq!(diffs[0], Rational::from_integer(BigInt::from(99)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn knn_matches_plaintext(seed in any::<u64>(), d in 2usize..=6, m in 1usize..=25, k in 1usize..=5) {
        let bk = key(d, seed);
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
        let points: Vec<Vec<i64>> = (0..m).map(|_| (0..d).map(|_| rng.gen_range(0..=10)).collect()).collect();
        let q: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=10)).collect();
        let edb = baseline_encrypt_database(&bk, &points, &mut rng).unwrap();
        let eph = BaselineQueryEphemerals::sample(&bk, &mut rng);
        let csp = unwrap_query(&bk, &q, &eph, &mut rng);
        let k = k.min(m);
        let mut want: Vec<(i64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        want.sort();
        let want: Vec<usize> = want.into_iter().take(k).map(|(_, i)| i).collect();
        prop_assert_eq!(baseline_knn(&edb, &csp, k).unwrap(), want);
    }
}
