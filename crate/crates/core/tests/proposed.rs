use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sknn_core::arith::{dot, vec_mat_mul, Matrix, Rational};
use sknn_core::paillier::{self, PrivateKey, PublicKey};
use sknn_core::proposed::{
    csp_knn, csp_score, decrypt_tuple, do_blind_query, encrypt_database, encrypt_database_parallel,
    encrypt_tuple, gen_tau, keygen, qu_build_request, qu_unwrap, AlphaForm, CspQuery, OwnerKey,
    QueryPolicy, SchemeError, SecurityParams,
};
use sknn_core::toy;

fn paillier_keys() -> &'static (PublicKey, PrivateKey) {
    static KEYS: OnceLock<(PublicKey, PrivateKey)> = OnceLock::new();
    KEYS.get_or_init(|| paillier::keygen(256, &mut ChaCha20Rng::seed_from_u64(5)).unwrap())
}

/// Squared distances ranked by (distance, index), written out longhand.
fn nearest(points: &[Vec<i64>], q: &[i64], k: usize) -> Vec<usize> {
    let mut scored: Vec<(i64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.iter().zip(q).map(|(a, b)| (a - b).pow(2)).sum(), i))
        .collect();
    scored.sort();
    scored.into_iter().take(k).map(|(_, i)| i).collect()
}

fn blind(key: &OwnerKey, q: &[i64], rng: &mut ChaCha20Rng) -> CspQuery {
    let (pk, sk) = paillier_keys();
    let req = qu_build_request(q, key.query_bound(), pk, rng).unwrap();
    let (bq, _) = do_blind_query(key, &req, QueryPolicy::AllowAll, rng).unwrap();
    qu_unwrap(sk, &bq).unwrap()
}

#[test]
fn worked_example_sizes() {
    let p = SecurityParams::new(2, 2, 4);
    assert_eq!(p.eta(), 10);
    p.validate().unwrap();
    assert_eq!(toy::key().m().rows(), 10);
}

#[test]
fn invalid_parameters() {
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    for (d, c, e) in [(4, 1, 4), (2, 3, 4), (4, 2, 1)] {
        let err = keygen(SecurityParams::new(d, c, e), 10, &mut rng).unwrap_err();
        assert!(
            matches!(err, SchemeError::InvalidParams(_)),
            "{d} {c} {e}: {err}"
        );
    }
}

#[test]
fn tail_without_zero_rejected() {
    let base = toy::key();
    let err = OwnerKey::from_parts(
        toy::params(),
        toy::COORD_BOUND,
        base.m().clone(),
        base.shift().to_vec(),
        base.sigma().to_vec(),
        vec![true; 6],
        base.weights().to_vec(),
        base.perm().clone(),
    )
    .unwrap_err();
    assert!(matches!(err, SchemeError::InvalidParams(_)));
}

#[test]
fn sigma_must_dominate_bound() {
    let base = toy::key();
    let err = OwnerKey::from_parts(
        toy::params(),
        8,
        base.m().clone(),
        base.shift().to_vec(),
        base.sigma().to_vec(),
        base.bits().to_vec(),
        base.weights().to_vec(),
        base.perm().clone(),
    )
    .unwrap_err();
    assert!(matches!(err, SchemeError::InvalidKey(_)));
}

#[test]
fn generated_keys_satisfy_invariants() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for d in 2..=8 {
        let params = SecurityParams::new(d, d.min(5), 10);
        let key = keygen(params.clone(), 100, &mut rng).unwrap();
        assert!(key.m().determinant().unwrap() != Rational::zero());
        assert!(key
            .sigma()
            .iter()
            .all(|s| *s > Rational::from_integer(100.into())));
        let bits = key.bits();
        assert!(bits[..params.split].iter().all(|&b| b));
        assert!(bits[params.split..].iter().any(|&b| b));
        assert!(bits[params.split..].iter().any(|&b| !b));
        assert!(key.m_hat().mul(key.m_hat_inv()).unwrap().is_identity());
    }
}

#[test]
fn tau_is_orthogonal_to_weights_and_fresh() {
    let key = toy::key();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let w: Vec<Rational> = key
        .weights()
        .iter()
        .cloned()
        .map(Rational::from_integer)
        .collect();
    let mut seen = std::collections::HashSet::new();
    for _ in 0..100 {
        let tau = gen_tau(&key, &mut rng);
        assert!(dot(&tau, &w).unwrap().is_zero());
        seen.insert(tau);
    }
    assert!(seen.len() > 90);
}

#[test]
fn encryption_is_probabilistic() {
    let key = toy::key();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let a = encrypt_tuple(&key, 0, &[6, 7], &mut rng).unwrap();
    for _ in 0..50 {
        assert_ne!(encrypt_tuple(&key, 0, &[6, 7], &mut rng).unwrap(), a);
    }
}

#[test]
fn coordinate_bound_enforced() {
    let key = toy::key();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let err = encrypt_tuple(&key, 0, &[8, 1], &mut rng).unwrap_err();
    assert!(matches!(
        err,
        SchemeError::CoordinateOutOfBound { index: 0, .. }
    ));
    let (pk, _) = paillier_keys();
    let err = qu_build_request(&[1, 40], key.query_bound(), pk, &mut rng).unwrap_err();
    assert!(matches!(
        err,
        SchemeError::CoordinateOutOfBound { index: 1, .. }
    ));
}

#[test]
fn roundtrip_random_points() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let key = keygen(SecurityParams::new(5, 3, 6), 100, &mut rng).unwrap();
    let points: Vec<Vec<i64>> = (0..200)
        .map(|_| (0..5).map(|_| rng.gen_range(0..=100)).collect())
        .collect();
    let edb = encrypt_database(&key, &points, &mut rng).unwrap();
    for (ct, p) in edb.iter().zip(&points) {
        assert_eq!(&decrypt_tuple(&key, ct).unwrap(), p);
    }
    let zero = encrypt_tuple(&key, 0, &[0; 5], &mut rng).unwrap();
    assert_eq!(decrypt_tuple(&key, &zero).unwrap(), vec![0; 5]);
}

#[test]
fn parallel_encryption_matches_sequential() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let key = keygen(SecurityParams::new(3, 2, 4), 100, &mut rng).unwrap();
    let points: Vec<Vec<i64>> = (0..37).map(|i| vec![i, 100 - i, i / 2]).collect();
    let seq = encrypt_database(&key, &points, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
    let par =
        encrypt_database_parallel(&key, &points, &mut ChaCha20Rng::seed_from_u64(1), 4).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn tuple_is_matrix_image_of_augmented_point() {
    // Undo the matrix independently and look at the augmented layout.
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let key = keygen(SecurityParams::new(3, 2, 3), 50, &mut rng).unwrap();
    let p = [4, 0, 17];
    let ct = encrypt_tuple(&key, 0, &p, &mut rng).unwrap();
    let hat = vec_mat_mul(&ct.coords, key.m_hat()).unwrap();
    for j in 0..3 {
        assert_eq!(
            hat[j],
            &key.shift()[j] - Rational::from_integer((2 * p[j]).into())
        );
    }
    assert_eq!(
        hat[3],
        &key.shift()[3] + Rational::from_integer((16 + 289).into())
    );
}

#[test]
fn deny_policy_refuses() {
    let key = toy::key();
    let (pk, _) = paillier_keys();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let req = qu_build_request(&toy::QUERY, key.query_bound(), pk, &mut rng).unwrap();
    let err = do_blind_query(&key, &req, QueryPolicy::DenyAll, &mut rng).unwrap_err();
    assert!(matches!(err, SchemeError::Refused));
}

#[test]
fn zero_query_scores_zero() {
    let key = toy::key();
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let ct = encrypt_tuple(&key, 0, &[1, 2], &mut rng).unwrap();
    let q = CspQuery {
        coords: vec![BigInt::zero(); 10],
    };
    assert!(csp_score(&ct, &q).unwrap().is_zero());
}

#[test]
fn k_equal_to_size_returns_everything() {
    let key = toy::key();
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let edb = encrypt_database(&key, &toy::database(), &mut rng).unwrap();
    let q = blind(&key, &toy::QUERY, &mut rng);
    let mut all = csp_knn(&edb, &q, 2).unwrap();
    all.sort();
    assert_eq!(all, vec![0, 1]);
    assert!(csp_knn(&edb, &q, 3).is_err());
}

#[test]
fn scalar_alpha_form_also_ranks() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let mut params = SecurityParams::new(4, 2, 4);
    params.alpha_form = AlphaForm::Scalar;
    let key = keygen(params, 100, &mut rng).unwrap();
    let points: Vec<Vec<i64>> = vec![vec![0, 0, 0, 0], vec![10, 10, 10, 10], vec![50, 60, 70, 80]];
    let edb = encrypt_database(&key, &points, &mut rng).unwrap();
    let q = blind(&key, &[48, 61, 70, 79], &mut rng);
    assert_eq!(csp_knn(&edb, &q, 3).unwrap(), vec![2, 1, 0]);
}

#[test]
fn uniform_rescaling_keeps_ranking() {
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    let points: Vec<Vec<i64>> = (0..20)
        .map(|_| (0..3).map(|_| rng.gen_range(0..=100)).collect())
        .collect();
    let q = [30, 70, 5];
    let mut results = Vec::new();
    for (ms, qs) in [(10, 100), (10, 1), (100, 1000)] {
        let mut params = SecurityParams::new(3, 2, 4);
        params.matrix_scale = ms;
        params.query_scale = qs;
        let mut krng = ChaCha20Rng::seed_from_u64(14);
        let key = keygen(params, 100, &mut krng).unwrap();
        let edb = encrypt_database(&key, &points, &mut krng).unwrap();
        results.push(csp_knn(&edb, &blind(&key, &q, &mut krng), 5).unwrap());
    }
    assert!(results.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn worked_example_matrix_inverts_exactly() {
    let m = toy::key().m().clone();
    assert!(m.mul(&m.invert().unwrap()).unwrap().is_identity());
    assert_eq!(Matrix::identity(4).invert().unwrap(), Matrix::identity(4));
    assert!(Matrix::zeros(2, 2).invert().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn knn_matches_plaintext_on_distinct_distances(
        seed in any::<u64>(),
        d in 2usize..=6,
        m in 2usize..=20,
        k in 1usize..=5,
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let key = keygen(SecurityParams::new(d, 2, 4), 100, &mut rng).unwrap();
        let points: Vec<Vec<i64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.gen_range(0..=100)).collect())
            .collect();
        let q: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=100)).collect();
        let mut dists: Vec<i64> = points
            .iter()
            .map(|p| p.iter().zip(&q).map(|(a, b)| (a - b).pow(2)).sum())
            .collect();
        dists.sort();
        dists.dedup();
        prop_assume!(dists.len() == m);
        let edb = encrypt_database(&key, &points, &mut rng).unwrap();
        let k = k.min(m);
        prop_assert_eq!(csp_knn(&edb, &blind(&key, &q, &mut rng), k).unwrap(), nearest(&points, &q, k));
    }

    #[test]
    fn decrypt_inverts_encrypt(seed in any::<u64>(), p in proptest::collection::vec(0i64..=100, 3)) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let key = keygen(SecurityParams::new(3, 3, 2), 100, &mut rng).unwrap();
        let ct = encrypt_tuple(&key, 0, &p, &mut rng).unwrap();
        prop_assert_eq!(decrypt_tuple(&key, &ct).unwrap(), p);
    }
}
