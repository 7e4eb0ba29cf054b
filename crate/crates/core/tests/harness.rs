use proptest::prelude::*;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sknn_core::harness::{
    bench, count_ops, format_csv, ingest_csv, simulate_session, write_bench_csv, BenchGrid,
    HarnessError, MessageKind, RunDescriptor, SessionConfig, BENCH_HEADER,
};
use sknn_core::io::{edb_from_jsonl, edb_to_jsonl, key_from_json, key_to_json, AnyKey, Scheme};
use sknn_core::paillier;
use sknn_core::proposed::{
    csp_knn, do_blind_query, encrypt_database, keygen, planned_paillier_ops, qu_build_request,
    qu_unwrap, QueryPolicy, SecurityParams,
};
use sknn_core::toy;

fn config(k: usize) -> SessionConfig {
    SessionConfig {
        k,
        paillier_bits: 256,
        ..SessionConfig::default()
    }
}

#[test]
fn toy_session_transcript() {
    let key = toy::key();
    let mut src = toy::ToyProfile::new(0);
    let edb = encrypt_database(&key, &toy::database(), &mut src).unwrap();
    let t = simulate_session(&key, &edb, &toy::QUERY, config(1), &mut src).unwrap();
    assert_eq!(t.result, Some(vec![0]));
    assert_eq!(
        t.kinds(),
        vec![
            MessageKind::QueryRequest,
            MessageKind::BlindedQuery,
            MessageKind::CspQuery,
            MessageKind::KnnRequest,
            MessageKind::KnnResult
        ]
    );
    assert!(t.is_well_ordered());
    let seqs: Vec<u64> = t.messages.iter().map(|m| m.seq).collect();
    assert!(seqs.windows(2).all(|w| w[0] < w[1]));
    let lines: Vec<serde_json::Value> = t
        .to_jsonl()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[4]["payload"]["indices"][0], 0);
}

#[test]
fn refusal_session() {
    let key = toy::key();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let edb = encrypt_database(&key, &toy::database(), &mut rng).unwrap();
    let cfg = SessionConfig {
        policy: QueryPolicy::DenyAll,
        ..config(1)
    };
    let t = simulate_session(&key, &edb, &toy::QUERY, cfg, &mut rng).unwrap();
    assert_eq!(
        t.kinds(),
        vec![MessageKind::QueryRequest, MessageKind::Refusal]
    );
    assert_eq!(t.result, None);
    assert!(t.is_well_ordered());
}

#[test]
fn sessions_are_deterministic() {
    let run = || {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let key = keygen(SecurityParams::new(3, 2, 4), 100, &mut rng).unwrap();
        let pts: Vec<Vec<i64>> = (0..6).map(|i| vec![i * 10, 5, 100 - i]).collect();
        let edb = encrypt_database(&key, &pts, &mut rng).unwrap();
        simulate_session(&key, &edb, &[20, 5, 90], config(2), &mut rng)
            .unwrap()
            .to_jsonl()
    };
    assert_eq!(run(), run());
}

#[test]
fn session_equals_offline_pipeline() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let key = keygen(SecurityParams::new(4, 3, 5), 100, &mut rng).unwrap();
    let pts: Vec<Vec<i64>> = (0..15)
        .map(|_| (0..4).map(|_| rng.gen_range(0..=100)).collect())
        .collect();
    let edb = encrypt_database(&key, &pts, &mut rng).unwrap();
    let q = [50, 50, 50, 50];
    let session = simulate_session(&key, &edb, &q, config(3), &mut rng.clone()).unwrap();

    let mut offline = rng.clone();
    // The session id is drawn first.
    offline.next_u64();
    let (pk, sk) = paillier::keygen(256, &mut offline).unwrap();
    let req = qu_build_request(&q, key.query_bound(), &pk, &mut offline).unwrap();
    let (bq, _) = do_blind_query(&key, &req, QueryPolicy::AllowAll, &mut offline).unwrap();
    let direct = csp_knn(&edb, &qu_unwrap(&sk, &bq).unwrap(), 3).unwrap();
    assert_eq!(session.result, Some(direct));
}

#[test]
fn ingest_examples() {
    assert_eq!(
        ingest_csv("6,7\n4,5".as_bytes(), 2, 1).unwrap(),
        vec![vec![6, 7], vec![4, 5]]
    );
    assert!(ingest_csv("".as_bytes(), 2, 1).unwrap().is_empty());
    assert_eq!(
        ingest_csv("1.5,2".as_bytes(), 2, 1000).unwrap(),
        vec![vec![1500, 2000]]
    );
}

#[test]
fn ingest_errors() {
    assert!(matches!(
        ingest_csv("1,2\n3".as_bytes(), 2, 1).unwrap_err(),
        HarnessError::DimensionMismatch {
            line: 2,
            expected: 2,
            actual: 1
        }
    ));
    assert!(matches!(
        ingest_csv("1,x".as_bytes(), 2, 1).unwrap_err(),
        HarnessError::MalformedRow { line: 1, .. }
    ));
}

#[test]
fn formula_counts() {
    let desc = RunDescriptor {
        split: 2,
        padding: 4,
        paillier_bits: 256,
        ..RunDescriptor::new(Scheme::Proposed, 2, 2)
    };
    assert_eq!(desc.eta(), 10);
    let c = count_ops(&desc).unwrap();
    assert_eq!(c.db_encrypt.macs, 200);
    assert_eq!(c.knn.macs, 20);
    let key = toy::key();
    let (exps, encs) = planned_paillier_ops(&key);
    assert_eq!(
        (c.query_blind.paillier_exps, c.query_blind.paillier_encs),
        (exps, encs)
    );
    assert_eq!(exps, 2 + 2 * 2 + 100);
    assert_eq!(encs, 4 + 2);
}

#[test]
fn bench_rows_agree_with_counters() {
    let grid = BenchGrid {
        schemes: vec![Scheme::Baseline, Scheme::Proposed],
        dims: vec![2, 3],
        sizes: vec![5],
        repetitions: 1,
        k: 2,
        paillier_bits: 256,
        seed: 9,
    };
    let rows = bench(&grid).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 4);
    for chunk in rows.chunks(4) {
        let r = &chunk[0];
        let desc = RunDescriptor {
            k: 2,
            paillier_bits: 256,
            seed: 9,
            ..RunDescriptor::new(r.scheme, r.d, r.m)
        };
        let c = count_ops(&desc).unwrap();
        let want = [c.keygen, c.db_encrypt, c.query_blind, c.knn];
        for (row, counts) in chunk.iter().zip(want) {
            assert_eq!(row.mac_count, counts.macs, "{} {:?}", row.phase, row.scheme);
            assert_eq!(row.paillier_ops, counts.paillier_ops());
        }
    }
    let mut buf = Vec::new();
    write_bench_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), BENCH_HEADER.join(","));
    assert_eq!(text.lines().count(), rows.len() + 1);
}

#[test]
fn empty_bench_grid() {
    let rows = bench(&BenchGrid {
        repetitions: 0,
        ..BenchGrid::default()
    })
    .unwrap();
    let mut buf = Vec::new();
    write_bench_csv(&rows, &mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "phase,scheme,d,m,k,wall_ns,mac_count,paillier_ops\n"
    );
}

#[test]
fn key_and_database_files_roundtrip() {
    let key = toy::key();
    let text = key_to_json(&AnyKey::Proposed(key.clone()));
    let back = key_from_json(&text).unwrap();
    assert_eq!(back.scheme(), Scheme::Proposed);
    assert_eq!(key_to_json(&back), text);
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["b"], "111010");
    assert_eq!(json["m"][0][0], "8.5");

    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let edb = encrypt_database(&key, &toy::database(), &mut rng).unwrap();
    let lines = edb_to_jsonl(Scheme::Proposed, &edb);
    assert_eq!(edb_from_jsonl(&lines, Scheme::Proposed).unwrap(), edb);
    assert!(edb_from_jsonl(&lines, Scheme::Baseline).is_err());
}

proptest! {
    #[test]
    fn csv_format_roundtrip(points in proptest::collection::vec(proptest::collection::vec(-100_000i64..100_000, 3), 0..20)) {
        let text = format_csv(&points, 1000);
        prop_assert_eq!(ingest_csv(text.as_bytes(), 3, 1000).unwrap(), points);
    }
}
