use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sknn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sknn"))
        .args(args)
        .env_remove("SKNN_SEED")
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = sknn(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

/// Key plus encrypted copy of `rows`, returned as file paths.
fn setup(dir: &TempDir, scheme: &str, rows: &str) -> (String, String) {
    let key = path(dir, "key.json");
    let csv = path(dir, "db.csv");
    let edb = path(dir, "db.jsonl");
    std::fs::write(&csv, rows).unwrap();
    ok(&[
        "keygen", "--scheme", scheme, "--dim", "2", "--bound", "10", "--seed", "5", "--out", &key,
    ]);
    ok(&["encrypt-db", "--key", &key, "--input", &csv, "--out", &edb]);
    (key, edb)
}

#[test]
fn keygen_is_deterministic_per_seed() {
    let a = ok(&["keygen", "--dim", "3", "--seed", "11"]);
    let b = ok(&["keygen", "--dim", "3", "--seed", "11"]);
    let c = ok(&["keygen", "--dim", "3", "--seed", "12"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    let json: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert!(json.is_object());
}

#[test]
fn missing_dimension_is_a_usage_error() {
    assert_eq!(sknn(&["keygen"]).status.code(), Some(2));
    assert_eq!(sknn(&["attack", "nonsense"]).status.code(), Some(2));
}

#[test]
fn database_roundtrip_both_schemes() {
    for scheme in ["proposed", "baseline"] {
        let dir = TempDir::new().unwrap();
        let (key, edb) = setup(&dir, scheme, "6,7\n4,5\n");
        assert_eq!(
            ok(&["decrypt-db", "--key", &key, "--input", &edb]),
            "6,7\n4,5\n",
            "{scheme}"
        );
    }
}

#[test]
fn parallel_encryption_decrypts_identically() {
    let dir = TempDir::new().unwrap();
    let (key, _) = setup(&dir, "proposed", "1,2\n3,4\n5,6\n7,8\n");
    let edb = path(&dir, "par.jsonl");
    ok(&[
        "encrypt-db",
        "--key",
        &key,
        "--input",
        &path(&dir, "db.csv"),
        "--jobs",
        "3",
        "--out",
        &edb,
    ]);
    assert_eq!(
        ok(&["decrypt-db", "--key", &key, "--input", &edb]),
        "1,2\n3,4\n5,6\n7,8\n"
    );
}

#[test]
fn empty_csv_gives_empty_database() {
    let dir = TempDir::new().unwrap();
    let (_, edb) = setup(&dir, "proposed", "");
    assert!(std::fs::read_to_string(edb).unwrap().trim().is_empty());
}

#[test]
fn bad_rows_are_domain_errors() {
    let dir = TempDir::new().unwrap();
    let (key, _) = setup(&dir, "proposed", "1,2\n");
    let bad = path(&dir, "bad.csv");
    std::fs::write(&bad, "1,2\n3\n").unwrap();
    let out = sknn(&["encrypt-db", "--key", &key, "--input", &bad]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = sknn(&[
        "encrypt-db",
        "--key",
        "/nonexistent/key.json",
        "--input",
        &bad,
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn query_finds_nearest_and_writes_transcript() {
    for scheme in ["proposed", "baseline"] {
        let dir = TempDir::new().unwrap();
        let (key, edb) = setup(&dir, scheme, "6,7\n4,5\n0,0\n");
        let transcript = path(&dir, "t.jsonl");
        let common = [
            "query",
            "--key",
            &key,
            "--db",
            &edb,
            "--paillier-bits",
            "256",
        ];
        let mut args = common.to_vec();
        args.extend(["--point", "3,9", "--transcript", &transcript]);
        assert_eq!(ok(&args), "0\n", "{scheme}");
        assert_eq!(
            std::fs::read_to_string(&transcript)
                .unwrap()
                .lines()
                .count(),
            5
        );

        let mut args = common.to_vec();
        args.extend(["--point", "1,0", "--k", "2"]);
        assert_eq!(ok(&args), "2,1\n", "{scheme}");
    }
}

#[test]
fn query_failures() {
    let dir = TempDir::new().unwrap();
    let (key, edb) = setup(&dir, "proposed", "6,7\n4,5\n");
    let base = [
        "query",
        "--key",
        &key,
        "--db",
        &edb,
        "--paillier-bits",
        "256",
    ];
    let with = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend(extra);
        sknn(&a).status.code()
    };
    assert_eq!(with(&["--point", "3,9", "--k", "3"]), Some(3));
    assert_eq!(with(&["--point", "3,9", "--deny"]), Some(3));
    assert_eq!(with(&["--point", "3"]), Some(3));
    assert_eq!(with(&["--point", "300,9"]), Some(3));
    assert_eq!(with(&[]), Some(2));
}

#[test]
fn level2_attack_matches() {
    let out = ok(&["attack", "level2", "--paillier-bits", "256", "--seed", "3"]);
    assert!(out.contains("MATCH") && !out.contains("NO-MATCH"), "{out}");
}

#[test]
fn attack_report_json() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "report.json");
    let out = ok(&[
        "attack",
        "query-recovery",
        "--json",
        "--paillier-bits",
        "256",
        "--out",
        &file,
    ]);
    let printed: serde_json::Value = serde_json::from_str(&out).unwrap();
    let saved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(printed, saved);
    assert_eq!(printed["attack"], "query-recovery");
    assert_eq!(printed["verdict"]["matched"], true);
}

#[test]
fn one_known_point_is_inconclusive() {
    let out = sknn(&["attack", "level2", "--known", "1", "--paillier-bits", "256"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn level1_with_unit_multiplier_is_inconclusive() {
    let out = sknn(&["attack", "level1", "--n", "1", "--paillier-bits", "256"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("NO-MATCH"));
}

#[test]
fn resistance_finds_nothing() {
    let out = ok(&[
        "attack",
        "resistance",
        "--trials",
        "20",
        "--paillier-bits",
        "512",
    ]);
    assert!(out.contains("NO-MATCH"), "{out}");
    assert!(out.contains("0/20"), "{out}");
}

#[test]
fn worked_example_reproduces() {
    let out = ok(&["demo-toy"]);
    assert!(out.contains("nom_q   14404"));
    assert!(out.contains("nearest p1"));
}

#[test]
fn bench_output() {
    assert_eq!(
        ok(&["bench", "--repetitions", "0"]),
        "phase,scheme,d,m,k,wall_ns,mac_count,paillier_ops\n"
    );
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "bench.csv");
    ok(&[
        "bench",
        "--dims",
        "2",
        "--sizes",
        "4",
        "--paillier-bits",
        "256",
        "--out",
        &file,
    ]);
    let text = std::fs::read_to_string(Path::new(&file)).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 4);
}
