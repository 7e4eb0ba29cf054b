//! `sknn`: key generation, database encryption, query sessions, attack
//! demos, the worked example and benchmarks from one binary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use sknn_core::arith::format_rational;
use sknn_core::attacks::{level1_attack, AttackError, AttackReport, BaselineOracle, ProbeCase};
use sknn_core::baseline::{
    baseline_decrypt_tuple, baseline_encrypt_database, baseline_keygen, BaselineMode,
    BaselineParams,
};
use sknn_core::harness::scenario::{
    baseline_instance, baseline_n, proposed_instance, run_baseline_attack, run_resistance,
};
use sknn_core::harness::verdict::judge_columns;
use sknn_core::harness::{
    bench, format_csv, ingest_csv, ingest_csv_path, simulate_baseline_session, simulate_session,
    write_bench_csv, BenchGrid, HarnessError, SessionConfig, Transcript,
};
use sknn_core::io::{edb_from_jsonl, edb_to_jsonl, key_from_json, key_to_json, AnyKey, Scheme};
use sknn_core::proposed::{
    decrypt_tuple, encrypt_database, encrypt_database_parallel, keygen, QueryPolicy, SecurityParams,
};

mod demo;

const EXIT_DOMAIN: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(name = "sknn", version, about = "Secure k-NN over encrypted databases")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct SeedArg {
    /// Seed for every random draw; identical seeds give identical output.
    #[arg(long, env = "SKNN_SEED", default_value_t = 0)]
    seed: u64,
}

impl SeedArg {
    fn rng(self) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a data-owner key.
    Keygen(KeygenArgs),
    /// Encrypt a CSV database into JSON lines.
    EncryptDb(EncryptArgs),
    /// Decrypt an encrypted database back to CSV.
    DecryptDb(DecryptArgs),
    /// Run one query session and print the k nearest indices.
    Query(QueryArgs),
    /// Run a cryptanalysis demo on a generated instance.
    Attack(AttackArgs),
    /// Replay the two-point worked example.
    DemoToy(DemoArgs),
    /// Time and count operations over a parameter grid, as CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::Proposed)]
    scheme: SchemeArg,
    /// Data dimension d.
    #[arg(long)]
    dim: usize,
    /// Split parameter c [default: min(5, d) proposed, 5 baseline].
    #[arg(long)]
    c: Option<usize>,
    /// Padding parameter ε [default: 10 proposed, 5 baseline].
    #[arg(long)]
    epsilon: Option<usize>,
    /// Largest plaintext coordinate, in input units.
    #[arg(long, default_value_t = 100)]
    bound: i64,
    /// Fixed-point factor applied to CSV values (proposed scheme only).
    #[arg(long, default_value_t = 1000)]
    data_scale: u64,
    /// Baseline matrix entries: integers or one-decimal values.
    #[arg(long, value_enum, default_value_t = ModeArg::Integerized)]
    mode: ModeArg,
    #[command(flatten)]
    seed: SeedArg,
    /// Output file [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncryptArgs {
    #[arg(long)]
    key: PathBuf,
    /// Headerless CSV, one point per row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for tuple encryption.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct DecryptArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    key: PathBuf,
    /// Encrypted database (JSON lines).
    #[arg(long)]
    db: PathBuf,
    /// Query point as comma-separated values, in input units.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1024)]
    paillier_bits: u64,
    /// Have the data owner refuse the query.
    #[arg(long)]
    deny: bool,
    /// Write the message transcript as JSON lines.
    #[arg(long)]
    transcript: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(value_enum)]
    kind: AttackKindArg,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Database size.
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Plaintexts known to the attacker.
    #[arg(long, default_value_t = 2)]
    known: usize,
    /// Probe repetitions (resistance).
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Probe query shape (resistance): zero, unit or scaled.
    #[arg(long, default_value = "scaled")]
    case: ProbeCase,
    /// Level-1 multiplier N [default: derived from the key bounds; 10^9 for resistance].
    #[arg(long)]
    n: Option<BigInt>,
    #[arg(long, default_value_t = 1024)]
    paillier_bits: u64,
    /// Print the report as JSON instead of the verdict table.
    #[arg(long)]
    json: bool,
    /// Also write the report JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 256)]
    paillier_bits: u64,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values = ["baseline", "proposed"])]
    schemes: Vec<Scheme>,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 8])]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 200])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1024)]
    paillier_bits: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Proposed,
    Baseline,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Integerized,
    Decimal,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackKindArg {
    Level1,
    Level2,
    QueryRecovery,
    Resistance,
}

/// A completed attack whose result does not match the ground truth.
#[derive(Debug)]
struct Inconclusive(String);

impl std::fmt::Display for Inconclusive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "attack inconclusive: {}", self.0)
    }
}

impl std::error::Error for Inconclusive {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if inconclusive(&err) {
                EXIT_INCONCLUSIVE
            } else {
                EXIT_DOMAIN
            })
        }
    }
}

fn inconclusive(err: &anyhow::Error) -> bool {
    let attack = |e: &AttackError| {
        matches!(
            e,
            AttackError::AmbiguousBeta
                | AttackError::NoUniqueCandidate { .. }
                | AttackError::SingularAfterRetries { .. }
                | AttackError::NotEnoughPairs { .. }
        )
    };
    err.chain().any(|cause| {
        cause.is::<Inconclusive>()
            || cause.downcast_ref::<AttackError>().is_some_and(attack)
            || matches!(cause.downcast_ref::<HarnessError>(), Some(HarnessError::Attack(e)) if attack(e))
    })
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Keygen(a) => cmd_keygen(a),
        Command::EncryptDb(a) => cmd_encrypt_db(a),
        Command::DecryptDb(a) => cmd_decrypt_db(a),
        Command::Query(a) => cmd_query(a),
        Command::Attack(a) => cmd_attack(a),
        Command::DemoToy(a) => demo::run(a.paillier_bits, a.seed.seed),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn read_key(path: &Path) -> Result<AnyKey> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    key_from_json(&text).with_context(|| format!("parsing key {}", path.display()))
}

fn dim_of(key: &AnyKey) -> usize {
    match key {
        AnyKey::Proposed(k) => k.params().dim,
        AnyKey::Baseline(k) => k.params().dim,
    }
}

/// Fixed-point factor between CSV values and encrypted integers. Baseline
/// keys carry no scale and work on integers directly.
fn data_scale(key: &AnyKey) -> u64 {
    match key {
        AnyKey::Proposed(k) => k.params().data_scale,
        AnyKey::Baseline(_) => 1,
    }
}

fn cmd_keygen(a: KeygenArgs) -> Result<()> {
    if a.bound < 0 {
        bail!("--bound must be non-negative");
    }
    let mut rng = a.seed.rng();
    let key = match a.scheme {
        SchemeArg::Proposed => {
            let mut params =
                SecurityParams::new(a.dim, a.c.unwrap_or(a.dim.min(5)), a.epsilon.unwrap_or(10));
            params.data_scale = a.data_scale;
            let bound = a
                .bound
                .checked_mul(a.data_scale as i64)
                .ok_or_else(|| anyhow!("--bound times --data-scale overflows"))?;
            AnyKey::Proposed(keygen(params, bound, &mut rng)?)
        }
        SchemeArg::Baseline => {
            let mut params = BaselineParams::new(a.dim, a.c.unwrap_or(5), a.epsilon.unwrap_or(5));
            params.mode = match a.mode {
                ModeArg::Integerized => BaselineMode::Integerized,
                ModeArg::Decimal => BaselineMode::Decimal,
            };
            AnyKey::Baseline(baseline_keygen(params, a.bound, &mut rng)?)
        }
    };
    emit(a.out.as_deref(), &(key_to_json(&key) + "\n"))
}

fn cmd_encrypt_db(a: EncryptArgs) -> Result<()> {
    let key = read_key(&a.key)?;
    let points = ingest_csv_path(&a.input, dim_of(&key), data_scale(&key))
        .with_context(|| format!("reading {}", a.input.display()))?;
    let mut rng = a.seed.rng();
    let edb = match &key {
        AnyKey::Proposed(k) if a.jobs > 1 => {
            encrypt_database_parallel(k, &points, &mut rng, a.jobs)?
        }
        AnyKey::Proposed(k) => encrypt_database(k, &points, &mut rng)?,
        AnyKey::Baseline(k) => baseline_encrypt_database(k, &points, &mut rng)?,
    };
    log::info!("encrypted {} tuples", edb.len());
    emit(a.out.as_deref(), &edb_to_jsonl(key.scheme(), &edb))
}

fn cmd_decrypt_db(a: DecryptArgs) -> Result<()> {
    let key = read_key(&a.key)?;
    let text =
        fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let edb = edb_from_jsonl(&text, key.scheme())?;
    let points = edb
        .iter()
        .map(|t| match &key {
            AnyKey::Proposed(k) => decrypt_tuple(k, t),
            AnyKey::Baseline(k) => baseline_decrypt_tuple(k, t),
        })
        .collect::<Result<Vec<_>, _>>()?;
    emit(a.out.as_deref(), &format_csv(&points, data_scale(&key)))
}

fn cmd_query(a: QueryArgs) -> Result<()> {
    let key = read_key(&a.key)?;
    let text = fs::read_to_string(&a.db).with_context(|| format!("reading {}", a.db.display()))?;
    let edb = edb_from_jsonl(&text, key.scheme())?;
    let point = ingest_csv(a.point.as_bytes(), dim_of(&key), data_scale(&key))
        .context("parsing --point")?
        .pop()
        .ok_or_else(|| anyhow!("--point is empty"))?;
    if a.k == 0 || a.k > edb.len() {
        bail!("k = {} but the database holds {} tuples", a.k, edb.len());
    }
    let config = SessionConfig {
        k: a.k,
        policy: if a.deny {
            QueryPolicy::DenyAll
        } else {
            QueryPolicy::AllowAll
        },
        paillier_bits: a.paillier_bits,
    };
    let mut rng = a.seed.rng();
    let transcript: Transcript = match &key {
        AnyKey::Proposed(k) => simulate_session(k, &edb, &point, config, &mut rng)?,
        AnyKey::Baseline(k) => simulate_baseline_session(k, &edb, &point, config, &mut rng)?,
    };
    if let Some(path) = &a.transcript {
        fs::write(path, transcript.to_jsonl())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    match transcript.result {
        Some(indices) => {
            let line: Vec<String> = indices.iter().map(usize::to_string).collect();
            println!("{}", line.join(","));
            Ok(())
        }
        None => bail!("the data owner refused the query"),
    }
}

fn cmd_attack(a: AttackArgs) -> Result<()> {
    let report = match a.kind {
        AttackKindArg::Resistance => {
            let mut inst = proposed_instance(a.dim, a.m, a.seed.seed)?;
            let n =
                a.n.clone()
                    .unwrap_or_else(|| BigInt::from(1_000_000_000u64));
            run_resistance(&mut inst, a.case, a.trials, &n, a.paillier_bits)?
        }
        AttackKindArg::Level1 => {
            let mut inst = baseline_instance(a.dim, a.m, a.seed.seed)?;
            let n = a.n.clone().unwrap_or_else(|| baseline_n(&inst.key));
            let (pk, sk) = sknn_core::paillier::keygen(a.paillier_bits, &mut inst.rng)?;
            let mut oracle = BaselineOracle::new(&inst.key, pk, sk, inst.rng.clone());
            let mut report = level1_attack(&mut oracle, &n)?;
            judge_columns(&mut report, &inst.key);
            report
        }
        AttackKindArg::Level2 | AttackKindArg::QueryRecovery => {
            let mut inst = baseline_instance(a.dim, a.m, a.seed.seed)?;
            let n = a.n.clone().unwrap_or_else(|| baseline_n(&inst.key));
            let run = run_baseline_attack(&mut inst, a.known, &n, a.paillier_bits)?;
            if matches!(a.kind, AttackKindArg::Level2) {
                run.level2
            } else {
                run.query
            }
        }
    };
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(path) = &a.out {
        fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    if a.json {
        println!("{json}");
    } else {
        print!("{}", verdict_table(&report));
    }
    let verdict = report
        .verdict
        .as_ref()
        .ok_or_else(|| anyhow!("report carries no verdict"))?;
    let broken = verdict.matched;
    match a.kind {
        AttackKindArg::Resistance if broken => Err(Inconclusive(verdict.detail.clone()).into()),
        AttackKindArg::Resistance => Ok(()),
        _ if broken => Ok(()),
        _ => Err(Inconclusive(verdict.detail.clone()).into()),
    }
}

fn verdict_table(report: &AttackReport) -> String {
    let mut rows: Vec<(String, String)> = vec![
        (
            "attack".into(),
            serde_json::to_value(report.attack)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
        ),
        ("trials".into(), report.trials.to_string()),
    ];
    if let Some(beta) = &report.recovered.beta {
        rows.push(("beta".into(), beta.to_string()));
    }
    if !report.recovered.shift.is_empty() {
        let s: Vec<String> = report.recovered.shift.iter().map(format_rational).collect();
        rows.push(("shift".into(), format!("({})", s.join(", "))));
    }
    if !report.recovered.query.is_empty() {
        let q: Vec<String> = report.recovered.query.iter().map(format_rational).collect();
        rows.push(("query".into(), format!("({})", q.join(", "))));
    }
    if !report.recovered.database.is_empty() {
        rows.push(("rows".into(), report.recovered.database.len().to_string()));
    }
    if let Some(d) = report.stats.distinct_candidates {
        rows.push(("distinct".into(), d.to_string()));
    }
    if let Some(p) = report.stats.predicted_collision_probability {
        rows.push(("p(collision)".into(), format!("{p:e}")));
    }
    if let Some(v) = &report.verdict {
        rows.push(("matches".into(), format!("{}/{}", v.matches, v.total)));
        rows.push((
            "verdict".into(),
            if v.matched { "MATCH" } else { "NO-MATCH" }.into(),
        ));
        rows.push(("detail".into(), v.detail.clone()));
    }
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let grid = BenchGrid {
        schemes: a.schemes,
        dims: a.dims,
        sizes: a.sizes,
        repetitions: a.repetitions,
        k: a.k,
        paillier_bits: a.paillier_bits,
        seed: a.seed.seed,
    };
    let rows = bench(&grid)?;
    let mut buf = Vec::new();
    write_bench_csv(&rows, &mut buf)?;
    emit(a.out.as_deref(), &String::from_utf8(buf)?)
}
