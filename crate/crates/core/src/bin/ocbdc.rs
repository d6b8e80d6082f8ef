// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Operator entry points. Exit status: 0 success, 2 bad configuration,
//! 3 failed verification (violated property, corrupt or invalid data),
//! 4 I/O failure.

use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::sync::atomic::AtomicBool;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use ocbdc_core::bank::{BankConfig, CentralBank, Clock, StoreError};
use ocbdc_core::bench;
use ocbdc_core::inspect::{self, InspectError};
use ocbdc_core::proof::{BackendKind, MockBackend, ProofBackend, RelationId, SnarkBackend};
use ocbdc_core::sim::{self, Scenario, ScenarioError, Workload};
use ocbdc_core::transport::{ChannelModel, tcp};

const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "ocbdc", version, about = "Offline-capable CBDC payments: bank service, simulator and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the central bank service over TCP.
    Serve(ServeArgs),
    /// Run a scenario file, a built-in scenario or a consumer workload.
    Scenario(ScenarioArgs),
    /// Measure bank, wallet and proof-system performance.
    Bench(BenchArgs),
    /// Dump a ledger log or a wallet file.
    Inspect(InspectArgs),
    /// Generate proving keys for the SNARK backend.
    Keygen(KeygenArgs),
}

#[derive(Args, Serialize, Clone)]
struct BackendArgs {
    /// Proof backend.
    #[arg(long, value_enum, default_value_t = Backend::Mock)]
    backend: Backend,
    /// Directory holding SNARK proving keys.
    #[arg(long, default_value = "keys")]
    keys: PathBuf,
    /// Seed for everything randomised.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Backend {
    Mock,
    Snark,
}

#[derive(Args, Serialize)]
struct ServeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    backend: BackendArgs,
    #[arg(long, default_value = "127.0.0.1:7878")]
    listen: String,
    /// Append-only ledger log; registry, audit and key files sit next to it.
    #[arg(long, default_value = "ledger.log")]
    ledger_path: PathBuf,
    #[arg(long, default_value_t = 86_400)]
    epoch_seconds: u64,
    #[arg(long, default_value_t = 30)]
    delta_sync: u32,
    /// Largest holding limit accepted at enrollment.
    #[arg(long, default_value_t = 1_000_000)]
    max_holding_limit: u64,
}

#[derive(Args, Serialize)]
struct ScenarioArgs {
    #[command(flatten)]
    #[serde(flatten)]
    backend: BackendArgs,
    /// Scenario file (TOML).
    #[arg(long, conflicts_with_all = ["builtin", "workload"])]
    scenario: Option<PathBuf>,
    /// Built-in scenario.
    #[arg(long, value_enum, conflicts_with = "workload")]
    builtin: Option<Builtin>,
    /// Generated consumer workload.
    #[arg(long, value_enum)]
    workload: Option<WorkloadArg>,
    #[arg(long, default_value_t = 20)]
    consumers: usize,
    #[arg(long, default_value_t = 1.3)]
    payments_per_day: f64,
    /// Override the scenario's epoch length.
    #[arg(long)]
    epoch_seconds: Option<u64>,
    /// Override the scenario's synchronisation tolerance.
    #[arg(long)]
    delta_sync: Option<u32>,
    /// Override the proximity link bitrate (bit/s).
    #[arg(long)]
    bitrate: Option<f64>,
    /// Use --seed instead of the scenario's own seed.
    #[arg(long)]
    reseed: bool,
    /// Print the scenario as TOML instead of running it.
    #[arg(long)]
    emit: bool,
    /// Write trace, metrics, timings and summary here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Persist the bank's ledger here instead of keeping it in memory.
    #[arg(long)]
    ledger_path: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Builtin {
    DoubleSpend,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum WorkloadArg {
    OutageDay,
    Week,
    Month,
    HalfYear,
}

impl From<WorkloadArg> for Workload {
    fn from(w: WorkloadArg) -> Self {
        match w {
            WorkloadArg::OutageDay => Workload::OutageDay,
            WorkloadArg::Week => Workload::Week,
            WorkloadArg::Month => Workload::Month,
            WorkloadArg::HalfYear => Workload::HalfYear,
        }
    }
}

#[derive(Args, Serialize)]
struct BenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    backend: BackendArgs,
    /// Offline payments to push through the bank.
    #[arg(long, default_value_t = 10_000)]
    payments: usize,
    /// Repetitions per relation for prove/verify timing.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Unsigned history sizes for the payment size sweep.
    #[arg(long, value_delimiter = ',', default_value = "1,51,101")]
    sizes: Vec<usize>,
    /// Consumer workloads to run (empty for none).
    #[arg(long, value_enum, value_delimiter = ',')]
    workloads: Vec<WorkloadArg>,
    #[arg(long, default_value_t = 20)]
    consumers: usize,
    #[arg(long, default_value_t = 1.3)]
    payments_per_day: f64,
    /// Proximity link bitrate (bit/s) for transfer estimates.
    #[arg(long)]
    bitrate: Option<f64>,
    /// Also write the reports as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    /// Ledger log or wallet file.
    path: PathBuf,
    /// Show identities, balances and limits in wallet dumps.
    #[arg(long)]
    reveal: bool,
}

#[derive(Args, Serialize)]
struct KeygenArgs {
    /// Output directory.
    #[arg(long, default_value = "keys")]
    out: PathBuf,
    /// Relations to generate keys for (default: all).
    #[arg(long, value_delimiter = ',')]
    relations: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(m: impl ToString) -> Self {
        Self { code: EXIT_CONFIG, message: m.to_string() }
    }
    fn verify(m: impl ToString) -> Self {
        Self { code: EXIT_VERIFY, message: m.to_string() }
    }
    fn io(m: impl ToString) -> Self {
        Self { code: EXIT_IO, message: m.to_string() }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Self::config(e)
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Io { .. } => Self::io(e),
            StoreError::Corrupt { .. } => Self::verify(e),
        }
    }
}

fn print_config<T: Serialize>(command: &str, args: &T) {
    let json = serde_json::to_string(args).expect("config serialises");
    eprintln!("ocbdc {command} effective config: {json}");
}

fn load_backend(args: &BackendArgs) -> Result<Arc<dyn ProofBackend>, Failure> {
    match args.backend {
        Backend::Mock => Ok(Arc::new(MockBackend::from_seed(args.seed))),
        Backend::Snark => {
            let snark = SnarkBackend::load(&args.keys).map_err(Failure::config)?;
            if snark.relations().len() < RelationId::ALL.len() {
                return Err(Failure::config(format!(
                    "missing SNARK proving keys in {}; generate them with `ocbdc keygen --out {}`",
                    args.keys.display(),
                    args.keys.display()
                )));
            }
            Ok(Arc::new(snark))
        }
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    print_config("serve", &args);
    let backend = load_backend(&args.backend)?;
    let config = BankConfig {
        epoch_seconds: args.epoch_seconds,
        delta_sync: args.delta_sync,
        max_holding_limit: args.max_holding_limit,
        ..BankConfig::default()
    };
    if config.epoch_seconds == 0 {
        return Err(Failure::config("--epoch-seconds must be positive"));
    }
    let seed = args.backend.seed;
    let bank = CentralBank::open(&args.ledger_path, config, &seed.to_be_bytes(), backend, Clock::System, seed)?;
    let bank = Arc::new(bank);
    let listener = TcpListener::bind(&args.listen).map_err(|e| Failure::io(format!("{}: {e}", args.listen)))?;
    eprintln!(
        "serving on {} with {} ledger rows, bank key {}",
        listener.local_addr().map_or(args.listen.clone(), |a| a.to_string()),
        bank.ledger_len(),
        hex::encode(bank.verifying_key().to_bytes())
    );
    tcp::serve(bank, listener, Arc::new(AtomicBool::new(false))).map_err(Failure::io)
}

fn scenario(args: ScenarioArgs) -> Result<(), Failure> {
    print_config("scenario", &args);
    let mut s = match (&args.scenario, args.builtin, args.workload) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            Scenario::from_toml(&text)?
        }
        (None, Some(Builtin::DoubleSpend), _) => sim::scenario::double_spend_example(),
        (None, None, Some(w)) => {
            sim::scenario::consumer_workload(w.into(), args.consumers, args.payments_per_day, args.backend.seed)
        }
        (None, None, None) => return Err(Failure::config("one of --scenario, --builtin or --workload is required")),
    };
    if args.reseed {
        s.seed = args.backend.seed;
    }
    if let Some(e) = args.epoch_seconds {
        s.epoch_seconds = e;
    }
    if let Some(d) = args.delta_sync {
        s.delta_sync = d;
    }
    if let Some(b) = args.bitrate {
        if !(b > 0.0) {
            return Err(Failure::config("--bitrate must be positive"));
        }
        s.proximity.bitrate_bps = b;
    }
    s.validate()?;
    if args.emit {
        print!("{}", s.to_toml());
        return Ok(());
    }
    let backend = load_backend(&args.backend)?;
    let out = match &args.ledger_path {
        None => sim::run_scenario(&s, backend)?,
        Some(path) => {
            let bank = CentralBank::open(
                path,
                sim::bank_config(&s),
                &s.seed.to_be_bytes(),
                backend.clone(),
                Clock::virtual_at(0),
                s.seed,
            )?;
            let mut run = sim::Simulation::new(&s, backend, Arc::new(bank))?;
            for ev in run.events() {
                run.step(&ev);
            }
            run.finish()
        }
    };
    let mut summary = out.metrics.summary();
    summary.push_str("properties\n");
    for p in &out.properties {
        let status = match p.status {
            sim::Status::Pass => "pass",
            sim::Status::Fail => "FAIL",
            sim::Status::NotApplicable => "n/a",
        };
        summary.push_str(&format!("  {:<32} {:<5} {}\n", p.name, status, p.detail));
    }
    print!("{summary}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
        write(&dir.join("scenario.toml"), s.to_toml())?;
        write(&dir.join("trace.jsonl"), out.trace_jsonl())?;
        write(&dir.join("metrics.json"), serde_json::to_string_pretty(&out.metrics).expect("serialises"))?;
        write(&dir.join("properties.json"), serde_json::to_string_pretty(&out.properties).expect("serialises"))?;
        write(&dir.join("timings.json"), serde_json::to_string_pretty(&out.timings).expect("serialises"))?;
        write(&dir.join("summary.txt"), &summary)?;
    }
    if out.all_properties_hold() { Ok(()) } else { Err(Failure::verify("a property check failed")) }
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    print_config("bench", &args);
    let backend = load_backend(&args.backend)?;
    let seed = args.backend.seed;
    let kind = backend.kind();
    let mut json = serde_json::Map::new();

    if args.reps > 0 {
        let relations = bench::relation_bench(&*backend, &RelationId::ALL, args.reps, seed).map_err(Failure::verify)?;
        print!("{}", bench::relation_table(&relations, kind));
        println!();
        json.insert("relations".into(), serde_json::to_value(&relations).expect("serialises"));
    }

    let report = bench::bank_bench(backend.clone(), args.payments, seed).map_err(Failure::verify)?;
    print!("{}", report.table());
    if kind == BackendKind::Snark && args.payments > 0 {
        let ms = |op: &str| report.bank.mean(op) * 1e3;
        println!(
            "  bank verification per payment: {:.2} ms (prototype: 7 ms, 143 payments/s)",
            ms(bench::OP_CREATION) + ms(bench::OP_COMPLETION)
        );
    }
    json.insert("bank".into(), serde_json::to_value(&report).expect("serialises"));

    let mut proximity = ChannelModel::proximity();
    if let Some(b) = args.bitrate {
        proximity.bitrate_bps = b;
    }
    if !args.sizes.is_empty() && args.payments > 0 {
        let rows = bench::payment_size_sweep(backend.clone(), &args.sizes, seed).map_err(Failure::verify)?;
        println!();
        print!("{}", bench::size_table(&rows, proximity));
        json.insert("payment_sizes".into(), serde_json::to_value(&rows).expect("serialises"));
    }
    if !args.workloads.is_empty() {
        let mut rows = Vec::new();
        for w in &args.workloads {
            rows.push(bench::workload_bench(
                backend.clone(),
                (*w).into(),
                args.consumers,
                args.payments_per_day,
                seed,
            )?);
        }
        println!();
        print!("{}", bench::workload_table(&rows));
        json.insert("workloads".into(), serde_json::to_value(&rows).expect("serialises"));
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
        write(&dir.join("bench.json"), serde_json::to_string_pretty(&json).expect("serialises"))?;
    }
    Ok(())
}

fn inspect(args: InspectArgs) -> Result<(), Failure> {
    match inspect::inspect_path(&args.path, args.reveal) {
        Ok(text) => {
            print!("{text}");
            Ok(())
        }
        Err(e @ InspectError::Io { .. }) => Err(Failure::io(e)),
        Err(e @ InspectError::Ledger(StoreError::Io { .. })) => Err(Failure::io(e)),
        Err(e @ InspectError::Wallet { source: ocbdc_core::wallet::PersistError::Io(_), .. }) => Err(Failure::io(e)),
        Err(e) => Err(Failure::verify(e)),
    }
}

fn keygen(args: KeygenArgs) -> Result<(), Failure> {
    print_config("keygen", &args);
    let relations = if args.relations.is_empty() {
        RelationId::ALL.to_vec()
    } else {
        args.relations
            .iter()
            .map(|n| {
                RelationId::ALL
                    .into_iter()
                    .find(|r| r.name() == n)
                    .ok_or_else(|| Failure::config(format!("unknown relation '{n}'")))
            })
            .collect::<Result<_, _>>()?
    };
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let snark = SnarkBackend::setup_relations(&relations, &mut rng).map_err(Failure::verify)?;
    snark.save(&args.out).map_err(Failure::io)?;
    eprintln!("wrote {} proving keys to {}", relations.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(a) => serve(a),
        Command::Scenario(a) => scenario(a),
        Command::Bench(a) => bench(a),
        Command::Inspect(a) => inspect(a),
        Command::Keygen(a) => keygen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
