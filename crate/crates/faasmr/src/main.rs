use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use faasmr::bench::{self, SweepConfig};
use faasmr::orchestrator::{run_job, JobConfig};
use faasmr::runtime::{Runtime, RuntimeOptions};
use faasmr::store::{FsStore, StoreKind};
use faasmr::wordcount::{register_wordcount, FaultPlan, WordCountFunctions};
use faasmr_core::corpus::{generate_corpus, CorpusGenerator, CorpusSpec};
use faasmr_core::keys::{invocation_log_key, result_key, validate_job_id};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "faasmr",
    version,
    about = "Serverless MapReduce word counting and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corpus into an on-disk object store.
    Gen(GenArgs),
    /// Run one word-count job.
    Run(RunArgs),
    /// Sweep function counts and write bench.csv and report.txt.
    Bench(BenchArgs),
    /// Render the table and trend verdict from a persisted bench.csv.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long, default_value_t = 50)]
    files: usize,
    #[arg(long, default_value_t = 50_000)]
    words_per_file: usize,
    #[arg(long, default_value_t = 10_000)]
    vocab: usize,
    #[arg(long, default_value_t = 1.0)]
    zipf: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Geometric factor applied to the word count of file i.
    #[arg(long, default_value_t = 1.0)]
    skew: f64,
}

impl CorpusArgs {
    /// Validated corpus spec; errors are usage errors.
    fn spec(&self) -> Result<CorpusSpec, Failure> {
        let spec = CorpusSpec {
            num_files: self.files,
            words_per_file: self.words_per_file,
            vocab_size: self.vocab,
            zipf_s: self.zipf,
            seed: self.seed,
            skew: self.skew,
            ..CorpusSpec::default()
        };
        CorpusGenerator::new(spec.clone()).map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StoreArg {
    Mem,
    Fs,
}

#[derive(Args)]
struct RuntimeArgs {
    #[arg(long, value_enum, default_value_t = StoreArg::Mem)]
    store: StoreArg,
    /// Sleep in proportion to busy time to mimic the configured vCPU share.
    #[arg(long)]
    cpu_throttle: bool,
    /// Latency added to the first invocation of each function, in ms.
    #[arg(long, default_value_t = 0)]
    cold_start: u64,
    /// Per-invocation timeout in ms.
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Make the mapper with this index stall until it times out.
    #[arg(long)]
    inject_map_timeout: Option<usize>,
}

impl RuntimeArgs {
    fn options(&self) -> RuntimeOptions {
        RuntimeOptions {
            cold_start_ms: self.cold_start,
            cpu_throttle: self.cpu_throttle,
        }
    }

    fn store_kind(&self, out: &Path) -> StoreKind {
        match self.store {
            StoreArg::Mem => StoreKind::Mem,
            StoreArg::Fs => StoreKind::Fs(out.join("store")),
        }
    }

    fn functions(&self) -> WordCountFunctions {
        let mut functions = WordCountFunctions::default();
        if let Some(ms) = self.timeout_ms {
            functions = functions.with_timeout_ms(ms);
        }
        functions.faults = FaultPlan {
            stall_mapper: self.inject_map_timeout,
        };
        functions
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1)]
    mappers: usize,
    #[arg(long, default_value_t = 1)]
    reducers: usize,
    /// Maximum concurrent invocations; defaults to fully parallel.
    #[arg(long)]
    concurrency: Option<usize>,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    runtime: RuntimeArgs,
    /// Delete intermediate objects after the reduce phase.
    #[arg(long)]
    cleanup: bool,
    #[arg(long, default_value = "job")]
    job_id: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
    func_counts: Vec<u32>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long)]
    concurrency: Option<usize>,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    runtime: RuntimeArgs,
    /// Sweep mappers and reducers independently.
    #[arg(long)]
    cross: bool,
    #[arg(long)]
    no_warmup: bool,
    /// Keep every job's objects in the store.
    #[arg(long)]
    retain: bool,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Job(String),
}

impl Failure {
    fn job(e: impl std::fmt::Display) -> Self {
        Failure::Job(e.to_string())
    }
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let spec = args.corpus.spec()?;
    let store = FsStore::open(&args.out).map_err(Failure::job)?;
    let corpus = generate_corpus(&spec, &store, "corpus").map_err(Failure::job)?;
    println!(
        "wrote {} files, {} tokens to {}",
        corpus.manifest.len(),
        corpus.total_tokens,
        args.out.display()
    );
    Ok(())
}

fn run(args: RunArgs) -> Result<(), Failure> {
    if args.mappers == 0 || args.reducers == 0 || args.concurrency == Some(0) {
        return Err(Failure::Usage(
            "--mappers, --reducers and --concurrency must be at least 1".into(),
        ));
    }
    validate_job_id(&args.job_id).map_err(|e| Failure::Usage(e.to_string()))?;
    let spec = args.corpus.spec()?;
    fs::create_dir_all(&args.out).map_err(Failure::job)?;
    let store = args
        .runtime
        .store_kind(&args.out)
        .open()
        .map_err(Failure::job)?;
    let runtime = Runtime::new(store.clone(), args.runtime.options());
    register_wordcount(&runtime, &args.runtime.functions())
        .map_err(|e| Failure::Usage(e.to_string()))?;

    let corpus_id = format!("{}-corpus", args.job_id);
    let corpus = generate_corpus(&spec, store.as_ref(), &corpus_id).map_err(Failure::job)?;
    let mut config = JobConfig::new(
        args.job_id.clone(),
        corpus.manifest,
        args.mappers,
        args.reducers,
    );
    config.cleanup_intermediates = args.cleanup;
    if let Some(cap) = args.concurrency {
        config.concurrency_cap = cap;
    }

    let outcome = run_job(&config, &runtime);
    if let Ok(log) = store.get(&invocation_log_key(&args.job_id)) {
        fs::write(args.out.join("invocations.jsonl"), log).map_err(Failure::job)?;
    }
    let metrics = outcome.map_err(Failure::job)?;
    let result = store.get(&result_key(&args.job_id)).map_err(Failure::job)?;
    fs::write(args.out.join("result.tsv"), result).map_err(Failure::job)?;
    fs::write(args.out.join("job-metrics.json"), metrics.to_json()).map_err(Failure::job)?;
    println!(
        "job {}: map {:.2} ms ({:.2}%), reduce {:.2} ms ({:.2}%), wall {:.2} ms, result sha256 {}",
        args.job_id,
        metrics.avg_map_ms,
        metrics.map_pct,
        metrics.avg_reduce_ms,
        metrics.reduce_pct,
        metrics.wall_clock_ms,
        metrics.result_sha256
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let config = SweepConfig {
        sweep_id: "bench".into(),
        func_counts: args.func_counts,
        corpus: args.corpus.spec()?,
        repeats: args.repeats,
        concurrency_cap: args.concurrency,
        tie_mr: !args.cross,
        store: args.runtime.store_kind(&args.out),
        runtime: args.runtime.options(),
        functions: args.runtime.functions(),
        warmup: !args.no_warmup,
        retain_objects: args.retain,
    };
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    fs::create_dir_all(&args.out).map_err(Failure::job)?;
    let report = bench::run_sweep(&config).map_err(Failure::job)?;
    bench::write_outputs(&report, &args.out).map_err(Failure::job)?;
    if !report.rows.is_empty() {
        print!("{}", bench::render_report(&report.rows));
    }
    Ok(())
}

fn report(input: &Path) -> Result<(), Failure> {
    let rows = bench::load_rows(input).map_err(|e| Failure::Usage(e.to_string()))?;
    print!("{}", bench::render_report(&rows));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(args) => gen(args),
        Command::Run(args) => run(args),
        Command::Bench(args) => bench(args),
        Command::Report { input } => report(&input),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Job(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
