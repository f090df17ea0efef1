//! `permfft`: permutation-test p-values from the command line.
//!
//! Three subcommands: `pvalue` estimates a p-value from a tabular data
//! file, `bench` times one FFT batch against plain Monte Carlo draws,
//! and `verify` runs the internal verification suites. Successful runs
//! print one JSON object; failures print a one-line JSON error object
//! and exit 1 (parse), 2 (config), 3 (degenerate input), or 4 (verify
//! failure).

mod bench;
mod input;
mod output;
mod pvalue;
mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatArg {
    Pearson,
    Spearman,
    MannWhitney,
    KruskalWallis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Fft,
    FftMedian,
    Naive,
    Exact,
    Conservative,
}

impl MethodArg {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodArg::Fft => "fft",
            MethodArg::FftMedian => "fft-median",
            MethodArg::Naive => "naive",
            MethodArg::Exact => "exact",
            MethodArg::Conservative => "conservative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    Lattice,
    Characters,
    Bounds,
    Covariance,
    Conservative,
    All,
}

#[derive(Debug, Parser)]
#[command(
    name = "permfft",
    version,
    about = "FFT-accelerated permutation-test p-values"
)]
struct Cli {
    /// Size of the worker thread pool; when unset, RAYON_NUM_THREADS or
    /// the machine's core count decides.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a permutation p-value from a CSV or TSV file
    Pvalue(PvalueArgs),
    /// Time one FFT batch against n plain Monte Carlo draws per size
    Bench(BenchArgs),
    /// Run the internal verification suites
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct PvalueArgs {
    /// Test statistic
    #[arg(long, value_enum)]
    stat: StatArg,

    /// Estimation method; fft switches to the median wrapper on its own
    /// when delta is small enough to need it
    #[arg(long, value_enum, default_value_t = MethodArg::Fft)]
    method: MethodArg,

    /// Relative accuracy target: the estimate is within epsilon*sqrt(p)
    /// of p with probability 1 - delta
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,

    /// Failure probability of the accuracy guarantee
    #[arg(long, default_value_t = 0.05)]
    delta: f64,

    /// Variance constant in the batch-count formula C / (delta n eps^2)
    #[arg(long = "C", default_value_t = 2.0)]
    c: f64,

    /// RNG seed; drawn from entropy (and reported in the output) when absent
    #[arg(long)]
    seed: Option<u64>,

    /// Extra sampled blocks for the conservative method; its output grid
    /// is {r / (n (i_max + 1))}
    #[arg(long = "i-max", default_value_t = 99)]
    i_max: u64,

    /// Repeat count for fft-median (odd); derived from delta when absent
    #[arg(long)]
    repeats: Option<u64>,

    /// Input file: paired statistics read two numeric columns, grouped
    /// statistics read long-format (value, group) rows
    #[arg(long)]
    input: PathBuf,

    /// 0-based column indices as "a,b"
    #[arg(long, default_value = "0,1")]
    columns: String,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated input sizes
    #[arg(long, default_value = "4096,16384,65536")]
    sizes: String,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Timed repetitions per size; the median is reported
    #[arg(long, default_value_t = 5)]
    reps: u32,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = ScopeArg::All)]
    scope: ScopeArg,

    /// Largest n for the exact algebraic sweeps (4..=22)
    #[arg(long = "max-n", default_value_t = 14)]
    max_n: usize,

    /// Trials for the conservative-estimator uniformity check
    #[arg(long, default_value_t = 20000)]
    trials: u64,

    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn entropy_seed() -> u64 {
    use std::collections::hash_map::RandomState;
    use std::hash::{BuildHasher, Hasher};
    RandomState::new().build_hasher().finish()
}

fn parse_columns(spec: &str) -> Result<(usize, usize), Failure> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(Failure::config(format!(
            "--columns wants two comma-separated indices, got {spec:?}"
        )));
    }
    let a: usize = parts[0]
        .trim()
        .parse()
        .map_err(|_| Failure::config(format!("bad column index {:?}", parts[0])))?;
    let b: usize = parts[1]
        .trim()
        .parse()
        .map_err(|_| Failure::config(format!("bad column index {:?}", parts[1])))?;
    if a == b {
        return Err(Failure::config(format!(
            "--columns indices must differ, got {spec:?}"
        )));
    }
    Ok((a, b))
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>, Failure> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Failure::config(format!("bad size {:?} in --sizes", s)))
        })
        .collect()
}

fn run(command: Command) -> Result<Option<String>, Failure> {
    match command {
        Command::Pvalue(args) => {
            let columns = parse_columns(&args.columns)?;
            let seed = args.seed.unwrap_or_else(entropy_seed);
            let req = pvalue::PvalueRequest {
                stat: args.stat,
                method: args.method,
                epsilon: args.epsilon,
                delta: args.delta,
                c: args.c,
                seed,
                i_max: args.i_max,
                repeats: args.repeats,
                input: &args.input,
                columns,
            };
            let record = pvalue::run(&req)?;
            Ok(Some(
                serde_json::to_string(&record).expect("result record serializes"),
            ))
        }
        Command::Bench(args) => {
            let sizes = parse_sizes(&args.sizes)?;
            let report = bench::run(&sizes, args.seed, args.reps)?;
            Ok(Some(
                serde_json::to_string(&report).expect("bench report serializes"),
            ))
        }
        Command::Verify(args) => {
            let cfg = verify::VerifyConfig {
                scope: args.scope,
                max_n: args.max_n,
                trials: args.trials,
                seed: args.seed,
            };
            verify::run(&cfg)?;
            Ok(None)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            let message = e
                .render()
                .to_string()
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("bad arguments")
                .to_string();
            eprint!("{e}");
            let failure = Failure::config(message);
            println!("{}", failure.to_json());
            std::process::exit(failure.exit);
        }
    };

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            let failure = Failure::config(format!("cannot size the thread pool: {e}"));
            eprintln!("error: {}", failure.message);
            println!("{}", failure.to_json());
            std::process::exit(failure.exit);
        }
    }

    match run(cli.command) {
        Ok(Some(json)) => println!("{json}"),
        Ok(None) => {}
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            println!("{}", failure.to_json());
            std::process::exit(failure.exit);
        }
    }
}
