mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dwarith::Error;

#[derive(Parser, Debug)]
#[command(name = "dwarith", version, about = "Double-word arithmetic: verification sweeps, error statistics, benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run bound and property sweeps on the software engine.
    Verify(VerifyArgs),
    /// Modified relative error statistics of MAA over random binary64 inputs.
    Errstats(ErrstatsArgs),
    /// Evaluate the registered counterexamples.
    Counterexample,
    /// Operation counts and GEMM throughput of the MAA variants.
    Bench(BenchArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    Lemma2,
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Direction,
    ProductOverlap,
    Eft,
    All,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub theorem: Theorem,
    /// Precision of the software engine.
    #[arg(long, default_value_t = 6)]
    pub p: u32,
    /// Restrict to one rounding policy: rn-even, rn-away, rd, ru, faithful.
    #[arg(long, alias = "policy")]
    pub mode: Option<String>,
    /// Small budgets for a smoke run.
    #[arg(long)]
    pub quick: bool,
    /// Grid cases per policy before high-part pairs are strided.
    #[arg(long)]
    pub max_grid: Option<u64>,
    #[arg(long)]
    pub pairs_per_hi: Option<usize>,
    #[arg(long)]
    pub random_lows: Option<usize>,
    /// Random cases per policy after the grid.
    #[arg(long)]
    pub random_cases: Option<u64>,
    /// Random binary64 cases for product-overlap and eft.
    #[arg(long)]
    pub native_cases: Option<u64>,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct ErrstatsArgs {
    /// Triples per trial.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Error-table row (no-no, no-yes, yes-no, yes-yes) or all.
    #[arg(long, default_value = "all")]
    pub row: String,
    /// Explicit variant as key=value pairs; overrides --row.
    #[arg(long)]
    pub variant: Option<String>,
    /// Low-part generator: uniform, zero or both.
    #[arg(long, default_value = "uniform")]
    pub generator: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    /// Only print the operation-count table.
    #[arg(long)]
    pub count_only: bool,
    #[arg(long, default_value_t = 64)]
    pub m: usize,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub k: usize,
    /// Few repetitions, for a quick check that everything runs.
    #[arg(long)]
    pub smoke: bool,
    /// Timed repetitions (DWARITH_BENCH_REPS overrides).
    #[arg(long)]
    pub reps: Option<usize>,
    /// One variant as key=value pairs instead of every table row.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn run(cli: Cli) -> dwarith::Result<bool> {
    let outcome = match &cli.command {
        Command::Verify(a) => commands::verify(a)?,
        Command::Errstats(a) => commands::errstats(a)?,
        Command::Counterexample => commands::counterexample()?,
        Command::Bench(a) => commands::bench(a)?,
    };
    let text = outcome.render(cli.format)?;
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Usage(_) | Error::Parse(_) | Error::UnsupportedPrecision(_))) => {
            eprintln!("dwarith: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("dwarith: {e}");
            ExitCode::from(1)
        }
    }
}
