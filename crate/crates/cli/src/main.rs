//! `buymany`: batch front end for the pricing workbench.
//!
//! Every subcommand writes one CSV document to stdout or `--out`. Exit codes:
//! 0 on success, 2 when the input or parameters are invalid, 3 when a
//! checked inequality fails beyond tolerance (the CSV is still written).

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod experiments;
mod inputs;
mod output;

#[derive(Parser, Debug)]
#[command(name = "buymany", version, about = "Buy-many pricing experiments")]
struct Cli {
    /// Write the CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores. BUYMANY_THREADS
    /// takes precedence when set.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monotonicity and subadditivity report for a pricing.
    Verify(inputs::VerifyArgs),
    /// Explicit buy-many closure of a list of set offers.
    Closure(inputs::ClosureArgs),
    /// Revenue of a pricing next to the best item and bundle pricings.
    Revenue(inputs::RevenueArgs),
    /// Scaled additive-extension bounds, one row per buyer type.
    Scale(inputs::ScaleArgs),
    /// Item floors, adaptive acquisition cost and dominance for a lottery menu.
    Lottery(inputs::LotteryArgs),
    /// Gap reports for random set-system instances, one row per value draw.
    Lowerbound(experiments::LowerboundArgs),
    /// Core-tail decomposition reports for random product demands.
    Coretail(experiments::CoretailArgs),
    /// Revenue of the n-item example across pricing families.
    Hartnisan(experiments::HartnisanArgs),
}

/// Why a subcommand did not exit 0.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    /// Output was written, but these checks failed.
    Violated(Vec<String>),
}

impl Failure {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Failure::Invalid(msg.into())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Invalid(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Violated(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(msg) => write!(f, "error: {msg}"),
            Failure::Violated(list) => {
                write!(f, "violated:")?;
                for v in list {
                    write!(f, "\n  {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl From<buymany::Error> for Failure {
    fn from(e: buymany::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Invalid(format!("writing output: {e}"))
    }
}

pub fn read_json<D: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<D, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    buymany::io::from_json(&text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

const THREADS_ENV: &str = "BUYMANY_THREADS";

fn init_threads(flag: Option<usize>) -> Result<(), Failure> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Failure::invalid(format!("{THREADS_ENV}={v:?} is not a thread count")))?,
        ),
        Err(_) => flag,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    builder
        .build_global()
        .map_err(|e| Failure::invalid(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads(cli.threads)?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Verify(a) => inputs::verify(&a, out),
        Command::Closure(a) => inputs::closure(&a, out),
        Command::Revenue(a) => inputs::revenue(&a, out),
        Command::Scale(a) => inputs::scale(&a, out),
        Command::Lottery(a) => inputs::lottery(&a, out),
        Command::Lowerbound(a) => experiments::lowerbound(a, out),
        Command::Coretail(a) => experiments::coretail(a, out),
        Command::Hartnisan(a) => experiments::hartnisan(a, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
