//! Command-line driver for approximation experiments.
//!
//! Two subcommands: `sweep` runs every truncation level up to --k-max,
//! `target` runs the bound-selecting approximation for each N in --n-list.
//! Exit codes: 0 success, 1 bound violation, 2 config error, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qpfourier::cli::{self, ExperimentConfig, Mode, OutputFormat};
use qpfourier::Prime;

#[derive(Parser)]
#[command(
    name = "qpfourier",
    version,
    about = "Approximation experiments for step functions on Q_p"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Prime p of the ambient field Q_p.
    #[arg(long)]
    prime: u32,

    /// Function to approximate, in the spec mini-language
    /// (e.g. "indicator:center=1/2,level=-1", "random:level=3,window=1,seed=7",
    /// "sum(a; b)").
    #[arg(long)]
    spec: String,

    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,

    /// Default seed for random specs that carry none.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Include wall-clock times in the output. Off by default so reruns
    /// are byte-identical.
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// One row per truncation level k = 0..=k-max.
    Sweep {
        #[command(flatten)]
        common: Common,

        /// Largest truncation level to include.
        #[arg(long = "k-max")]
        k_max: i32,
    },
    /// One row per target N, each promising total error below t/N.
    Target {
        #[command(flatten)]
        common: Common,

        /// Comma-separated targets, each N >= 1.
        #[arg(long = "n-list", value_delimiter = ',', required = true)]
        n_list: Vec<u64>,
    },
}

fn config_from(common: Common, mode: Mode) -> Result<ExperimentConfig, qpfourier::Error> {
    Ok(ExperimentConfig {
        prime: Prime::new(common.prime)?,
        spec: cli::parse_spec(&common.spec)?,
        mode,
        out: common.out,
        format: common.format,
        seed: common.seed,
        timings: common.timings,
    })
}

fn main() -> ExitCode {
    let parsed = Cli::parse();
    let (common, mode) = match parsed.command {
        Command::Sweep { common, k_max } => (common, Mode::SweepLevels { k_max }),
        Command::Target { common, n_list } => (common, Mode::TargetN { n_list }),
    };
    let result = config_from(common, mode).and_then(|config| cli::run(&config));
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(cli::exit_code(&result) as u8)
}
