use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nepec_cli::config::{ExperimentConfig, ExperimentKind, Overrides, Settings};
use nepec_cli::experiments;
use nepec_cli::table::ResultTable;
use nepec_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "nepec", version, about = "Noise-scaled quasi-probability error mitigation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed; falls back to the config file, then NEPEC_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo samples per point.
    #[arg(long)]
    samples: Option<usize>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampling threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Use a fresh RB circuit of this depth.
    #[arg(long)]
    rb_depth: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Miscalibrated PEC vs noise-agnostic extrapolation over actual noise levels.
    Fig2(Common),
    /// Error reduction over a grid of virtual noise levels.
    Fig3a {
        #[command(flatten)]
        common: Common,
        /// Also write per-batch means to this CSV.
        #[arg(long)]
        batches_out: Option<PathBuf>,
    },
    /// PEC, error reduction and virtual ZNE on one budget.
    Fig3b(Common),
    /// Amplitude-damping cost table.
    Ampdamp(Common),
    /// Convexity of scaled noise and extended-basis LP costs.
    Nogo(Common),
    /// LP-optimal decomposition of a target over a basis.
    Decompose {
        #[arg(long)]
        target: PathBuf,
        /// Basis file(s), each a superoperator or a list of them.
        #[arg(long, required = true, num_args = 1..)]
        basis: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random RB circuit as JSON.
    RbGen {
        #[arg(long)]
        rb_depth: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn settings(kind: ExperimentKind, common: &Common) -> Result<Settings> {
    let file = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let flags = Overrides {
        seed: common.seed,
        samples: common.samples,
        out: common.out.clone(),
        workers: common.workers,
        rb_depth: common.rb_depth,
    };
    Settings::resolve(kind, &file, &flags)
}

fn emit(table: &ResultTable, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => table.write(path),
        None => {
            print!("{}", table.to_csv());
            Ok(())
        }
    }
}

fn print_json(doc: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(doc).expect("JSON values serialize"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fig2(common) => {
            let s = settings(ExperimentKind::Fig2, &common)?;
            emit(&experiments::run_fig2(&s)?, s.out.as_deref())
        }
        Command::Fig3a { common, batches_out } => {
            let s = settings(ExperimentKind::Fig3a, &common)?;
            let (table, batches) = experiments::run_fig3a(&s)?;
            if let Some(path) = batches_out {
                std::fs::write(&path, experiments::batch_means_csv(&batches))
                    .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
            }
            emit(&table, s.out.as_deref())
        }
        Command::Fig3b(common) => {
            let s = settings(ExperimentKind::Fig3b, &common)?;
            emit(&experiments::run_fig3b(&s)?, s.out.as_deref())
        }
        Command::Ampdamp(common) => {
            let s = settings(ExperimentKind::AmpDamp, &common)?;
            emit(&experiments::run_ampdamp(&s)?, s.out.as_deref())
        }
        Command::Nogo(common) => {
            let s = settings(ExperimentKind::NoGo, &common)?;
            emit(&experiments::run_nogo(&s)?, s.out.as_deref())
        }
        Command::Decompose { target, basis, out } => {
            let doc = experiments::run_decompose(&target, &basis, out.as_deref())?;
            if out.is_none() {
                print_json(&doc);
            }
            Ok(())
        }
        Command::RbGen { rb_depth, seed, out } => {
            let seed = match seed {
                Some(s) => s,
                None => settings(ExperimentKind::Fig2, &Common::default())?.seed,
            };
            let doc = experiments::run_rb_gen(rb_depth, seed, out.as_deref())?;
            if out.is_none() {
                print_json(&doc);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nepec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
