use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use inertial_core::cli::{run, Command, SessionConfig, EXIT_USAGE};
use inertial_core::exec::Exec;

#[derive(Parser)]
#[command(name = "inertial", version, about = "Inertial endomorphisms of abelian groups: decisions, decompositions and oracles")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Truncation levels, strictly ascending.
    #[arg(long, global = true, value_delimiter = ',', default_value = "2,4,6,8")]
    levels: Vec<u32>,
    /// Random subgroups per level (oracle) or random subspaces (defect).
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Witness levels (oracle) or the cap on p^n for subspace enumeration (defect).
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also enumerate every subgroup of small truncations.
    #[arg(long, global = true)]
    enumerate_all: bool,
    /// Only this endo.
    #[arg(long, global = true)]
    endo: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Parallel)]
    exec: Mode,
    #[arg(long, global = true, hide = true)]
    inject_wrong_verdict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sequential,
    Parallel,
}

#[derive(Subcommand)]
enum Cmd {
    /// Invariants, H-descriptor and NM type of every group.
    Analyze { inputs: Vec<PathBuf> },
    /// Inertial verdict with certificate or violations.
    Check { inputs: Vec<PathBuf> },
    /// Canonical decomposition of inertial endos.
    Decompose { inputs: Vec<PathBuf> },
    /// Level profiles and witness families checked against the verdict.
    Oracle { inputs: Vec<PathBuf> },
    /// Scalar defect and subspace growth of a matrix given as text rows.
    Defect {
        /// `Q` or a prime such as `2` or `F3`.
        #[arg(long)]
        field: String,
        inputs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let (command, inputs, field) = match cli.command {
        Cmd::Analyze { inputs } => (Command::Analyze, inputs, None),
        Cmd::Check { inputs } => (Command::Check, inputs, None),
        Cmd::Decompose { inputs } => (Command::Decompose, inputs, None),
        Cmd::Oracle { inputs } => (Command::Oracle, inputs, None),
        Cmd::Defect { field, inputs } => (Command::Defect, inputs, Some(field)),
    };
    let mut cfg = SessionConfig::new(command, inputs);
    cfg.levels = cli.levels;
    cfg.samples = cli.samples;
    cfg.seed = cli.seed;
    cfg.budget = cli.budget;
    cfg.out = cli.out;
    cfg.enumerate_all = cli.enumerate_all;
    cfg.endo = cli.endo;
    cfg.field = field;
    cfg.exec = match cli.exec {
        Mode::Sequential => Exec::Sequential,
        Mode::Parallel => Exec::Parallel,
    };
    cfg.inject_wrong_verdict = cli.inject_wrong_verdict;

    let outcome = run(&cfg);
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    if let Some(report) = &outcome.report {
        match &cfg.out {
            Some(path) => {
                if let Err(e) = std::fs::write(path, format!("{report}\n")) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            }
            None => println!("{report}"),
        }
    }
    ExitCode::from(outcome.code as u8)
}
