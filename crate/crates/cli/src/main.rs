mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{exit_code, Outcome};

#[derive(Parser, Debug)]
#[command(name = "amc", version, about = "Model checking of strategic abilities in asynchronous MAS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write a JSON run report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Include per-phase wall times in the report.
    #[arg(long, global = true)]
    pub timings: bool,
    #[arg(long, global = true, default_value_t = 2_000_000)]
    pub max_states: usize,
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub max_strategies: u128,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the global model and write it in the canonical model format.
    Build {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check sATL formulas at the initial state.
    Check(CheckArgs),
    /// Run the knowledge-based subset construction and write the expanded AMAS.
    Expand {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a partial-order reduced model for a coalition and propositions.
    Reduce(ReduceArgs),
    /// Generate benchmark sources.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Export the full model as Graphviz DOT.
    ExportDot {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Independent checks of the constructions.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyKind {
    #[value(name = "ir")]
    Ir,
    #[value(name = "iR-sound")]
    IrSound,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Semantics {
    Std,
    React,
}

#[derive(Args, Debug)]
pub struct FormulaArgs {
    /// A formula; may be repeated.
    #[arg(long)]
    pub formula: Vec<String>,
    /// A file with one formula per line (`#` starts a comment).
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub formulas: FormulaArgs,
    #[arg(long, value_enum, default_value = "ir")]
    pub strategy: StrategyKind,
    #[arg(long, value_enum, default_value = "std")]
    pub semantics: Semantics,
    /// Write witness strategies (or transducers) to this file.
    #[arg(long)]
    pub witness: Option<PathBuf>,
    /// Exit with status 1 unless every verdict equals this value.
    #[arg(long)]
    pub expect: Option<bool>,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    pub file: PathBuf,
    /// Comma-separated agent names.
    #[arg(long, default_value = "")]
    pub coalition: String,
    /// Comma-separated proposition names.
    #[arg(long, default_value = "")]
    pub props: String,
    /// Cross-check every ample set exactly on the full model, and the
    /// submodel, C2 and C3 conditions.
    #[arg(long)]
    pub validate_c1: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// DOT export of the reduced model, fully expanded states highlighted.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    /// The voting-with-revoting benchmark.
    Asvr {
        #[arg(long)]
        voters: usize,
        #[arg(long)]
        candidates: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random AMAS.
    Random {
        #[arg(long, env = "AMC_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Directory for `random_<seed>.amas` files; stdout if omitted
        /// (only with `--count 1`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Bounded stuttering equivalence of a full and a reduced model file.
    StutterEquiv {
        full: PathBuf,
        reduced: PathBuf,
        #[arg(long, default_value_t = 8)]
        bound: usize,
        /// Propositions to observe; defaults to those recorded in the
        /// reduced model's context line.
        #[arg(long)]
        props: Option<String>,
    },
    /// Bounded-exhaustive simulation of the model by its expansion.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Checks that every expanded state's knowledge sets intersect exactly
    /// in its underlying state.
    Intersection { file: PathBuf },
    /// Compares ir verdicts on the full and reduced models.
    CompareVerdicts {
        file: PathBuf,
        #[arg(long, default_value = "")]
        coalition: String,
        #[arg(long, default_value = "")]
        props: String,
        #[command(flatten)]
        formulas: FormulaArgs,
        /// Semantics to compare under; both when omitted.
        #[arg(long, value_enum)]
        semantics: Option<Semantics>,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let echo = argv.into_iter().skip(1).collect();
    match commands::run(&cli, echo) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
