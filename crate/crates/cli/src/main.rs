//! `teamcount` command-line front end.

mod commands;
mod input;
mod oracle;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::input::UsageError;

#[derive(Parser, Debug)]
#[command(name = "teamcount", version, about = "Evaluate, count and reduce team-logic formulas")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Structure file.
    #[arg(long, global = true, value_name = "FILE")]
    pub structure: Option<PathBuf>,
    /// Formula file, `builtin:NAME`, or inline text. DIMACS for CNF commands.
    #[arg(long, global = true, value_name = "FILE|builtin:NAME|TEXT")]
    pub formula: Option<String>,
    /// Team file, `empty` or `full`.
    #[arg(long, global = true, value_name = "FILE|empty|full")]
    pub team: Option<String>,
    /// Comma-separated variable tuple.
    #[arg(long, global = true, value_name = "LIST")]
    pub vars: Option<String>,
    /// Assignment counting mode.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Projected)]
    pub mode: Mode,
    /// Cross-check results against brute-force oracles.
    #[arg(long, global = true)]
    pub verify: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Limit on enumeration steps.
    #[arg(long, global = true, value_name = "N")]
    pub budget: Option<u64>,
    /// Where to write emitted instances.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Print only the main result.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    All,
    Star,
    Projected,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether the team satisfies the formula.
    Eval {
        #[arg(long, value_enum, default_value_t = StrategyArg::Optimized)]
        strategy: StrategyArg,
    },
    /// Count nonempty teams over --vars satisfying the formula.
    CountTeams {
        #[arg(long, value_enum, default_value_t = TeamMethod::Auto)]
        method: TeamMethod,
    },
    /// Count relations and tuples satisfying a first-order query.
    CountRelations {
        /// Counted relations, e.g. `R/1,S/2`; ignored for built-ins.
        #[arg(long, value_name = "LIST")]
        relations: Option<String>,
        /// Skip the choice where every counted relation is empty.
        #[arg(long)]
        nonempty: bool,
    },
    /// Count assignments of a DIMACS formula.
    CountSat {
        #[arg(long, value_enum, default_value_t = SatMethod::Search)]
        method: SatMethod,
    },
    /// Largest subteam of --team satisfying the formula.
    MaxSubteam,
    /// Build a reduction output.
    Reduce {
        #[arg(value_enum)]
        kind: ReduceKind,
    },
    /// Run the matching and cycle-cover chain, reporting every step.
    Chain {
        /// Graph file (`digraph` or `bigraph`).
        #[arg(long, value_name = "FILE")]
        graph: Option<PathBuf>,
        /// DIMACS companion over the edge variables.
        #[arg(long, value_name = "FILE")]
        companion: Option<PathBuf>,
    },
    /// Run every applicable counter on the inputs and compare them.
    Verify,
    /// List built-in formulas or print one.
    Builtin { name: Option<String> },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyArg {
    Optimized,
    Definitional,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum TeamMethod {
    Auto,
    Brute,
    Inclusion,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatMethod {
    Search,
    Dualhorn,
    StarReduction,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceKind {
    /// Dependence normal form to a prefix CNF- formula.
    Dep2cnf,
    /// Inclusion normal form to a prefix DualHorn formula.
    Incl2dualhorn,
    /// Probe query of the star Turing reduction.
    Star,
    /// 2CNF+ formula to a structure for the team built-ins.
    #[value(name = "encode-2cnf+")]
    Encode2cnfPlus,
    /// Prefix CNF- formula to a structure.
    EncodeCnfneg,
    /// DualHorn formula to a structure.
    EncodeDualhorn,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(jobs) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(&cli, &argv) {
        Ok(report) => {
            print!("{}", report.render(cli.common.quiet));
            if report.mismatch() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { 2 } else { 3 })
        }
    }
}
