//! `casimir`: invariants of real Lie algebras from structure constants.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "casimir", version, about = "Invariants of the coadjoint representation by moving frames")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Seed for every randomized step.
    #[arg(long, env = "CASIMIR_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
    /// Sample points per numeric check.
    #[arg(long, default_value_t = 20, global = true)]
    pub samples: usize,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-9, global = true)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Fall back to numeric exponentials when B(theta) has no closed form.
    #[arg(long, global = true)]
    pub numeric: bool,
    /// Extra parameter condition such as `a != 0`; repeatable.
    #[arg(long, value_name = "CONDITION", global = true)]
    pub assume: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Latex,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the algebra and check the Jacobi identity.
    Check { algebra: String },
    /// Generic rank of the coadjoint matrix and the number of invariants.
    Rank { algebra: String },
    /// Adjoint matrices âd(e_i).
    Ad {
        algebra: String,
        /// 1-based basis index; all of them when omitted.
        #[arg(long)]
        index: Option<usize>,
    },
    /// Closed-form inner automorphism matrix B(theta).
    #[command(name = "autB")]
    AutB { algebra: String },
    /// Components of the lifted invariant x·B(theta).
    Lift { algebra: String },
    /// Eliminate the group parameters and verify the result.
    Invariants { algebra: String },
    /// Symmetrize invariants into operators; computes them when none are given.
    Symmetrize {
        algebra: String,
        #[arg(long = "invariant", value_name = "EXPR", allow_hyphen_values = true)]
        invariants: Vec<String>,
    },
    /// Check claimed invariants against the infinitesimal and finite actions.
    Verify {
        algebra: String,
        #[arg(long = "invariant", value_name = "EXPR", required = true, allow_hyphen_values = true)]
        invariants: Vec<String>,
    },
    /// Re-verify catalog entries.
    Corpus {
        /// Restrict to these ids; repeatable.
        #[arg(long)]
        id: Vec<String>,
        /// Restrict to one dimension.
        #[arg(long)]
        dim: Option<usize>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = &cli.opts;
    let result = match &cli.command {
        Command::Check { algebra } => commands::check(algebra, opts),
        Command::Rank { algebra } => commands::rank(algebra, opts),
        Command::Ad { algebra, index } => commands::ad(algebra, *index, opts),
        Command::AutB { algebra } => commands::aut_b(algebra, opts),
        Command::Lift { algebra } => commands::lift(algebra, opts),
        Command::Invariants { algebra } => commands::invariants(algebra, opts),
        Command::Symmetrize { algebra, invariants } => commands::symmetrize(algebra, invariants, opts),
        Command::Verify { algebra, invariants } => commands::verify(algebra, invariants, opts),
        Command::Corpus { id, dim, jobs } => commands::corpus(id, *dim, *jobs, opts),
    };
    match result {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
