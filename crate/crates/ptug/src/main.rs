//! Command-line laboratory for ε-step tug-of-war with orthogonal noise:
//! grid solves of the dynamic-programming value, seeded game simulation,
//! boundary-measure tables, paired payoff perturbations, stage values,
//! escape probabilities, and report diffing.

mod cli;

use clap::{Args, Parser, Subcommand};
use cli::config::Kind;
use cli::RunSpec;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ptug",
    version,
    about = "tug-of-war with noise: solve value fields, play seeded games, estimate boundary measures"
)]
struct TopCli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the value field on a grid and write a node dump
    Solve(RunArgs),
    /// Play seeded games and record their transcripts
    Simulate(RunArgs),
    /// Tabulate mollified boundary measures over step and width schedules
    Measure(RunArgs),
    /// Paired comparison of a payoff against a pointwise-overridden copy
    Perturb(RunArgs),
    /// Stage value of a target-descent plan in normalized coordinates
    Theta(RunArgs),
    /// Probability of terminating inside a boundary window
    Escape(RunArgs),
    /// Measure tables for a point family, a closed set, and their union
    Union(RunArgs),
    /// Field-by-field diff of two report files
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment description (JSON file)
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the config key of the same name
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config key of the same name
    #[arg(long)]
    out: Option<String>,
    /// Sampling worker threads, overriding the config key of the same name
    #[arg(long)]
    workers: Option<usize>,
    /// Solver error target, overriding the config key "tolerance"
    #[arg(long)]
    tol: Option<f64>,
    /// Replace existing output files instead of refusing to overwrite
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// First report file
    a: PathBuf,
    /// Second report file
    b: PathBuf,
    /// Numeric leaves closer than this count as equal
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
}

impl RunArgs {
    fn spec(self) -> RunSpec {
        RunSpec {
            config_path: self.config,
            seed: self.seed,
            out: self.out,
            workers: self.workers,
            tol: self.tol,
            force: self.force,
        }
    }
}

fn main() -> ExitCode {
    let top = TopCli::parse();
    let result = match top.cmd {
        Cmd::Solve(a) => cli::run(Kind::Solve, &a.spec()),
        Cmd::Simulate(a) => cli::run(Kind::Simulate, &a.spec()),
        Cmd::Measure(a) => cli::run(Kind::Measure, &a.spec()),
        Cmd::Perturb(a) => cli::run(Kind::Perturb, &a.spec()),
        Cmd::Theta(a) => cli::run(Kind::Theta, &a.spec()),
        Cmd::Escape(a) => cli::run(Kind::Escape, &a.spec()),
        Cmd::Union(a) => cli::run(Kind::Union, &a.spec()),
        Cmd::Compare(a) => cli::compare(&a.a, &a.b, a.tol),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
