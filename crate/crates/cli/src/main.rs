//! `depthlab`: batch runner for the desk-scale depth experiments.
//!
//! Exit status is 0 on success, 1 when a self-check fails, 2 on bad input,
//! and 3 when a search ran out of budget without a verdict.

mod commands;
mod config;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use depthlab_core::Error;

use config::Settings;

#[derive(Parser)]
#[command(name = "depthlab", version, about = "Time-bounded complexity and relativized depth at desk scale")]
struct Cli {
    /// `key=value` file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel sweeps; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// Longest program considered, in bits.
    #[arg(long)]
    pub cap: Option<usize>,
    /// `none`, `zero`, `halting:<stage>` or `prefix:<bits>`.
    #[arg(long)]
    pub oracle: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Brute-force complexity of one string, as a CSV row.
    K {
        #[arg(long)]
        sigma: String,
        /// Time bound: `poly:a,b` or `table:<path>`.
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        stage: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Staged a-priori semimeasure.
    M {
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        stage: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Least stage whose semimeasure dominates a table on one length.
    ConvertTimebound {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        ceiling: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Counts cheap extensions over martingale tables.
    SpaceLemma {
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        k: Option<u64>,
        /// `exhaustive` or `sample`.
        #[arg(long)]
        mode: Option<String>,
        /// Number of random tables in sample mode.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        depth: Option<usize>,
        /// Leaf granularity in exhaustive mode.
        #[arg(long)]
        units: Option<u64>,
        /// Check one table file instead.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated integral test for one oracle prefix.
    Psi {
        #[arg(long)]
        prefix: String,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        t_prime: Option<String>,
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        stage: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Oracle average of the relativized semimeasure, three ways.
    Avg {
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Measure of oracles that compress a prefix by a factor `k`.
    MeasureCheap {
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        stage: Option<u64>,
        #[arg(long)]
        d: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Depth profile of a string.
    Profile {
        /// File holding the bits, or the bits themselves.
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        stage: Option<u64>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Finite-extension builder.
    BuildDeep {
        #[arg(long)]
        rounds: Option<usize>,
        /// Only `mixture` is available.
        #[arg(long)]
        mart: Option<String>,
        #[arg(long = "T")]
        time_bound: Option<String>,
        /// Stage at which the mixture is frozen.
        #[arg(long)]
        stage: Option<u64>,
        #[arg(long)]
        components: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Forcing loop over a pruning schedule.
    Force {
        #[arg(long)]
        class: PathBuf,
        /// `halting-dnc`, `halting-dnc:<stage>` or `table:<path>`.
        #[arg(long)]
        f: Option<String>,
        /// Constraint values; defaults to the values of f.
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks a join of two random halves against DNC.
    JoinCheck {
        #[arg(long = "F")]
        f: String,
        #[arg(long = "X")]
        x: String,
        #[arg(long = "Y")]
        y: String,
        #[arg(long)]
        k: Option<i64>,
        #[arg(long)]
        stage: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Compares `K^t` with `K_s` on binary expansions of integers.
    Solovay {
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        c: Option<u64>,
        #[arg(long)]
        stage: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Small deterministic run of the invariant suite.
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetInconclusive(_) | Error::NoStageWithinBudget { .. } => 3,
        Error::Invariant(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> depthlab_core::Result<()> {
    let mut cfg = Settings::load(cli.config.as_deref())?;
    let workers = cfg.opt("workers", cli.workers)?;
    if let Some(n) = workers {
        // a pool may already exist when embedded; the count is advisory
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    use commands as c;
    match cli.command {
        Command::K { sigma, t, stage, common } => c::k(&mut cfg, sigma, t, stage, common),
        Command::M { sigma, max_len, stage, common } => c::m(&mut cfg, sigma, max_len, stage, common),
        Command::ConvertTimebound { table, c: k, n, ceiling, common } => {
            c::convert_timebound(&mut cfg, table, k, n, ceiling, common)
        }
        Command::SpaceLemma { delta, k, mode, n, seed, depth, units, table, out } => c::space_lemma(
            &mut cfg,
            c::SpaceLemmaArgs { delta, k, mode, n, seed, depth, units, table },
            out,
        ),
        Command::Psi { prefix, t, t_prime, c: k, max_len, stage, common } => {
            c::psi(&mut cfg, prefix, t, t_prime, k, max_len, stage, common)
        }
        Command::Avg { sigma, t, d, samples, seed, common } => c::avg(&mut cfg, sigma, t, d, samples, seed, common),
        Command::MeasureCheap { x, n, k, t, stage, d, common } => {
            c::measure_cheap(&mut cfg, x, n, k, t, stage, d, common)
        }
        Command::Profile { input, t, stage, csv, common } => c::profile(&mut cfg, input, t, stage, csv, common),
        Command::BuildDeep { rounds, mart, time_bound, stage, components, common } => {
            c::build_deep(&mut cfg, rounds, mart, time_bound, stage, components, common)
        }
        Command::Force { class, f, a, steps, budget, out } => c::force(&mut cfg, class, f, a, steps, budget, out),
        Command::JoinCheck { f, x, y, k, stage, common } => c::join_check(&mut cfg, f, x, y, k, stage, common),
        Command::Solovay { t, n, c: k, stage, common } => c::solovay(&mut cfg, t, n, k, stage, common),
        Command::Selftest { seed, out } => selftest::run(&mut cfg, seed, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("depthlab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
