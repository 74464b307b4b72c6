//! `relufix`: counter-example search, penalty-based repair and interval
//! certification for small dense ReLU networks.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{FileConfig, Overrides};
use relufix::OptimizerKind;

#[derive(Parser)]
#[command(
    name = "relufix",
    version,
    about = "Find, repair and certify safety violations of small ReLU networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search each property for input points that violate it.
    ///
    /// Exit codes: 0 no violation found, 1 violations found, 2 error.
    Attack(CommonArgs),
    /// Certify each property by interval branch-and-bound.
    ///
    /// Exit codes: 0 all verified, 1 refuted, 4 undecided, 2 error.
    Verify(CommonArgs),
    /// Run the search / penalty-training / verification loop until the
    /// specification is certified or a budget runs out.
    ///
    /// Exit codes: 0 verified repair, 3 timeout, 4 verifier undecided,
    /// 5 round budget exhausted, 2 error.
    Repair(RepairArgs),
    /// Benchmark both search optimizers on every property over a seed grid.
    ///
    /// Exit codes: 0 done, 2 error.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Network file: JSON, or the `.nnet` text format by extension.
    #[arg(long)]
    network: PathBuf,
    /// Property source: a specification file path, or `acasxu:<k,...>` for
    /// the built-in collision-avoidance catalogue. Omit to use the
    /// `[robustness]` config section.
    #[arg(long)]
    spec: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for result files (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override every configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the search evaluation budget.
    #[arg(long)]
    max_evals: Option<usize>,
    /// Override the search optimizer: `de` or `multistart`.
    #[arg(long, value_parser = parse_optimizer)]
    optimizer: Option<OptimizerKind>,
}

#[derive(Args)]
struct RepairArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Training dataset JSON; shorthand for `[data].path`. Without data, a
    /// surrogate sample of the input network is used.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Override the repair timeout in seconds.
    #[arg(long)]
    timeout: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated list of search seeds.
    #[arg(long, default_value = "0,1,2")]
    seeds: String,
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind, String> {
    match s {
        "de" => Ok(OptimizerKind::DifferentialEvolution),
        "multistart" => Ok(OptimizerKind::MultiStartLocal),
        other => Err(format!("unknown optimizer {other:?}; expected `de` or `multistart`")),
    }
}

/// Loads the configuration and shared inputs for one subcommand run.
fn prepare(
    common: &CommonArgs,
    timeout: Option<u64>,
) -> Result<(FileConfig, relufix::Network, relufix::Specification)> {
    let mut cfg = FileConfig::load(common.config.as_deref())?;
    cfg.apply(&Overrides {
        seed: common.seed,
        max_evals: common.max_evals,
        timeout_secs: timeout,
        optimizer: common.optimizer,
    });
    let net = config::load_network(&common.network)?;
    let spec = config::resolve_spec(common.spec.as_deref(), &cfg, &net)?;
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating output directory {}", common.out.display()))?;
    Ok((cfg, net, spec))
}

fn run() -> Result<i32> {
    match Cli::parse().command {
        Command::Attack(common) => {
            let (cfg, net, spec) = prepare(&common, None)?;
            commands::attack(&net, &spec, &cfg, &common.out)
        }
        Command::Verify(common) => {
            let (cfg, net, spec) = prepare(&common, None)?;
            commands::verify_cmd(&net, &spec, &cfg, &common.out)
        }
        Command::Repair(args) => {
            let (mut cfg, net, spec) = prepare(&args.common, args.timeout)?;
            if let Some(path) = args.data {
                cfg.data.path = Some(path);
            }
            let data = config::resolve_data(&cfg, &net, &spec)?;
            commands::repair(&net, &spec, &data, &cfg, &args.common.out)
        }
        Command::Bench(args) => {
            let (cfg, net, spec) = prepare(&args.common, None)?;
            let seeds = args
                .seeds
                .split(',')
                .map(|t| t.trim().parse::<u64>().with_context(|| format!("seed {t:?}")))
                .collect::<Result<Vec<_>>>()?;
            if seeds.is_empty() {
                bail!("--seeds must name at least one seed");
            }
            commands::bench(&net, &spec, &cfg, &seeds, &args.common.out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
