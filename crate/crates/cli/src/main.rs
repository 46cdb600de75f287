use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rpdc_cli::commands::{self, Context};
use rpdc_cli::config::{ExperimentConfig, CONFIG_REFERENCE};

#[derive(Parser)]
#[command(name = "rpdc", version, about = "Randomized primal-dual coordinate method experiments")]
#[command(after_long_help = CONFIG_REFERENCE)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML). See `rpdc --help` for every key.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `out` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Run at most K cells in parallel. Per-iteration timings are only
    /// comparable with K = 1.
    #[arg(long, global = true, value_name = "K", default_value_t = 1)]
    jobs: usize,

    /// Added to every configured seed.
    #[arg(long, global = true, value_name = "S", default_value_t = 0)]
    seed_offset: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, N, seed) cell and write one trace per cell.
    Solve,
    /// Compare APP-AL, RPDC and RCD against a reference saddle point.
    Compare,
    /// Sweep the block counts and fit a linear rate per N.
    Sweep,
    /// Compute and cache the reference saddle point.
    Oracle,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RPDC_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let path = cli
        .config
        .ok_or_else(|| anyhow::anyhow!("--config PATH is required"))?;
    let cfg = ExperimentConfig::load(&path)?;
    let ctx = Context {
        out: cli.out.unwrap_or_else(|| cfg.out.clone()),
        cfg,
        jobs: cli.jobs,
        seed_offset: cli.seed_offset,
    };
    match cli.command {
        Command::Solve => commands::solve(&ctx).map(drop),
        Command::Compare => commands::compare(&ctx).map(drop),
        Command::Sweep => commands::sweep(&ctx).map(drop),
        Command::Oracle => commands::oracle(&ctx).map(drop),
    }
}
