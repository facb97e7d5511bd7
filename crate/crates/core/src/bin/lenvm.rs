use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lenvm::experiment::{
    cmd_analyze, cmd_control, cmd_frontier, cmd_rollout, cmd_train, fmt_g9, with_overrides, ExperimentConfig,
};
use lenvm::{DiscountSpec, Error, Result};

#[derive(Parser)]
#[command(name = "lenvm", version, about = "Length value model experiments on synthetic generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for rollouts (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample base-policy rollouts into trajectories.jsonl.
    Rollout(Common),
    /// Fit a value head to the rollouts.
    Train(Common),
    /// Hard length-constraint decoding and scoring.
    Control(Common),
    /// Tilted decoding against hard token budgets.
    Frontier(Common),
    /// TD, shaping, precision and weighting analyses.
    Analyze(Common),
    /// Print the discount factor for a config or a 99th-percentile length.
    Gamma {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        l99: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<String> {
    let (common, stage): (Common, fn(&ExperimentConfig) -> Result<String>) = match cli.command {
        Command::Rollout(c) => (c, cmd_rollout),
        Command::Train(c) => (c, cmd_train),
        Command::Control(c) => (c, cmd_control),
        Command::Frontier(c) => (c, cmd_frontier),
        Command::Analyze(c) => (c, cmd_analyze),
        Command::Gamma { l99, config } => {
            let (spec, l99) = match (l99, config) {
                (Some(l), _) => (DiscountSpec::from_l99(l)?, Some(l)),
                (None, Some(path)) => {
                    let cfg = ExperimentConfig::load(&path)?;
                    (cfg.spec, cfg.l99)
                }
                (None, None) => unreachable!("clap requires one of --l99/--config"),
            };
            let mut s = format!("gamma={}", fmt_g9(spec.gamma()));
            if let Some(l) = l99 {
                let check = -(l as f64 * spec.ln_gamma()).exp_m1();
                s.push_str(&format!("\nl99={l} 1-gamma^l99={}", fmt_g9(check)));
            }
            return Ok(s);
        }
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let cfg = with_overrides(ExperimentConfig::load(&common.config)?, common.seed, common.out);
    stage(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
