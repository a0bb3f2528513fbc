use clap::{Parser, Subcommand};
use horizon_rl::config::ExperimentConfig;
use horizon_rl::harness;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "horizon-rl", version, about = "Episodic RL experiments under random episode lengths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write trace + summary CSVs.
    Run {
        /// Path to a JSON experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: current directory).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run several configs over a shared environment and write compare.csv.
    Compare {
        /// Comma-separated list of config paths.
        #[arg(long, value_delimiter = ',', required = true)]
        configs: Vec<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> horizon_rl::Result<()> {
    match cli.command {
        Command::Run { config, out, trials, seed } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let summary = harness::run_experiment(&cfg, &out)?;
            println!("wrote {}", summary.trace_path.display());
            println!("wrote {}", summary.summary_path.display());
            Ok(())
        }
        Command::Compare { configs, out } => {
            let cfgs: Vec<ExperimentConfig> = configs
                .iter()
                .map(|p| ExperimentConfig::from_file(p))
                .collect::<horizon_rl::Result<_>>()?;
            let path = harness::compare(&cfgs, &out)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}
