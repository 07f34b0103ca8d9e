//! `nfteig`: synthesis, NFT, analytic covariance and Monte-Carlo sweeps driven
//! by a TOML config. Data goes to files; progress goes to stderr.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Overrides};
use error::CliError;

#[derive(Parser)]
#[command(name = "nfteig", version, about = "Eigenvalue statistics of noisy multi-soliton pulses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed (overrides `base_seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per point (overrides `trials`).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads (overrides `threads`).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the multi-soliton of the config spectrum.
    Synthesize,
    /// Discrete spectrum of a pulse file by both methods.
    Nft {
        /// Pulse CSV with columns t, re, im.
        #[arg(long)]
        input: PathBuf,
    },
    /// Analytic eigenvalue covariance, no Monte-Carlo.
    Covariance,
    /// Phase or SNR sweep.
    Sweep,
}

fn load_config(common: &Common, required: bool) -> Result<Option<ExperimentConfig>, CliError> {
    let overrides = Overrides {
        seed: common.seed,
        trials: common.trials,
        threads: common.threads,
        out: common.out.clone(),
    };
    let Some(path) = &common.config else {
        if required {
            return Err(CliError::Config("--config is required".into()));
        }
        return Ok(None);
    };
    let src = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::parse(&src, &overrides)
        .map(Some)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synthesize => commands::synthesize(&load_config(&cli.common, true)?.unwrap()),
        Command::Covariance => commands::covariance(&load_config(&cli.common, true)?.unwrap()),
        Command::Sweep => commands::sweep(&load_config(&cli.common, true)?.unwrap()),
        Command::Nft { input } => {
            let cfg = load_config(&cli.common, false)?;
            let out_cfg = match &cfg {
                Some(c) => c.clone(),
                None => ExperimentConfig::parse("", &Overrides { out: cli.common.out.clone(), ..Default::default() })?,
            };
            commands::nft(input, cfg.as_ref(), &out_cfg)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
