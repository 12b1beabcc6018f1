//! `afg`: train the scoring and sentence models, grade submissions and
//! evaluate machine marks against human marks.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration, 3 data,
//! 4 training diverged.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::{OutputFormat, RunConfig};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "afg", version, about = "Automated marking and feedback for abstracting assignments")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, env = "AFG_CONFIG")]
    config: Option<PathBuf>,
    /// Root seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print only machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Plain `[B]/[T]/[O]` tags instead of terminal colours.
    #[arg(long, global = true)]
    no_color: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a regression model on the pre-training corpora.
    Pretrain,
    /// Continue training a pre-trained model on the fine-tuning corpus.
    Finetune {
        /// Model stem to start from; overrides `paths.base_model`.
        #[arg(long)]
        base_model: Option<PathBuf>,
    },
    /// Train the sentence-role classifier.
    TrainClassifier {
        /// Train on the five corpus labels and map predictions to three.
        #[arg(long)]
        five_class: bool,
    },
    /// Mark submissions and write feedback reports.
    Grade {
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Compare machine abstract marks with human marks.
    Eval {
        /// Regression model stem; overrides `paths.model`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.out = Some(out);
    }
    if let Command::Finetune { base_model: Some(m) } = &cli.command {
        config.paths.base_model = Some(m.clone());
    }
    let ctx = Context {
        config,
        json: cli.json,
        color: !cli.no_color,
    };
    match cli.command {
        Command::Pretrain => commands::pretrain(&ctx),
        Command::Finetune { .. } => commands::finetune(&ctx),
        Command::TrainClassifier { five_class } => commands::train_classifier(&ctx, five_class),
        Command::Grade { format } => commands::grade(&ctx, format),
        Command::Eval { model } => commands::eval(&ctx, model),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.kind.exit_code())
        }
    }
}
