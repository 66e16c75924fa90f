//! `stance`: the command-line pipeline.
//!
//! A typical run goes corpus → `evaluate` → `calibrate` → `train` →
//! `predict` → `graph build` → `graph kcore` → `graph candidates` →
//! `triage serve` → `graph apply`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commands::{data, graph, model, triage};
use config::Config;

#[derive(Debug, Parser)]
#[command(name = "stance", version, about = "Stance classification and retweet-edge triage")]
struct Cli {
    /// Seed for every random choice: splits, initialization, shuffling, ties.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// TOML settings file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic labeled corpus with word vectors.
    Synth(data::SynthArgs),
    /// Tokenize a corpus and report its original/retweet grouping.
    Preprocess(data::PreprocessArgs),
    /// Train a model on all labeled originals.
    Train(model::TrainArgs),
    /// Predict every tweet of a corpus with a trained model.
    Predict(model::PredictArgs),
    /// Run the 10-split evaluation protocol.
    Evaluate(model::EvaluateArgs),
    /// Pick per-class probability thresholds that reach a target precision.
    Calibrate(model::CalibrateArgs),
    /// Retweet graph construction, k-core, labeling and candidates.
    #[command(subcommand)]
    Graph(graph::GraphCommand),
    /// Annotation triage service.
    #[command(subcommand)]
    Triage(triage::TriageCommand),
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Synth(a) => data::synth(a, &cfg, cli.seed),
        Command::Preprocess(a) => data::preprocess(a),
        Command::Train(a) => model::train(a, &cfg, cli.seed),
        Command::Predict(a) => model::predict(a, &cfg, cli.seed),
        Command::Evaluate(a) => model::evaluate(a, &cfg, cli.seed),
        Command::Calibrate(a) => model::calibrate(a, &cfg),
        Command::Graph(c) => graph::run(c, &cfg),
        Command::Triage(c) => triage::run(c),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
