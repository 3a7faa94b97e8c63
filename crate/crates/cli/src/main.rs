//! `stylekit`: batch tools for speaking-style conversion, style embeddings
//! and listening-test statistics.
//!
//! Exit codes: 0 success, 1 processing failure, 2 invalid invocation.

mod analysis;
mod common;
mod convert;
mod error;
mod features;
mod manifest;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::common::Ctx;
use crate::error::CliResult;
use crate::settings::Settings;

#[derive(Parser, Debug)]
#[command(
    name = "stylekit",
    version,
    about = "Speaking-style conversion, style embeddings and listening-test statistics"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Settings file of `key = value` lines; command-line flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every stochastic step [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for multi-file commands, 0 for one per core [default: 0]
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert speech to whisper-like speech by LPC residual replacement
    #[command(allow_negative_numbers = true)]
    Whisperize(convert::WhisperArgs),
    /// Apply static spectral shaping and dynamic range compression
    #[command(allow_negative_numbers = true)]
    Enhance(convert::EnhanceArgs),
    /// Add noise at a target speech-to-noise ratio
    #[command(allow_negative_numbers = true)]
    Mix(convert::MixArgs),
    /// Write power, log-mel or cepstral features as CSV
    Mel(features::MelArgs),
    /// Compute style embeddings for every utterance in a manifest
    Embed(features::EmbedArgs),
    /// Average embeddings per speaker and style
    Centroids(analysis::CentroidArgs),
    /// Project embeddings onto their principal components
    Pca(analysis::PcaArgs),
    /// Report the periodicity (voicing) statistic of WAV files
    Voicing(features::VoicingArgs),
    /// Summarise listening-test responses into AB, MOS and WRR tables
    Eval(analysis::EvalArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    let mut settings = Settings::load(cli.global.config.as_deref())?;
    settings.flag("seed", cli.global.seed);
    settings.flag("jobs", cli.global.jobs);
    let ctx = Ctx::new(settings)?;
    match cli.command {
        Command::Whisperize(a) => convert::whisperize_cmd(ctx, a),
        Command::Enhance(a) => convert::enhance_cmd(ctx, a),
        Command::Mix(a) => convert::mix_cmd(ctx, a),
        Command::Mel(a) => features::mel_cmd(ctx, a),
        Command::Embed(a) => features::embed_cmd(ctx, a),
        Command::Centroids(a) => analysis::centroids_cmd(ctx, a),
        Command::Pca(a) => analysis::pca_cmd(ctx, a),
        Command::Voicing(a) => features::voicing_cmd(ctx, a),
        Command::Eval(a) => analysis::eval_cmd(ctx, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stylekit: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
