mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{PipelineConfig, Settings};

/// Weekly mention-graph communities, event windows, sentiment and topics
/// from pre-collected tweet records.
#[derive(Debug, Parser)]
#[command(name = "mentionscope", version)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for all outputs.
    #[arg(long, global = true, env = "MENTIONSCOPE_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse records; write edges.csv and hashtags.json.
    Ingest(Settings),
    /// Louvain community counts per week from edges.csv; writes communities.csv and stats.csv.
    Communities(Settings),
    /// Per-event window reports under events/.
    Events(Settings),
    /// Sentiment distribution; writes sentiment.json.
    Sentiment(Settings),
    /// NMF topics; writes topics.json and vocabulary.csv.
    Topics(Settings),
    /// Every stage in sequence.
    Report(Settings),
}

#[derive(Debug, Clone, Copy)]
enum Stage {
    Ingest,
    Communities,
    Events,
    Sentiment,
    Topics,
    Report,
}

impl Command {
    fn split(self) -> (Stage, Settings) {
        match self {
            Command::Ingest(s) => (Stage::Ingest, s),
            Command::Communities(s) => (Stage::Communities, s),
            Command::Events(s) => (Stage::Events, s),
            Command::Sentiment(s) => (Stage::Sentiment, s),
            Command::Topics(s) => (Stage::Topics, s),
            Command::Report(s) => (Stage::Report, s),
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (stage, settings) = cli.command.split();
    let settings = match &cli.config {
        Some(path) => settings.over(Settings::load(path)?),
        None => settings,
    };
    let output_dir = cli.output_dir.unwrap_or_else(|| PathBuf::from("out"));
    let cfg = PipelineConfig::resolve(settings, output_dir)?;

    match stage {
        Stage::Ingest => {
            let records = commands::read_records(&cfg)?;
            commands::ingest(&cfg, &records)?;
        }
        Stage::Communities => commands::communities(&cfg, &commands::load_graph(&cfg)?)?,
        Stage::Events => commands::events(&cfg, &commands::load_graph(&cfg)?)?,
        Stage::Sentiment => commands::sentiment(&cfg, &commands::read_records(&cfg)?)?,
        Stage::Topics => commands::topics(&cfg, &commands::read_records(&cfg)?)?,
        Stage::Report => {
            let records = commands::read_records(&cfg)?;
            let graph = commands::ingest(&cfg, &records)?;
            commands::communities(&cfg, &graph)?;
            commands::events(&cfg, &graph)?;
            commands::sentiment(&cfg, &records)?;
            commands::topics(&cfg, &records)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
