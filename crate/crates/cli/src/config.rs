use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use mentionscope::graph::DegreeCount;
use mentionscope::ingest::Format;
use serde::Deserialize;

/// Pipeline settings. Every field can come from the config file or a flag;
/// flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Tweet record files (repeatable).
    #[arg(long = "input", short = 'i')]
    #[serde(default)]
    pub input: Vec<PathBuf>,

    /// Input format: jsonl or csv.
    #[arg(long)]
    pub format: Option<String>,

    /// Number of hashtags in the hashtag report.
    #[arg(long)]
    pub hashtags_k: Option<usize>,

    /// Edge list to read (default: <output-dir>/edges.csv).
    #[arg(long)]
    pub edges: Option<PathBuf>,

    /// Minimum incident edge count a user needs to stay in the graph.
    #[arg(long)]
    pub degree_threshold: Option<u64>,

    /// How incident edges are counted: occurrences or distinct-arcs.
    #[arg(long)]
    pub degree_count: Option<DegreeCount>,

    /// Louvain seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Run Louvain with this many consecutive seeds and report the spread.
    #[arg(long)]
    pub seed_runs: Option<usize>,

    /// Also write one node_id,community_id file per week.
    #[arg(long)]
    #[serde(default)]
    pub partitions: bool,

    /// Sentiment lexicon CSV (token,polarity); bundled lexicon if absent.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,

    /// Polarity band classified as neutral.
    #[arg(long)]
    pub neutral_band: Option<f64>,

    #[arg(long)]
    pub topics: Option<usize>,

    #[arg(long)]
    pub nmf_batch_size: Option<usize>,

    #[arg(long)]
    pub nmf_max_iters: Option<usize>,

    #[arg(long)]
    pub nmf_tol: Option<f64>,

    #[arg(long)]
    pub nmf_seed: Option<u64>,

    /// Drop terms found in fewer documents than this.
    #[arg(long)]
    pub min_df: Option<usize>,

    /// Words listed per topic.
    #[arg(long)]
    pub top_words: Option<usize>,

    /// Events calendar CSV (name,start,end,location); bundled COP calendar if absent.
    #[arg(long)]
    pub events: Option<PathBuf>,

    /// Weeks before and after each event start.
    #[arg(long)]
    pub window: Option<u32>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fills every field unset here from `file`.
    pub fn over(self, file: Settings) -> Settings {
        Settings {
            input: if self.input.is_empty() { file.input } else { self.input },
            format: self.format.or(file.format),
            hashtags_k: self.hashtags_k.or(file.hashtags_k),
            edges: self.edges.or(file.edges),
            degree_threshold: self.degree_threshold.or(file.degree_threshold),
            degree_count: self.degree_count.or(file.degree_count),
            seed: self.seed.or(file.seed),
            seed_runs: self.seed_runs.or(file.seed_runs),
            partitions: self.partitions || file.partitions,
            lexicon: self.lexicon.or(file.lexicon),
            neutral_band: self.neutral_band.or(file.neutral_band),
            topics: self.topics.or(file.topics),
            nmf_batch_size: self.nmf_batch_size.or(file.nmf_batch_size),
            nmf_max_iters: self.nmf_max_iters.or(file.nmf_max_iters),
            nmf_tol: self.nmf_tol.or(file.nmf_tol),
            nmf_seed: self.nmf_seed.or(file.nmf_seed),
            min_df: self.min_df.or(file.min_df),
            top_words: self.top_words.or(file.top_words),
            events: self.events.or(file.events),
            window: self.window.or(file.window),
        }
    }
}

/// Settings with defaults applied and ranges checked.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub format: Format,
    pub hashtags_k: usize,
    pub edges: PathBuf,
    pub degree_threshold: u64,
    pub degree_count: DegreeCount,
    pub seed: u64,
    pub seed_runs: usize,
    pub partitions: bool,
    pub lexicon: Option<PathBuf>,
    pub neutral_band: f64,
    pub nmf: mentionscope::topics::NmfConfig,
    pub min_df: usize,
    pub top_words: usize,
    pub events: Option<PathBuf>,
    pub window: u32,
    pub output_dir: PathBuf,
}

impl PipelineConfig {
    pub fn resolve(s: Settings, output_dir: PathBuf) -> Result<Self> {
        let defaults = mentionscope::topics::NmfConfig::default();
        let format = match &s.format {
            Some(f) => f.parse::<Format>()?,
            None => Format::JsonLines,
        };
        let cfg = PipelineConfig {
            inputs: s.input,
            format,
            hashtags_k: s.hashtags_k.unwrap_or(8),
            edges: s.edges.unwrap_or_else(|| output_dir.join("edges.csv")),
            degree_threshold: s.degree_threshold.unwrap_or(100),
            degree_count: s.degree_count.unwrap_or_default(),
            seed: s.seed.unwrap_or(0),
            seed_runs: s.seed_runs.unwrap_or(1),
            partitions: s.partitions,
            lexicon: s.lexicon,
            neutral_band: s.neutral_band.unwrap_or(0.0),
            nmf: mentionscope::topics::NmfConfig {
                k: s.topics.unwrap_or(defaults.k),
                batch_size: s.nmf_batch_size.unwrap_or(defaults.batch_size),
                max_iters: s.nmf_max_iters.unwrap_or(defaults.max_iters),
                tol: s.nmf_tol.unwrap_or(defaults.tol),
                seed: s.nmf_seed.unwrap_or(defaults.seed),
                ..defaults
            },
            min_df: s.min_df.unwrap_or(mentionscope::topics::DEFAULT_MIN_DF),
            top_words: s.top_words.unwrap_or(mentionscope::topics::DEFAULT_TOP_WORDS),
            events: s.events,
            window: s.window.unwrap_or(mentionscope::events::DEFAULT_HALF_WIDTH),
            output_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.hashtags_k == 0 {
            bail!("--hashtags-k must be at least 1");
        }
        if self.degree_threshold == 0 {
            bail!("--degree-threshold must be at least 1");
        }
        if self.seed_runs == 0 {
            bail!("--seed-runs must be at least 1");
        }
        if self.neutral_band.is_nan() || self.neutral_band < 0.0 {
            bail!("--neutral-band must be nonnegative");
        }
        if self.nmf.k == 0 || self.nmf.batch_size == 0 || self.nmf.max_iters == 0 {
            bail!("--topics, --nmf-batch-size and --nmf-max-iters must be at least 1");
        }
        if self.nmf.tol.is_nan() || self.nmf.tol < 0.0 {
            bail!("--nmf-tol must be nonnegative");
        }
        if self.min_df == 0 || self.top_words == 0 {
            bail!("--min-df and --top-words must be at least 1");
        }
        Ok(())
    }
}
