use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use mentionscope::community::{community_count_series, louvain, seed_spread, write_partition_csv, write_series_csv};
use mentionscope::events::{bundled_events, event_window, load_events, window_report, write_window_report_csv};
use mentionscope::graph::{write_stats_csv, TemporalGraph};
use mentionscope::ingest::{collect_records, count_hashtags, extract_mention_edges, parse_tweet_stream, TweetRecord};
use mentionscope::sentiment::{sentiment_distribution, Lexicon};
use mentionscope::topics::{build_tfidf, fit_minibatch_nmf, reconstruction_error, tokenize, topic_report};
use serde::Serialize;

use crate::config::PipelineConfig;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush().with_context(|| format!("writing {}", path.display()))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> mentionscope::Result<()>) -> Result<()> {
    let mut out = create(path)?;
    f(&mut out).with_context(|| format!("writing {}", path.display()))?;
    out.flush().with_context(|| format!("writing {}", path.display()))
}

/// Parses every input file. Malformed lines are logged and counted, never
/// fatal.
pub fn read_records(cfg: &PipelineConfig) -> Result<Vec<TweetRecord>> {
    if cfg.inputs.is_empty() {
        bail!("no input files given (use --input)");
    }
    let mut all = Vec::new();
    let mut bad = 0usize;
    for path in &cfg.inputs {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let (records, errors) = collect_records(parse_tweet_stream(file, cfg.format))
            .with_context(|| format!("reading {}", path.display()))?;
        for e in &errors {
            warn!("{}: {e}", path.display());
        }
        bad += errors.len();
        all.extend(records);
    }
    if bad > 0 {
        eprintln!("warning: skipped {bad} malformed line(s)");
    }
    info!("parsed {} records", all.len());
    Ok(all)
}

#[derive(Serialize)]
struct HashtagCount<'a> {
    hashtag: &'a str,
    count: u64,
}

pub fn ingest(cfg: &PipelineConfig, records: &[TweetRecord]) -> Result<TemporalGraph> {
    let edges = records.iter().flat_map(extract_mention_edges);
    let graph = TemporalGraph::build_weekly_snapshots(edges)?;
    let edges_path = cfg.output_dir.join("edges.csv");
    write_with(&edges_path, |w| graph.write_edge_list(w))?;

    let top = count_hashtags(records, cfg.hashtags_k)?;
    let report: Vec<HashtagCount> = top.iter().map(|(h, c)| HashtagCount { hashtag: h, count: *c }).collect();
    write_json(&cfg.output_dir.join("hashtags.json"), &report)?;
    info!("{} weekly snapshots written to {}", graph.snapshots().len(), edges_path.display());
    Ok(graph)
}

pub fn load_graph(cfg: &PipelineConfig) -> Result<TemporalGraph> {
    let f = File::open(&cfg.edges).with_context(|| format!("opening {}", cfg.edges.display()))?;
    TemporalGraph::read_edge_list(f).with_context(|| format!("reading {}", cfg.edges.display()))
}

fn filtered(cfg: &PipelineConfig, graph: &TemporalGraph) -> Result<TemporalGraph> {
    let out = graph.filter_low_degree(cfg.degree_threshold, cfg.degree_count)?;
    if out.snapshots().is_empty() {
        warn!("degree threshold {} removed every node", cfg.degree_threshold);
        eprintln!("warning: degree threshold {} left an empty graph", cfg.degree_threshold);
    }
    Ok(out)
}

pub fn communities(cfg: &PipelineConfig, graph: &TemporalGraph) -> Result<()> {
    let core = filtered(cfg, graph)?;
    write_with(&cfg.output_dir.join("stats.csv"), |w| write_stats_csv(w, &core))?;

    let series = community_count_series(&core, cfg.seed)?;
    for week in &series.gaps {
        warn!("week {week} has no edge weight; skipped");
    }
    write_with(&cfg.output_dir.join("communities.csv"), |w| write_series_csv(w, &series))?;

    if cfg.seed_runs > 1 {
        let seeds: Vec<u64> = (0..cfg.seed_runs as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
        let spread = seed_spread(&core, &seeds)?;
        write_with(&cfg.output_dir.join("communities_spread.csv"), |w| {
            let mut csv = csv::Writer::from_writer(w);
            for row in &spread {
                csv.serialize(row)?;
            }
            csv.flush()?;
            Ok(())
        })?;
    }

    if cfg.partitions {
        let dir = cfg.output_dir.join("partitions");
        for snap in core.snapshots() {
            let p = louvain(snap, cfg.seed)?.final_partition;
            write_with(&dir.join(format!("week_{}.csv", snap.week)), |w| {
                write_partition_csv(w, snap, &p, core.node_table())
            })?;
        }
    }
    Ok(())
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn events(cfg: &PipelineConfig, graph: &TemporalGraph) -> Result<()> {
    let calendar = match &cfg.events {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            load_events(f).with_context(|| format!("reading {}", path.display()))?
        }
        None => bundled_events(),
    };
    let core = filtered(cfg, graph)?;
    let dir = cfg.output_dir.join("events");
    for event in &calendar {
        let win = event_window(&core, event, cfg.window);
        let rows = window_report(&win, cfg.seed)?;
        write_with(&dir.join(format!("{}.csv", file_stem(&event.name))), |w| {
            write_window_report_csv(w, &rows)
        })?;
    }
    info!("wrote {} event reports", calendar.len());
    Ok(())
}

pub fn sentiment(cfg: &PipelineConfig, records: &[TweetRecord]) -> Result<()> {
    let lexicon = match &cfg.lexicon {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            Lexicon::from_csv(f).with_context(|| format!("reading {}", path.display()))?
        }
        None => Lexicon::bundled(),
    };
    let dist = sentiment_distribution(records, &lexicon, cfg.neutral_band)?;
    write_json(&cfg.output_dir.join("sentiment.json"), &dist)
}

pub fn topics(cfg: &PipelineConfig, records: &[TweetRecord]) -> Result<()> {
    let corpus: Vec<Vec<String>> = records.iter().map(|r| tokenize(&r.text)).collect();
    let (vocab, x) = build_tfidf(&corpus, cfg.min_df)?;
    let fit = fit_minibatch_nmf(&x, &cfg.nmf)?;
    info!(
        "nmf: {} epochs, converged={}, error={:.6}",
        fit.epochs(),
        fit.converged,
        reconstruction_error(&x, &fit.model)?
    );
    write_with(&cfg.output_dir.join("vocabulary.csv"), |w| vocab.write_csv(w))?;
    write_json(&cfg.output_dir.join("topics.json"), &topic_report(&fit.model, &vocab, cfg.top_words)?)
}
