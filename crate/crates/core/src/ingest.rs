//! Tweet record ingestion from JSON-lines or CSV files.
//!
//! Streams never abort on a damaged line: each line yields either a record or
//! a [`ParseError`] carrying its line number. Only I/O failures (and a missing
//! or wrong CSV header) are fatal.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = ["tweet_id", "author_id", "timestamp", "mentions", "hashtags", "text"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    pub mention_ids: Vec<String>,
    /// Hashtags without the leading `#`.
    pub hashtags: Vec<String>,
    pub text: String,
}

impl TweetRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.timestamp < 0 {
            return Err(format!("negative timestamp {}", self.timestamp));
        }
        if self.author_id.is_empty() {
            return Err("empty author id".into());
        }
        if self.mention_ids.iter().any(String::is_empty) {
            return Err("empty mention id".into());
        }
        Ok(())
    }

    /// Serializes the record as one JSON-lines row (no trailing newline).
    pub fn to_json_line(&self) -> String {
        let row = JsonRow {
            id: self.tweet_id.clone(),
            author: self.author_id.clone(),
            ts: self.timestamp,
            mentions: self.mention_ids.clone(),
            hashtags: self.hashtags.clone(),
            text: self.text.clone(),
        };
        serde_json::to_string(&row).expect("record serializes")
    }
}

/// A directed mention `src -> dst`.
#[derive(Debug, Clone, PartialEq)]
pub struct MentionEdge {
    pub src: String,
    pub dst: String,
    pub timestamp: i64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    JsonLines,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "jsonlines" | "json-lines" | "ndjson" => Ok(Format::JsonLines),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown input format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Format::JsonLines => f.write_str("jsonl"),
            Format::Csv => f.write_str("csv"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// One parsed line: its 1-based line number and the record or the reason it
/// was rejected.
pub type ParsedLine = (usize, std::result::Result<TweetRecord, ParseError>);

#[derive(Deserialize, Serialize)]
struct JsonRow {
    id: String,
    author: String,
    ts: i64,
    #[serde(default)]
    mentions: Vec<String>,
    #[serde(default)]
    hashtags: Vec<String>,
    #[serde(default)]
    text: String,
}

fn strip_hash(tag: String) -> String {
    match tag.strip_prefix('#') {
        Some(rest) => rest.to_string(),
        None => tag,
    }
}

fn finish(line: usize, rec: TweetRecord) -> ParsedLine {
    match rec.validate() {
        Ok(()) => (line, Ok(rec)),
        Err(reason) => (line, Err(ParseError { line, reason })),
    }
}

fn parse_json_line(line: usize, text: &str) -> ParsedLine {
    match serde_json::from_str::<JsonRow>(text) {
        Ok(row) => finish(
            line,
            TweetRecord {
                tweet_id: row.id,
                author_id: row.author,
                timestamp: row.ts,
                mention_ids: row.mentions,
                hashtags: row.hashtags.into_iter().map(strip_hash).collect(),
                text: row.text,
            },
        ),
        Err(e) => (line, Err(ParseError { line, reason: e.to_string() })),
    }
}

fn split_list(field: &str) -> Vec<String> {
    field
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_csv_record(line: usize, rec: &csv::StringRecord) -> ParsedLine {
    if rec.len() != CSV_HEADER.len() {
        let reason = format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len());
        return (line, Err(ParseError { line, reason }));
    }
    let timestamp = match rec[2].trim().parse::<i64>() {
        Ok(t) => t,
        Err(e) => {
            let reason = format!("bad timestamp {:?}: {e}", &rec[2]);
            return (line, Err(ParseError { line, reason }));
        }
    };
    finish(
        line,
        TweetRecord {
            tweet_id: rec[0].to_string(),
            author_id: rec[1].to_string(),
            timestamp,
            mention_ids: split_list(&rec[3]),
            hashtags: split_list(&rec[4]).into_iter().map(strip_hash).collect(),
            text: rec[5].to_string(),
        },
    )
}

/// Lazily parses tweet records. Items are `Err` only for fatal failures, after
/// which the stream ends.
pub struct TweetStream<R: Read> {
    inner: Inner<R>,
    done: bool,
}

enum Inner<R: Read> {
    Json { lines: std::io::Lines<std::io::BufReader<R>>, line: usize },
    Csv { reader: csv::Reader<R>, header_checked: bool },
}

pub fn parse_tweet_stream<R: Read>(source: R, format: Format) -> TweetStream<R> {
    let inner = match format {
        Format::JsonLines => Inner::Json {
            lines: std::io::BufReader::new(source).lines(),
            line: 0,
        },
        Format::Csv => Inner::Csv {
            reader: csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .from_reader(source),
            header_checked: false,
        },
    };
    TweetStream { inner, done: false }
}

impl<R: Read> Iterator for TweetStream<R> {
    type Item = Result<ParsedLine>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = match &mut self.inner {
            Inner::Json { lines, line } => loop {
                match lines.next() {
                    None => return None,
                    Some(Err(e)) if e.kind() == std::io::ErrorKind::InvalidData => {
                        *line += 1;
                        let reason = "line is not valid UTF-8".to_string();
                        break Ok((*line, Err(ParseError { line: *line, reason })));
                    }
                    Some(Err(e)) => break Err(Error::Io(e)),
                    Some(Ok(text)) => {
                        *line += 1;
                        if text.trim().is_empty() {
                            continue;
                        }
                        break Ok(parse_json_line(*line, &text));
                    }
                }
            },
            Inner::Csv { reader, header_checked } => loop {
                let mut rec = csv::StringRecord::new();
                match reader.read_record(&mut rec) {
                    Ok(false) => return None,
                    Ok(true) => {
                        let line = rec.position().map_or(0, |p| p.line() as usize);
                        if !*header_checked {
                            *header_checked = true;
                            let found: Vec<&str> = rec.iter().map(str::trim).collect();
                            if found != CSV_HEADER {
                                break Err(Error::Config(format!(
                                    "csv header must be {:?}, found {:?}",
                                    CSV_HEADER.join(","),
                                    found.join(",")
                                )));
                            }
                            continue;
                        }
                        break Ok(parse_csv_record(line, &rec));
                    }
                    Err(e) => match e.kind() {
                        csv::ErrorKind::Io(_) => break Err(Error::Csv(e)),
                        _ => {
                            let line = e.position().map_or(0, |p| p.line() as usize);
                            break Ok((line, Err(ParseError { line, reason: e.to_string() })));
                        }
                    },
                }
            },
        };
        if item.is_err() {
            self.done = true;
        }
        Some(item)
    }
}

/// Drains a stream, separating good records from per-line errors.
pub fn collect_records<R: Read>(stream: TweetStream<R>) -> Result<(Vec<TweetRecord>, Vec<ParseError>)> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for item in stream {
        match item? {
            (_, Ok(rec)) => records.push(rec),
            (_, Err(e)) => errors.push(e),
        }
    }
    Ok((records, errors))
}

/// Writes records in the CSV input layout, header included.
pub fn write_csv<W: Write>(out: W, records: &[TweetRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let ts = r.timestamp.to_string();
        let mentions = r.mention_ids.join(";");
        let hashtags = r.hashtags.join(";");
        w.write_record([&r.tweet_id, &r.author_id, &ts, &mentions, &hashtags, &r.text])?;
    }
    w.flush()?;
    Ok(())
}

pub fn extract_mention_edges(record: &TweetRecord) -> Vec<MentionEdge> {
    record
        .mention_ids
        .iter()
        .map(|dst| MentionEdge {
            src: record.author_id.clone(),
            dst: dst.clone(),
            timestamp: record.timestamp,
            weight: 1.0,
        })
        .collect()
}

/// Top-`k` hashtags by descending count after lowercase folding; ties go to
/// the lexicographically smaller tag.
pub fn count_hashtags<'a, I>(records: I, k: usize) -> Result<Vec<(String, u64)>>
where
    I: IntoIterator<Item = &'a TweetRecord>,
{
    if k == 0 {
        return Err(Error::domain("hashtag k must be at least 1"));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    for rec in records {
        for tag in &rec.hashtags {
            *counts.entry(tag.to_lowercase()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    Ok(ranked)
}
