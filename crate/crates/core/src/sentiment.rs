//! Averaged-lexicon polarity scoring.
//!
//! A text's polarity is the mean polarity of its tokens that appear in the
//! lexicon, or 0.0 when none do. Tokens are scored independently: there is no
//! negation or intensifier handling.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TweetRecord;
use crate::topics::{self, Tokenizer};

pub const DEFAULT_LEXICON: &str = include_str!("../data/lexicon.csv");

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: HashMap<String, f64>,
}

impl Lexicon {
    /// Builds a lexicon from `(token, polarity)` pairs; later duplicates win.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut lex = Lexicon::default();
        for (i, (token, polarity)) in pairs.into_iter().enumerate() {
            lex.insert(token.as_ref(), polarity)
                .map_err(|reason| Error::Row { row: i + 1, reason })?;
        }
        Ok(lex)
    }

    fn insert(&mut self, token: &str, polarity: f64) -> std::result::Result<bool, String> {
        let token = token.trim().to_lowercase();
        if token.is_empty() {
            return Err("empty token".into());
        }
        if !(-1.0..=1.0).contains(&polarity) {
            return Err(format!("polarity {polarity} for {token:?} is outside [-1, 1]"));
        }
        Ok(self.entries.insert(token, polarity).is_some())
    }

    /// Reads a `token,polarity` CSV with header. Duplicate tokens keep the
    /// last value and log a warning.
    pub fn from_csv<R: Read>(input: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            token: String,
            polarity: f64,
        }
        let mut reader = csv::Reader::from_reader(input);
        let mut lex = Lexicon::default();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Row { row: line, reason: e.to_string() })?;
            let replaced = lex
                .insert(&row.token, row.polarity)
                .map_err(|reason| Error::Row { row: line, reason })?;
            if replaced {
                log::warn!("lexicon line {line}: duplicate token {:?}, keeping the later value", row.token);
            }
        }
        Ok(lex)
    }

    pub fn bundled() -> Self {
        Lexicon::from_csv(DEFAULT_LEXICON.as_bytes()).expect("bundled lexicon is valid")
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The same lexicon with every polarity sign-flipped.
    pub fn negated(&self) -> Self {
        Lexicon {
            entries: self.entries.iter().map(|(t, p)| (t.clone(), -p)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Negative,
    Neutral,
}

pub fn score_polarity(text: &str, lex: &Lexicon) -> f64 {
    score_tokens(&topics::tokenize(text), lex)
}

pub fn score_polarity_with(tokenizer: &Tokenizer, text: &str, lex: &Lexicon) -> f64 {
    score_tokens(&tokenizer.tokenize(text), lex)
}

fn score_tokens(tokens: &[String], lex: &Lexicon) -> f64 {
    let (sum, hits) = tokens
        .iter()
        .filter_map(|t| lex.get(t))
        .fold((0.0, 0usize), |(s, n), p| (s + p, n + 1));
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

pub fn classify(polarity: f64, neutral_band: f64) -> SentimentLabel {
    if polarity > neutral_band {
        SentimentLabel::Positive
    } else if polarity < -neutral_band {
        SentimentLabel::Negative
    } else {
        SentimentLabel::Neutral
    }
}

/// Corpus-level label shares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentDistribution {
    pub positive: f64,
    pub negative: f64,
    pub neutral: f64,
    pub n: usize,
}

pub fn sentiment_distribution<'a, I>(records: I, lex: &Lexicon, neutral_band: f64) -> Result<SentimentDistribution>
where
    I: IntoIterator<Item = &'a TweetRecord>,
{
    if neutral_band.is_nan() || neutral_band < 0.0 {
        return Err(Error::domain(format!("neutral band must be nonnegative, got {neutral_band}")));
    }
    let (mut pos, mut neg, mut neu) = (0usize, 0usize, 0usize);
    for rec in records {
        match classify(score_polarity(&rec.text, lex), neutral_band) {
            SentimentLabel::Positive => pos += 1,
            SentimentLabel::Negative => neg += 1,
            SentimentLabel::Neutral => neu += 1,
        }
    }
    let n = pos + neg + neu;
    if n == 0 {
        return Err(Error::domain("sentiment distribution needs at least one record"));
    }
    let frac = |c: usize| c as f64 / n as f64;
    Ok(SentimentDistribution {
        positive: frac(pos),
        negative: frac(neg),
        neutral: frac(neu),
        n,
    })
}
