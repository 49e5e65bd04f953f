//! Synthetic tweet corpora for end-to-end runs.
#![allow(dead_code)]

use std::path::Path;

use mentionscope::ingest::TweetRecord;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 2015-11-30T00:00:00Z.
pub const COP21_START: i64 = 1_448_841_600;
const WEEK: i64 = 604_800;

const TOPICS: [&[&str]; 3] = [
    &["emissions", "carbon", "energy", "solar", "renewable", "coal", "target", "pledge"],
    &["paris", "agreement", "summit", "leaders", "negotiation", "deal", "treaty", "delegates"],
    &["science", "temperature", "warming", "ice", "ocean", "data", "record", "study"],
];
const MOOD: [&str; 8] = ["good", "hope", "great", "progress", "bad", "disaster", "fail", "crisis"];
const TAGS: [&str; 6] = ["climate", "COP21", "ClimateChange", "ParisAgreement", "energy", "actonclimate"];

/// `n` tweets by 60 users in three mention communities, spread over the
/// twelve weeks around the COP21 start.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<TweetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = 3;
    let per_group = 20;
    (0..n)
        .map(|i| {
            let group = rng.gen_range(0..groups);
            let author = group * per_group + rng.gen_range(0..per_group);
            let mentions: Vec<String> = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let g = if rng.gen_bool(0.9) { group } else { rng.gen_range(0..groups) };
                    format!("user{}", g * per_group + rng.gen_range(0..per_group))
                })
                .collect();
            let mut words: Vec<&str> = (0..rng.gen_range(4..9))
                .map(|_| *TOPICS[group].choose(&mut rng).unwrap())
                .collect();
            if rng.gen_bool(0.6) {
                words.push(MOOD.choose(&mut rng).unwrap());
            }
            let tag = *TAGS.choose(&mut rng).unwrap();
            let text = format!("{} #{tag} @{} https://t.co/x{i}", words.join(" "), mentions[0]);
            TweetRecord {
                tweet_id: format!("t{i}"),
                author_id: format!("user{author}"),
                timestamp: COP21_START - 6 * WEEK + rng.gen_range(0..12 * WEEK),
                mention_ids: mentions,
                hashtags: vec![tag.to_string()],
                text,
            }
        })
        .collect()
}

pub fn write_jsonl(path: &Path, records: &[TweetRecord]) {
    let body: String = records.iter().map(|r| r.to_json_line() + "\n").collect();
    std::fs::write(path, body).unwrap();
}

/// Two directed triangles {a,b,c} and {d,e,f}, all in the week of `ts`.
pub fn two_triangle_records(ts: i64) -> Vec<TweetRecord> {
    [("a", "b"), ("b", "c"), ("c", "a"), ("d", "e"), ("e", "f"), ("f", "d")]
        .iter()
        .enumerate()
        .map(|(i, (src, dst))| TweetRecord {
            tweet_id: format!("tri{i}"),
            author_id: src.to_string(),
            timestamp: ts,
            mention_ids: vec![dst.to_string()],
            hashtags: vec![],
            text: "good climate news".into(),
        })
        .collect()
}
