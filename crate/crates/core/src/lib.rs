//! Temporal mention-graph analytics.
//!
//! The pipeline reads pre-collected tweet records, buckets the user-user
//! mention edges into weekly snapshots, runs Louvain community detection on
//! each snapshot, and reports structure in fixed windows around dated events.
//! The same corpus feeds a lexicon sentiment scorer and a TF-IDF + mini-batch
//! NMF topic model.

pub mod community;
pub mod error;
pub mod events;
pub mod graph;
pub mod ingest;
pub mod sentiment;
pub mod topics;

pub use error::{Error, Result};
