//! Detection of coordinated amplification, superspreaders and
//! social-to-news precedence pathways in DOI-mentioning post and news
//! streams.

pub mod alignment;
pub mod coactivity;
pub mod error;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod par;
pub mod pathways;
pub mod pipeline;
pub mod profiling;
pub mod spreaders;
pub mod stats;
pub mod synth;
pub mod vectors;

pub use error::{Error, Result};
