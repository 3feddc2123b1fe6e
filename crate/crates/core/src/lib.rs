//! Code corpus curation toolkit.
//!
//! A library for building code training corpora: rule-based filtering of
//! source and code-related text, exact and MinHash near-deduplication,
//! code quality metrics with staged score cascades, repository import
//! graphs with cycle-tolerant topological ordering and concatenation,
//! code-comment pair sanitization, and deterministic training-plan and
//! architecture-budget calculators.

pub mod budget;
pub mod coco;
pub mod concat;
pub mod config;
pub mod dedup;
pub mod filters;
pub mod lang;
pub mod metrics;
pub mod patterns;
pub mod plan;
pub mod presets;
pub mod record;
pub mod repo;
pub mod stats;
pub mod toposort;

pub use config::PipelineConfig;
pub use filters::FilterVerdict;
pub use record::{CorpusRecord, MetaValue, RecordKind};
