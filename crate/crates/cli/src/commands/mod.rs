//! Subcommand implementations. Each takes the resolved configuration and
//! shared stream flags, appends its stage bookkeeping to the run report,
//! and writes kept records to the output stream.

pub mod coco;
pub mod dedup;
pub mod filters;
pub mod metrics;
pub mod plan;
pub mod repo;

use codecorpus::config::PipelineConfig;

/// Shared per-invocation state.
pub struct Ctx {
    pub cfg: PipelineConfig,
    pub input: String,
    pub output: String,
}
