//! The `dedup` subcommand: near-deduplication over a record stream.

use codecorpus::dedup::{near_dedup, MinHashParams};
use codecorpus::record::CorpusRecord;

use crate::report::StageReport;
use crate::stream::{write_text, CliError};

use super::Ctx;

pub const NEAR_DUPLICATE_RULE: &str = "near_duplicate";

/// Cluster the batch and keep one representative per cluster; output
/// order follows input order. Optionally writes the cluster report.
pub fn apply_dedup(
    records: Vec<CorpusRecord>,
    ctx: &Ctx,
    clusters_path: Option<&str>,
) -> Result<(Vec<CorpusRecord>, StageReport), CliError> {
    let params = MinHashParams {
        num_permutations: ctx.cfg.dedup_num_permutations,
        shingle_words: ctx.cfg.dedup_shingle_words,
        bands: ctx.cfg.dedup_bands,
    };
    let outcome = near_dedup(
        records.iter().map(|r| (r.id.as_str(), r.content.as_str())),
        &params,
        ctx.cfg.dedup_threshold,
    );
    if let Some(path) = clusters_path {
        write_text(&outcome.report_lines(), path)?;
    }
    let mut report = StageReport::new("dedup");
    let mut kept = Vec::with_capacity(outcome.kept_ids.len());
    for record in records {
        if outcome.kept_ids.contains(&record.id) {
            report.record_kept();
            kept.push(record);
        } else {
            report.record_rejected(NEAR_DUPLICATE_RULE);
        }
    }
    Ok((kept, report))
}
