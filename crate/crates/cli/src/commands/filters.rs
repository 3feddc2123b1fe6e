//! The `filter-source`, `filter-text`, and `pipeline` subcommands.

use rayon::prelude::*;

use codecorpus::filters::{filter_source, filter_text, FilterVerdict};
use codecorpus::record::CorpusRecord;

use crate::report::StageReport;
use crate::stream::{read_records, write_records, CliError};

use super::Ctx;

/// A record-stream stage that can run standalone or inside `pipeline`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamStage {
    FilterSource,
    FilterText,
    Dedup,
}

impl StreamStage {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "filter-source" => Ok(StreamStage::FilterSource),
            "filter-text" => Ok(StreamStage::FilterText),
            "dedup" => Ok(StreamStage::Dedup),
            other => Err(CliError::usage(format!(
                "unknown pipeline stage {other:?} (expected filter-source, filter-text, or dedup)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StreamStage::FilterSource => "filter-source",
            StreamStage::FilterText => "filter-text",
            StreamStage::Dedup => "dedup",
        }
    }
}

/// Apply one stream stage to an in-memory batch, preserving input order.
pub fn apply_stage(
    stage: StreamStage,
    records: Vec<CorpusRecord>,
    ctx: &Ctx,
) -> Result<(Vec<CorpusRecord>, StageReport), CliError> {
    match stage {
        StreamStage::Dedup => super::dedup::apply_dedup(records, ctx, None),
        StreamStage::FilterSource | StreamStage::FilterText => {
            let mut report = StageReport::new(stage.name());
            let verdicts: Result<Vec<FilterVerdict>, _> = records
                .par_iter()
                .map(|record| match stage {
                    StreamStage::FilterSource => filter_source(record, &ctx.cfg),
                    StreamStage::FilterText => filter_text(record, &ctx.cfg),
                    StreamStage::Dedup => unreachable!(),
                })
                .collect();
            let verdicts = verdicts.map_err(|e| CliError::usage(e.to_string()))?;
            let mut kept = Vec::with_capacity(records.len());
            for (record, verdict) in records.into_iter().zip(verdicts) {
                if verdict.keep {
                    report.record_kept();
                    kept.push(record);
                } else {
                    report.record_rejected(verdict.rule_id.as_deref().unwrap_or("unknown"));
                }
            }
            Ok((kept, report))
        }
    }
}

/// Run one or more stream stages end to end.
pub fn run_pipeline(
    stages: &[StreamStage],
    ctx: &Ctx,
    report_stages: &mut Vec<StageReport>,
) -> Result<(), CliError> {
    let mut records = read_records(&ctx.input)?.records;
    for &stage in stages {
        let (kept, stage_report) = apply_stage(stage, records, ctx)?;
        report_stages.push(stage_report);
        records = kept;
    }
    write_records(records.iter(), &ctx.output)
}
