//! The `metrics` and `cascade` subcommands.

use rayon::prelude::*;

use codecorpus::lang::LanguageRegistry;
use codecorpus::metrics::{
    comment_ratio, effective_loc, quality_score, score_cascade, syntax_valid, AdapterRegistry,
    CascadeStage, MetaScorer, ScorerRegistry, StagePredicate, SyntaxValidity,
};
use codecorpus::record::{CorpusRecord, MetaValue, RecordKind};

use crate::report::StageReport;
use crate::stream::{read_records, write_records, CliError};

use super::Ctx;

fn syntax_label(v: SyntaxValidity) -> &'static str {
    match v {
        SyntaxValidity::Valid => "true",
        SyntaxValidity::Invalid => "false",
        SyntaxValidity::Unknown {
            leaning_valid: true,
        } => "unknown-true",
        SyntaxValidity::Unknown {
            leaning_valid: false,
        } => "unknown-false",
    }
}

/// Annotate each source record's meta with its code metrics.
pub fn run_metrics(ctx: &Ctx, report_stages: &mut Vec<StageReport>) -> Result<(), CliError> {
    let records = read_records(&ctx.input)?.records;
    let langs = LanguageRegistry::default();
    let adapters = AdapterRegistry::with_defaults(&langs);
    let scorers = ScorerRegistry::default();

    let annotated: Result<Vec<CorpusRecord>, CliError> = records
        .par_iter()
        .map(|record| {
            if !matches!(record.kind, RecordKind::SourceCode | RecordKind::RepoFile) {
                return Err(CliError::usage(format!(
                    "record {:?} has kind {}, metrics apply to source_code or repo_file",
                    record.id, record.kind
                )));
            }
            let tag = record.language.as_deref().unwrap_or("");
            if langs.get(tag).is_none() {
                return Err(CliError::usage(format!(
                    "record {:?} has unknown language tag {tag:?}",
                    record.id
                )));
            }
            let ratio = comment_ratio(&record.content, tag, &langs)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let eloc = effective_loc(&record.content, tag, &langs)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let syntax = syntax_valid(&record.content, tag, &adapters)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let score = quality_score(record, "default", &scorers)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let mut out = record.clone();
            out.meta
                .insert("comment_ratio".to_string(), MetaValue::Float(ratio));
            out.meta
                .insert("effective_loc".to_string(), MetaValue::Int(eloc as i64));
            out.meta.insert(
                "syntax_valid".to_string(),
                MetaValue::Str(syntax_label(syntax).to_string()),
            );
            out.meta
                .insert("quality_score".to_string(), MetaValue::Float(score));
            Ok(out)
        })
        .collect();
    let annotated = annotated?;

    let mut stage = StageReport::new("metrics");
    for _ in &annotated {
        stage.record_kept();
    }
    report_stages.push(stage);
    write_records(annotated.iter(), &ctx.output)
}

/// Parse `SCORER>=T` or `SCORER==T`.
pub fn parse_stage_spec(spec: &str) -> Result<CascadeStage, CliError> {
    let (scorer, predicate) = if let Some((s, t)) = spec.split_once(">=") {
        (s, StagePredicate::AtLeast(parse_threshold(spec, t)?))
    } else if let Some((s, t)) = spec.split_once("==") {
        (s, StagePredicate::Exactly(parse_threshold(spec, t)?))
    } else {
        return Err(CliError::usage(format!(
            "stage {spec:?} must look like SCORER>=T or SCORER==T"
        )));
    };
    if scorer.is_empty() {
        return Err(CliError::usage(format!("stage {spec:?} names no scorer")));
    }
    Ok(CascadeStage {
        scorer: scorer.to_string(),
        predicate,
    })
}

fn parse_threshold(spec: &str, raw: &str) -> Result<f64, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::usage(format!("stage {spec:?} has a non-numeric threshold")))
}

/// Run records through an ordered stage cascade.
pub fn run_cascade(
    stage_specs: &[String],
    ctx: &Ctx,
    report_stages: &mut Vec<StageReport>,
) -> Result<(), CliError> {
    let stages: Result<Vec<CascadeStage>, CliError> =
        stage_specs.iter().map(|s| parse_stage_spec(s)).collect();
    let stages = stages?;

    let mut registry = ScorerRegistry::default();
    for stage in &stages {
        if let Some(key) = stage.scorer.strip_prefix("meta:") {
            registry.register(Box::new(MetaScorer::new(key)));
        }
    }

    let records = read_records(&ctx.input)?.records;
    let outcome =
        score_cascade(&records, &stages, &registry).map_err(|e| CliError::usage(e.to_string()))?;

    for (stage, counts) in stages.iter().zip(&outcome.stage_counts) {
        let mut sr = StageReport::new(format!("cascade:{}", stage.scorer));
        sr.input = counts.input;
        sr.kept = counts.kept;
        sr.rejected = counts.removed;
        if counts.removed > 0 {
            sr.rule_histogram
                .insert("below_threshold".to_string(), counts.removed);
        }
        report_stages.push(sr);
    }

    let kept: Vec<&CorpusRecord> = records
        .iter()
        .filter(|r| outcome.kept_ids.contains(&r.id))
        .collect();
    write_records(kept, &ctx.output)
}
