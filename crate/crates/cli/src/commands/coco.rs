//! The `coco` subcommand: rule-based and semantic pair sanitization.

use std::collections::HashMap;

use codecorpus::coco::{
    sanitize_rules, semantic_filter, CocoPair, HttpScoringClient, ScoringClient, SeenDigests,
    StubScoringClient,
};

use crate::report::StageReport;
use crate::stream::{read_records, write_records, write_text, CliError};

use super::Ctx;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CocoMode {
    Rules,
    Semantic,
    Full,
}

impl CocoMode {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "rules" => Ok(CocoMode::Rules),
            "semantic" => Ok(CocoMode::Semantic),
            "full" => Ok(CocoMode::Full),
            other => Err(CliError::usage(format!(
                "unknown coco mode {other:?} (expected rules, semantic, or full)"
            ))),
        }
    }
}

fn load_canned_responses(path: &str) -> Result<HashMap<String, String>, CliError> {
    let bytes = crate::stream::read_input(path)?;
    let text = String::from_utf8_lossy(&bytes);
    let mut map = HashMap::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| CliError::usage(format!("bad canned-response line: {e}")))?;
        let id = value
            .get("id")
            .and_then(|v| v.as_str())
            .ok_or_else(|| CliError::usage("canned response lacks an id"))?;
        let response = value
            .get("response")
            .and_then(|v| v.as_str())
            .ok_or_else(|| CliError::usage("canned response lacks a response"))?;
        map.insert(id.to_string(), response.to_string());
    }
    Ok(map)
}

fn build_client(
    ctx: &Ctx,
    responses_path: Option<&str>,
) -> Result<Box<dyn ScoringClient>, CliError> {
    if let Some(path) = responses_path {
        let mut stub = StubScoringClient::always_consistent();
        for (id, response) in load_canned_responses(path)? {
            stub = stub.with_response(id, response);
        }
        return Ok(Box::new(stub));
    }
    if let Some(endpoint) = &ctx.cfg.scorer_endpoint {
        return Ok(Box::new(HttpScoringClient::new(
            endpoint.clone(),
            ctx.cfg.scorer_model.clone(),
        )));
    }
    Ok(Box::new(StubScoringClient::always_consistent()))
}

pub fn run_coco(
    mode: CocoMode,
    responses_path: Option<&str>,
    audit_path: Option<&str>,
    ctx: &Ctx,
    report_stages: &mut Vec<StageReport>,
) -> Result<(), CliError> {
    let records = read_records(&ctx.input)?.records;
    let mut pairs = Vec::with_capacity(records.len());
    for record in &records {
        pairs.push(CocoPair::from_record(record).map_err(|e| CliError::usage(e.to_string()))?);
    }

    if matches!(mode, CocoMode::Rules | CocoMode::Full) {
        let mut stage = StageReport::new("coco-rules");
        let mut seen = SeenDigests::new();
        let mut kept = Vec::with_capacity(pairs.len());
        for pair in pairs {
            let verdict = sanitize_rules(&pair, &mut seen, &ctx.cfg);
            if verdict.keep {
                stage.record_kept();
                kept.push(pair);
            } else {
                stage.record_rejected(verdict.rule_id.as_deref().unwrap_or("unknown"));
            }
        }
        report_stages.push(stage);
        pairs = kept;
    }

    if matches!(mode, CocoMode::Semantic | CocoMode::Full) {
        let client = build_client(ctx, responses_path)?;
        let outcome = semantic_filter(
            pairs,
            client.as_ref(),
            ctx.cfg.scorer_max_retries,
            ctx.cfg.scorer_concurrency,
        );
        if let Some(path) = audit_path {
            let mut lines = String::new();
            for entry in &outcome.transcripts {
                lines.push_str(&serde_json::to_string(entry).expect("audit entry serializes"));
                lines.push('\n');
            }
            write_text(&lines, path)?;
        }
        let mut stage = StageReport::new("coco-semantic");
        for _ in &outcome.kept {
            stage.record_kept();
        }
        for (_, reason) in &outcome.dropped {
            let rule = match reason {
                codecorpus::coco::DropReason::Inconsistent => "inconsistent",
                codecorpus::coco::DropReason::Unparseable => "unparseable",
            };
            stage.record_rejected(rule);
        }
        for _ in &outcome.deferred {
            stage.record_rejected("deferred");
        }
        report_stages.push(stage);
        pairs = outcome.kept;
    }

    let out_records: Vec<_> = pairs.iter().map(|p| p.to_record()).collect();
    write_records(out_records.iter(), &ctx.output)
}
