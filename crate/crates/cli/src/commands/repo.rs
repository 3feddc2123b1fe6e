//! The `repo-graph`, `toposort`, and `repo-concat` subcommands.

use std::collections::BTreeMap;

use codecorpus::concat::{concat_repo, repo_quality, repo_quality_filter, RepoThresholds};
use codecorpus::lang::LanguageRegistry;
use codecorpus::metrics::ScorerRegistry;
use codecorpus::record::{CorpusRecord, MetaValue, RecordKind};
use codecorpus::repo::graph::ImportGraph;
use codecorpus::repo::{build_graph, ExtractionBackend, RepoSnapshot};
use codecorpus::toposort::{lex_topo_sort, validate_order};

use crate::report::StageReport;
use crate::stream::{read_input, read_records, write_records, write_text, CliError};

use super::Ctx;

/// Group repo_file records into snapshots keyed by repo id. Records
/// without a repo_id fall into the "default" repository.
fn group_repos(records: Vec<CorpusRecord>) -> Result<BTreeMap<String, RepoSnapshot>, CliError> {
    let mut files: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for record in records {
        if record.kind != RecordKind::RepoFile {
            return Err(CliError::usage(format!(
                "record {:?} has kind {}, expected repo_file",
                record.id, record.kind
            )));
        }
        let path = record.path.clone().ok_or_else(|| {
            CliError::usage(format!("repo_file record {:?} has no path", record.id))
        })?;
        let repo = record
            .repo_id
            .clone()
            .unwrap_or_else(|| "default".to_string());
        files.entry(repo).or_default().push((path, record.content));
    }
    let mut snapshots = BTreeMap::new();
    for (repo_id, files) in files {
        let snapshot = RepoSnapshot::new(repo_id.clone(), files)
            .map_err(|e| CliError::usage(format!("repo {repo_id:?}: {e}")))?;
        snapshots.insert(repo_id, snapshot);
    }
    Ok(snapshots)
}

fn select_repo(
    snapshots: BTreeMap<String, RepoSnapshot>,
    wanted: Option<&str>,
) -> Result<RepoSnapshot, CliError> {
    match wanted {
        Some(id) => snapshots
            .into_iter()
            .find(|(repo_id, _)| repo_id == id)
            .map(|(_, s)| s)
            .ok_or_else(|| CliError::usage(format!("no records for repo {id:?}"))),
        None => {
            let mut iter = snapshots.into_iter();
            let first = iter
                .next()
                .ok_or_else(|| CliError::usage("input stream holds no repo_file records"))?;
            if let Some((second, _)) = iter.next() {
                return Err(CliError::usage(format!(
                    "stream holds several repositories ({} and {second} at least); pick one with --repo",
                    first.0
                )));
            }
            Ok(first.1)
        }
    }
}

/// Emit the import graph of one repository as `u<TAB>v` lines.
pub fn run_repo_graph(
    repo: Option<&str>,
    ctx: &Ctx,
    report_stages: &mut Vec<StageReport>,
) -> Result<(), CliError> {
    let records = read_records(&ctx.input)?.records;
    let total_files = records.len();
    let snapshot = select_repo(group_repos(records)?, repo)?;
    let langs = LanguageRegistry::default();
    let graph = build_graph(&snapshot, &langs, ExtractionBackend::Scanner);

    let mut stage = StageReport::new("repo-graph");
    stage.input = total_files;
    stage.kept = graph.node_count();
    stage.rejected = total_files - graph.node_count();
    if stage.rejected > 0 {
        stage
            .rule_histogram
            .insert("unsupported_language".to_string(), stage.rejected);
    }
    stage.details.insert(
        "edges".to_string(),
        serde_json::Value::from(graph.edge_count()),
    );
    report_stages.push(stage);
    write_text(&graph.to_tsv(), &ctx.output)
}

/// Sort a serialized graph and emit the node order, one path per line.
pub fn run_toposort(ctx: &Ctx, report_stages: &mut Vec<StageReport>) -> Result<(), CliError> {
    let bytes = read_input(&ctx.input)?;
    let text = String::from_utf8_lossy(&bytes);
    let graph = ImportGraph::from_tsv(&text).map_err(|e| CliError::usage(e.to_string()))?;
    let topo = lex_topo_sort(&graph);
    let violations = validate_order(&graph, &topo).map_err(|e| CliError::usage(e.to_string()))?;

    let mut stage = StageReport::new("toposort");
    stage.input = graph.node_count();
    stage.kept = graph.node_count();
    let broken: Vec<&str> = topo.cycle_broken.iter().map(|&id| graph.path(id)).collect();
    stage
        .details
        .insert("cycle_broken".to_string(), serde_json::json!(broken));
    stage.details.insert(
        "violated_edges".to_string(),
        serde_json::Value::from(violations.len()),
    );
    report_stages.push(stage);

    let mut out = String::new();
    for &id in &topo.order {
        out.push_str(graph.path(id));
        out.push('\n');
    }
    write_text(&out, &ctx.output)
}

/// Concatenate every repository in the stream, gate on aggregate quality,
/// and emit one document record per kept repository.
pub fn run_repo_concat(ctx: &Ctx, report_stages: &mut Vec<StageReport>) -> Result<(), CliError> {
    let records = read_records(&ctx.input)?.records;
    let snapshots = group_repos(records)?;
    let langs = LanguageRegistry::default();
    let scorers = ScorerRegistry::default();
    let thresholds = RepoThresholds::from(&ctx.cfg);

    let mut stage = StageReport::new("repo-concat");
    let mut documents = Vec::new();
    for (repo_id, snapshot) in snapshots {
        let graph = build_graph(&snapshot, &langs, ExtractionBackend::Scanner);
        if graph.node_count() == 0 {
            stage.record_rejected("no_supported_files");
            continue;
        }
        let topo = lex_topo_sort(&graph);
        let paths: Vec<&str> = topo.order.iter().map(|&id| graph.path(id)).collect();
        let quality = repo_quality(&snapshot, &paths, &langs, &scorers, "default")
            .map_err(|e| CliError::usage(format!("repo {repo_id:?}: {e}")))?;
        let verdict = repo_quality_filter(&quality, &thresholds);
        if !verdict.keep {
            stage.record_rejected(verdict.rule_id.as_deref().unwrap_or("repo_quality"));
            continue;
        }
        let doc = concat_repo(
            &snapshot,
            &graph,
            &topo,
            &langs,
            &ctx.cfg.separator_template,
        )
        .map_err(|e| CliError::usage(format!("repo {repo_id:?}: {e}")))?;
        let mut record =
            CorpusRecord::new(repo_id.clone(), RecordKind::Text, doc).with_repo_id(repo_id.clone());
        record.meta.insert(
            "avg_quality_score".to_string(),
            MetaValue::Float(quality.avg_quality_score),
        );
        record.meta.insert(
            "avg_comment_ratio".to_string(),
            MetaValue::Float(quality.avg_comment_ratio),
        );
        record.meta.insert(
            "avg_effective_loc".to_string(),
            MetaValue::Float(quality.avg_effective_loc),
        );
        record.meta.insert(
            "file_count".to_string(),
            MetaValue::Int(quality.file_count as i64),
        );
        record.meta.insert(
            "cycle_broken".to_string(),
            MetaValue::Int(topo.cycle_broken.len() as i64),
        );
        stage.record_kept();
        documents.push(record);
    }
    report_stages.push(stage);
    write_records(documents.iter(), &ctx.output)
}
