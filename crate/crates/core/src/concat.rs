//! Repository concatenation: join a repository's files in dependency
//! order into one training document, and gate repositories on aggregate
//! quality attributes.
//!
//! Document format: each file contributes a separator line, the file
//! content, then one terminator newline. The separator is the configured
//! template (default `---- FILE: {path} ----`) rendered as a comment in
//! the file's own language, with a `==== ... ====` sentinel for unknown
//! languages. Splitting strips exactly one trailing newline per section,
//! so concat-then-split recovers the ordered `(path, content)` sequence
//! byte-exactly. Content lines that could be mistaken for separators are
//! protected by prepending one space at concat time and removing it at
//! split time (the escape class — lines that match a separator shape after
//! leading-space stripping — is closed under adding spaces, so the mapping
//! inverts exactly).

use thiserror::Error;

use crate::filters::FilterVerdict;
use crate::lang::LanguageRegistry;
use crate::metrics::{comment_ratio, effective_loc, quality_score, ScorerRegistry};
use crate::record::{CorpusRecord, RecordKind};
use crate::repo::graph::ImportGraph;
use crate::repo::vfs::RepoSnapshot;
use crate::toposort::TopoOrder;

#[derive(Debug, Error)]
pub enum ConcatError {
    #[error("topo order does not cover the snapshot's supported files: {0}")]
    OrderMismatch(String),
    #[error("document is malformed at line {line}: {reason}")]
    Split { line: usize, reason: String },
    #[error("repository has no files to aggregate")]
    EmptyRepo,
    #[error("metrics failed for {path}: {message}")]
    FileMetrics { path: String, message: String },
}

/// Render the separator line for one file.
pub fn separator_line(path: &str, langs: &LanguageRegistry, template: &str) -> String {
    let core = template.replace("{path}", path);
    match langs.of_path(path) {
        Some(spec) => spec.comment_line(&core),
        None => format!("==== {core} ===="),
    }
}

/// The `(prefix, suffix)` comment wrappers a separator may carry.
fn comment_wrappers(langs: &LanguageRegistry) -> Vec<(String, String)> {
    let mut wrappers: Vec<(String, String)> = Vec::new();
    for tag in langs.tags() {
        let spec = langs.get(tag).unwrap();
        let rendered = spec.comment_line("\u{0}");
        let (prefix, suffix) = match rendered.split_once('\u{0}') {
            Some((p, s)) => (p.to_string(), s.to_string()),
            None => continue,
        };
        if !wrappers.contains(&(prefix.clone(), suffix.clone())) {
            wrappers.push((prefix, suffix));
        }
    }
    wrappers.push(("==== ".to_string(), " ====".to_string()));
    wrappers
}

/// Does `line` (no leading spaces stripped) exactly match a separator
/// shape? Returns the embedded path when it does.
fn match_separator(line: &str, wrappers: &[(String, String)], template: &str) -> Option<String> {
    let (t_pre, t_suf) = template.split_once("{path}")?;
    for (w_pre, w_suf) in wrappers {
        let Some(rest) = line.strip_prefix(w_pre.as_str()) else {
            continue;
        };
        let Some(rest) = rest.strip_suffix(w_suf.as_str()) else {
            continue;
        };
        if let Some(inner) = rest.strip_prefix(t_pre).and_then(|r| r.strip_suffix(t_suf)) {
            if !inner.is_empty() {
                return Some(inner.to_string());
            }
        }
    }
    None
}

fn is_separator_shape(line: &str, wrappers: &[(String, String)], template: &str) -> bool {
    match_separator(line, wrappers, template).is_some()
}

/// Concatenate the snapshot's files in the topological order.
///
/// `topo` must be an order over `graph`, and `graph`'s nodes must be
/// exactly the snapshot's supported files.
pub fn concat_repo(
    snapshot: &RepoSnapshot,
    graph: &ImportGraph,
    topo: &TopoOrder,
    langs: &LanguageRegistry,
    template: &str,
) -> Result<String, ConcatError> {
    if topo.order.len() != graph.node_count() {
        return Err(ConcatError::OrderMismatch(format!(
            "order has {} entries, graph has {} nodes",
            topo.order.len(),
            graph.node_count()
        )));
    }
    let vfs = snapshot.vfs();
    for path in graph.paths() {
        if !vfs.contains(path) {
            return Err(ConcatError::OrderMismatch(format!(
                "graph node {path:?} is not in the snapshot"
            )));
        }
    }
    let wrappers = comment_wrappers(langs);
    let mut doc = String::new();
    for &id in &topo.order {
        let path = graph.path(id);
        let content = vfs.read(path).expect("validated above");
        doc.push_str(&separator_line(path, langs, template));
        doc.push('\n');
        for line in content.split_inclusive('\n') {
            let bare = line.strip_suffix('\n').unwrap_or(line);
            if is_separator_shape(bare.trim_start_matches(' '), &wrappers, template) {
                doc.push(' ');
            }
            doc.push_str(line);
        }
        doc.push('\n');
    }
    Ok(doc)
}

/// Invert [`concat_repo`]: recover the ordered `(path, content)` sequence.
pub fn split_document(
    doc: &str,
    langs: &LanguageRegistry,
    template: &str,
) -> Result<Vec<(String, String)>, ConcatError> {
    let wrappers = comment_wrappers(langs);
    let mut sections: Vec<(String, String)> = Vec::new();
    let mut current: Option<(String, String)> = None;

    for (idx, raw_line) in doc.split_inclusive('\n').enumerate() {
        let line_no = idx + 1;
        let bare = raw_line.strip_suffix('\n').unwrap_or(raw_line);
        if let Some(path) = match_separator(bare, &wrappers, template) {
            if let Some(section) = current.take() {
                sections.push(finish_section(section)?);
            }
            current = Some((path, String::new()));
            continue;
        }
        let Some((_, content)) = current.as_mut() else {
            return Err(ConcatError::Split {
                line: line_no,
                reason: "content before the first separator".to_string(),
            });
        };
        if let Some(stripped) = bare.strip_prefix(' ') {
            if is_separator_shape(stripped.trim_start_matches(' '), &wrappers, template) {
                content.push_str(stripped);
                if raw_line.ends_with('\n') {
                    content.push('\n');
                }
                continue;
            }
        }
        content.push_str(raw_line);
    }
    if let Some(section) = current.take() {
        sections.push(finish_section(section)?);
    }
    Ok(sections)
}

fn finish_section((path, mut content): (String, String)) -> Result<(String, String), ConcatError> {
    if !content.ends_with('\n') {
        return Err(ConcatError::Split {
            line: 0,
            reason: format!("section {path:?} lost its terminator"),
        });
    }
    content.pop();
    Ok((path, content))
}

/// Aggregate quality attributes of one repository's concatenated files.
#[derive(Debug, Clone, PartialEq)]
pub struct RepoQuality {
    pub avg_quality_score: f64,
    pub avg_comment_ratio: f64,
    pub avg_effective_loc: f64,
    pub file_count: usize,
}

/// Thresholds for the repository gate; all three are minimums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepoThresholds {
    pub min_quality_score: f64,
    pub min_comment_ratio: f64,
    pub min_effective_loc: f64,
}

impl From<&crate::config::PipelineConfig> for RepoThresholds {
    fn from(cfg: &crate::config::PipelineConfig) -> Self {
        RepoThresholds {
            min_quality_score: cfg.repo_min_quality_score,
            min_comment_ratio: cfg.repo_min_comment_ratio,
            min_effective_loc: cfg.repo_min_effective_loc,
        }
    }
}

/// Compute per-file metrics averaged over exactly the given files.
pub fn repo_quality(
    snapshot: &RepoSnapshot,
    paths: &[&str],
    langs: &LanguageRegistry,
    scorers: &ScorerRegistry,
    scorer_id: &str,
) -> Result<RepoQuality, ConcatError> {
    if paths.is_empty() {
        return Err(ConcatError::EmptyRepo);
    }
    let vfs = snapshot.vfs();
    let mut sum_score = 0.0;
    let mut sum_ratio = 0.0;
    let mut sum_loc = 0.0;
    for path in paths {
        let content = vfs.read(path).ok_or_else(|| {
            ConcatError::OrderMismatch(format!("path {path:?} is not in the snapshot"))
        })?;
        let tag = langs.of_path(path).map(|s| s.tag).unwrap_or("");
        let mut record = CorpusRecord::new(*path, RecordKind::RepoFile, content);
        if !tag.is_empty() {
            record = record.with_language(tag);
        }
        let score =
            quality_score(&record, scorer_id, scorers).map_err(|e| ConcatError::FileMetrics {
                path: path.to_string(),
                message: e.to_string(),
            })?;
        sum_score += score;
        if !tag.is_empty() {
            sum_ratio +=
                comment_ratio(content, tag, langs).map_err(|e| ConcatError::FileMetrics {
                    path: path.to_string(),
                    message: e.to_string(),
                })?;
            sum_loc += effective_loc(content, tag, langs).map_err(|e| ConcatError::FileMetrics {
                path: path.to_string(),
                message: e.to_string(),
            })? as f64;
        }
    }
    let n = paths.len() as f64;
    Ok(RepoQuality {
        avg_quality_score: sum_score / n,
        avg_comment_ratio: sum_ratio / n,
        avg_effective_loc: sum_loc / n,
        file_count: paths.len(),
    })
}

/// Rule id reported when a repository fails the aggregate gate.
pub const REPO_QUALITY_RULE: &str = "repo_quality";

/// Keep iff every aggregate attribute clears its minimum.
pub fn repo_quality_filter(quality: &RepoQuality, thresholds: &RepoThresholds) -> FilterVerdict {
    if quality.avg_quality_score < thresholds.min_quality_score {
        return FilterVerdict::reject(REPO_QUALITY_RULE, Some(quality.avg_quality_score));
    }
    if quality.avg_comment_ratio < thresholds.min_comment_ratio {
        return FilterVerdict::reject(REPO_QUALITY_RULE, Some(quality.avg_comment_ratio));
    }
    if quality.avg_effective_loc < thresholds.min_effective_loc {
        return FilterVerdict::reject(REPO_QUALITY_RULE, Some(quality.avg_effective_loc));
    }
    FilterVerdict::keep()
}
