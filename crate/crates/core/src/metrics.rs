//! Code quality measurement: comment ratio, effective lines of code,
//! syntax validity through pluggable adapters, quality scorers, and staged
//! score cascades.
//!
//! Comment ratio is line-based: a line counts as a comment line when all
//! of its non-whitespace content lies inside comments, and the ratio
//! divides comment lines by non-blank lines. Effective lines are the
//! non-blank, non-comment lines, so the two are disjoint by construction.

use std::collections::HashMap;

use thiserror::Error;

use crate::lang::{scan, CommentSyntax, LanguageRegistry, LineKind};
use crate::record::CorpusRecord;
use crate::stats::compute_content_stats;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("unknown language tag {0:?}")]
    UnknownLanguage(String),
    #[error("syntax adapter {id:?} failed: {message}")]
    Adapter { id: String, message: String },
    #[error("scorer {id:?} failed on record {record}: {message}")]
    Scorer {
        id: String,
        record: String,
        message: String,
    },
    #[error("cascade references unregistered scorer {0:?}")]
    UnregisteredScorer(String),
}

/// Verdict of a syntax check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntaxValidity {
    Valid,
    Invalid,
    /// No adapter registered for the language; the bracket-balance
    /// heuristic supplies a leaning instead of an answer.
    Unknown {
        leaning_valid: bool,
    },
}

impl SyntaxValidity {
    pub fn is_definite(&self) -> bool {
        !matches!(self, SyntaxValidity::Unknown { .. })
    }
}

/// Narrow parsing interface: report whether the content parses cleanly.
/// Any concrete-syntax-tree parser can back this.
pub trait SyntaxAdapter {
    fn id(&self) -> &str;
    fn check(&self, content: &str) -> Result<bool, String>;
}

/// Default adapter: brackets `()[]{}` must balance outside comments and
/// string literals.
#[derive(Debug, Clone)]
pub struct BracketBalanceAdapter {
    id: String,
    syntax: CommentSyntax,
}

impl BracketBalanceAdapter {
    pub fn new(tag: &str, syntax: CommentSyntax) -> Self {
        BracketBalanceAdapter {
            id: format!("bracket-balance:{tag}"),
            syntax,
        }
    }
}

/// Bracket balance over a pre-stripped code view.
pub fn brackets_balanced(code_only: &str) -> bool {
    let mut stack = Vec::new();
    for c in code_only.chars() {
        match c {
            '(' | '[' | '{' => stack.push(c),
            ')' => {
                if stack.pop() != Some('(') {
                    return false;
                }
            }
            ']' => {
                if stack.pop() != Some('[') {
                    return false;
                }
            }
            '}' if stack.pop() != Some('{') => {
                return false;
            }
            _ => {}
        }
    }
    stack.is_empty()
}

impl SyntaxAdapter for BracketBalanceAdapter {
    fn id(&self) -> &str {
        &self.id
    }

    fn check(&self, content: &str) -> Result<bool, String> {
        Ok(brackets_balanced(&scan(content, &self.syntax).code_only))
    }
}

/// Adapter registry: language tag to syntax adapter.
pub struct AdapterRegistry {
    adapters: HashMap<String, Box<dyn SyntaxAdapter + Send + Sync>>,
}

impl AdapterRegistry {
    pub fn empty() -> Self {
        AdapterRegistry {
            adapters: HashMap::new(),
        }
    }

    /// Registry with a bracket-balance adapter for every language in `langs`.
    pub fn with_defaults(langs: &LanguageRegistry) -> Self {
        let mut reg = AdapterRegistry::empty();
        for tag in langs.tags() {
            let syntax = langs.get(tag).unwrap().comments;
            reg.register(tag, Box::new(BracketBalanceAdapter::new(tag, syntax)));
        }
        reg
    }

    pub fn register(&mut self, tag: &str, adapter: Box<dyn SyntaxAdapter + Send + Sync>) {
        self.adapters.insert(tag.to_string(), adapter);
    }

    pub fn get(&self, tag: &str) -> Option<&(dyn SyntaxAdapter + Send + Sync)> {
        self.adapters.get(tag).map(|b| b.as_ref())
    }
}

impl Default for AdapterRegistry {
    fn default() -> Self {
        AdapterRegistry::with_defaults(&LanguageRegistry::default())
    }
}

/// Per-file metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeMetrics {
    pub comment_ratio: f64,
    pub effective_loc: usize,
    pub syntax: SyntaxValidity,
    pub quality_score: Option<f64>,
}

fn line_counts(content: &str, syntax: &CommentSyntax) -> (usize, usize, usize) {
    let kinds = scan(content, syntax).line_kinds;
    let mut comment = 0usize;
    let mut code = 0usize;
    let mut blank = 0usize;
    for k in kinds {
        match k {
            LineKind::Comment => comment += 1,
            LineKind::Code => code += 1,
            LineKind::Blank => blank += 1,
        }
    }
    (comment, code, blank)
}

/// Comment lines over non-blank lines; 0 when there are no non-blank lines.
pub fn comment_ratio(
    content: &str,
    language: &str,
    langs: &LanguageRegistry,
) -> Result<f64, MetricsError> {
    let spec = langs
        .get(language)
        .ok_or_else(|| MetricsError::UnknownLanguage(language.to_string()))?;
    let (comment, code, _) = line_counts(content, &spec.comments);
    let non_blank = comment + code;
    if non_blank == 0 {
        return Ok(0.0);
    }
    Ok(comment as f64 / non_blank as f64)
}

/// Non-blank, non-comment lines.
pub fn effective_loc(
    content: &str,
    language: &str,
    langs: &LanguageRegistry,
) -> Result<usize, MetricsError> {
    let spec = langs
        .get(language)
        .ok_or_else(|| MetricsError::UnknownLanguage(language.to_string()))?;
    let (_, code, _) = line_counts(content, &spec.comments);
    Ok(code)
}

/// Check syntax with the registered adapter, or fall back to the bracket
/// heuristic and report an `Unknown` leaning.
pub fn syntax_valid(
    content: &str,
    language: &str,
    adapters: &AdapterRegistry,
) -> Result<SyntaxValidity, MetricsError> {
    if let Some(adapter) = adapters.get(language) {
        let ok = adapter
            .check(content)
            .map_err(|message| MetricsError::Adapter {
                id: adapter.id().to_string(),
                message,
            })?;
        return Ok(if ok {
            SyntaxValidity::Valid
        } else {
            SyntaxValidity::Invalid
        });
    }
    // No adapter for this language: bracket balance over the raw text,
    // flagged as a heuristic leaning.
    let bare = CommentSyntax {
        line_markers: &[],
        block_pairs: &[],
        strings: &[],
    };
    let leaning = brackets_balanced(&scan(content, &bare).code_only);
    Ok(SyntaxValidity::Unknown {
        leaning_valid: leaning,
    })
}

/// Maps a record to a quality number. Learned models plug in here; the
/// built-in default is a transparent closed-form formula.
pub trait Scorer {
    fn id(&self) -> &str;
    fn score(&self, record: &CorpusRecord) -> Result<f64, String>;
}

/// Documented default quality score in the unit interval:
///
/// ```text
/// score = sigmoid(-2 + 2*comment_ratio + 2*min(eloc,200)/200
///                 + 2*syntax_term + (1-dup_line) + (1-dup_word))
/// ```
///
/// where `syntax_term` is 1.0 for valid, 0.5 unknown-leaning-valid,
/// 0.25 unknown-leaning-invalid, 0.0 invalid. Records whose language has
/// no comment table fall back to comment_ratio 0 and eloc = non-blank
/// lines.
pub struct DefaultQualityScorer {
    langs: LanguageRegistry,
    adapters: AdapterRegistry,
}

impl DefaultQualityScorer {
    pub fn new() -> Self {
        let langs = LanguageRegistry::default();
        let adapters = AdapterRegistry::with_defaults(&langs);
        DefaultQualityScorer { langs, adapters }
    }
}

impl Default for DefaultQualityScorer {
    fn default() -> Self {
        Self::new()
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Scorer for DefaultQualityScorer {
    fn id(&self) -> &str {
        "default"
    }

    fn score(&self, record: &CorpusRecord) -> Result<f64, String> {
        let language = record.language.as_deref().unwrap_or("");
        let (ratio, eloc) = if self.langs.get(language).is_some() {
            (
                comment_ratio(&record.content, language, &self.langs).map_err(|e| e.to_string())?,
                effective_loc(&record.content, language, &self.langs).map_err(|e| e.to_string())?,
            )
        } else {
            let non_blank = record
                .content
                .lines()
                .filter(|l| !l.trim().is_empty())
                .count();
            (0.0, non_blank)
        };
        let syntax =
            syntax_valid(&record.content, language, &self.adapters).map_err(|e| e.to_string())?;
        let syntax_term = match syntax {
            SyntaxValidity::Valid => 1.0,
            SyntaxValidity::Unknown {
                leaning_valid: true,
            } => 0.5,
            SyntaxValidity::Unknown {
                leaning_valid: false,
            } => 0.25,
            SyntaxValidity::Invalid => 0.0,
        };
        let stats = compute_content_stats(&record.content);
        let z = -2.0
            + 2.0 * ratio
            + 2.0 * (eloc.min(200) as f64 / 200.0)
            + 2.0 * syntax_term
            + (1.0 - stats.dup_line_ratio)
            + (1.0 - stats.dup_word_ratio);
        Ok(sigmoid(z))
    }
}

/// Scorer that returns a fixed value for every record.
pub struct ConstantScorer {
    id: String,
    value: f64,
}

impl ConstantScorer {
    pub fn new(id: impl Into<String>, value: f64) -> Self {
        ConstantScorer {
            id: id.into(),
            value,
        }
    }
}

impl Scorer for ConstantScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn score(&self, _record: &CorpusRecord) -> Result<f64, String> {
        Ok(self.value)
    }
}

/// Scorer that reads a numeric meta field, for cascading on scores
/// attached upstream (e.g. LLM sample scores carried in record meta).
pub struct MetaScorer {
    id: String,
    key: String,
}

impl MetaScorer {
    pub fn new(key: impl Into<String>) -> Self {
        let key = key.into();
        MetaScorer {
            id: format!("meta:{key}"),
            key,
        }
    }
}

impl Scorer for MetaScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn score(&self, record: &CorpusRecord) -> Result<f64, String> {
        record
            .meta
            .get(&self.key)
            .and_then(|v| v.as_f64())
            .ok_or_else(|| format!("record has no numeric meta key {:?}", self.key))
    }
}

/// Registry of scorers by id.
pub struct ScorerRegistry {
    scorers: HashMap<String, Box<dyn Scorer + Send + Sync>>,
}

impl ScorerRegistry {
    pub fn empty() -> Self {
        ScorerRegistry {
            scorers: HashMap::new(),
        }
    }

    pub fn register(&mut self, scorer: Box<dyn Scorer + Send + Sync>) {
        self.scorers.insert(scorer.id().to_string(), scorer);
    }

    pub fn get(&self, id: &str) -> Option<&(dyn Scorer + Send + Sync)> {
        self.scorers.get(id).map(|b| b.as_ref())
    }
}

impl Default for ScorerRegistry {
    fn default() -> Self {
        let mut reg = ScorerRegistry::empty();
        reg.register(Box::new(DefaultQualityScorer::new()));
        reg
    }
}

/// Score a record with a registered scorer.
pub fn quality_score(
    record: &CorpusRecord,
    scorer_id: &str,
    registry: &ScorerRegistry,
) -> Result<f64, MetricsError> {
    let scorer = registry
        .get(scorer_id)
        .ok_or_else(|| MetricsError::UnregisteredScorer(scorer_id.to_string()))?;
    scorer
        .score(record)
        .map_err(|message| MetricsError::Scorer {
            id: scorer_id.to_string(),
            record: record.id.clone(),
            message,
        })
}

/// Keep predicate of one cascade stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StagePredicate {
    AtLeast(f64),
    Exactly(f64),
}

impl StagePredicate {
    pub fn accepts(&self, score: f64) -> bool {
        match self {
            StagePredicate::AtLeast(t) => score >= *t,
            StagePredicate::Exactly(t) => score == *t,
        }
    }
}

/// One stage of a recall cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeStage {
    pub scorer: String,
    pub predicate: StagePredicate,
}

/// Per-stage attrition bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct StageCount {
    pub scorer: String,
    pub input: usize,
    pub kept: usize,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome {
    /// Ids kept after every stage, in input order.
    pub kept_ids: Vec<String>,
    pub stage_counts: Vec<StageCount>,
}

/// Run records through the stages in order; a record survives iff it
/// satisfies every stage predicate. All scorer ids are validated before
/// any scoring runs.
pub fn score_cascade(
    records: &[CorpusRecord],
    stages: &[CascadeStage],
    registry: &ScorerRegistry,
) -> Result<CascadeOutcome, MetricsError> {
    for stage in stages {
        if registry.get(&stage.scorer).is_none() {
            return Err(MetricsError::UnregisteredScorer(stage.scorer.clone()));
        }
    }
    let mut survivors: Vec<&CorpusRecord> = records.iter().collect();
    let mut stage_counts = Vec::with_capacity(stages.len());
    for stage in stages {
        let input = survivors.len();
        let mut next = Vec::with_capacity(input);
        for record in survivors {
            let score = quality_score(record, &stage.scorer, registry)?;
            if stage.predicate.accepts(score) {
                next.push(record);
            }
        }
        stage_counts.push(StageCount {
            scorer: stage.scorer.clone(),
            input,
            kept: next.len(),
            removed: input - next.len(),
        });
        survivors = next;
    }
    Ok(CascadeOutcome {
        kept_ids: survivors.into_iter().map(|r| r.id.clone()).collect(),
        stage_counts,
    })
}
