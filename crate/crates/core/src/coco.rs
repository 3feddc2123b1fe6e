//! Code-comment pair sanitization: seven ordered syntactic rules, the
//! semantic-consistency prompt and response grammar, and the pluggable
//! scoring client that drives the semantic filter.
//!
//! Rule order is total and first-match: (i) duplicate digest, (ii) code
//! character bounds, (iii) code line bounds, (iv) empty comment, (v)
//! comment character bounds (measured on the trimmed comment, consistent
//! with rule iv), (vi) comment special-character ratio (special = not
//! letter, digit, or whitespace), (vii) annotation markers (matched
//! case-insensitively, trailing colon required).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::dedup::content_digest;
use crate::filters::FilterVerdict;
use crate::record::{CorpusRecord, MetaValue, RecordKind};

/// Byte placed between code and comment when hashing a pair.
pub const DIGEST_SEPARATOR: char = '\u{1f}';

/// Meta key carrying the comment when a pair travels as a corpus record.
pub const META_COMMENT: &str = "comment";

#[derive(Debug, Error)]
pub enum CocoError {
    #[error("no consistency verdict line in response")]
    UnparseableResponse,
    #[error("record {0:?} is not a coco record (kind=coco with a `comment` meta string)")]
    NotACocoRecord(String),
}

/// A code snippet plus its natural-language comment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocoPair {
    pub id: String,
    pub code: String,
    pub comment: String,
    pub language: Option<String>,
    /// MD5 of `code ∥ 0x1F ∥ comment`, lowercase hex.
    pub digest: String,
}

impl CocoPair {
    pub fn new(
        id: impl Into<String>,
        code: impl Into<String>,
        comment: impl Into<String>,
        language: Option<String>,
    ) -> Self {
        let code = code.into();
        let comment = comment.into();
        let digest = content_digest(&format!("{code}{DIGEST_SEPARATOR}{comment}"));
        CocoPair {
            id: id.into(),
            code,
            comment,
            language,
            digest,
        }
    }

    /// Read a pair out of a corpus record: the record content is the code
    /// and the `comment` meta string is the comment.
    pub fn from_record(record: &CorpusRecord) -> Result<Self, CocoError> {
        if record.kind != RecordKind::Coco {
            return Err(CocoError::NotACocoRecord(record.id.clone()));
        }
        let comment = record
            .meta
            .get(META_COMMENT)
            .and_then(|v| v.as_str())
            .ok_or_else(|| CocoError::NotACocoRecord(record.id.clone()))?;
        Ok(CocoPair::new(
            record.id.clone(),
            record.content.clone(),
            comment,
            record.language.clone(),
        ))
    }

    pub fn to_record(&self) -> CorpusRecord {
        let mut record = CorpusRecord::new(self.id.clone(), RecordKind::Coco, self.code.clone())
            .with_meta(META_COMMENT, self.comment.as_str());
        if let Some(lang) = &self.language {
            record = record.with_language(lang.clone());
        }
        record
            .meta
            .insert("digest".to_string(), MetaValue::Str(self.digest.clone()));
        record
    }
}

/// Digest set shared across one sanitization run; append-only.
#[derive(Debug, Default)]
pub struct SeenDigests {
    seen: HashSet<String>,
}

impl SeenDigests {
    pub fn new() -> Self {
        SeenDigests::default()
    }

    /// Record a digest; true when it was already present.
    pub fn check_and_insert(&mut self, digest: &str) -> bool {
        !self.seen.insert(digest.to_string())
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// Rule identifiers for the seven sanitization rules.
pub mod coco_rule {
    pub const DUPLICATE: &str = "i";
    pub const CODE_CHARS: &str = "ii";
    pub const CODE_LINES: &str = "iii";
    pub const COMMENT_EMPTY: &str = "iv";
    pub const COMMENT_CHARS: &str = "v";
    pub const COMMENT_SPECIAL: &str = "vi";
    pub const COMMENT_ANNOTATION: &str = "vii";
}

/// Apply rules i–vii in order; the first match rejects. Every pair's
/// digest is recorded in `seen`, kept or not.
pub fn sanitize_rules(
    pair: &CocoPair,
    seen: &mut SeenDigests,
    cfg: &PipelineConfig,
) -> FilterVerdict {
    // (i) duplicate digest.
    if seen.check_and_insert(&pair.digest) {
        return FilterVerdict::reject(coco_rule::DUPLICATE, None);
    }
    // (ii) code character bounds.
    let code_chars = pair.code.chars().count();
    if code_chars < cfg.coco_code_min_chars || code_chars > cfg.coco_code_max_chars {
        return FilterVerdict::reject(coco_rule::CODE_CHARS, Some(code_chars as f64));
    }
    // (iii) code line bounds.
    let code_lines = pair.code.lines().count();
    if code_lines < cfg.coco_code_min_lines || code_lines > cfg.coco_code_max_lines {
        return FilterVerdict::reject(coco_rule::CODE_LINES, Some(code_lines as f64));
    }
    // (iv) comment must be non-empty after trimming.
    let trimmed = pair.comment.trim();
    if trimmed.is_empty() {
        return FilterVerdict::reject(coco_rule::COMMENT_EMPTY, None);
    }
    // (v) comment character bounds, on the trimmed comment.
    let comment_chars = trimmed.chars().count();
    if comment_chars < cfg.coco_comment_min_chars || comment_chars > cfg.coco_comment_max_chars {
        return FilterVerdict::reject(coco_rule::COMMENT_CHARS, Some(comment_chars as f64));
    }
    // (vi) special-character ratio: special = not letter/digit/whitespace.
    let special = trimmed
        .chars()
        .filter(|c| !c.is_alphanumeric() && !c.is_whitespace())
        .count();
    let special_ratio = special as f64 / comment_chars as f64;
    if special_ratio >= cfg.coco_special_char_ratio {
        return FilterVerdict::reject(coco_rule::COMMENT_SPECIAL, Some(special_ratio));
    }
    // (vii) annotation markers.
    let lowered = pair.comment.to_lowercase();
    if cfg
        .coco_annotation_markers
        .iter()
        .any(|m| lowered.contains(&m.to_lowercase()))
    {
        return FilterVerdict::reject(coco_rule::COMMENT_ANNOTATION, None);
    }
    FilterVerdict::keep()
}

/// Final-verdict line the response grammar requires.
pub const VERDICT_PREFIX: &str = "CONSISTENT:";

/// Build the consistency-evaluation prompt for one pair. Deterministic;
/// two pairs' prompts differ only in the embedded code and comment.
pub fn build_consistency_prompt(pair: &CocoPair) -> String {
    let language = pair.language.as_deref().unwrap_or("");
    format!(
        "You are given a code snippet and the comment attached to it.\n\
         \n\
         Code:\n\
         ```{language}\n\
         {code}\n\
         ```\n\
         \n\
         Comment:\n\
         ```\n\
         {comment}\n\
         ```\n\
         \n\
         Work through the following steps:\n\
         (a) Break down the provided code line by line, detailing what each line accomplishes.\n\
         (b) Summarize the line-by-line analysis into one concise sentence capturing the code's essence.\n\
         (c) Review the provided comment, pinpoint its central message, and analyze its consistency \
         with the summary from steps (a) and (b), giving a clear step-by-step rationale.\n\
         (d) Conclude with the overall consistency between the code and the comment.\n\
         \n\
         End your reply with exactly one line of the form:\n\
         CONSISTENT: true\n\
         or\n\
         CONSISTENT: false\n",
        language = language,
        code = pair.code,
        comment = pair.comment,
    )
}

/// Where a judgment came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JudgmentSource {
    ExternalScorer,
    Stub,
}

/// Parsed consistency verdict plus the analysis that led to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyJudgment {
    pub consistent: bool,
    pub rationale: String,
    pub source: JudgmentSource,
}

/// Extract the verdict from a scorer response: the last line matching
/// `CONSISTENT: true|false` (case-insensitive); everything before it is
/// the rationale.
pub fn parse_consistency_response(text: &str) -> Result<ConsistencyJudgment, CocoError> {
    let mut verdict: Option<(usize, bool)> = None;
    let mut offset = 0usize;
    for line in text.split_inclusive('\n') {
        let bare = line.trim();
        if let Some(rest) = strip_prefix_ci(bare, VERDICT_PREFIX) {
            match rest.trim().to_ascii_lowercase().as_str() {
                "true" => verdict = Some((offset, true)),
                "false" => verdict = Some((offset, false)),
                _ => {}
            }
        }
        offset += line.len();
    }
    let (at, consistent) = verdict.ok_or(CocoError::UnparseableResponse)?;
    Ok(ConsistencyJudgment {
        consistent,
        rationale: text[..at].trim_end().to_string(),
        source: JudgmentSource::ExternalScorer,
    })
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    if s.len() >= prefix.len() && s[..prefix.len()].eq_ignore_ascii_case(prefix) {
        Some(&s[prefix.len()..])
    } else {
        None
    }
}

/// Transport-level failure talking to a scorer.
#[derive(Debug, Error)]
#[error("scorer transport failure: {0}")]
pub struct TransportError(pub String);

/// A completion backend for the semantic filter.
pub trait ScoringClient: Sync {
    fn complete(&self, pair_id: &str, prompt: &str) -> Result<String, TransportError>;
    fn source(&self) -> JudgmentSource {
        JudgmentSource::ExternalScorer
    }
}

/// Offline stub client with canned responses.
pub struct StubScoringClient {
    default_response: String,
    per_id: std::collections::HashMap<String, String>,
}

impl StubScoringClient {
    pub fn always(response: impl Into<String>) -> Self {
        StubScoringClient {
            default_response: response.into(),
            per_id: Default::default(),
        }
    }

    pub fn always_consistent() -> Self {
        Self::always("The comment matches the code.\nCONSISTENT: true\n")
    }

    pub fn with_response(mut self, id: impl Into<String>, response: impl Into<String>) -> Self {
        self.per_id.insert(id.into(), response.into());
        self
    }
}

impl ScoringClient for StubScoringClient {
    fn complete(&self, pair_id: &str, _prompt: &str) -> Result<String, TransportError> {
        Ok(self
            .per_id
            .get(pair_id)
            .unwrap_or(&self.default_response)
            .clone())
    }

    fn source(&self) -> JudgmentSource {
        JudgmentSource::Stub
    }
}

/// Environment variable holding the scorer credential.
pub const SCORER_API_KEY_ENV: &str = "CODECORPUS_SCORER_API_KEY";

/// HTTP scoring client. POSTs `{"model": ..., "prompt": ...}` to the
/// endpoint and reads the completion from `text` (or the first
/// `choices[].text`). Credentials come from `CODECORPUS_SCORER_API_KEY`
/// and are sent as a bearer token when present.
pub struct HttpScoringClient {
    endpoint: String,
    model: String,
    client: reqwest::blocking::Client,
    api_key: Option<String>,
}

impl HttpScoringClient {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        HttpScoringClient {
            endpoint: endpoint.into(),
            model: model.into(),
            client: reqwest::blocking::Client::new(),
            api_key: std::env::var(SCORER_API_KEY_ENV).ok(),
        }
    }
}

impl ScoringClient for HttpScoringClient {
    fn complete(&self, _pair_id: &str, prompt: &str) -> Result<String, TransportError> {
        let body = serde_json::json!({ "model": self.model, "prompt": prompt });
        let mut request = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| TransportError(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(TransportError(format!("endpoint returned {status}")));
        }
        let value: serde_json::Value =
            response.json().map_err(|e| TransportError(e.to_string()))?;
        let text = value
            .get("text")
            .and_then(|t| t.as_str())
            .or_else(|| {
                value
                    .get("choices")
                    .and_then(|c| c.get(0))
                    .and_then(|c| c.get("text"))
                    .and_then(|t| t.as_str())
            })
            .ok_or_else(|| TransportError("response carries no completion text".to_string()))?;
        Ok(text.to_string())
    }
}

/// Why a pair was dropped by the semantic filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Inconsistent,
    Unparseable,
}

/// One request/response transcript entry for audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub pair_id: String,
    pub attempt: usize,
    pub prompt: String,
    pub raw_response: Option<String>,
    pub verdict: String,
}

/// Partition produced by the semantic filter: kept, dropped (with
/// reasons), and deferred (transport failure after retries) pairs.
#[derive(Debug)]
pub struct SemanticOutcome {
    pub kept: Vec<CocoPair>,
    pub dropped: Vec<(String, DropReason)>,
    pub deferred: Vec<String>,
    pub transcripts: Vec<AuditEntry>,
}

enum PairFate {
    Kept,
    Dropped(DropReason),
    Deferred,
}

type JudgedSlot = Option<(PairFate, Vec<AuditEntry>)>;

fn judge_pair(
    pair: &CocoPair,
    client: &dyn ScoringClient,
    max_retries: usize,
    transcripts: &mut Vec<AuditEntry>,
) -> PairFate {
    let prompt = build_consistency_prompt(pair);
    let mut last_failure = PairFate::Deferred;
    for attempt in 0..=max_retries {
        match client.complete(&pair.id, &prompt) {
            Ok(response) => match parse_consistency_response(&response) {
                Ok(judgment) => {
                    transcripts.push(AuditEntry {
                        pair_id: pair.id.clone(),
                        attempt,
                        prompt: prompt.clone(),
                        raw_response: Some(response),
                        verdict: format!("consistent:{}", judgment.consistent),
                    });
                    return if judgment.consistent {
                        PairFate::Kept
                    } else {
                        PairFate::Dropped(DropReason::Inconsistent)
                    };
                }
                Err(_) => {
                    transcripts.push(AuditEntry {
                        pair_id: pair.id.clone(),
                        attempt,
                        prompt: prompt.clone(),
                        raw_response: Some(response),
                        verdict: "parse_error".to_string(),
                    });
                    last_failure = PairFate::Dropped(DropReason::Unparseable);
                }
            },
            Err(e) => {
                transcripts.push(AuditEntry {
                    pair_id: pair.id.clone(),
                    attempt,
                    prompt: prompt.clone(),
                    raw_response: None,
                    verdict: format!("transport_error:{e}"),
                });
                last_failure = PairFate::Deferred;
            }
        }
    }
    last_failure
}

/// Judge every pair with the scoring client and drop the inconsistent
/// ones. Parse failures are retried up to `max_retries` extra attempts and
/// then dropped as unparseable; transport failures after retries defer the
/// pair instead of aborting the run. At most `concurrency` requests are in
/// flight at once. Pair content is never mutated; kept, dropped, and
/// deferred partition the input.
pub fn semantic_filter(
    pairs: Vec<CocoPair>,
    client: &dyn ScoringClient,
    max_retries: usize,
    concurrency: usize,
) -> SemanticOutcome {
    let concurrency = concurrency.max(1);
    let n = pairs.len();
    let mut fates: Vec<JudgedSlot> = Vec::with_capacity(n);
    fates.resize_with(n, || None);

    {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<&mut JudgedSlot>> =
            fates.iter_mut().map(std::sync::Mutex::new).collect();
        let pairs_ref = &pairs;
        let next_ref = &next;
        let slots_ref = &slots;
        std::thread::scope(|scope| {
            for _ in 0..concurrency.min(n.max(1)) {
                scope.spawn(move || loop {
                    let i = next_ref.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    let mut transcripts = Vec::new();
                    let fate = judge_pair(&pairs_ref[i], client, max_retries, &mut transcripts);
                    **slots_ref[i].lock().unwrap() = Some((fate, transcripts));
                });
            }
        });
    }

    let mut outcome = SemanticOutcome {
        kept: Vec::new(),
        dropped: Vec::new(),
        deferred: Vec::new(),
        transcripts: Vec::new(),
    };
    for (pair, slot) in pairs.into_iter().zip(fates) {
        let (fate, mut transcripts) = slot.expect("every pair judged");
        let source = client.source();
        for t in &mut transcripts {
            if t.verdict.starts_with("consistent:") {
                t.verdict = format!("{} ({:?})", t.verdict, source);
            }
        }
        outcome.transcripts.append(&mut transcripts);
        match fate {
            PairFate::Kept => outcome.kept.push(pair),
            PairFate::Dropped(reason) => outcome.dropped.push((pair.id, reason)),
            PairFate::Deferred => outcome.deferred.push(pair.id),
        }
    }
    outcome
}
