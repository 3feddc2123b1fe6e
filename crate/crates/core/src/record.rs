//! Corpus records and newline-delimited JSON (JSONL) streaming.
//!
//! A [`CorpusRecord`] is the unit that flows through every pipeline stage:
//! one source file, text page, code-comment pair, or repository file. Records
//! are immutable after ingestion and stream one-per-line so corpora never
//! need to fit in memory.
//!
//! Line schema (field names are exact): `id` (string, required), `kind`
//! (string, required), `language` (string), `content` (string, required),
//! `path` (string), `repo_id` (string), `meta` (object of string → number
//! or string).

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What a record holds; determines which filter rule set applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    SourceCode,
    Text,
    Coco,
    RepoFile,
}

impl std::fmt::Display for RecordKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RecordKind::SourceCode => "source_code",
            RecordKind::Text => "text",
            RecordKind::Coco => "coco",
            RecordKind::RepoFile => "repo_file",
        };
        f.write_str(s)
    }
}

/// Scalar metadata value. Integers stay integers across a round-trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Int(i64),
    Float(f64),
    Str(String),
}

impl MetaValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            MetaValue::Int(i) => Some(*i as f64),
            MetaValue::Float(f) => Some(*f),
            MetaValue::Str(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            MetaValue::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl From<i64> for MetaValue {
    fn from(v: i64) -> Self {
        MetaValue::Int(v)
    }
}

impl From<f64> for MetaValue {
    fn from(v: f64) -> Self {
        MetaValue::Float(v)
    }
}

impl From<&str> for MetaValue {
    fn from(v: &str) -> Self {
        MetaValue::Str(v.to_string())
    }
}

/// One document with provenance and metadata.
///
/// Ids are caller-supplied and never invented by the toolkit, so dedup
/// representatives are reproducible across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub kind: RecordKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repo_id: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, MetaValue>,
}

impl CorpusRecord {
    pub fn new(id: impl Into<String>, kind: RecordKind, content: impl Into<String>) -> Self {
        CorpusRecord {
            id: id.into(),
            kind,
            language: None,
            content: content.into(),
            path: None,
            repo_id: None,
            meta: BTreeMap::new(),
        }
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = Some(language.into());
        self
    }

    pub fn with_path(mut self, path: impl Into<String>) -> Self {
        self.path = Some(path.into());
        self
    }

    pub fn with_repo_id(mut self, repo_id: impl Into<String>) -> Self {
        self.repo_id = Some(repo_id.into());
        self
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<MetaValue>) -> Self {
        self.meta.insert(key.into(), value.into());
        self
    }
}

/// Meta key under which UTF-8 repair counts are recorded at ingestion.
pub const META_UTF8_REPLACEMENTS: &str = "utf8_replacements";

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("i/o error reading record stream: {0}")]
    Io(#[from] std::io::Error),
    #[error("duplicate record id {id:?} at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("failed to serialize record {id:?}: {source}")]
    Serialize {
        id: String,
        source: serde_json::Error,
    },
}

/// Result of streaming records in: the records plus a malformed-line count.
#[derive(Debug, Default)]
pub struct LoadOutcome {
    pub records: Vec<CorpusRecord>,
    /// Lines that were not well-formed records (bad JSON, missing required
    /// fields, empty id). Counted and skipped, never fatal.
    pub malformed: usize,
}

/// Decode bytes as UTF-8, replacing invalid sequences with U+FFFD and
/// counting how many replacements were made.
fn repair_utf8(bytes: &[u8]) -> (String, usize) {
    match std::str::from_utf8(bytes) {
        Ok(s) => (s.to_string(), 0),
        Err(_) => {
            let mut out = String::with_capacity(bytes.len());
            let mut repairs = 0usize;
            let mut rest = bytes;
            loop {
                match std::str::from_utf8(rest) {
                    Ok(s) => {
                        out.push_str(s);
                        break;
                    }
                    Err(e) => {
                        let valid = e.valid_up_to();
                        out.push_str(std::str::from_utf8(&rest[..valid]).unwrap());
                        out.push('\u{FFFD}');
                        repairs += 1;
                        let skip = e.error_len().unwrap_or(rest.len() - valid);
                        rest = &rest[valid + skip..];
                        if rest.is_empty() {
                            break;
                        }
                    }
                }
            }
            (out, repairs)
        }
    }
}

/// Read newline-delimited records from a byte stream.
///
/// Invalid UTF-8 in a line is repaired with the replacement character before
/// parsing and the repair count is recorded in the record's meta under
/// [`META_UTF8_REPLACEMENTS`]. Malformed lines are counted and skipped;
/// blank lines are ignored. A duplicate id is a fatal schema error.
pub fn load_records(reader: impl BufRead) -> Result<LoadOutcome, RecordError> {
    let mut outcome = LoadOutcome::default();
    let mut seen_ids = std::collections::HashSet::new();
    let mut buf = Vec::new();
    let mut reader = reader;
    let mut line_no = 0usize;

    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 {
            break;
        }
        line_no += 1;
        while buf.last() == Some(&b'\n') || buf.last() == Some(&b'\r') {
            buf.pop();
        }
        if buf.iter().all(|b| b.is_ascii_whitespace()) {
            continue;
        }
        let (line, repairs) = repair_utf8(&buf);
        let mut record: CorpusRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(_) => {
                outcome.malformed += 1;
                continue;
            }
        };
        if record.id.is_empty() {
            outcome.malformed += 1;
            continue;
        }
        if !seen_ids.insert(record.id.clone()) {
            return Err(RecordError::DuplicateId {
                id: record.id,
                line: line_no,
            });
        }
        if repairs > 0 {
            record.meta.insert(
                META_UTF8_REPLACEMENTS.to_string(),
                MetaValue::Int(repairs as i64),
            );
        }
        outcome.records.push(record);
    }
    Ok(outcome)
}

/// Write records as newline-delimited JSON. Inverse of [`load_records`]
/// for every record that passes validation.
pub fn save_records<'a, W: Write>(
    records: impl IntoIterator<Item = &'a CorpusRecord>,
    mut writer: W,
) -> Result<(), RecordError> {
    for record in records {
        let line = serde_json::to_string(record).map_err(|source| RecordError::Serialize {
            id: record.id.clone(),
            source,
        })?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Serialize a single record to its line form (no trailing newline).
pub fn record_to_line(record: &CorpusRecord) -> Result<String, RecordError> {
    serde_json::to_string(record).map_err(|source| RecordError::Serialize {
        id: record.id.clone(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stream_yields_empty_sequence() {
        let outcome = load_records(&b""[..]).unwrap();
        assert!(outcome.records.is_empty());
        assert_eq!(outcome.malformed, 0);
    }

    #[test]
    fn single_line_round_trips_fields() {
        let line = br#"{"id":"a","kind":"text","content":"hi"}"#;
        let outcome = load_records(&line[..]).unwrap();
        assert_eq!(outcome.records.len(), 1);
        let r = &outcome.records[0];
        assert_eq!(r.id, "a");
        assert_eq!(r.kind, RecordKind::Text);
        assert_eq!(r.content, "hi");
    }

    #[test]
    fn missing_id_counts_as_malformed() {
        let line = br#"{"kind":"text","content":"hi"}"#;
        let outcome = load_records(&line[..]).unwrap();
        assert!(outcome.records.is_empty());
        assert_eq!(outcome.malformed, 1);
    }

    #[test]
    fn bad_json_counts_as_malformed_and_rest_survives() {
        let data = b"{nope}\n{\"id\":\"a\",\"kind\":\"text\",\"content\":\"x\"}\n";
        let outcome = load_records(&data[..]).unwrap();
        assert_eq!(outcome.malformed, 1);
        assert_eq!(outcome.records.len(), 1);
    }

    #[test]
    fn duplicate_id_is_fatal() {
        let data = b"{\"id\":\"a\",\"kind\":\"text\",\"content\":\"x\"}\n{\"id\":\"a\",\"kind\":\"text\",\"content\":\"y\"}\n";
        let err = load_records(&data[..]).unwrap_err();
        assert!(matches!(err, RecordError::DuplicateId { .. }));
    }

    #[test]
    fn save_then_load_is_identity() {
        let record = CorpusRecord::new("r1", RecordKind::SourceCode, "fn main() {}\n")
            .with_language("rust")
            .with_path("src/main.rs")
            .with_repo_id("repo-1")
            .with_meta("stars", 11i64)
            .with_meta("score", 0.5f64)
            .with_meta("origin", "github");
        let mut buf = Vec::new();
        save_records([&record], &mut buf).unwrap();
        let outcome = load_records(&buf[..]).unwrap();
        assert_eq!(outcome.records, vec![record]);
    }

    #[test]
    fn integer_meta_stays_integer() {
        let record = CorpusRecord::new("r", RecordKind::Text, "x").with_meta("stars", 11i64);
        let mut buf = Vec::new();
        save_records([&record], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(
            text.contains("\"stars\":11"),
            "serialized as integer: {text}"
        );
        let outcome = load_records(&buf[..]).unwrap();
        assert_eq!(outcome.records[0].meta["stars"], MetaValue::Int(11));
    }

    #[test]
    fn invalid_utf8_is_repaired_and_counted() {
        let mut data = Vec::new();
        data.extend_from_slice(br#"{"id":"a","kind":"text","content":"ab"#);
        data.push(0xFF);
        data.extend_from_slice(br#"c"}"#);
        let outcome = load_records(&data[..]).unwrap();
        assert_eq!(outcome.records.len(), 1);
        let r = &outcome.records[0];
        assert_eq!(r.content, "ab\u{FFFD}c");
        assert_eq!(r.meta[META_UTF8_REPLACEMENTS], MetaValue::Int(1));
    }

    #[test]
    fn empty_record_list_saves_empty_stream() {
        let mut buf = Vec::new();
        save_records([], &mut buf).unwrap();
        assert!(buf.is_empty());
    }
}
