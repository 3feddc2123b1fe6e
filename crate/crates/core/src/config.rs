//! Pipeline configuration: every threshold the filters, dedup, repo gate,
//! and COCO sanitizer consult, loaded from a flat TOML document.
//!
//! Absent keys take the documented defaults; unknown keys are rejected at
//! load time; out-of-domain values fail validation naming the offending key.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config key {key} = {value} outside domain {domain}")]
    OutOfDomain {
        key: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("config key {key}: cannot parse {value:?}: {reason}")]
    BadOverride {
        key: String,
        value: String,
        reason: String,
    },
}

/// All tunables, flat. Field names double as the config-file keys and the
/// CLI `--threshold KEY=VALUE` override keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    // Content-ratio rules (fractions of content, in [0,1]).
    pub url_ip_ratio: f64,
    pub pii_ratio: f64,
    pub duplication_ratio: f64,
    pub garbled_ratio: f64,
    pub link_line_ratio: f64,
    // Source-code line limits (character counts).
    pub max_line_len: usize,
    pub avg_line_len: f64,
    // Composite quality gate (0-100 scale).
    pub quality_threshold: f64,
    // Placeholder tokens for the text rule set (case-insensitive substrings).
    pub placeholder_tokens: Vec<String>,
    // Rules enabled per record kind; empty means "all rules for that kind".
    pub source_rules: Vec<String>,
    pub text_rules: Vec<String>,
    // Near-dedup parameters.
    pub dedup_num_permutations: usize,
    pub dedup_shingle_words: usize,
    pub dedup_bands: usize,
    pub dedup_threshold: f64,
    // Repository-level quality gate.
    pub repo_min_quality_score: f64,
    pub repo_min_comment_ratio: f64,
    pub repo_min_effective_loc: f64,
    // Concatenation separator template; `{path}` expands to the file path.
    pub separator_template: String,
    // COCO sanitization rule bounds.
    pub coco_code_min_chars: usize,
    pub coco_code_max_chars: usize,
    pub coco_code_min_lines: usize,
    pub coco_code_max_lines: usize,
    pub coco_comment_min_chars: usize,
    pub coco_comment_max_chars: usize,
    pub coco_special_char_ratio: f64,
    pub coco_annotation_markers: Vec<String>,
    // External scoring client (semantic COCO filter).
    pub scorer_endpoint: Option<String>,
    pub scorer_model: String,
    pub scorer_max_retries: usize,
    pub scorer_concurrency: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            url_ip_ratio: 0.60,
            pii_ratio: 0.50,
            duplication_ratio: 0.70,
            garbled_ratio: 0.05,
            link_line_ratio: 0.50,
            max_line_len: 1000,
            avg_line_len: 100.0,
            quality_threshold: 85.0,
            placeholder_tokens: vec![
                "lorem ipsum".to_string(),
                "[placeholder]".to_string(),
                "<placeholder>".to_string(),
                "{{placeholder}}".to_string(),
                "your code here".to_string(),
                "insert code here".to_string(),
                "[tbd]".to_string(),
            ],
            source_rules: Vec::new(),
            text_rules: Vec::new(),
            dedup_num_permutations: 128,
            dedup_shingle_words: 5,
            dedup_bands: 16,
            dedup_threshold: 0.70,
            repo_min_quality_score: 0.5,
            repo_min_comment_ratio: 0.01,
            repo_min_effective_loc: 5.0,
            separator_template: "---- FILE: {path} ----".to_string(),
            coco_code_min_chars: 30,
            coco_code_max_chars: 100_000,
            coco_code_min_lines: 1,
            coco_code_max_lines: 100,
            coco_comment_min_chars: 30,
            coco_comment_max_chars: 100_000,
            coco_special_char_ratio: 0.80,
            coco_annotation_markers: vec![
                "TODO:".to_string(),
                "BUG:".to_string(),
                "FIXME:".to_string(),
            ],
            scorer_endpoint: None,
            scorer_model: "judge-small".to_string(),
            scorer_max_retries: 2,
            scorer_concurrency: 4,
        }
    }
}

impl PipelineConfig {
    /// Parse a TOML document, fill absent keys with defaults, validate.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn ratio(key: &'static str, v: f64) -> Result<(), ConfigError> {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(ConfigError::OutOfDomain {
                    key,
                    value: v,
                    domain: "[0,1]",
                });
            }
            Ok(())
        }
        fn positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
            if v.is_nan() || v <= 0.0 {
                return Err(ConfigError::OutOfDomain {
                    key,
                    value: v,
                    domain: "(0,inf)",
                });
            }
            Ok(())
        }
        ratio("url_ip_ratio", self.url_ip_ratio)?;
        ratio("pii_ratio", self.pii_ratio)?;
        ratio("duplication_ratio", self.duplication_ratio)?;
        ratio("garbled_ratio", self.garbled_ratio)?;
        ratio("link_line_ratio", self.link_line_ratio)?;
        ratio("coco_special_char_ratio", self.coco_special_char_ratio)?;
        ratio("repo_min_quality_score", self.repo_min_quality_score)?;
        ratio("repo_min_comment_ratio", self.repo_min_comment_ratio)?;
        positive("max_line_len", self.max_line_len as f64)?;
        positive("avg_line_len", self.avg_line_len)?;
        positive("dedup_num_permutations", self.dedup_num_permutations as f64)?;
        positive("dedup_shingle_words", self.dedup_shingle_words as f64)?;
        positive("dedup_bands", self.dedup_bands as f64)?;
        if !(self.dedup_threshold > 0.0 && self.dedup_threshold <= 1.0) {
            return Err(ConfigError::OutOfDomain {
                key: "dedup_threshold",
                value: self.dedup_threshold,
                domain: "(0,1]",
            });
        }
        if !self.dedup_num_permutations.is_multiple_of(self.dedup_bands) {
            return Err(ConfigError::OutOfDomain {
                key: "dedup_bands",
                value: self.dedup_bands as f64,
                domain: "divisors of dedup_num_permutations",
            });
        }
        if !(0.0..=100.0).contains(&self.quality_threshold) {
            return Err(ConfigError::OutOfDomain {
                key: "quality_threshold",
                value: self.quality_threshold,
                domain: "[0,100]",
            });
        }
        if self.coco_code_min_chars > self.coco_code_max_chars {
            return Err(ConfigError::OutOfDomain {
                key: "coco_code_min_chars",
                value: self.coco_code_min_chars as f64,
                domain: "<= coco_code_max_chars",
            });
        }
        if self.coco_comment_min_chars > self.coco_comment_max_chars {
            return Err(ConfigError::OutOfDomain {
                key: "coco_comment_min_chars",
                value: self.coco_comment_min_chars as f64,
                domain: "<= coco_comment_max_chars",
            });
        }
        if self.coco_code_min_lines > self.coco_code_max_lines {
            return Err(ConfigError::OutOfDomain {
                key: "coco_code_min_lines",
                value: self.coco_code_min_lines as f64,
                domain: "<= coco_code_max_lines",
            });
        }
        if !self.separator_template.contains("{path}") {
            return Err(ConfigError::OutOfDomain {
                key: "separator_template",
                value: f64::NAN,
                domain: "templates containing {path}",
            });
        }
        Ok(())
    }

    /// Apply one `KEY=VALUE` override, parsing the value per the key's type.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e: T::Err| ConfigError::BadOverride {
                key: key.to_string(),
                value: value.to_string(),
                reason: e.to_string(),
            })
        }
        match key {
            "url_ip_ratio" => self.url_ip_ratio = parse(key, value)?,
            "pii_ratio" => self.pii_ratio = parse(key, value)?,
            "duplication_ratio" => self.duplication_ratio = parse(key, value)?,
            "garbled_ratio" => self.garbled_ratio = parse(key, value)?,
            "link_line_ratio" => self.link_line_ratio = parse(key, value)?,
            "max_line_len" => self.max_line_len = parse(key, value)?,
            "avg_line_len" => self.avg_line_len = parse(key, value)?,
            "quality_threshold" => self.quality_threshold = parse(key, value)?,
            "dedup_num_permutations" => self.dedup_num_permutations = parse(key, value)?,
            "dedup_shingle_words" => self.dedup_shingle_words = parse(key, value)?,
            "dedup_bands" => self.dedup_bands = parse(key, value)?,
            "dedup_threshold" => self.dedup_threshold = parse(key, value)?,
            "repo_min_quality_score" => self.repo_min_quality_score = parse(key, value)?,
            "repo_min_comment_ratio" => self.repo_min_comment_ratio = parse(key, value)?,
            "repo_min_effective_loc" => self.repo_min_effective_loc = parse(key, value)?,
            "coco_code_min_chars" => self.coco_code_min_chars = parse(key, value)?,
            "coco_code_max_chars" => self.coco_code_max_chars = parse(key, value)?,
            "coco_code_min_lines" => self.coco_code_min_lines = parse(key, value)?,
            "coco_code_max_lines" => self.coco_code_max_lines = parse(key, value)?,
            "coco_comment_min_chars" => self.coco_comment_min_chars = parse(key, value)?,
            "coco_comment_max_chars" => self.coco_comment_max_chars = parse(key, value)?,
            "coco_special_char_ratio" => self.coco_special_char_ratio = parse(key, value)?,
            "scorer_max_retries" => self.scorer_max_retries = parse(key, value)?,
            "scorer_concurrency" => self.scorer_concurrency = parse(key, value)?,
            "scorer_endpoint" => self.scorer_endpoint = Some(value.to_string()),
            "scorer_model" => self.scorer_model = value.to_string(),
            "separator_template" => self.separator_template = value.to_string(),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        self.validate()
    }

    /// Canonical serialized form, the input to the run-report config digest.
    pub fn canonical_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
