//! Content statistics backing the rule-based filters.
//!
//! All ratios are fractions of the content: the character-mass ratios
//! (url/ip, pii) divide the number of characters inside matched spans by
//! the total character count, and the duplication ratios divide duplicate
//! items by total items. Everything here is a total, deterministic
//! function of the text.

use crate::patterns;

/// Per-document statistics consumed by the filter rule sets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContentStats {
    pub total_chars: usize,
    pub total_lines: usize,
    pub max_line_len: usize,
    pub avg_line_len: f64,
    /// Characters inside URL / IPv4 / IPv6 matches over total characters.
    pub url_ip_char_ratio: f64,
    /// Characters inside email / phone / date-time matches over total.
    pub pii_char_ratio: f64,
    /// Duplicate fraction of non-blank lines: (lines - distinct) / lines.
    pub dup_line_ratio: f64,
    /// Duplicate fraction of whitespace-separated tokens.
    pub dup_word_ratio: f64,
    /// Replacement characters plus non-whitespace control characters over total.
    pub garbled_ratio: f64,
    pub has_image_ref: bool,
    pub has_placeholder: bool,
    /// Fraction of non-blank lines containing a URL or markdown link.
    pub link_line_ratio: f64,
}

/// Merge match spans from several regexes into a disjoint union and return
/// the number of characters covered. Overlapping matches are counted once.
fn matched_char_mass(content: &str, regexes: &[&regex::Regex]) -> usize {
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for re in regexes {
        for m in re.find_iter(content) {
            spans.push((m.start(), m.end()));
        }
    }
    if spans.is_empty() {
        return 0;
    }
    spans.sort_unstable();
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(spans.len());
    for (s, e) in spans {
        match merged.last_mut() {
            Some((_, le)) if s <= *le => *le = (*le).max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
        .into_iter()
        .map(|(s, e)| content[s..e].chars().count())
        .sum()
}

/// Compute all statistics using the default placeholder token list.
pub fn compute_content_stats(content: &str) -> ContentStats {
    let defaults = crate::config::PipelineConfig::default();
    compute_content_stats_with(content, &defaults.placeholder_tokens)
}

/// Compute all statistics; `placeholder_tokens` are matched
/// case-insensitively as substrings.
pub fn compute_content_stats_with(content: &str, placeholder_tokens: &[String]) -> ContentStats {
    let total_chars = content.chars().count();
    if total_chars == 0 {
        return ContentStats::default();
    }

    let lines: Vec<&str> = content.lines().collect();
    let total_lines = lines.len();
    let line_lens: Vec<usize> = lines.iter().map(|l| l.chars().count()).collect();
    let max_line_len = line_lens.iter().copied().max().unwrap_or(0);
    let avg_line_len = if total_lines == 0 {
        0.0
    } else {
        line_lens.iter().sum::<usize>() as f64 / total_lines as f64
    };

    let non_blank: Vec<&str> = lines
        .iter()
        .copied()
        .filter(|l| !l.trim().is_empty())
        .collect();
    let dup_line_ratio = if non_blank.is_empty() {
        0.0
    } else {
        let distinct: std::collections::HashSet<&str> = non_blank.iter().copied().collect();
        (non_blank.len() - distinct.len()) as f64 / non_blank.len() as f64
    };

    let words: Vec<&str> = content.split_whitespace().collect();
    let dup_word_ratio = if words.is_empty() {
        0.0
    } else {
        let distinct: std::collections::HashSet<&str> = words.iter().copied().collect();
        (words.len() - distinct.len()) as f64 / words.len() as f64
    };

    let url_ip_chars = matched_char_mass(
        content,
        &[&patterns::URL_RE, &patterns::IPV4_RE, &patterns::IPV6_RE],
    );
    let pii_chars = matched_char_mass(
        content,
        &[
            &patterns::EMAIL_RE,
            &patterns::PHONE_RE,
            &patterns::DATETIME_RE,
        ],
    );

    let garbled = content
        .chars()
        .filter(|c| *c == '\u{FFFD}' || (c.is_control() && !c.is_whitespace()))
        .count();

    let has_image_ref =
        patterns::MARKDOWN_IMAGE_RE.is_match(content) || patterns::HTML_IMAGE_RE.is_match(content);

    let lowered = content.to_lowercase();
    let has_placeholder = placeholder_tokens
        .iter()
        .any(|t| !t.is_empty() && lowered.contains(&t.to_lowercase()));

    let link_lines = non_blank
        .iter()
        .filter(|l| patterns::URL_RE.is_match(l) || patterns::MARKDOWN_LINK_RE.is_match(l))
        .count();
    let link_line_ratio = if non_blank.is_empty() {
        0.0
    } else {
        link_lines as f64 / non_blank.len() as f64
    };

    ContentStats {
        total_chars,
        total_lines,
        max_line_len,
        avg_line_len,
        url_ip_char_ratio: url_ip_chars as f64 / total_chars as f64,
        pii_char_ratio: pii_chars as f64 / total_chars as f64,
        dup_line_ratio,
        dup_word_ratio,
        garbled_ratio: garbled as f64 / total_chars as f64,
        has_image_ref,
        has_placeholder,
        link_line_ratio,
    }
}
