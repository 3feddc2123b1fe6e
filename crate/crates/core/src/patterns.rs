//! Versioned pattern table for the content-ratio rules.
//!
//! The ratio rules measure matched-character mass, so the exact patterns
//! determine the numbers. They are pinned here as literal source strings;
//! any change must bump [`PATTERNS_VERSION`].

use once_cell::sync::Lazy;
use regex::Regex;

/// Bump when any pattern below changes.
pub const PATTERNS_VERSION: &str = "1";

/// URL with an explicit scheme.
pub const URL_PATTERN: &str = r#"(?i)\b(?:https?|ftp)://[^\s<>"'`\)\]]+"#;

/// Dotted-quad IPv4 address.
pub const IPV4_PATTERN: &str = r"\b(?:\d{1,3}\.){3}\d{1,3}\b";

/// Colon-grouped IPv6 address (full or :: -compressed forms).
pub const IPV6_PATTERN: &str = r"\b(?:[0-9A-Fa-f]{1,4}:){2,7}(?::|[0-9A-Fa-f]{1,4})|::(?:[0-9A-Fa-f]{1,4}:){0,6}[0-9A-Fa-f]{1,4}\b";

/// Email address.
pub const EMAIL_PATTERN: &str = r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}\b";

/// Phone number: either decorated (country code or parenthesized area
/// code, then 2-3 digit groups), three undecorated separator-joined digit
/// groups, or an international compact run. Deliberately conservative so
/// plain numeric literals and year pairs do not match.
pub const PHONE_PATTERN: &str = r"\+\d{1,3}[ .-]?(?:\(\d{2,4}\)[ .-]?)?\d{3,4}(?:[ .-]\d{3,4}){1,2}\b|\(\d{2,4}\)[ .-]?\d{3,4}(?:[ .-]\d{3,4}){1,2}\b|\d{3,4}(?:[ .-]\d{3,4}){2}\b|\+\d{1,3}[ .-]?\d{7,12}\b";

/// Date and time strings: ISO dates with optional time, slashed dates,
/// and bare clock times.
pub const DATETIME_PATTERN: &str = r"\b\d{4}-\d{2}-\d{2}(?:[T ]\d{2}:\d{2}(?::\d{2})?(?:Z|[+-]\d{2}:?\d{2})?)?\b|\b\d{1,2}/\d{1,2}/\d{2,4}\b|\b\d{1,2}:\d{2}:\d{2}\b";

/// Markdown image syntax.
pub const MARKDOWN_IMAGE_PATTERN: &str = r"!\[[^\]]*\]\([^)]*\)";

/// Inline HTML image tag.
pub const HTML_IMAGE_PATTERN: &str = r"(?i)<img\b";

/// Markdown link (also matches the tail of an image reference).
pub const MARKDOWN_LINK_PATTERN: &str = r"\[[^\]]*\]\([^)]*\)";

fn rx(pattern: &str) -> Regex {
    Regex::new(pattern).expect("pattern table entry compiles")
}

pub static URL_RE: Lazy<Regex> = Lazy::new(|| rx(URL_PATTERN));
pub static IPV4_RE: Lazy<Regex> = Lazy::new(|| rx(IPV4_PATTERN));
pub static IPV6_RE: Lazy<Regex> = Lazy::new(|| rx(IPV6_PATTERN));
pub static EMAIL_RE: Lazy<Regex> = Lazy::new(|| rx(EMAIL_PATTERN));
pub static PHONE_RE: Lazy<Regex> = Lazy::new(|| rx(PHONE_PATTERN));
pub static DATETIME_RE: Lazy<Regex> = Lazy::new(|| rx(DATETIME_PATTERN));
pub static MARKDOWN_IMAGE_RE: Lazy<Regex> = Lazy::new(|| rx(MARKDOWN_IMAGE_PATTERN));
pub static HTML_IMAGE_RE: Lazy<Regex> = Lazy::new(|| rx(HTML_IMAGE_PATTERN));
pub static MARKDOWN_LINK_RE: Lazy<Regex> = Lazy::new(|| rx(MARKDOWN_LINK_PATTERN));

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_matches_schemes() {
        assert!(URL_RE.is_match("see http://a.com now"));
        assert!(URL_RE.is_match("HTTPS://EXAMPLE.ORG/path?q=1"));
        assert!(!URL_RE.is_match("no links here"));
    }

    #[test]
    fn ip_patterns_match() {
        assert!(IPV4_RE.is_match("host 192.168.0.1 up"));
        assert!(IPV6_RE.is_match("addr 2001:0db8:85a3:0000:0000:8a2e:0370:7334"));
        assert!(IPV6_RE.is_match("fe80::1"));
    }

    #[test]
    fn pii_patterns_match() {
        assert!(EMAIL_RE.is_match("mail me at a.user@example.co.uk please"));
        assert!(PHONE_RE.is_match("call 555-123-4567"));
        assert!(PHONE_RE.is_match("+1 (415) 555-0100"));
        assert!(DATETIME_RE.is_match("on 2024-06-30T12:00:00Z we"));
        assert!(DATETIME_RE.is_match("due 3/14/2024"));
    }

    #[test]
    fn phone_does_not_eat_plain_integers() {
        assert!(!PHONE_RE.is_match("let x = 1234567;"));
        assert!(!PHONE_RE.is_match("the year 2024 was"));
    }

    #[test]
    fn image_and_link_patterns() {
        assert!(MARKDOWN_IMAGE_RE.is_match("![diagram](fig.png)"));
        assert!(HTML_IMAGE_RE.is_match("<IMG src='x.gif'>"));
        assert!(MARKDOWN_LINK_RE.is_match("[docs](http://a.io)"));
        assert!(!MARKDOWN_IMAGE_RE.is_match("[docs](http://a.io)"));
    }
}
