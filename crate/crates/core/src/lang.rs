//! Language registry: comment syntax tables, file-extension mapping, and a
//! comment/string-aware scanner shared by the code metrics, import
//! extraction, and repository concatenation stages.
//!
//! The scanner is not a full parser. It tracks just enough state (line
//! comments, possibly-nested block comments, single- and multi-line string
//! literals with escapes) to classify each line as blank, comment, or code,
//! and to blank out comment or string spans so downstream pattern matching
//! never fires inside them.

use std::collections::HashMap;

/// A string-literal delimiter.
#[derive(Debug, Clone, Copy)]
pub struct StringDelim {
    pub open: &'static str,
    pub close: &'static str,
    pub escape: Option<char>,
    /// Whether the literal may span lines; single-line strings are closed
    /// at end of line even if unterminated.
    pub multiline: bool,
}

/// Comment conventions for one language family.
#[derive(Debug, Clone, Copy)]
pub struct CommentSyntax {
    pub line_markers: &'static [&'static str],
    /// `(open, close, nests)` — `nests` allows nested block comments.
    pub block_pairs: &'static [(&'static str, &'static str, bool)],
    pub strings: &'static [StringDelim],
}

const DQ: StringDelim = StringDelim {
    open: "\"",
    close: "\"",
    escape: Some('\\'),
    multiline: false,
};
const SQ: StringDelim = StringDelim {
    open: "'",
    close: "'",
    escape: Some('\\'),
    multiline: false,
};
const SQ_NOESC: StringDelim = StringDelim {
    open: "'",
    close: "'",
    escape: None,
    multiline: false,
};
const TRIPLE_DQ: StringDelim = StringDelim {
    open: "\"\"\"",
    close: "\"\"\"",
    escape: Some('\\'),
    multiline: true,
};
const TRIPLE_SQ: StringDelim = StringDelim {
    open: "'''",
    close: "'''",
    escape: Some('\\'),
    multiline: true,
};
const BACKTICK_RAW: StringDelim = StringDelim {
    open: "`",
    close: "`",
    escape: None,
    multiline: true,
};

pub const PYTHON_COMMENTS: CommentSyntax = CommentSyntax {
    line_markers: &["#"],
    block_pairs: &[],
    strings: &[TRIPLE_DQ, TRIPLE_SQ, DQ, SQ],
};

pub const C_FAMILY_COMMENTS: CommentSyntax = CommentSyntax {
    line_markers: &["//"],
    block_pairs: &[("/*", "*/", false)],
    strings: &[DQ, SQ],
};

pub const RUST_COMMENTS: CommentSyntax = CommentSyntax {
    line_markers: &["//"],
    block_pairs: &[("/*", "*/", true)],
    strings: &[DQ],
};

pub const JS_COMMENTS: CommentSyntax = CommentSyntax {
    line_markers: &["//"],
    block_pairs: &[("/*", "*/", false)],
    strings: &[BACKTICK_RAW, DQ, SQ],
};

pub const GO_COMMENTS: CommentSyntax = CommentSyntax {
    line_markers: &["//"],
    block_pairs: &[("/*", "*/", false)],
    strings: &[BACKTICK_RAW, DQ, SQ],
};

pub const SHELL_COMMENTS: CommentSyntax = CommentSyntax {
    line_markers: &["#"],
    block_pairs: &[],
    strings: &[DQ, SQ_NOESC],
};

pub const SQL_COMMENTS: CommentSyntax = CommentSyntax {
    line_markers: &["--"],
    block_pairs: &[("/*", "*/", false)],
    strings: &[SQ_NOESC],
};

pub const HTML_COMMENTS: CommentSyntax = CommentSyntax {
    line_markers: &[],
    block_pairs: &[("<!--", "-->", false)],
    strings: &[],
};

/// How import statements are written and resolved for a language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImportStyle {
    Python,
    Java,
    JsTs,
    CFamily,
    Go,
    Rust,
    Shell,
    /// No import analysis for this language.
    None,
}

/// Everything the pipeline knows about one language tag.
#[derive(Debug, Clone)]
pub struct LanguageSpec {
    pub tag: &'static str,
    pub extensions: &'static [&'static str],
    /// Directory index file names tried during module resolution.
    pub index_files: &'static [&'static str],
    pub comments: CommentSyntax,
    pub import_style: ImportStyle,
}

impl LanguageSpec {
    /// Render `text` as a single comment line in this language.
    pub fn comment_line(&self, text: &str) -> String {
        if let Some(marker) = self.comments.line_markers.first() {
            format!("{marker} {text}")
        } else if let Some((open, close, _)) = self.comments.block_pairs.first() {
            format!("{open} {text} {close}")
        } else {
            format!("==== {text} ====")
        }
    }
}

/// Registry of supported languages, keyed by tag and by file extension.
#[derive(Debug, Clone)]
pub struct LanguageRegistry {
    specs: Vec<LanguageSpec>,
    by_tag: HashMap<&'static str, usize>,
    by_ext: HashMap<&'static str, usize>,
}

impl LanguageRegistry {
    pub fn new(specs: Vec<LanguageSpec>) -> Self {
        let mut by_tag = HashMap::new();
        let mut by_ext = HashMap::new();
        for (i, spec) in specs.iter().enumerate() {
            by_tag.insert(spec.tag, i);
            for ext in spec.extensions {
                by_ext.insert(*ext, i);
            }
        }
        LanguageRegistry {
            specs,
            by_tag,
            by_ext,
        }
    }

    pub fn get(&self, tag: &str) -> Option<&LanguageSpec> {
        self.by_tag.get(tag).map(|&i| &self.specs[i])
    }

    pub fn by_extension(&self, ext: &str) -> Option<&LanguageSpec> {
        self.by_ext.get(ext).map(|&i| &self.specs[i])
    }

    /// Language of a repo-relative path, from its extension.
    pub fn of_path(&self, path: &str) -> Option<&LanguageSpec> {
        let name = path.rsplit('/').next().unwrap_or(path);
        let ext = name.rsplit_once('.').map(|(_, e)| e)?;
        self.by_extension(ext)
    }

    pub fn tags(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.specs.iter().map(|s| s.tag)
    }
}

impl Default for LanguageRegistry {
    fn default() -> Self {
        LanguageRegistry::new(vec![
            LanguageSpec {
                tag: "python",
                extensions: &["py"],
                index_files: &["__init__.py"],
                comments: PYTHON_COMMENTS,
                import_style: ImportStyle::Python,
            },
            LanguageSpec {
                tag: "java",
                extensions: &["java"],
                index_files: &[],
                comments: C_FAMILY_COMMENTS,
                import_style: ImportStyle::Java,
            },
            LanguageSpec {
                tag: "javascript",
                extensions: &["js", "jsx", "mjs", "cjs"],
                index_files: &["index.js", "index.jsx"],
                comments: JS_COMMENTS,
                import_style: ImportStyle::JsTs,
            },
            LanguageSpec {
                tag: "typescript",
                extensions: &["ts", "tsx"],
                index_files: &["index.ts", "index.tsx"],
                comments: JS_COMMENTS,
                import_style: ImportStyle::JsTs,
            },
            LanguageSpec {
                tag: "c",
                extensions: &["c", "h"],
                index_files: &[],
                comments: C_FAMILY_COMMENTS,
                import_style: ImportStyle::CFamily,
            },
            LanguageSpec {
                tag: "cpp",
                extensions: &["cc", "cpp", "cxx", "hpp", "hh", "hxx"],
                index_files: &[],
                comments: C_FAMILY_COMMENTS,
                import_style: ImportStyle::CFamily,
            },
            LanguageSpec {
                tag: "go",
                extensions: &["go"],
                index_files: &[],
                comments: GO_COMMENTS,
                import_style: ImportStyle::Go,
            },
            LanguageSpec {
                tag: "rust",
                extensions: &["rs"],
                index_files: &["mod.rs"],
                comments: RUST_COMMENTS,
                import_style: ImportStyle::Rust,
            },
            LanguageSpec {
                tag: "shell",
                extensions: &["sh", "bash"],
                index_files: &[],
                comments: SHELL_COMMENTS,
                import_style: ImportStyle::Shell,
            },
            LanguageSpec {
                tag: "sql",
                extensions: &["sql"],
                index_files: &[],
                comments: SQL_COMMENTS,
                import_style: ImportStyle::None,
            },
            LanguageSpec {
                tag: "html",
                extensions: &["html", "htm", "xml"],
                index_files: &[],
                comments: HTML_COMMENTS,
                import_style: ImportStyle::None,
            },
        ])
    }
}

/// Classification of one source line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Blank,
    /// Non-blank and every non-whitespace character lies inside a comment.
    Comment,
    /// Non-blank with at least one non-whitespace character outside comments.
    Code,
}

/// Result of scanning a file once.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub line_kinds: Vec<LineKind>,
    /// Source with comment spans blanked to spaces; strings intact.
    /// Line structure is preserved.
    pub without_comments: String,
    /// Source with both comment spans and string interiors blanked; what
    /// bracket balancing looks at.
    pub code_only: String,
}

#[derive(Clone, Copy)]
enum ScanState {
    Normal,
    Block { pair: usize, depth: usize },
    Str { delim: usize },
}

/// Scan a file, classifying lines and producing comment-stripped views.
pub fn scan(content: &str, syntax: &CommentSyntax) -> ScanResult {
    let mut line_kinds = Vec::new();
    let mut without_comments = String::with_capacity(content.len());
    let mut code_only = String::with_capacity(content.len());
    let mut state = ScanState::Normal;

    for line in content.split_inclusive('\n') {
        let bytes = line.as_bytes();
        let mut has_code = false;
        let mut has_comment = false;
        let mut i = 0usize;

        'line: while i < bytes.len() {
            let rest = &line[i..];
            match state {
                ScanState::Normal => {
                    let c = rest.chars().next().unwrap();
                    if c == '\n' {
                        without_comments.push('\n');
                        code_only.push('\n');
                        i += 1;
                        continue;
                    }
                    if c.is_whitespace() {
                        without_comments.push(c);
                        code_only.push(c);
                        i += c.len_utf8();
                        continue;
                    }
                    if syntax.line_markers.iter().any(|m| rest.starts_with(m)) {
                        has_comment = true;
                        // Blank the remainder of the line (keep the newline).
                        for c in rest.chars() {
                            if c == '\n' {
                                without_comments.push('\n');
                                code_only.push('\n');
                            } else {
                                without_comments.push(' ');
                                code_only.push(' ');
                            }
                        }
                        break 'line;
                    }
                    for (k, (open, _, _)) in syntax.block_pairs.iter().enumerate() {
                        if rest.starts_with(open) {
                            has_comment = true;
                            state = ScanState::Block { pair: k, depth: 1 };
                            for _ in 0..open.chars().count() {
                                without_comments.push(' ');
                                code_only.push(' ');
                            }
                            i += open.len();
                            continue 'line;
                        }
                    }
                    for (k, d) in syntax.strings.iter().enumerate() {
                        if rest.starts_with(d.open) {
                            has_code = true;
                            state = ScanState::Str { delim: k };
                            without_comments.push_str(d.open);
                            for _ in 0..d.open.chars().count() {
                                code_only.push(' ');
                            }
                            i += d.open.len();
                            continue 'line;
                        }
                    }
                    has_code = true;
                    without_comments.push(c);
                    code_only.push(c);
                    i += c.len_utf8();
                }
                ScanState::Block { pair, depth } => {
                    let (open, close, nests) = syntax.block_pairs[pair];
                    if rest.starts_with(close) {
                        has_comment = true;
                        let depth = depth - 1;
                        state = if depth == 0 {
                            ScanState::Normal
                        } else {
                            ScanState::Block { pair, depth }
                        };
                        for _ in 0..close.chars().count() {
                            without_comments.push(' ');
                            code_only.push(' ');
                        }
                        i += close.len();
                    } else if nests && rest.starts_with(open) {
                        has_comment = true;
                        state = ScanState::Block {
                            pair,
                            depth: depth + 1,
                        };
                        for _ in 0..open.chars().count() {
                            without_comments.push(' ');
                            code_only.push(' ');
                        }
                        i += open.len();
                    } else {
                        let c = rest.chars().next().unwrap();
                        if c == '\n' {
                            without_comments.push('\n');
                            code_only.push('\n');
                        } else {
                            if !c.is_whitespace() {
                                has_comment = true;
                            }
                            without_comments.push(' ');
                            code_only.push(' ');
                        }
                        i += c.len_utf8();
                    }
                }
                ScanState::Str { delim } => {
                    let d = syntax.strings[delim];
                    let c = rest.chars().next().unwrap();
                    if let Some(esc) = d.escape {
                        if c == esc {
                            has_code = true;
                            without_comments.push(c);
                            code_only.push(' ');
                            i += c.len_utf8();
                            if i < bytes.len() {
                                let c2 = line[i..].chars().next().unwrap();
                                if c2 != '\n' {
                                    without_comments.push(c2);
                                    code_only.push(' ');
                                    i += c2.len_utf8();
                                }
                            }
                            continue;
                        }
                    }
                    if rest.starts_with(d.close) {
                        has_code = true;
                        state = ScanState::Normal;
                        without_comments.push_str(d.close);
                        for _ in 0..d.close.chars().count() {
                            code_only.push(' ');
                        }
                        i += d.close.len();
                    } else if c == '\n' {
                        without_comments.push('\n');
                        code_only.push('\n');
                        i += 1;
                    } else {
                        if !c.is_whitespace() {
                            has_code = true;
                        }
                        without_comments.push(c);
                        code_only.push(' ');
                        i += c.len_utf8();
                    }
                }
            }
        }

        // Unterminated single-line strings close at end of line.
        if let ScanState::Str { delim } = state {
            if !syntax.strings[delim].multiline {
                state = ScanState::Normal;
            }
        }

        let kind = if has_code {
            LineKind::Code
        } else if has_comment {
            LineKind::Comment
        } else {
            LineKind::Blank
        };
        line_kinds.push(kind);
    }

    ScanResult {
        line_kinds,
        without_comments,
        code_only,
    }
}
