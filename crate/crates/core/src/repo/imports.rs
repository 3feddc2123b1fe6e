//! Import statement extraction and intra-repository module resolution.
//!
//! Two extraction backends exist. The scanner backend first blanks out
//! comments with the language-aware scanner, so commented-out imports are
//! never extracted; the pattern backend applies the same per-language
//! patterns to the raw text and exists as a documented fallback. Both must
//! agree on the shipped conformance corpus.
//!
//! Resolution combines path-based searching (specifier relative to the
//! importer's directory, then the repo root, trying registered extensions
//! and index-file conventions) with package-naming-convention analysis
//! (dotted or `::`-separated specifiers mapped to directory paths). The
//! first hit wins; specifiers that hit nothing are external packages and
//! resolve to none.

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::lang::{scan, ImportStyle, LanguageRegistry, LanguageSpec};

use super::vfs::{join_normalized, parent_dir, Vfs};

/// How a specifier is written, before any resolution attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecifierKind {
    /// File-path-like, anchored at the importer (`./util`, `lib/a.h`).
    Relative,
    /// Package or module naming convention (`a.b.c`, `crate::x`).
    PackageLike,
    /// Not analyzable statically (e.g. contains shell expansions).
    UnresolvableYet,
}

/// One import statement as written in a source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportRef {
    pub importer: String,
    pub raw: String,
    pub kind: SpecifierKind,
}

impl ImportRef {
    fn new(importer: &str, raw: impl Into<String>, kind: SpecifierKind) -> Self {
        ImportRef {
            importer: importer.to_string(),
            raw: raw.into(),
            kind,
        }
    }
}

/// Which extraction backend to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtractionBackend {
    /// Comment-aware scanner (default).
    #[default]
    Scanner,
    /// Raw-text patterns.
    Patterns,
}

static PY_IMPORT_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^\s*import\s+(.+?)\s*(?:#.*)?$").unwrap());
static PY_FROM_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^\s*from\s+([.\w][\w.]*)\s+import\s+(.+?)\s*(?:#.*)?$").unwrap());
static JAVA_IMPORT_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^\s*import\s+(?:static\s+)?([\w.]+)(?:\.\*)?\s*;").unwrap());
static JS_FROM_RE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r#"(?:\bimport|\bexport)\s+[^'"\n;]*?\bfrom\s*['"]([^'"]+)['"]"#).unwrap()
});
static JS_BARE_IMPORT_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r#"\bimport\s*['"]([^'"]+)['"]"#).unwrap());
static JS_REQUIRE_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r#"\brequire\s*\(\s*['"]([^'"]+)['"]\s*\)"#).unwrap());
static C_INCLUDE_Q_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r#"^\s*#\s*include\s*"([^"]+)""#).unwrap());
static C_INCLUDE_A_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^\s*#\s*include\s*<([^>]+)>").unwrap());
static GO_IMPORT_ONE_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r#"^\s*import\s+(?:\w+\s+|\.\s+|_\s+)?"([^"]+)""#).unwrap());
static GO_IMPORT_OPEN_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*import\s*\(").unwrap());
static GO_IMPORT_ITEM_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r#"^\s*(?:\w+\s+|\.\s+|_\s+)?"([^"]+)""#).unwrap());
static RUST_MOD_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^\s*(?:pub(?:\([\w: ]*\))?\s+)?mod\s+(\w+)\s*;").unwrap());
static RUST_USE_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^\s*(?:pub(?:\([\w: ]*\))?\s+)?use\s+([\w:]+)").unwrap());
static SHELL_SOURCE_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r#"^\s*(?:source|\.)\s+["']?([^\s"']+)["']?"#).unwrap());

fn path_kind(spec: &str) -> SpecifierKind {
    if spec.starts_with("./") || spec.starts_with("../") || spec.starts_with('/') {
        SpecifierKind::Relative
    } else {
        SpecifierKind::PackageLike
    }
}

fn extract_python(text: &str, importer: &str, out: &mut Vec<ImportRef>) {
    for line in text.lines() {
        if let Some(c) = PY_FROM_RE.captures(line) {
            let base = c.get(1).unwrap().as_str();
            let names = c.get(2).unwrap().as_str();
            let kind = if base.starts_with('.') {
                SpecifierKind::Relative
            } else {
                SpecifierKind::PackageLike
            };
            for name in names.split(',') {
                let name = name
                    .trim()
                    .trim_start_matches('(')
                    .trim_end_matches(')')
                    .trim();
                let name = name.split_whitespace().next().unwrap_or("");
                if name.is_empty() || name == "*" {
                    // `from x import *` keeps just the module part.
                    out.push(ImportRef::new(importer, base, kind));
                    continue;
                }
                let raw = if base.ends_with('.') {
                    format!("{base}{name}")
                } else {
                    format!("{base}.{name}")
                };
                out.push(ImportRef::new(importer, raw, kind));
            }
        } else if let Some(c) = PY_IMPORT_RE.captures(line) {
            for item in c.get(1).unwrap().as_str().split(',') {
                let module = item.split_whitespace().next().unwrap_or("");
                if module.is_empty() {
                    continue;
                }
                out.push(ImportRef::new(importer, module, SpecifierKind::PackageLike));
            }
        }
    }
}

fn extract_java(text: &str, importer: &str, out: &mut Vec<ImportRef>) {
    for line in text.lines() {
        if let Some(c) = JAVA_IMPORT_RE.captures(line) {
            out.push(ImportRef::new(
                importer,
                c.get(1).unwrap().as_str(),
                SpecifierKind::PackageLike,
            ));
        }
    }
}

fn extract_js(text: &str, importer: &str, out: &mut Vec<ImportRef>) {
    for line in text.lines() {
        if let Some(c) = JS_FROM_RE.captures(line) {
            let spec = c.get(1).unwrap().as_str();
            out.push(ImportRef::new(importer, spec, path_kind(spec)));
        } else if let Some(c) = JS_BARE_IMPORT_RE.captures(line) {
            let spec = c.get(1).unwrap().as_str();
            out.push(ImportRef::new(importer, spec, path_kind(spec)));
        }
        for c in JS_REQUIRE_RE.captures_iter(line) {
            let spec = c.get(1).unwrap().as_str();
            out.push(ImportRef::new(importer, spec, path_kind(spec)));
        }
    }
}

fn extract_c(text: &str, importer: &str, out: &mut Vec<ImportRef>) {
    for line in text.lines() {
        if let Some(c) = C_INCLUDE_Q_RE.captures(line) {
            out.push(ImportRef::new(
                importer,
                c.get(1).unwrap().as_str(),
                SpecifierKind::Relative,
            ));
        } else if let Some(c) = C_INCLUDE_A_RE.captures(line) {
            out.push(ImportRef::new(
                importer,
                c.get(1).unwrap().as_str(),
                SpecifierKind::PackageLike,
            ));
        }
    }
}

fn extract_go(text: &str, importer: &str, out: &mut Vec<ImportRef>) {
    let mut in_block = false;
    for line in text.lines() {
        if in_block {
            if line.trim_start().starts_with(')') {
                in_block = false;
                continue;
            }
            if let Some(c) = GO_IMPORT_ITEM_RE.captures(line) {
                let spec = c.get(1).unwrap().as_str();
                out.push(ImportRef::new(importer, spec, path_kind(spec)));
            }
            continue;
        }
        if GO_IMPORT_OPEN_RE.is_match(line) {
            in_block = true;
            continue;
        }
        if let Some(c) = GO_IMPORT_ONE_RE.captures(line) {
            let spec = c.get(1).unwrap().as_str();
            out.push(ImportRef::new(importer, spec, path_kind(spec)));
        }
    }
}

fn extract_rust(text: &str, importer: &str, out: &mut Vec<ImportRef>) {
    for line in text.lines() {
        if let Some(c) = RUST_MOD_RE.captures(line) {
            out.push(ImportRef::new(
                importer,
                c.get(1).unwrap().as_str(),
                SpecifierKind::Relative,
            ));
        } else if let Some(c) = RUST_USE_RE.captures(line) {
            let path = c.get(1).unwrap().as_str();
            let kind = if path.starts_with("self::") || path.starts_with("super::") {
                SpecifierKind::Relative
            } else {
                SpecifierKind::PackageLike
            };
            out.push(ImportRef::new(importer, path, kind));
        }
    }
}

fn extract_shell(text: &str, importer: &str, out: &mut Vec<ImportRef>) {
    for line in text.lines() {
        if let Some(c) = SHELL_SOURCE_RE.captures(line) {
            let spec = c.get(1).unwrap().as_str();
            let kind = if spec.contains('$') {
                SpecifierKind::UnresolvableYet
            } else {
                SpecifierKind::Relative
            };
            out.push(ImportRef::new(importer, spec, kind));
        }
    }
}

/// Extract import references from one file, in source order.
pub fn extract_imports(
    path: &str,
    content: &str,
    spec: &LanguageSpec,
    backend: ExtractionBackend,
) -> Vec<ImportRef> {
    let stripped;
    let text: &str = match backend {
        ExtractionBackend::Scanner => {
            let scanned = scan(content, &spec.comments);
            // Import syntax in these languages carries no string literal,
            // so string interiors can be blanked too; the rest quote their
            // specifiers and keep strings intact.
            stripped = match spec.import_style {
                ImportStyle::Python | ImportStyle::Java | ImportStyle::Rust => scanned.code_only,
                _ => scanned.without_comments,
            };
            &stripped
        }
        ExtractionBackend::Patterns => content,
    };
    let mut out = Vec::new();
    match spec.import_style {
        ImportStyle::Python => extract_python(text, path, &mut out),
        ImportStyle::Java => extract_java(text, path, &mut out),
        ImportStyle::JsTs => extract_js(text, path, &mut out),
        ImportStyle::CFamily => extract_c(text, path, &mut out),
        ImportStyle::Go => extract_go(text, path, &mut out),
        ImportStyle::Rust => extract_rust(text, path, &mut out),
        ImportStyle::Shell => extract_shell(text, path, &mut out),
        ImportStyle::None => {}
    }
    out
}

/// Try a candidate path as a file, then with extensions, then as a
/// directory with index files. First hit wins.
fn probe(candidate: &str, vfs: &Vfs<'_>, spec: &LanguageSpec) -> Option<String> {
    if vfs.contains(candidate) {
        return Some(candidate.to_string());
    }
    for ext in spec.extensions {
        let with_ext = format!("{candidate}.{ext}");
        if vfs.contains(&with_ext) {
            return Some(with_ext);
        }
    }
    for index in spec.index_files {
        let with_index = format!("{candidate}/{index}");
        if vfs.contains(&with_index) {
            return Some(with_index);
        }
    }
    None
}

/// Probe a dotted-path candidate, falling back to its parent module when
/// the full path misses (the last segment is often a symbol, not a file).
fn probe_with_parent(
    segments: &[&str],
    base: &str,
    vfs: &Vfs<'_>,
    spec: &LanguageSpec,
) -> Option<String> {
    let join = |segs: &[&str]| -> Option<String> {
        if segs.is_empty() {
            return None;
        }
        let rel = segs.join("/");
        if base.is_empty() {
            Some(rel)
        } else {
            join_normalized(base, &rel)
        }
    };
    if let Some(candidate) = join(segments) {
        if let Some(hit) = probe(&candidate, vfs, spec) {
            return Some(hit);
        }
    }
    if segments.len() > 1 {
        if let Some(candidate) = join(&segments[..segments.len() - 1]) {
            if let Some(hit) = probe(&candidate, vfs, spec) {
                return Some(hit);
            }
        }
    }
    None
}

fn resolve_python(r: &ImportRef, vfs: &Vfs<'_>, spec: &LanguageSpec) -> Option<String> {
    if let Some(rest) = r.raw.strip_prefix('.') {
        // Relative import: each extra leading dot climbs one directory.
        let mut dir = parent_dir(&r.importer).to_string();
        let mut rest = rest;
        while let Some(up) = rest.strip_prefix('.') {
            dir = parent_dir(&dir).to_string();
            rest = up;
        }
        if rest.is_empty() {
            return None;
        }
        let segments: Vec<&str> = rest.split('.').collect();
        return probe_with_parent(&segments, &dir, vfs, spec);
    }
    let segments: Vec<&str> = r.raw.split('.').collect();
    // Convention mapping from the repo root, then relative to the importer.
    probe_with_parent(&segments, "", vfs, spec)
        .or_else(|| probe_with_parent(&segments, parent_dir(&r.importer), vfs, spec))
}

fn resolve_java(r: &ImportRef, vfs: &Vfs<'_>, spec: &LanguageSpec) -> Option<String> {
    let segments: Vec<&str> = r.raw.split('.').collect();
    probe_with_parent(&segments, "", vfs, spec)
}

fn resolve_pathish(r: &ImportRef, vfs: &Vfs<'_>, spec: &LanguageSpec) -> Option<String> {
    // Importer-relative first, then repo root.
    if let Some(candidate) = join_normalized(parent_dir(&r.importer), &r.raw) {
        if let Some(hit) = probe(&candidate, vfs, spec) {
            return Some(hit);
        }
    }
    let rooted = r.raw.trim_start_matches("./").trim_start_matches('/');
    if !rooted.contains("..") {
        if let Some(hit) = probe(rooted, vfs, spec) {
            return Some(hit);
        }
    }
    None
}

fn resolve_go(r: &ImportRef, vfs: &Vfs<'_>, spec: &LanguageSpec) -> Option<String> {
    if let Some(hit) = resolve_pathish(r, vfs, spec) {
        return Some(hit);
    }
    // A Go import names a package directory; take its first source file.
    let dir = r.raw.trim_start_matches("./").trim_start_matches('/');
    if dir.contains("..") {
        return None;
    }
    for ext in spec.extensions {
        let mut files = vfs.dir_files_with_extension(dir, ext);
        files.sort_unstable();
        if let Some(first) = files.first() {
            return Some((*first).to_string());
        }
    }
    None
}

fn resolve_rust(r: &ImportRef, vfs: &Vfs<'_>, spec: &LanguageSpec) -> Option<String> {
    let raw = r.raw.as_str();
    let importer_dir = parent_dir(&r.importer);
    if !raw.contains("::") {
        // `mod name;` resolves next to the declaring file.
        let segments = [raw];
        return probe_with_parent(&segments, importer_dir, vfs, spec);
    }
    let mut segments: Vec<&str> = raw.split("::").collect();
    let base: String = match segments.first().copied() {
        Some("crate") => {
            segments.remove(0);
            // Try the repo root and the conventional src/ root.
            let from_root = probe_with_parent(&segments, "", vfs, spec);
            if from_root.is_some() {
                return from_root;
            }
            "src".to_string()
        }
        Some("self") => {
            segments.remove(0);
            importer_dir.to_string()
        }
        Some("super") => {
            segments.remove(0);
            let mut dir = parent_dir(importer_dir).to_string();
            while segments.first() == Some(&"super") {
                segments.remove(0);
                dir = parent_dir(&dir).to_string();
            }
            dir
        }
        _ => String::new(),
    };
    if segments.is_empty() {
        return None;
    }
    probe_with_parent(&segments, &base, vfs, spec)
}

/// Resolve one import to a repository file, or none for external packages.
pub fn resolve_import(r: &ImportRef, vfs: &Vfs<'_>, langs: &LanguageRegistry) -> Option<String> {
    let spec = langs.of_path(&r.importer)?;
    if r.kind == SpecifierKind::UnresolvableYet {
        return None;
    }
    match spec.import_style {
        ImportStyle::Python => resolve_python(r, vfs, spec),
        ImportStyle::Java => resolve_java(r, vfs, spec),
        ImportStyle::JsTs | ImportStyle::CFamily | ImportStyle::Shell => {
            resolve_pathish(r, vfs, spec)
        }
        ImportStyle::Go => resolve_go(r, vfs, spec),
        ImportStyle::Rust => resolve_rust(r, vfs, spec),
        ImportStyle::None => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repo::vfs::RepoSnapshot;

    fn registry() -> LanguageRegistry {
        LanguageRegistry::default()
    }

    fn extract(path: &str, content: &str) -> Vec<ImportRef> {
        let langs = registry();
        let spec = langs.of_path(path).unwrap();
        extract_imports(path, content, spec, ExtractionBackend::Scanner)
    }

    #[test]
    fn python_plain_import() {
        let refs = extract("m.py", "import util\n");
        assert_eq!(refs.len(), 1);
        assert_eq!(refs[0].raw, "util");
        assert_eq!(refs[0].kind, SpecifierKind::PackageLike);
    }

    #[test]
    fn c_quoted_include_is_relative() {
        let refs = extract("main.c", "#include \"lib/a.h\"\n#include <stdio.h>\n");
        assert_eq!(refs[0].raw, "lib/a.h");
        assert_eq!(refs[0].kind, SpecifierKind::Relative);
        assert_eq!(refs[1].raw, "stdio.h");
        assert_eq!(refs[1].kind, SpecifierKind::PackageLike);
    }

    #[test]
    fn file_with_no_imports_is_empty() {
        assert!(extract("m.py", "x = 1\n").is_empty());
        assert!(extract("m.go", "package main\n").is_empty());
    }

    #[test]
    fn scanner_ignores_imports_inside_docstrings() {
        let src = "'''\nimport fake\n'''\nimport real\n";
        let langs = registry();
        let spec = langs.of_path("m.py").unwrap();
        let scanned = extract_imports("m.py", src, spec, ExtractionBackend::Scanner);
        assert_eq!(scanned.len(), 1);
        assert_eq!(scanned[0].raw, "real");
        // The raw-pattern fallback sees the docstring import; this is the
        // documented difference between the backends.
        let patterns = extract_imports("m.py", src, spec, ExtractionBackend::Patterns);
        assert_eq!(patterns.len(), 2);
    }

    #[test]
    fn scanner_ignores_commented_out_imports() {
        let src = "// import fake from './fake'\nimport real from './real'\n";
        let langs = registry();
        let spec = langs.of_path("m.js").unwrap();
        let scanned = extract_imports("m.js", src, spec, ExtractionBackend::Scanner);
        assert_eq!(scanned.len(), 1);
        assert_eq!(scanned[0].raw, "./real");
        let patterns = extract_imports("m.js", src, spec, ExtractionBackend::Patterns);
        assert_eq!(patterns.len(), 2);
    }

    #[test]
    fn scanner_ignores_imports_in_c_block_comments() {
        let src = "/*\n#include \"gone.h\"\n*/\n#include \"kept.h\"\n";
        let langs = registry();
        let spec = langs.of_path("m.c").unwrap();
        let refs = extract_imports("m.c", src, spec, ExtractionBackend::Scanner);
        assert_eq!(refs.len(), 1);
        assert_eq!(refs[0].raw, "kept.h");
    }

    #[test]
    fn go_import_block() {
        let src = "package a\n\nimport (\n\t\"fmt\"\n\tx \"pkg/util\"\n)\n";
        let refs = extract("a.go", src);
        assert_eq!(refs.len(), 2);
        assert_eq!(refs[0].raw, "fmt");
        assert_eq!(refs[1].raw, "pkg/util");
    }

    #[test]
    fn resolve_relative_to_importer_dir() {
        let snap = RepoSnapshot::new(
            "r",
            [
                ("pkg/m.py".to_string(), String::new()),
                ("pkg/util.py".to_string(), String::new()),
            ],
        )
        .unwrap();
        let langs = registry();
        let r = ImportRef::new("pkg/m.py", "util", SpecifierKind::PackageLike);
        assert_eq!(
            resolve_import(&r, &snap.vfs(), &langs),
            Some("pkg/util.py".to_string())
        );
    }

    #[test]
    fn resolve_dotted_convention_from_root() {
        let snap = RepoSnapshot::new("r", [("a/b.py".to_string(), String::new())]).unwrap();
        let langs = registry();
        let r = ImportRef::new("m.py", "a.b", SpecifierKind::PackageLike);
        assert_eq!(
            resolve_import(&r, &snap.vfs(), &langs),
            Some("a/b.py".to_string())
        );
    }

    #[test]
    fn external_package_resolves_to_none() {
        let snap = RepoSnapshot::new("r", [("m.py".to_string(), String::new())]).unwrap();
        let langs = registry();
        let r = ImportRef::new("m.py", "requests", SpecifierKind::PackageLike);
        assert_eq!(resolve_import(&r, &snap.vfs(), &langs), None);
    }

    #[test]
    fn python_relative_import_with_dots() {
        let snap = RepoSnapshot::new(
            "r",
            [
                ("pkg/sub/m.py".to_string(), String::new()),
                ("pkg/helper.py".to_string(), String::new()),
                ("pkg/sub/local.py".to_string(), String::new()),
            ],
        )
        .unwrap();
        let langs = registry();
        let refs = extract(
            "pkg/sub/m.py",
            "from . import local\nfrom ..helper import thing\n",
        );
        assert_eq!(refs[0].raw, ".local");
        assert_eq!(refs[1].raw, "..helper.thing");
        assert_eq!(
            resolve_import(&refs[0], &snap.vfs(), &langs),
            Some("pkg/sub/local.py".to_string())
        );
        assert_eq!(
            resolve_import(&refs[1], &snap.vfs(), &langs),
            Some("pkg/helper.py".to_string())
        );
    }

    #[test]
    fn js_index_convention() {
        let snap = RepoSnapshot::new(
            "r",
            [
                ("src/app.js".to_string(), String::new()),
                ("src/lib/index.js".to_string(), String::new()),
            ],
        )
        .unwrap();
        let langs = registry();
        let r = ImportRef::new("src/app.js", "./lib", SpecifierKind::Relative);
        assert_eq!(
            resolve_import(&r, &snap.vfs(), &langs),
            Some("src/lib/index.js".to_string())
        );
    }

    #[test]
    fn rust_mod_and_use_resolution() {
        let snap = RepoSnapshot::new(
            "r",
            [
                ("src/main.rs".to_string(), String::new()),
                ("src/util.rs".to_string(), String::new()),
                ("src/store/mod.rs".to_string(), String::new()),
            ],
        )
        .unwrap();
        let langs = registry();
        let m = ImportRef::new("src/main.rs", "util", SpecifierKind::Relative);
        assert_eq!(
            resolve_import(&m, &snap.vfs(), &langs),
            Some("src/util.rs".to_string())
        );
        let u = ImportRef::new(
            "src/main.rs",
            "crate::store::Store",
            SpecifierKind::PackageLike,
        );
        assert_eq!(
            resolve_import(&u, &snap.vfs(), &langs),
            Some("src/store/mod.rs".to_string())
        );
    }

    #[test]
    fn shell_dollar_specifier_is_unresolvable() {
        let refs = extract("run.sh", "source \"$DIR/lib.sh\"\nsource ./real.sh\n");
        assert_eq!(refs[0].kind, SpecifierKind::UnresolvableYet);
        assert_eq!(refs[1].kind, SpecifierKind::Relative);
        let snap = RepoSnapshot::new(
            "r",
            [
                ("run.sh".to_string(), String::new()),
                ("real.sh".to_string(), String::new()),
            ],
        )
        .unwrap();
        let langs = registry();
        assert_eq!(resolve_import(&refs[0], &snap.vfs(), &langs), None);
        assert_eq!(
            resolve_import(&refs[1], &snap.vfs(), &langs),
            Some("real.sh".to_string())
        );
    }
}
