//! Import-extraction conformance: both backends must reproduce the
//! expected reference list for every shipped case, in source order.

use std::path::PathBuf;

use serde::Deserialize;

use codecorpus::lang::LanguageRegistry;
use codecorpus::repo::{extract_imports, ExtractionBackend, SpecifierKind};

#[derive(Deserialize)]
struct Case {
    language: String,
    path: String,
    source: String,
    expected: Vec<Expected>,
}

#[derive(Deserialize)]
struct Expected {
    raw: String,
    kind: SpecifierKind,
}

fn cases() -> Vec<(String, Case)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/conformance");
    let mut cases = Vec::new();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let case: Case = toml::from_str(&text).unwrap();
        cases.push((
            path.file_name().unwrap().to_string_lossy().to_string(),
            case,
        ));
    }
    cases.sort_by(|a, b| a.0.cmp(&b.0));
    assert!(cases.len() >= 10, "conformance corpus went missing");
    cases
}

#[test]
fn both_backends_pass_every_case() {
    let langs = LanguageRegistry::default();
    for (name, case) in cases() {
        let spec = langs
            .get(&case.language)
            .unwrap_or_else(|| panic!("{name}: unknown language {}", case.language));
        for backend in [ExtractionBackend::Scanner, ExtractionBackend::Patterns] {
            let refs = extract_imports(&case.path, &case.source, spec, backend);
            let got: Vec<(&str, SpecifierKind)> =
                refs.iter().map(|r| (r.raw.as_str(), r.kind)).collect();
            let want: Vec<(&str, SpecifierKind)> = case
                .expected
                .iter()
                .map(|e| (e.raw.as_str(), e.kind))
                .collect();
            assert_eq!(got, want, "{name} with {backend:?}");
            for r in &refs {
                assert_eq!(r.importer, case.path);
                assert!(!r.raw.is_empty());
            }
        }
    }
}
