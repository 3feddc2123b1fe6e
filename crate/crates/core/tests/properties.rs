//! Property tests for the library-wide invariants.

use proptest::prelude::*;

use codecorpus::concat::{concat_repo, split_document};
use codecorpus::config::PipelineConfig;
use codecorpus::dedup::{estimate_similarity, minhash_signature, MinHashParams};
use codecorpus::filters::{filter_source_stats, filter_text_stats};
use codecorpus::lang::LanguageRegistry;
use codecorpus::plan::{lr_at, stage_quota, LrScheduleSpec, StagePlan};
use codecorpus::record::{load_records, save_records, CorpusRecord, MetaValue, RecordKind};
use codecorpus::repo::{build_graph, ExtractionBackend, RepoSnapshot};
use codecorpus::stats::compute_content_stats;
use codecorpus::toposort::lex_topo_sort;

fn arb_kind() -> impl Strategy<Value = RecordKind> {
    prop_oneof![
        Just(RecordKind::SourceCode),
        Just(RecordKind::Text),
        Just(RecordKind::Coco),
        Just(RecordKind::RepoFile),
    ]
}

fn arb_meta_value() -> impl Strategy<Value = MetaValue> {
    prop_oneof![
        any::<i64>().prop_map(MetaValue::Int),
        (-1e12f64..1e12).prop_map(MetaValue::Float),
        "[a-z0-9 ]{0,20}".prop_map(MetaValue::Str),
    ]
}

fn arb_record() -> impl Strategy<Value = CorpusRecord> {
    (
        "[a-zA-Z0-9_-]{1,12}",
        arb_kind(),
        any::<String>(),
        proptest::option::of("[a-z]{1,8}"),
        proptest::option::of("[a-z/._-]{1,20}"),
        proptest::collection::btree_map("[a-z_]{1,10}", arb_meta_value(), 0..4),
    )
        .prop_map(|(id, kind, content, language, path, meta)| {
            let mut r = CorpusRecord::new(id, kind, content);
            r.language = language;
            r.path = path;
            r.meta = meta;
            r
        })
}

proptest! {
    #[test]
    fn record_save_load_round_trips(records in proptest::collection::vec(arb_record(), 0..8)) {
        // Ids must be unique for a valid stream.
        let mut unique = records;
        let mut seen = std::collections::HashSet::new();
        unique.retain(|r| seen.insert(r.id.clone()));

        let mut buf = Vec::new();
        save_records(unique.iter(), &mut buf).unwrap();
        let outcome = load_records(&buf[..]).unwrap();
        prop_assert_eq!(outcome.malformed, 0);
        prop_assert_eq!(outcome.records, unique);
    }

    #[test]
    fn stats_ratios_stay_in_unit_interval(content in any::<String>()) {
        let s = compute_content_stats(&content);
        for ratio in [
            s.url_ip_char_ratio,
            s.pii_char_ratio,
            s.dup_line_ratio,
            s.dup_word_ratio,
            s.garbled_ratio,
            s.link_line_ratio,
        ] {
            prop_assert!((0.0..=1.0).contains(&ratio), "{ratio} from {content:?}");
        }
        if s.total_chars == 0 {
            prop_assert_eq!(s.dup_line_ratio, 0.0);
            prop_assert_eq!(s.url_ip_char_ratio, 0.0);
        }
        prop_assert!(
            s.avg_line_len * s.total_lines as f64 <= (s.total_chars + s.total_lines) as f64
        );
    }

    #[test]
    fn filtering_is_deterministic_and_monotone(content in any::<String>()) {
        let cfg = PipelineConfig::default();
        let stats = compute_content_stats(&content);
        let first = filter_source_stats(&stats, &cfg);
        let second = filter_source_stats(&stats, &cfg);
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(first.keep, first.rule_id.is_none());

        // Raising every max-allowed threshold never flips keep -> reject.
        let mut relaxed = cfg.clone();
        relaxed.url_ip_ratio = 1.0;
        relaxed.pii_ratio = 1.0;
        relaxed.duplication_ratio = 1.0;
        relaxed.garbled_ratio = 1.0;
        relaxed.link_line_ratio = 1.0;
        relaxed.max_line_len = usize::MAX;
        relaxed.avg_line_len = f64::INFINITY;
        if first.keep {
            prop_assert!(filter_source_stats(&stats, &relaxed).keep);
        }
        let text_first = filter_text_stats(&stats, &cfg);
        if text_first.keep {
            prop_assert!(filter_text_stats(&stats, &relaxed).keep);
        }
    }

    #[test]
    fn minhash_estimate_is_a_similarity(a in any::<String>(), b in any::<String>()) {
        let params = MinHashParams::default();
        let sa = minhash_signature(&a, &params);
        let sb = minhash_signature(&b, &params);
        let sim = estimate_similarity(&sa, &sb);
        prop_assert!((0.0..=1.0).contains(&sim));
        prop_assert_eq!(estimate_similarity(&sa, &sa), 1.0);
        prop_assert_eq!(estimate_similarity(&sa, &sb), estimate_similarity(&sb, &sa));
    }

    #[test]
    fn quota_conserves_tokens(
        total in 1u64..10_000_000_000_000,
        code in 0u32..=100,
        raw_split in 0u32..=100,
        nlp_share in 0u32..=100,
    ) {
        let nlp = (100 - code) * nlp_share / 100;
        let math = 100 - code - nlp;
        let related = (100 - raw_split) / 2;
        let synthetic = 100 - raw_split - related;
        let plan = StagePlan {
            name: "p".to_string(),
            total_tokens: total,
            ratio_code: code,
            ratio_nlp: nlp,
            ratio_math: math,
            code_raw: raw_split,
            code_related: related,
            code_synthetic: synthetic,
            batch_size_tokens: 1,
            lr: LrScheduleSpec::cosine(1e-4, 1e-5, 1.0).unwrap(),
        };
        let quota = stage_quota(&plan).unwrap();
        prop_assert_eq!(quota.code + quota.nlp + quota.math, total);
        prop_assert_eq!(
            quota.code_raw + quota.code_related + quota.code_synthetic,
            quota.code
        );
    }

    #[test]
    fn schedules_stay_between_their_endpoints(
        lr_max_exp in -6.0f64..-2.0,
        ratio in 1.0f64..200.0,
        frac in 0.0f64..=1.0,
    ) {
        let lr_max = 10f64.powf(lr_max_exp);
        let lr_min = lr_max / ratio;
        let horizon = 1000.0;
        for spec in [
            LrScheduleSpec::cosine(lr_max, lr_min, horizon).unwrap(),
            LrScheduleSpec::inverse_sqrt(lr_max, lr_min, horizon).unwrap(),
        ] {
            let lr = lr_at(&spec, frac * horizon).unwrap();
            prop_assert!(lr <= lr_max * (1.0 + 1e-12));
            prop_assert!(lr >= lr_min * (1.0 - 1e-12));
        }
    }

    #[test]
    fn concat_split_round_trips_any_contents(
        contents in proptest::collection::vec("[ -~\n]{0,120}", 1..6)
    ) {
        let langs = LanguageRegistry::default();
        let cfg = PipelineConfig::default();
        let files: Vec<(String, String)> = contents
            .into_iter()
            .enumerate()
            .map(|(i, c)| (format!("f{i:02}.py"), c))
            .collect();
        let snapshot = RepoSnapshot::new("prop", files.clone()).unwrap();
        let graph = build_graph(&snapshot, &langs, ExtractionBackend::Scanner);
        let topo = lex_topo_sort(&graph);
        let doc = concat_repo(&snapshot, &graph, &topo, &langs, &cfg.separator_template).unwrap();
        let sections = split_document(&doc, &langs, &cfg.separator_template).unwrap();
        let expected: Vec<(String, String)> = topo
            .order
            .iter()
            .map(|&id| {
                let p = graph.path(id);
                (p.to_string(), snapshot.vfs().read(p).unwrap().to_string())
            })
            .collect();
        prop_assert_eq!(sections, expected);
    }
}
