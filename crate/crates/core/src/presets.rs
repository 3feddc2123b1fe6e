//! Built-in training-plan and architecture presets.
//!
//! The three pre-training stages ship the published data-mix percentages
//! and learning-rate endpoint pairs. Where a setting is not published —
//! multi-step boundary placement, the post-training cosine floors, the
//! vocabulary and attention-head shape of the MoE preset — the value here
//! is a documented assumption, kept in one place so the calculators stay
//! exact functions of their inputs.

use crate::budget::ArchConfig;
use crate::plan::{LrScheduleSpec, StagePlan};
use serde::Serialize;

/// Stage 1: 870B tokens, multi-step 3e-4 to 1.5e-4, code-heavy mix.
pub fn stage1() -> StagePlan {
    let total = 870_000_000_000u64;
    StagePlan {
        name: "stage1".to_string(),
        total_tokens: total,
        ratio_code: 70,
        ratio_nlp: 20,
        ratio_math: 10,
        code_raw: 94,
        code_related: 5,
        code_synthetic: 1,
        batch_size_tokens: 16_000_000,
        // Boundary placement is an assumption: the published schedule
        // drops the rate on loss plateaus; one mid-horizon drop lands on
        // both endpoints.
        lr: LrScheduleSpec::multi_step(
            3e-4,
            1.5e-4,
            total as f64,
            vec![(total as f64 / 2.0, 1.5e-4)],
        )
        .expect("stage1 schedule is valid"),
    }
}

/// Stage 2: 1.7T tokens, cosine 1.4e-4 to 1.1e-4.
pub fn stage2() -> StagePlan {
    let total = 1_700_000_000_000u64;
    StagePlan {
        name: "stage2".to_string(),
        total_tokens: total,
        ratio_code: 65,
        ratio_nlp: 20,
        ratio_math: 15,
        code_raw: 75,
        code_related: 20,
        code_synthetic: 5,
        batch_size_tokens: 16_000_000,
        lr: LrScheduleSpec::cosine(1.4e-4, 1.1e-4, total as f64).expect("stage2 schedule is valid"),
    }
}

/// Annealing: 630B tokens, inverse square root 1.4e-4 to 1.4e-6.
pub fn annealing() -> StagePlan {
    let total = 630_000_000_000u64;
    StagePlan {
        name: "annealing".to_string(),
        total_tokens: total,
        ratio_code: 60,
        ratio_nlp: 20,
        ratio_math: 20,
        code_raw: 40,
        code_related: 10,
        code_synthetic: 50,
        batch_size_tokens: 16_000_000,
        lr: LrScheduleSpec::inverse_sqrt(1.4e-4, 1.4e-6, total as f64)
            .expect("annealing schedule is valid"),
    }
}

/// All three pre-training stages in order.
pub fn pretraining_stages() -> Vec<StagePlan> {
    vec![stage1(), stage2(), annealing()]
}

/// A post-training schedule: epochs over samples at a step-based rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostTrainPlan {
    pub name: String,
    pub epochs: u64,
    pub samples: u64,
    pub batch_size_samples: u64,
    pub lr: LrScheduleSpec,
}

impl PostTrainPlan {
    pub fn total_steps(&self) -> u64 {
        (self.epochs * self.samples).div_ceil(self.batch_size_samples)
    }
}

/// Supervised fine-tuning: 5 epochs over 18.8M samples, batch 384,
/// cosine with 100-step warmup from 4e-5. The cosine floor (a tenth of
/// the peak) is an assumption.
pub fn sft() -> PostTrainPlan {
    let epochs = 5u64;
    let samples = 18_800_000u64;
    let batch = 384u64;
    let steps = (epochs * samples).div_ceil(batch);
    PostTrainPlan {
        name: "sft".to_string(),
        epochs,
        samples,
        batch_size_samples: batch,
        lr: LrScheduleSpec::warmup_cosine(4e-5, 4e-6, steps as f64, 100.0)
            .expect("sft schedule is valid"),
    }
}

/// Preference optimization: 2 epochs over 1.4M pairs, batch 192, cosine
/// with 150-step warmup from 3e-7. The floor is an assumption as in
/// [`sft`].
pub fn dpo() -> PostTrainPlan {
    let epochs = 2u64;
    let samples = 1_400_000u64;
    let batch = 192u64;
    let steps = (epochs * samples).div_ceil(batch);
    PostTrainPlan {
        name: "dpo".to_string(),
        epochs,
        samples,
        batch_size_samples: batch,
        lr: LrScheduleSpec::warmup_cosine(3e-7, 3e-8, steps as f64, 150.0)
            .expect("dpo schedule is valid"),
    }
}

/// The MoE configuration under study: 28 layers, d_model 2048, 2 shared
/// plus 64 routed experts (6 active) with expert hidden 1408. Vocabulary
/// (126,464), 16/16 attention heads, and untied embeddings are documented
/// assumptions; the published totals carry tolerances for exactly that
/// reason.
pub fn moe_lite() -> ArchConfig {
    ArchConfig {
        name: "moe-lite".to_string(),
        layers: 28,
        d_model: 2048,
        n_attention_heads: 16,
        n_kv_heads: 16,
        vocab_size: 126_464,
        tie_embeddings: false,
        experts_routed: 64,
        experts_shared: 2,
        experts_active_routed: 6,
        d_expert_hidden: 1408,
        ffn_matrices_per_expert: 3,
    }
}

/// A dense 7B-class comparison configuration (28 layers, d_model 3584,
/// gated FFN of hidden 18944, grouped-query attention 28/4).
pub fn dense_7b() -> ArchConfig {
    ArchConfig {
        name: "dense-7b".to_string(),
        layers: 28,
        d_model: 3584,
        n_attention_heads: 28,
        n_kv_heads: 4,
        vocab_size: 152_064,
        tie_embeddings: false,
        experts_routed: 0,
        experts_shared: 1,
        experts_active_routed: 0,
        d_expert_hidden: 18944,
        ffn_matrices_per_expert: 3,
    }
}

/// Look up a stage plan by name.
pub fn stage_by_name(name: &str) -> Option<StagePlan> {
    match name {
        "stage1" => Some(stage1()),
        "stage2" => Some(stage2()),
        "annealing" => Some(annealing()),
        _ => None,
    }
}

/// Look up an architecture preset by name.
pub fn arch_by_name(name: &str) -> Option<ArchConfig> {
    match name {
        "moe-lite" => Some(moe_lite()),
        "dense-7b" => Some(dense_7b()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::arch_params;
    use crate::plan::{lr_at, stage_quota};

    #[test]
    fn stage_ratio_cells() {
        let s1 = stage1();
        assert_eq!((s1.ratio_code, s1.ratio_nlp, s1.ratio_math), (70, 20, 10));
        assert_eq!(
            (s1.code_raw, s1.code_related, s1.code_synthetic),
            (94, 5, 1)
        );
        let s2 = stage2();
        assert_eq!((s2.ratio_code, s2.ratio_nlp, s2.ratio_math), (65, 20, 15));
        assert_eq!(
            (s2.code_raw, s2.code_related, s2.code_synthetic),
            (75, 20, 5)
        );
        let a = annealing();
        assert_eq!((a.ratio_code, a.ratio_nlp, a.ratio_math), (60, 20, 20));
        assert_eq!((a.code_raw, a.code_related, a.code_synthetic), (40, 10, 50));
    }

    #[test]
    fn stage_lr_endpoints() {
        for (plan, lr_max, lr_min) in [
            (stage1(), 3e-4, 1.5e-4),
            (stage2(), 1.4e-4, 1.1e-4),
            (annealing(), 1.4e-4, 1.4e-6),
        ] {
            assert_eq!(plan.lr.lr_max, lr_max, "{}", plan.name);
            assert_eq!(plan.lr.lr_min, lr_min, "{}", plan.name);
            assert_eq!(lr_at(&plan.lr, 0.0).unwrap(), lr_max);
            let end = lr_at(&plan.lr, plan.lr.horizon).unwrap();
            assert!((end - lr_min).abs() <= lr_min * 1e-12, "{}", plan.name);
            assert_eq!(plan.batch_size_tokens, 16_000_000);
        }
    }

    #[test]
    fn stage_quotas_conserve() {
        for plan in pretraining_stages() {
            let q = stage_quota(&plan).unwrap();
            assert_eq!(q.code + q.nlp + q.math, plan.total_tokens);
        }
        assert_eq!(stage_quota(&stage1()).unwrap().code, 609_000_000_000);
    }

    #[test]
    fn post_training_settings() {
        let sft = sft();
        assert_eq!(sft.lr.lr_max, 4e-5);
        assert_eq!(sft.batch_size_samples, 384);
        assert_eq!(sft.epochs, 5);
        assert_eq!(sft.lr.warmup_steps, 100.0);
        let dpo = dpo();
        assert_eq!(dpo.lr.lr_max, 3e-7);
        assert_eq!(dpo.batch_size_samples, 192);
        assert_eq!(dpo.epochs, 2);
        assert_eq!(dpo.lr.warmup_steps, 150.0);
        assert!(sft.total_steps() > 0);
    }

    #[test]
    fn moe_preset_is_valid_and_in_published_range() {
        let report = arch_params(&moe_lite()).unwrap();
        let total = report.params_total as f64;
        let active = report.params_active as f64;
        assert!((total - 16.8e9).abs() / 16.8e9 < 0.05, "total {total}");
        assert!((active - 2.75e9).abs() / 2.75e9 < 0.10, "active {active}");
    }

    #[test]
    fn lookup_by_name() {
        assert!(stage_by_name("stage2").is_some());
        assert!(stage_by_name("nope").is_none());
        assert!(arch_by_name("moe-lite").is_some());
        assert!(arch_by_name("dense-7b").is_some());
    }
}
