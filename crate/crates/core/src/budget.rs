//! Mixture-of-experts parameter and FLOPs budgets.
//!
//! Parameter accounting, per layer: attention projections (grouped-query
//! shapes from the head configuration), the expert router (`d_model x
//! routed experts`), and the expert FFNs (`ffn_matrices_per_expert x
//! d_model x d_expert_hidden` per expert). Norm weights and embeddings are
//! counted toward parameter totals but only matrix parameters feed the
//! `2 x params` FLOPs rule; the output head matmul is counted for FLOPs
//! whether or not its weights are tied to the embedding. Every such
//! assumption is listed in the report.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BudgetError {
    #[error("invalid architecture: {0}")]
    InvalidArch(String),
    #[error("context length must be at least 1")]
    EmptyContext,
}

/// MoE transformer shape. A dense model is the special case of zero
/// routed experts and one shared "expert" holding the FFN.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArchConfig {
    pub name: String,
    pub layers: u64,
    pub d_model: u64,
    pub n_attention_heads: u64,
    pub n_kv_heads: u64,
    pub vocab_size: u64,
    pub tie_embeddings: bool,
    pub experts_routed: u64,
    pub experts_shared: u64,
    pub experts_active_routed: u64,
    pub d_expert_hidden: u64,
    /// Matrices per expert FFN; 3 for gated variants.
    pub ffn_matrices_per_expert: u64,
}

impl ArchConfig {
    pub fn validate(&self) -> Result<(), BudgetError> {
        let err = |m: String| Err(BudgetError::InvalidArch(m));
        if self.layers == 0
            || self.d_model == 0
            || self.n_attention_heads == 0
            || self.n_kv_heads == 0
            || self.vocab_size == 0
            || self.d_expert_hidden == 0
            || self.ffn_matrices_per_expert == 0
        {
            return err("all dimensions must be positive".to_string());
        }
        if self.experts_routed + self.experts_shared == 0 {
            return err("at least one expert is required".to_string());
        }
        if self.experts_active_routed > self.experts_routed {
            return err(format!(
                "active routed experts {} exceed routed experts {}",
                self.experts_active_routed, self.experts_routed
            ));
        }
        if !self.d_model.is_multiple_of(self.n_attention_heads) {
            return err("d_model must divide evenly into attention heads".to_string());
        }
        if !self.n_attention_heads.is_multiple_of(self.n_kv_heads) {
            return err("attention heads must divide evenly into KV heads".to_string());
        }
        Ok(())
    }

    /// Parameters of one expert FFN.
    pub fn params_per_expert(&self) -> u64 {
        self.ffn_matrices_per_expert * self.d_model * self.d_expert_hidden
    }

    fn head_dim(&self) -> u64 {
        self.d_model / self.n_attention_heads
    }

    /// Attention projection parameters per layer: q/o at `d_model^2`
    /// each, k/v at `d_model x (kv_heads x head_dim)` each.
    pub fn attention_params_per_layer(&self) -> u64 {
        let kv_dim = self.n_kv_heads * self.head_dim();
        2 * self.d_model * self.d_model + 2 * self.d_model * kv_dim
    }

    fn router_params_per_layer(&self) -> u64 {
        self.d_model * self.experts_routed
    }

    fn norm_params(&self) -> u64 {
        // Two norm weights per layer plus the final norm.
        2 * self.layers * self.d_model + self.d_model
    }

    fn embedding_params(&self) -> u64 {
        let table = self.vocab_size * self.d_model;
        if self.tie_embeddings {
            table
        } else {
            2 * table
        }
    }
}

/// Parameter and FLOPs accounting for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub config_name: String,
    pub params_total: u64,
    pub params_active: u64,
    /// Matmul-bearing subset of the active parameters; drives FLOPs.
    pub params_active_matmul: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context_len: Option<u64>,
    /// Forward FLOPs for the final token at the full context.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flops_per_token: Option<f64>,
    /// Forward FLOPs summed over positions `1..=context_len`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flops_per_inference: Option<f64>,
    pub assumptions: Vec<String>,
}

fn base_assumptions(cfg: &ArchConfig) -> Vec<String> {
    vec![
        format!(
            "vocab_size={} with {} embeddings; norm weights counted in totals",
            cfg.vocab_size,
            if cfg.tie_embeddings { "tied" } else { "untied" }
        ),
        format!(
            "attention: {} heads / {} KV heads, head_dim={}, q/k/v/o projections only (no biases)",
            cfg.n_attention_heads,
            cfg.n_kv_heads,
            cfg.d_model / cfg.n_attention_heads
        ),
        format!(
            "every layer carries a router (d_model x {} routed experts) and {} FFN matrices per expert",
            cfg.experts_routed, cfg.ffn_matrices_per_expert
        ),
    ]
}

/// Total and activated parameter counts.
pub fn arch_params(cfg: &ArchConfig) -> Result<BudgetReport, BudgetError> {
    cfg.validate()?;
    let per_expert = cfg.params_per_expert();
    let experts_total = (cfg.experts_routed + cfg.experts_shared) * per_expert;
    let experts_active = (cfg.experts_active_routed + cfg.experts_shared) * per_expert;
    let per_layer_common = cfg.attention_params_per_layer() + cfg.router_params_per_layer();

    let params_total = cfg.embedding_params()
        + cfg.layers * (per_layer_common + experts_total)
        + cfg.norm_params();
    let params_active = cfg.embedding_params()
        + cfg.layers * (per_layer_common + experts_active)
        + cfg.norm_params();

    // Matmul-bearing active parameters: attention, router, active experts,
    // and the output head (the head matmul runs even with tied weights).
    let params_active_matmul =
        cfg.layers * (per_layer_common + experts_active) + cfg.vocab_size * cfg.d_model;

    let mut assumptions = base_assumptions(cfg);
    assumptions.push(format!(
        "active = {} shared + {} of {} routed experts per layer",
        cfg.experts_shared, cfg.experts_active_routed, cfg.experts_routed
    ));

    Ok(BudgetReport {
        config_name: cfg.name.clone(),
        params_total,
        params_active,
        params_active_matmul,
        context_len: None,
        flops_per_token: None,
        flops_per_inference: None,
        assumptions,
    })
}

/// Theoretical forward FLOPs of a single inference over a context.
///
/// Per token at position `p`: `2 x params_active_matmul` for the matrix
/// multiplies plus the attention score/value term `4 x d_model x p` per
/// layer. Per inference: the sum over positions `1..=context_len`.
pub fn flops_per_inference(
    cfg: &ArchConfig,
    context_len: u64,
) -> Result<BudgetReport, BudgetError> {
    if context_len == 0 {
        return Err(BudgetError::EmptyContext);
    }
    let mut report = arch_params(cfg)?;
    let p_mm = report.params_active_matmul as u128;
    let attn_per_layer_per_pos = 4 * cfg.d_model as u128;
    let context = context_len as u128;
    let positions_sum = context * (context + 1) / 2;

    let per_token_last = 2 * p_mm + attn_per_layer_per_pos * cfg.layers as u128 * context;
    let per_inference =
        2 * p_mm * context + attn_per_layer_per_pos * cfg.layers as u128 * positions_sum;

    report.context_len = Some(context_len);
    report.flops_per_token = Some(per_token_last as f64);
    report.flops_per_inference = Some(per_inference as f64);
    report.assumptions.push(
        "FLOPs: 2 x active matmul params per token, plus 4 x d_model x position per layer \
         for attention scores/values; embedding lookups and norms excluded; output head \
         matmul included regardless of weight tying"
            .to_string(),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moe_cfg() -> ArchConfig {
        ArchConfig {
            name: "moe-test".to_string(),
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

    #[test]
    fn per_expert_ffn_params() {
        // 3 x 2048 x 1408, by hand.
        assert_eq!(moe_cfg().params_per_expert(), 8_650_752);
    }

    #[test]
    fn expert_total_matches_brute_force_summation() {
        let cfg = moe_cfg();
        // Oracle: sum the per-expert matrices layer by layer, expert by
        // expert, matrix by matrix.
        let mut oracle: u64 = 0;
        for _layer in 0..cfg.layers {
            for _expert in 0..(cfg.experts_routed + cfg.experts_shared) {
                for _matrix in 0..cfg.ffn_matrices_per_expert {
                    oracle += cfg.d_model * cfg.d_expert_hidden;
                }
            }
        }
        assert_eq!(oracle, 28 * 66 * 8_650_752);
        assert_eq!(oracle, 15_986_589_696);
        let report = arch_params(&cfg).unwrap();
        // Expert mass dominates; total = experts + everything else.
        assert!(report.params_total > oracle);
        let non_expert = report.params_total - oracle;
        assert!(non_expert < 2_000_000_000, "non-expert mass {non_expert}");
    }

    #[test]
    fn active_le_total_with_equality_iff_all_active() {
        let cfg = moe_cfg();
        let report = arch_params(&cfg).unwrap();
        assert!(report.params_active < report.params_total);
        let mut all_active = cfg.clone();
        all_active.experts_active_routed = all_active.experts_routed;
        let report = arch_params(&all_active).unwrap();
        assert_eq!(report.params_active, report.params_total);
    }

    #[test]
    fn single_token_flops_is_roughly_twice_matmul_params() {
        let cfg = moe_cfg();
        let report = flops_per_inference(&cfg, 1).unwrap();
        let expected = 2.0 * report.params_active_matmul as f64;
        let got = report.flops_per_inference.unwrap();
        assert!((got - expected) / expected < 1e-3, "{got} vs {expected}");
    }

    #[test]
    fn doubling_total_experts_leaves_flops_unchanged() {
        let cfg = moe_cfg();
        let base = flops_per_inference(&cfg, 4096).unwrap();
        let mut doubled = cfg.clone();
        doubled.experts_routed *= 2;
        let report = flops_per_inference(&doubled, 4096).unwrap();
        // The router grows by d_model x 64 per layer; ignore that sliver.
        let router_growth = 2.0 * (cfg.d_model * cfg.experts_routed * cfg.layers * 4096) as f64;
        let diff = report.flops_per_inference.unwrap() - base.flops_per_inference.unwrap();
        assert!(diff <= router_growth);
        assert!(report.params_total > base.params_total);
        // With the router held fixed, expert flops depend only on the
        // active count.
        assert_eq!(
            report.params_active_matmul - base.params_active_matmul,
            cfg.d_model * cfg.experts_routed * cfg.layers
        );
    }

    #[test]
    fn flops_strictly_increase_with_context() {
        let cfg = moe_cfg();
        let mut prev = 0.0;
        for context in [1u64, 2, 16, 256, 4096] {
            let f = flops_per_inference(&cfg, context)
                .unwrap()
                .flops_per_inference
                .unwrap();
            assert!(f > prev);
            prev = f;
        }
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        let mut cfg = moe_cfg();
        cfg.experts_active_routed = 65;
        assert!(arch_params(&cfg).is_err());
        let mut cfg = moe_cfg();
        cfg.d_model = 2047;
        assert!(arch_params(&cfg).is_err());
        let mut cfg = moe_cfg();
        cfg.layers = 0;
        assert!(arch_params(&cfg).is_err());
        assert!(flops_per_inference(&moe_cfg(), 0).is_err());
    }

    #[test]
    fn report_lists_assumptions() {
        let report = flops_per_inference(&moe_cfg(), 4096).unwrap();
        assert!(!report.assumptions.is_empty());
        assert!(report.assumptions.iter().any(|a| a.contains("vocab_size")));
        assert!(report.assumptions.iter().any(|a| a.contains("FLOPs")));
    }
}
