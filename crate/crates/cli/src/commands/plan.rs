//! The `plan` and `budget` subcommands: deterministic calculators with
//! human-readable and JSON output.

use codecorpus::budget::{arch_params, flops_per_inference};
use codecorpus::plan::{lr_at, stage_quota, synthesis_expansion};
use codecorpus::presets;

use crate::stream::{write_text, CliError};

use super::Ctx;

fn human_tokens(n: u64) -> String {
    if n >= 1_000_000_000_000 {
        format!("{:.2}T", n as f64 / 1e12)
    } else if n >= 1_000_000_000 {
        format!("{:.2}B", n as f64 / 1e9)
    } else if n >= 1_000_000 {
        format!("{:.2}M", n as f64 / 1e6)
    } else {
        n.to_string()
    }
}

pub fn run_plan(
    preset: &str,
    stage: Option<&str>,
    post: Option<&str>,
    expansion: Option<(u64, u64, u64)>,
    json: bool,
    ctx: &Ctx,
) -> Result<(), CliError> {
    if preset != "table1" {
        return Err(CliError::usage(format!(
            "unknown plan preset {preset:?} (expected table1)"
        )));
    }
    if let Some((seeds, k, n)) = expansion {
        let total = synthesis_expansion(seeds, k, n);
        let text = if json {
            serde_json::json!({
                "seeds": seeds, "k": k, "n": n, "expanded": total,
            })
            .to_string()
                + "\n"
        } else {
            format!("{seeds} seed(s) x (K={k}+1) x N={n} = {total} problems\n")
        };
        return write_text(&text, &ctx.output);
    }
    if let Some(which) = post {
        let plan = match which {
            "sft" => presets::sft(),
            "dpo" => presets::dpo(),
            other => {
                return Err(CliError::usage(format!(
                    "unknown post-training plan {other:?} (expected sft or dpo)"
                )))
            }
        };
        let text = if json {
            serde_json::to_string_pretty(&plan).expect("plan serializes") + "\n"
        } else {
            format!(
                "{name}: {epochs} epoch(s) x {samples} samples, batch {batch} samples\n\
                 schedule: warmup {warmup} steps then cosine {lr_max:e} -> {lr_min:e} over {steps} steps\n",
                name = plan.name,
                epochs = plan.epochs,
                samples = human_tokens(plan.samples),
                batch = plan.batch_size_samples,
                warmup = plan.lr.warmup_steps,
                lr_max = plan.lr.lr_max,
                lr_min = plan.lr.lr_min,
                steps = plan.total_steps(),
            )
        };
        return write_text(&text, &ctx.output);
    }
    let Some(stage_name) = stage else {
        let names: Vec<String> = presets::pretraining_stages()
            .iter()
            .map(|s| s.name.clone())
            .collect();
        return write_text(
            &format!("stages: {}; post-training: sft, dpo\n", names.join(", ")),
            &ctx.output,
        );
    };
    let plan = presets::stage_by_name(stage_name)
        .ok_or_else(|| CliError::usage(format!("unknown stage {stage_name:?}")))?;
    let quota = stage_quota(&plan).map_err(|e| CliError::usage(e.to_string()))?;
    let text = if json {
        serde_json::json!({
            "stage": plan,
            "quota": quota,
        })
        .to_string()
            + "\n"
    } else {
        let lr0 = lr_at(&plan.lr, 0.0).expect("0 in domain");
        let lr1 = lr_at(&plan.lr, plan.lr.horizon).expect("horizon in domain");
        format!(
            "stage {name}: {total} tokens ({total_h}), batch {batch} tokens\n\
             schedule: {kind:?} {lr0:e} -> {lr1:e}\n\
             mix: code {code}% / nlp {nlp}% / math {math}%\n\
             code budget: {code_tokens} tokens ({code_h})\n\
               raw {raw}% = {raw_tokens} ({raw_h})\n\
               code-related {related}% = {related_tokens} ({related_h})\n\
               synthetic {synthetic}% = {synthetic_tokens} ({synthetic_h})\n\
             nlp budget: {nlp_tokens} ({nlp_h}); math budget: {math_tokens} ({math_h})\n",
            name = plan.name,
            total = plan.total_tokens,
            total_h = human_tokens(plan.total_tokens),
            batch = plan.batch_size_tokens,
            kind = plan.lr.kind,
            code = plan.ratio_code,
            nlp = plan.ratio_nlp,
            math = plan.ratio_math,
            code_tokens = quota.code,
            code_h = human_tokens(quota.code),
            raw = plan.code_raw,
            raw_tokens = quota.code_raw,
            raw_h = human_tokens(quota.code_raw),
            related = plan.code_related,
            related_tokens = quota.code_related,
            related_h = human_tokens(quota.code_related),
            synthetic = plan.code_synthetic,
            synthetic_tokens = quota.code_synthetic,
            synthetic_h = human_tokens(quota.code_synthetic),
            nlp_tokens = quota.nlp,
            nlp_h = human_tokens(quota.nlp),
            math_tokens = quota.math,
            math_h = human_tokens(quota.math),
        )
    };
    write_text(&text, &ctx.output)
}

pub fn run_budget(
    preset: &str,
    context: u64,
    compare: Option<&str>,
    json: bool,
    ctx: &Ctx,
) -> Result<(), CliError> {
    let cfg = presets::arch_by_name(preset)
        .ok_or_else(|| CliError::usage(format!("unknown architecture preset {preset:?}")))?;
    let report = flops_per_inference(&cfg, context).map_err(|e| CliError::usage(e.to_string()))?;

    let comparison = match compare {
        Some(other_name) => {
            let other = presets::arch_by_name(other_name).ok_or_else(|| {
                CliError::usage(format!("unknown architecture preset {other_name:?}"))
            })?;
            Some(flops_per_inference(&other, context).map_err(|e| CliError::usage(e.to_string()))?)
        }
        None => None,
    };

    let text = if json {
        match &comparison {
            Some(other) => {
                serde_json::json!({ "report": report, "compare": other }).to_string() + "\n"
            }
            None => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        }
    } else {
        let params = arch_params(&cfg).expect("validated above");
        let mut text = format!(
            "{name}: params_total {total} ({total_b:.2}B), params_active {active} ({active_b:.2}B)\n\
             per-expert ffn params: {per_expert}\n\
             flops per final token at context {context}: {per_token:.3e}\n\
             flops per inference at context {context}: {per_inf:.3e} ({tflops:.2} TFLOPs)\n",
            name = cfg.name,
            total = params.params_total,
            total_b = params.params_total as f64 / 1e9,
            active = params.params_active,
            active_b = params.params_active as f64 / 1e9,
            per_expert = cfg.params_per_expert(),
            per_token = report.flops_per_token.unwrap(),
            per_inf = report.flops_per_inference.unwrap(),
            tflops = report.flops_per_inference.unwrap() / 1e12,
        );
        if let Some(other) = &comparison {
            let ratio = report.flops_per_inference.unwrap() / other.flops_per_inference.unwrap();
            text.push_str(&format!(
                "vs {}: flops ratio {ratio:.3} ({:.2} TFLOPs)\n",
                other.config_name,
                other.flops_per_inference.unwrap() / 1e12,
            ));
        }
        text.push_str("assumptions:\n");
        for assumption in &report.assumptions {
            text.push_str(&format!("  - {assumption}\n"));
        }
        text
    };
    write_text(&text, &ctx.output)
}
