//! Training-plan calculators: per-stage token quotas, learning-rate
//! schedules, and the bottom-up synthesis expansion arithmetic.
//!
//! Schedules are parameterized over an abstract horizon `T` (tokens or
//! steps); positions are queried in `[0, T]` and endpoints are exact.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("{which} percentages sum to {sum}, expected 100")]
    RatioSum { which: &'static str, sum: u32 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("position {t} outside schedule domain [0, {horizon}]")]
    OutOfDomain { t: f64, horizon: f64 },
    #[error("stage has zero total tokens")]
    EmptyStage,
}

/// Learning-rate schedule family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    MultiStep,
    Cosine,
    InverseSqrt,
    WarmupCosine,
}

/// A fully specified schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrScheduleSpec {
    pub kind: ScheduleKind,
    pub lr_max: f64,
    pub lr_min: f64,
    /// Abstract horizon: tokens for pre-training stages, steps for
    /// post-training.
    pub horizon: f64,
    /// `(position, lr)` constant segments for `MultiStep`; before the
    /// first boundary the rate is `lr_max`.
    pub boundaries: Vec<(f64, f64)>,
    /// Linear ramp length for `WarmupCosine`.
    pub warmup_steps: f64,
}

impl LrScheduleSpec {
    fn validated(self) -> Result<Self, PlanError> {
        let err = |m: String| Err(PlanError::InvalidSchedule(m));
        if !(self.lr_min > 0.0 && self.lr_min <= self.lr_max) {
            return err(format!(
                "need 0 < lr_min <= lr_max, got {} and {}",
                self.lr_min, self.lr_max
            ));
        }
        if self.horizon.is_nan() || self.horizon <= 0.0 {
            return err(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.warmup_steps >= 0.0 && self.warmup_steps < self.horizon) {
            return err(format!(
                "warmup {} must lie inside the horizon {}",
                self.warmup_steps, self.horizon
            ));
        }
        let mut last_pos = f64::NEG_INFINITY;
        let mut last_lr = self.lr_max;
        for &(pos, lr) in &self.boundaries {
            if !(0.0..=self.horizon).contains(&pos) || pos <= last_pos {
                return err("boundary positions must be increasing within [0, horizon]".to_string());
            }
            if lr > last_lr || lr < self.lr_min {
                return err(
                    "boundary rates must descend from lr_max and stay at or above lr_min"
                        .to_string(),
                );
            }
            last_pos = pos;
            last_lr = lr;
        }
        Ok(self)
    }

    pub fn cosine(lr_max: f64, lr_min: f64, horizon: f64) -> Result<Self, PlanError> {
        LrScheduleSpec {
            kind: ScheduleKind::Cosine,
            lr_max,
            lr_min,
            horizon,
            boundaries: Vec::new(),
            warmup_steps: 0.0,
        }
        .validated()
    }

    pub fn inverse_sqrt(lr_max: f64, lr_min: f64, horizon: f64) -> Result<Self, PlanError> {
        LrScheduleSpec {
            kind: ScheduleKind::InverseSqrt,
            lr_max,
            lr_min,
            horizon,
            boundaries: Vec::new(),
            warmup_steps: 0.0,
        }
        .validated()
    }

    pub fn multi_step(
        lr_max: f64,
        lr_min: f64,
        horizon: f64,
        boundaries: Vec<(f64, f64)>,
    ) -> Result<Self, PlanError> {
        LrScheduleSpec {
            kind: ScheduleKind::MultiStep,
            lr_max,
            lr_min,
            horizon,
            boundaries,
            warmup_steps: 0.0,
        }
        .validated()
    }

    pub fn warmup_cosine(
        lr_max: f64,
        lr_min: f64,
        horizon: f64,
        warmup_steps: f64,
    ) -> Result<Self, PlanError> {
        LrScheduleSpec {
            kind: ScheduleKind::WarmupCosine,
            lr_max,
            lr_min,
            horizon,
            boundaries: Vec::new(),
            warmup_steps,
        }
        .validated()
    }
}

fn cosine_at(lr_max: f64, lr_min: f64, t: f64, horizon: f64) -> f64 {
    lr_min + 0.5 * (lr_max - lr_min) * (1.0 + (std::f64::consts::PI * t / horizon).cos())
}

/// Learning rate at position `t` in `[0, horizon]`.
pub fn lr_at(spec: &LrScheduleSpec, t: f64) -> Result<f64, PlanError> {
    if !(0.0..=spec.horizon).contains(&t) {
        return Err(PlanError::OutOfDomain {
            t,
            horizon: spec.horizon,
        });
    }
    let lr = match spec.kind {
        ScheduleKind::Cosine => cosine_at(spec.lr_max, spec.lr_min, t, spec.horizon),
        ScheduleKind::MultiStep => {
            let mut lr = spec.lr_max;
            for &(pos, rate) in &spec.boundaries {
                if pos <= t {
                    lr = rate;
                } else {
                    break;
                }
            }
            lr
        }
        ScheduleKind::InverseSqrt => {
            // Functional form pinned to hit both endpoints exactly:
            // lr(t) = lr_max / sqrt(1 + (t/T)((lr_max/lr_min)^2 - 1)).
            if t == 0.0 {
                spec.lr_max
            } else if t == spec.horizon {
                spec.lr_min
            } else {
                let ratio = spec.lr_max / spec.lr_min;
                spec.lr_max / (1.0 + (t / spec.horizon) * (ratio * ratio - 1.0)).sqrt()
            }
        }
        ScheduleKind::WarmupCosine => {
            if t < spec.warmup_steps {
                spec.lr_max * t / spec.warmup_steps
            } else {
                cosine_at(
                    spec.lr_max,
                    spec.lr_min,
                    t - spec.warmup_steps,
                    spec.horizon - spec.warmup_steps,
                )
            }
        }
    };
    Ok(lr)
}

/// One pre-training stage: data mix percentages and schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StagePlan {
    pub name: String,
    pub total_tokens: u64,
    pub ratio_code: u32,
    pub ratio_nlp: u32,
    pub ratio_math: u32,
    pub code_raw: u32,
    pub code_related: u32,
    pub code_synthetic: u32,
    pub batch_size_tokens: u64,
    pub lr: LrScheduleSpec,
}

/// Exact token budgets; categories always sum back to their total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageQuota {
    pub code: u64,
    pub nlp: u64,
    pub math: u64,
    pub code_raw: u64,
    pub code_related: u64,
    pub code_synthetic: u64,
}

/// Split `total` by integer percentages. Division remainders go to the
/// largest category (ties: earliest), so the parts always sum to `total`.
fn split_exact(total: u64, percents: [u32; 3]) -> [u64; 3] {
    let mut parts = [0u64; 3];
    let mut assigned: u64 = 0;
    for (part, pct) in parts.iter_mut().zip(percents) {
        *part = (total as u128 * pct as u128 / 100) as u64;
        assigned += *part;
    }
    let remainder = total - assigned;
    let largest = (0..3)
        .max_by_key(|&i| (percents[i], std::cmp::Reverse(i)))
        .unwrap();
    parts[largest] += remainder;
    parts
}

/// Token budget per category, exact in integer arithmetic.
pub fn stage_quota(plan: &StagePlan) -> Result<StageQuota, PlanError> {
    if plan.total_tokens == 0 {
        return Err(PlanError::EmptyStage);
    }
    let top_sum = plan.ratio_code + plan.ratio_nlp + plan.ratio_math;
    if top_sum != 100 {
        return Err(PlanError::RatioSum {
            which: "code/nlp/math",
            sum: top_sum,
        });
    }
    let code_sum = plan.code_raw + plan.code_related + plan.code_synthetic;
    if code_sum != 100 {
        return Err(PlanError::RatioSum {
            which: "raw/related/synthetic",
            sum: code_sum,
        });
    }
    let [code, nlp, math] = split_exact(
        plan.total_tokens,
        [plan.ratio_code, plan.ratio_nlp, plan.ratio_math],
    );
    let [code_raw, code_related, code_synthetic] = split_exact(
        code,
        [plan.code_raw, plan.code_related, plan.code_synthetic],
    );
    Ok(StageQuota {
        code,
        nlp,
        math,
        code_raw,
        code_related,
        code_synthetic,
    })
}

/// Bottom-up synthesis output count: each seed expands `(K+1) x N` times.
pub fn synthesis_expansion(seed_count: u64, k: u64, n: u64) -> u64 {
    seed_count * (k + 1) * n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stage(total: u64, ratios: [u32; 3], code_subs: [u32; 3]) -> StagePlan {
        StagePlan {
            name: "test".to_string(),
            total_tokens: total,
            ratio_code: ratios[0],
            ratio_nlp: ratios[1],
            ratio_math: ratios[2],
            code_raw: code_subs[0],
            code_related: code_subs[1],
            code_synthetic: code_subs[2],
            batch_size_tokens: 16_000_000,
            lr: LrScheduleSpec::cosine(1e-4, 1e-5, total as f64).unwrap(),
        }
    }

    #[test]
    fn quota_exact_split() {
        let plan = stage(870_000_000_000, [70, 20, 10], [94, 5, 1]);
        let q = stage_quota(&plan).unwrap();
        assert_eq!(q.code, 609_000_000_000);
        assert_eq!(q.nlp, 174_000_000_000);
        assert_eq!(q.math, 87_000_000_000);
        assert_eq!(q.code_synthetic, 6_090_000_000);
        assert_eq!(q.code + q.nlp + q.math, plan.total_tokens);
        assert_eq!(q.code_raw + q.code_related + q.code_synthetic, q.code);
    }

    #[test]
    fn quota_remainder_goes_to_largest() {
        // 101 tokens at 70/20/10: floors are 70/20/10, remainder 1 -> code.
        let plan = stage(101, [70, 20, 10], [100, 0, 0]);
        let q = stage_quota(&plan).unwrap();
        assert_eq!((q.code, q.nlp, q.math), (71, 20, 10));
        assert_eq!(q.code + q.nlp + q.math, 101);
    }

    #[test]
    fn quota_conserves_tokens_for_awkward_totals() {
        for total in [1u64, 7, 99, 1_000_003, 999_999_937] {
            for ratios in [[33, 33, 34], [1, 1, 98], [50, 25, 25]] {
                let plan = stage(total, ratios, [90, 9, 1]);
                let q = stage_quota(&plan).unwrap();
                assert_eq!(q.code + q.nlp + q.math, total, "{total} {ratios:?}");
                assert_eq!(q.code_raw + q.code_related + q.code_synthetic, q.code);
            }
        }
    }

    #[test]
    fn degenerate_plan_sends_everything_to_code() {
        let plan = stage(1000, [100, 0, 0], [100, 0, 0]);
        let q = stage_quota(&plan).unwrap();
        assert_eq!(q.code, 1000);
        assert_eq!(q.nlp + q.math, 0);
    }

    #[test]
    fn bad_ratio_sum_is_rejected() {
        let plan = stage(1000, [70, 20, 5], [100, 0, 0]);
        assert!(matches!(
            stage_quota(&plan),
            Err(PlanError::RatioSum {
                which: "code/nlp/math",
                sum: 95
            })
        ));
    }

    #[test]
    fn cosine_endpoints_and_midpoint() {
        let spec = LrScheduleSpec::cosine(1.4e-4, 1.1e-4, 1000.0).unwrap();
        assert_eq!(lr_at(&spec, 0.0).unwrap(), 1.4e-4);
        let end = lr_at(&spec, 1000.0).unwrap();
        assert!((end - 1.1e-4).abs() < 1e-18);
        // Midpoint equals the mean of the endpoints.
        let mid = lr_at(&spec, 500.0).unwrap();
        assert!((mid - 1.25e-4).abs() / 1.25e-4 < 1e-12);
    }

    #[test]
    fn inverse_sqrt_hits_both_endpoints() {
        let spec = LrScheduleSpec::inverse_sqrt(1.4e-4, 1.4e-6, 630e9).unwrap();
        assert_eq!(lr_at(&spec, 0.0).unwrap(), 1.4e-4);
        assert_eq!(lr_at(&spec, 630e9).unwrap(), 1.4e-6);
        // Monotone non-increasing along the horizon.
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let t = 630e9 * i as f64 / 100.0;
            let lr = lr_at(&spec, t).unwrap();
            assert!(lr <= prev + 1e-20);
            prev = lr;
        }
    }

    #[test]
    fn multi_step_is_piecewise_constant() {
        let spec = LrScheduleSpec::multi_step(3e-4, 1.5e-4, 100.0, vec![(50.0, 1.5e-4)]).unwrap();
        assert_eq!(lr_at(&spec, 0.0).unwrap(), 3e-4);
        assert_eq!(lr_at(&spec, 49.9).unwrap(), 3e-4);
        assert_eq!(lr_at(&spec, 50.0).unwrap(), 1.5e-4);
        assert_eq!(lr_at(&spec, 100.0).unwrap(), 1.5e-4);
    }

    #[test]
    fn warmup_ramps_linearly_then_decays() {
        let spec = LrScheduleSpec::warmup_cosine(4e-5, 4e-6, 1000.0, 100.0).unwrap();
        assert_eq!(lr_at(&spec, 0.0).unwrap(), 0.0);
        assert_eq!(lr_at(&spec, 50.0).unwrap(), 2e-5);
        assert_eq!(lr_at(&spec, 100.0).unwrap(), 4e-5);
        let end = lr_at(&spec, 1000.0).unwrap();
        assert!((end - 4e-6).abs() < 1e-18);
        // Non-increasing after warmup.
        let mut prev = f64::INFINITY;
        for i in 100..=1000 {
            let lr = lr_at(&spec, i as f64).unwrap();
            assert!(lr <= prev + 1e-20);
            prev = lr;
        }
    }

    #[test]
    fn cosine_is_continuous() {
        let spec = LrScheduleSpec::cosine(1e-3, 1e-5, 1.0).unwrap();
        for i in 1..1000 {
            let t = i as f64 / 1000.0;
            let a = lr_at(&spec, t).unwrap();
            let b = lr_at(&spec, t + 1e-9).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn out_of_domain_position_errors() {
        let spec = LrScheduleSpec::cosine(1e-3, 1e-5, 10.0).unwrap();
        assert!(lr_at(&spec, -0.1).is_err());
        assert!(lr_at(&spec, 10.1).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(LrScheduleSpec::cosine(1e-5, 1e-4, 10.0).is_err()); // min > max
        assert!(LrScheduleSpec::cosine(1e-4, 0.0, 10.0).is_err()); // min = 0
        assert!(LrScheduleSpec::warmup_cosine(1e-4, 1e-5, 10.0, 10.0).is_err());
        assert!(LrScheduleSpec::multi_step(1e-4, 1e-5, 10.0, vec![(5.0, 2e-4)]).is_err());
    }

    #[test]
    fn expansion_arithmetic() {
        assert_eq!(synthesis_expansion(1, 7, 5), 40);
        assert_eq!(synthesis_expansion(10, 7, 5), 400);
        for s in [0u64, 1, 9] {
            assert_eq!(synthesis_expansion(s, 0, 1), s);
        }
    }
}
