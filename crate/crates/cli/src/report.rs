//! Run reports: per-stage input/kept/rejected counts, per-rule rejection
//! histograms, wall time, and the digest of the resolved configuration.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub name: String,
    pub input: usize,
    pub kept: usize,
    pub rejected: usize,
    pub rule_histogram: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, serde_json::Value>,
}

impl StageReport {
    pub fn new(name: impl Into<String>) -> Self {
        StageReport {
            name: name.into(),
            input: 0,
            kept: 0,
            rejected: 0,
            rule_histogram: BTreeMap::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn record_kept(&mut self) {
        self.input += 1;
        self.kept += 1;
    }

    pub fn record_rejected(&mut self, rule: &str) {
        self.input += 1;
        self.rejected += 1;
        *self.rule_histogram.entry(rule.to_string()).or_insert(0) += 1;
    }

    /// kept + sum of the histogram must equal input.
    pub fn conserved(&self) -> bool {
        let histogram_total: usize = self.rule_histogram.values().sum();
        self.kept + self.rejected == self.input && histogram_total == self.rejected
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config_digest: String,
    pub stages: Vec<StageReport>,
    pub wall_time_ms: u128,
}

impl RunReport {
    pub fn new(command: impl Into<String>, config_digest: String) -> Self {
        RunReport {
            command: command.into(),
            config_digest,
            stages: Vec::new(),
            wall_time_ms: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
