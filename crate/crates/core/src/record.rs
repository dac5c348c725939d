//! One row per plotted point, shared by every sweep.

use serde::{Deserialize, Serialize};

use crate::noise::NoiseKind;

/// Bumped whenever a column is added, removed or reinterpreted.
pub const SCHEMA_VERSION: u32 = 1;

pub const RECORD_COLUMNS: [&str; 17] = [
    "instance_id",
    "seed",
    "channel",
    "eps",
    "cost_unmitigated",
    "cost_mitigated",
    "ratio_ideal",
    "ratio_unmitigated",
    "ratio_mitigated",
    "min_samples_unmitigated",
    "min_samples_mitigated",
    "coherent_mismatch",
    "mismatch_reliable",
    "alpha_opt",
    "beta_opt",
    "alpha_unmitigated",
    "beta_unmitigated",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub instance_id: u64,
    pub seed: u64,
    pub channel: NoiseKind,
    pub eps: f64,
    pub cost_unmitigated: f64,
    pub cost_mitigated: f64,
    pub ratio_ideal: f64,
    pub ratio_unmitigated: f64,
    pub ratio_mitigated: f64,
    pub min_samples_unmitigated: u64,
    pub min_samples_mitigated: u64,
    /// Only defined where an ideal pure state exists (QAOA sweeps).
    pub coherent_mismatch: Option<f64>,
    pub mismatch_reliable: bool,
    /// Angles optimal for the mitigated cost.
    pub alpha_opt: Option<f64>,
    pub beta_opt: Option<f64>,
    /// Angles optimal for the unmitigated cost.
    pub alpha_unmitigated: Option<f64>,
    pub beta_unmitigated: Option<f64>,
}

/// 17 significant digits: round-trips every f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

impl SweepRecord {
    pub fn distance_unmitigated(&self) -> f64 {
        self.ratio_ideal - self.ratio_unmitigated
    }

    pub fn distance_mitigated(&self) -> f64 {
        self.ratio_ideal - self.ratio_mitigated
    }

    /// Fields in [`RECORD_COLUMNS`] order; missing values are empty.
    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.instance_id.to_string(),
            self.seed.to_string(),
            self.channel.to_string(),
            format_float(self.eps),
            format_float(self.cost_unmitigated),
            format_float(self.cost_mitigated),
            format_float(self.ratio_ideal),
            format_float(self.ratio_unmitigated),
            format_float(self.ratio_mitigated),
            self.min_samples_unmitigated.to_string(),
            self.min_samples_mitigated.to_string(),
            opt(self.coherent_mismatch),
            self.mismatch_reliable.to_string(),
            opt(self.alpha_opt),
            opt(self.beta_opt),
            opt(self.alpha_unmitigated),
            opt(self.beta_unmitigated),
        ]
    }

    /// Inverse of [`SweepRecord::csv_fields`].
    pub fn from_csv_fields(fields: &[&str]) -> Result<Self, String> {
        if fields.len() != RECORD_COLUMNS.len() {
            return Err(format!("expected {} fields, found {}", RECORD_COLUMNS.len(), fields.len()));
        }
        fn num<T: std::str::FromStr>(s: &str, col: &str) -> Result<T, String> {
            s.trim().parse().map_err(|_| format!("column {col}: cannot parse '{s}'"))
        }
        let opt = |k: usize| -> Result<Option<f64>, String> {
            let s = fields[k].trim();
            if s.is_empty() {
                Ok(None)
            } else {
                num(s, RECORD_COLUMNS[k]).map(Some)
            }
        };
        Ok(Self {
            instance_id: num(fields[0], RECORD_COLUMNS[0])?,
            seed: num(fields[1], RECORD_COLUMNS[1])?,
            channel: fields[2].parse().map_err(|e| format!("column channel: {e}"))?,
            eps: num(fields[3], RECORD_COLUMNS[3])?,
            cost_unmitigated: num(fields[4], RECORD_COLUMNS[4])?,
            cost_mitigated: num(fields[5], RECORD_COLUMNS[5])?,
            ratio_ideal: num(fields[6], RECORD_COLUMNS[6])?,
            ratio_unmitigated: num(fields[7], RECORD_COLUMNS[7])?,
            ratio_mitigated: num(fields[8], RECORD_COLUMNS[8])?,
            min_samples_unmitigated: num(fields[9], RECORD_COLUMNS[9])?,
            min_samples_mitigated: num(fields[10], RECORD_COLUMNS[10])?,
            coherent_mismatch: opt(11)?,
            mismatch_reliable: num(fields[12], RECORD_COLUMNS[12])?,
            alpha_opt: opt(13)?,
            beta_opt: opt(14)?,
            alpha_unmitigated: opt(15)?,
            beta_unmitigated: opt(16)?,
        })
    }

    /// Invariants every emitted record must satisfy.
    pub fn check(&self) -> Result<(), String> {
        for (name, r) in [
            ("ratio_ideal", self.ratio_ideal),
            ("ratio_unmitigated", self.ratio_unmitigated),
            ("ratio_mitigated", self.ratio_mitigated),
        ] {
            if !(-1e-9..=1.0 + 1e-9).contains(&r) {
                return Err(format!("{name} = {r} outside [0, 1]"));
            }
        }
        if self.min_samples_unmitigated < 1 || self.min_samples_mitigated < 1 {
            return Err("min_samples below 1".into());
        }
        Ok(())
    }
}
