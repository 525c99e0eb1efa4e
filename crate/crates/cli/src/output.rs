//! Output records and bit-exact emission.
//!
//! JSON goes through serde_json, whose float formatting is the shortest
//! decimal that round-trips. CSV uses the same float formatting rule
//! (Rust's `Display` for `f64`), so identical runs produce identical
//! bytes regardless of worker count.

use randsec::optimizer::SweepPoint;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    /// Every resolved configuration key, defaults included.
    pub config: BTreeMap<String, String>,
    pub payload: serde_json::Value,
}

impl OutputRecord {
    pub fn new(seed: u64, config: BTreeMap<String, String>, payload: serde_json::Value) -> Self {
        Self {
            tool: "randsec",
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config,
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }
}

/// Shortest round-trip decimal for a float; empty field for NaN
/// (used by error-marked sweep rows).
fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Minimal CSV quoting: fields containing separators or quotes are
/// wrapped and inner quotes doubled.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const SWEEP_CSV_HEADER: &str = "ratio,scheme,r_sec,argmax_param,argmin_theta,classifier_desc,error";

/// Frozen sweep CSV layout: one row per (ratio, scheme), an `error`
/// marker column for unrealizable or failed points.
pub fn sweep_to_csv(rows: &[SweepPoint]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let fields = [
            fmt_f64(row.ratio),
            row.scheme.name().to_string(),
            fmt_f64(row.r_sec),
            fmt_f64(row.argmax_param),
            fmt_f64(row.argmin_theta),
            row.classifier_desc.clone(),
            row.error.clone().unwrap_or_default(),
        ];
        let line: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
