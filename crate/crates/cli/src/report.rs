//! Verification report rows and the JSON report envelope.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Whether `measured` must stay below or reach `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub inputs: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Row {
    /// Passes when `measured ≤ tolerance`; NaN never passes.
    pub fn max(
        name: impl Into<String>,
        inputs: impl Into<String>,
        measured: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            name: name.into(),
            inputs: inputs.into(),
            measured,
            tolerance,
            bound: Bound::Max,
            pass: measured <= tolerance,
        }
    }

    /// Passes when `measured ≥ tolerance`.
    pub fn min(
        name: impl Into<String>,
        inputs: impl Into<String>,
        measured: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            name: name.into(),
            inputs: inputs.into(),
            measured,
            tolerance,
            bound: Bound::Min,
            pass: measured >= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: serde_json::Value,
    pub rows: Vec<Row>,
    pub pass: bool,
    /// Wall-clock seconds per suite.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(
        config: serde_json::Value,
        mut rows: Vec<Row>,
        timings: BTreeMap<String, f64>,
    ) -> Self {
        sort_rows(&mut rows);
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            pass: rows.iter().all(|r| r.pass),
            rows,
            timings,
        }
    }
}

/// Canonical row order, independent of scheduling.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.inputs.cmp(&b.inputs)));
}

/// First 16 hex digits of the SHA-256 of the parts, separated by NUL.
pub fn digest<S: AsRef<[u8]>>(parts: &[S]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_ref());
        h.update([0u8]);
    }
    h.finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_pass_is_conjunction() {
        let rows = vec![
            Row::max("b", "x", 1e-12, 1e-10),
            Row::min("a", "x", 0.5, 1e-2),
        ];
        let r = Report::new(serde_json::Value::Null, rows.clone(), BTreeMap::new());
        assert!(r.pass);
        assert_eq!(r.rows[0].name, "a");
        let mut bad = rows;
        bad.push(Row::max("c", "x", f64::NAN, 1.0));
        assert!(!Report::new(serde_json::Value::Null, bad, BTreeMap::new()).pass);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(&["a", "b"]), digest(&["a", "b"]));
        assert_ne!(digest(&["ab"]), digest(&["a", "b"]));
        assert_eq!(digest(&["a"]).len(), 16);
    }
}
