//! Spend-log ingestion: one JSON record per line, appended over time by
//! whatever system performs the private computations.
//!
//! The ledger stores declared parameters only; it never sees data or
//! mechanism outputs. One process reads it at a time; concurrent writers
//! are outside the contract.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use odometer_core::spend::{CompositionState, PrivacySpend, SpendKind};

/// One ledger line. Unknown fields are ignored; `kind` is case-sensitive.
#[derive(Debug, Clone, Deserialize)]
pub struct SpendRecord {
    pub index: u64,
    pub kind: String,
    pub epsilon: f64,
    pub delta: f64,
    /// Optional ISO-8601 stamp, carried for provenance but unused by the
    /// accountant.
    #[serde(default)]
    #[allow(dead_code)]
    pub timestamp: Option<String>,
}

impl SpendRecord {
    pub fn to_spend(&self) -> Result<PrivacySpend> {
        let kind = match self.kind.as_str() {
            "dp" => SpendKind::ApproxDp,
            "zcdp" => SpendKind::Zcdp,
            other => bail!("record {}: unknown kind {other:?} (expected \"dp\" or \"zcdp\")", self.index),
        };
        PrivacySpend::new(kind, self.epsilon, self.delta)
            .with_context(|| format!("record {}: invalid spend", self.index))
    }
}

/// Parses and validates a JSONL ledger, folding it into a composition state.
///
/// Indices must start at 1 and increase strictly. Blank lines are skipped.
pub fn ingest(path: &Path) -> Result<(CompositionState, Vec<PrivacySpend>)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read ledger {}", path.display()))?;
    let mut state = CompositionState::new();
    let mut spends = Vec::new();
    let mut last_index = 0u64;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: SpendRecord = serde_json::from_str(line)
            .with_context(|| format!("line {lineno}: malformed ledger record"))?;
        if last_index == 0 && record.index != 1 {
            bail!("line {lineno}: ledger must start at index 1, got {}", record.index);
        }
        if last_index > 0 && record.index <= last_index {
            bail!(
                "line {lineno}: non-monotone index {} after {last_index}",
                record.index
            );
        }
        last_index = record.index;
        let spend = record.to_spend()?;
        state = state
            .append(&spend)
            .with_context(|| format!("record {}: rejected by the accountant", record.index))?;
        spends.push(spend);
    }
    Ok((state, spends))
}
