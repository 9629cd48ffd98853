//! Consolidation reports, KPI comparisons and the stamped CSV export.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::budget::Cents;
use crate::model::{DepartmentId, PrincipalId, ReportId, RoundId};
use crate::readiness::Blocker;

pub const REPORT_HEADER: &str = "scope_hash,section,line_item,period,amount_cents";
pub const STAMP_PREFIX: &str = "#stamp,";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TotalKey {
    pub section: String,
    pub line_item: String,
    pub period: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalRow {
    pub section: String,
    pub line_item: String,
    pub period: u8,
    pub amount_cents: Cents,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostCentreTotals {
    pub cost_centre: String,
    pub rows: Vec<TotalRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsolidationReport {
    pub id: ReportId,
    pub round_id: RoundId,
    pub data_version: u32,
    pub scope: BTreeSet<DepartmentId>,
    pub provisional: bool,
    /// Gate offenders at generation time; empty unless provisional.
    pub blocking: Vec<Blocker>,
    pub totals: Vec<TotalRow>,
    pub by_cost_centre: Vec<CostCentreTotals>,
    pub generated_by: PrincipalId,
    pub generated_at: DateTime<Utc>,
    pub verification_stamp: String,
}

fn rows_of(map: &BTreeMap<TotalKey, Cents>) -> Vec<TotalRow> {
    map.iter()
        .map(|(k, v)| TotalRow {
            section: k.section.clone(),
            line_item: k.line_item.clone(),
            period: k.period,
            amount_cents: *v,
        })
        .collect()
}

/// Accumulates per cost centre; totals are the column-wise sum.
#[derive(Debug, Default)]
pub struct Accumulator {
    by_cost_centre: BTreeMap<String, BTreeMap<TotalKey, Cents>>,
}

impl Accumulator {
    pub fn add(&mut self, cost_centre: &str, key: TotalKey, amount: Cents) {
        *self
            .by_cost_centre
            .entry(cost_centre.to_string())
            .or_default()
            .entry(key)
            .or_insert(0) += amount;
    }

    pub fn finish(self) -> (Vec<TotalRow>, Vec<CostCentreTotals>) {
        let mut totals: BTreeMap<TotalKey, Cents> = BTreeMap::new();
        for rows in self.by_cost_centre.values() {
            for (k, v) in rows {
                *totals.entry(k.clone()).or_insert(0) += v;
            }
        }
        let by_cc = self
            .by_cost_centre
            .iter()
            .map(|(cc, rows)| CostCentreTotals {
                cost_centre: cc.clone(),
                rows: rows_of(rows),
            })
            .collect();
        (rows_of(&totals), by_cc)
    }
}

/// Hex SHA-256 of the sorted department ids joined by 0x1F.
pub fn scope_hash(scope: &BTreeSet<DepartmentId>) -> String {
    let joined: Vec<&str> = scope.iter().map(|d| d.as_str()).collect();
    hex::encode(Sha256::digest(joined.join("\u{1f}").as_bytes()))
}

/// Header plus one row per total; the payload the stamp covers.
pub fn report_body(scope: &BTreeSet<DepartmentId>, totals: &[TotalRow]) -> Vec<u8> {
    let hash = scope_hash(scope);
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(REPORT_HEADER.split(',')).expect("in-memory write");
    for t in totals {
        w.write_record([
            hash.as_str(),
            &t.section,
            &t.line_item,
            &t.period.to_string(),
            &t.amount_cents.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn stamp(body: &[u8]) -> String {
    hex::encode(Sha256::digest(body))
}

/// Body followed by the `#stamp,<hex>` trailer line.
pub fn export_csv(report: &ConsolidationReport) -> Vec<u8> {
    let mut out = report_body(&report.scope, &report.totals);
    out.extend_from_slice(STAMP_PREFIX.as_bytes());
    out.extend_from_slice(report.verification_stamp.as_bytes());
    out.push(b'\n');
    out
}

/// Recomputes the stamp over an exported file's body and compares it to
/// the trailer.
pub fn verify_export(bytes: &[u8]) -> bool {
    let text = match std::str::from_utf8(bytes) {
        Ok(t) => t,
        Err(_) => return false,
    };
    let trimmed = text.strip_suffix('\n').unwrap_or(text);
    let Some(idx) = trimmed.rfind('\n') else {
        return false;
    };
    let (body, trailer) = (&trimmed[..=idx], &trimmed[idx + 1..]);
    match trailer.strip_prefix(STAMP_PREFIX) {
        Some(hex) => stamp(body.as_bytes()) == hex,
        None => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "fiscal_label")]
pub enum Comparator {
    PriorDataVersion,
    PriorRound,
    Actuals(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiLine {
    pub section: String,
    pub line_item: String,
    pub current: Cents,
    pub comparator_value: Cents,
    pub variance: Cents,
    /// `variance / comparator_value`; absent when the comparator is zero.
    pub variance_pct: Option<f64>,
}

impl KpiLine {
    pub fn new(section: String, line_item: String, current: Cents, comparator_value: Cents) -> Self {
        let variance = current - comparator_value;
        let variance_pct = (comparator_value != 0).then(|| variance as f64 / comparator_value as f64);
        Self {
            section,
            line_item,
            current,
            comparator_value,
            variance,
            variance_pct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    pub round_id: RoundId,
    pub data_version: u32,
    pub scope: BTreeSet<DepartmentId>,
    pub comparator: Comparator,
    pub lines: Vec<KpiLine>,
}

/// Joins current and comparator sums per `(section, line item)`.
pub fn kpi_lines(
    current: &BTreeMap<(String, String), Cents>,
    comparator: &BTreeMap<(String, String), Cents>,
) -> Vec<KpiLine> {
    let keys: BTreeSet<&(String, String)> = current.keys().chain(comparator.keys()).collect();
    keys.into_iter()
        .map(|k| {
            KpiLine::new(
                k.0.clone(),
                k.1.clone(),
                current.get(k).copied().unwrap_or(0),
                comparator.get(k).copied().unwrap_or(0),
            )
        })
        .collect()
}
