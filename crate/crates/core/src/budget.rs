//! Keyed budget data, data versions and actuals ingestion.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::model::{CostCentreId, DepartmentId, PrincipalId, RoundId, SectionId, PERIODS};

/// Amounts are integer minor currency units (cents).
pub type Cents = i64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BudgetKey {
    pub round_id: RoundId,
    pub data_version: u32,
    pub cost_centre_id: CostCentreId,
    pub section_id: SectionId,
    pub line_item: String,
    pub period: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetCell {
    pub key: BudgetKey,
    pub amount: Cents,
    pub entered_by: PrincipalId,
    pub entered_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataVersionState {
    Editable,
    Frozen,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataVersion {
    pub round_id: RoundId,
    pub version: u32,
    pub state: DataVersionState,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActualsKey {
    pub cost_centre_id: CostCentreId,
    pub section_id: SectionId,
    pub line_item: String,
    pub period: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActualsRecord {
    pub fiscal_label: String,
    pub key: ActualsKey,
    pub amount: Cents,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceFilter {
    /// Explicitly requested departments; each must be in the caller's scope.
    pub departments: Option<BTreeSet<DepartmentId>>,
    pub cost_centres: Option<BTreeSet<CostCentreId>>,
    pub sections: Option<BTreeSet<SectionId>>,
    pub periods: Option<BTreeSet<u8>>,
}

impl SliceFilter {
    pub fn matches(&self, cost_centre: CostCentreId, section: SectionId, period: u8) -> bool {
        self.cost_centres.as_ref().is_none_or(|s| s.contains(&cost_centre))
            && self.sections.as_ref().is_none_or(|s| s.contains(&section))
            && self.periods.as_ref().is_none_or(|s| s.contains(&period))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportSummary {
    pub rows: usize,
    pub rejected: usize,
}

pub const ACTUALS_HEADER: [&str; 6] = ["fiscal", "cost_centre", "section", "line_item", "period", "amount_cents"];

/// Largest accepted magnitude of a single amount: 100 billion currency
/// units. Totals over tens of thousands of cells then stay within `i64`.
pub const MAX_AMOUNT: Cents = 10_000_000_000_000;

pub fn valid_amount(amount: Cents) -> bool {
    (-MAX_AMOUNT..=MAX_AMOUNT).contains(&amount)
}

pub fn valid_period(period: u8) -> bool {
    (1..=PERIODS).contains(&period)
}

/// Parses an actuals CSV. Every row must resolve; the first failure aborts
/// the whole file. Line numbers are physical (the header is line 1).
pub fn parse_actuals(
    fiscal_label: &str,
    source: &[u8],
    cost_centre_by_code: impl Fn(&str) -> Option<CostCentreId>,
    section_by_name: impl Fn(&str) -> Option<SectionId>,
) -> Result<Vec<ActualsRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    let mut records = reader.records();

    let malformed = |line: u64, message: String| EngineError::MalformedRow { line, message };

    match records.next() {
        Some(Ok(header)) if header.iter().eq(ACTUALS_HEADER) => {}
        Some(Ok(_)) => return Err(malformed(1, format!("header must be {}", ACTUALS_HEADER.join(",")))),
        Some(Err(e)) => return Err(malformed(1, e.to_string())),
        None => return Err(malformed(1, "missing header".into())),
    }

    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            malformed(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != ACTUALS_HEADER.len() {
            return Err(malformed(line, format!("expected 6 fields, found {}", record.len())));
        }
        let fiscal = &record[0];
        if fiscal != fiscal_label {
            return Err(malformed(line, format!("fiscal {fiscal:?} does not match {fiscal_label:?}")));
        }
        let code = record[1].trim();
        let cost_centre_id = cost_centre_by_code(code).ok_or_else(|| EngineError::UnknownCostCentre {
            line,
            code: code.to_string(),
        })?;
        let section_id = section_by_name(&record[2]).ok_or_else(|| malformed(line, format!("unknown section {:?}", &record[2])))?;
        let line_item = record[3].to_string();
        if line_item.is_empty() || line_item.chars().any(char::is_control) {
            return Err(malformed(line, "invalid line item".into()));
        }
        let period: u8 = record[4]
            .trim()
            .parse()
            .ok()
            .filter(|p| valid_period(*p))
            .ok_or_else(|| malformed(line, format!("period {:?} not in 1..=12", &record[4])))?;
        let amount: Cents = record[5]
            .trim()
            .parse()
            .ok()
            .filter(|a| valid_amount(*a))
            .ok_or_else(|| malformed(line, format!("amount {:?} is not an integer within range", &record[5])))?;
        let key = ActualsKey {
            cost_centre_id,
            section_id,
            line_item,
            period,
        };
        if !seen.insert(key.clone()) {
            return Err(malformed(line, "duplicate key".into()));
        }
        rows.push(ActualsRecord {
            fiscal_label: fiscal_label.to_string(),
            key,
            amount,
        });
    }
    Ok(rows)
}

/// One row of a slice export, already resolved to display codes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExportRow {
    pub cost_centre: String,
    pub section: String,
    pub line_item: String,
    pub period: u8,
    pub amount_cents: Cents,
}

/// Slice export: the actuals column layout plus `data_version`. The
/// `fiscal` column carries the round label.
pub fn write_slice_csv(round_label: &str, data_version: u32, rows: &[ExportRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = ACTUALS_HEADER.to_vec();
    header.push("data_version");
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        w.write_record([
            round_label,
            &r.cost_centre,
            &r.section,
            &r.line_item,
            &r.period.to_string(),
            &r.amount_cents.to_string(),
            &data_version.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Sum of amounts; exact in integers.
pub fn total<'a>(cells: impl IntoIterator<Item = &'a BudgetCell>) -> Cents {
    cells.into_iter().map(|c| c.amount).sum()
}

pub(crate) type CellMap = BTreeMap<BudgetKey, BudgetCell>;
