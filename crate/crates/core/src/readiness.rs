//! Per (cost centre × section) readiness and the consolidation gate.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::model::{CostCentreId, PrincipalId, RoundId, SectionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    NotStarted,
    InProgress,
    Completed,
    NotApplicable,
}

impl Status {
    pub const ALL: [Status; 4] = [
        Status::NotStarted,
        Status::InProgress,
        Status::Completed,
        Status::NotApplicable,
    ];

    pub fn glyph(self) -> &'static str {
        match self {
            Status::NotStarted => "NS",
            Status::InProgress => "IP",
            Status::Completed => "C",
            Status::NotApplicable => "X",
        }
    }

    pub fn from_glyph(g: &str) -> Option<Status> {
        Status::ALL.into_iter().find(|s| s.glyph() == g)
    }

    /// Satisfies the consolidation gate.
    pub fn is_settled(self) -> bool {
        matches!(self, Status::Completed | Status::NotApplicable)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StatusKey {
    pub round_id: RoundId,
    pub data_version: u32,
    pub cost_centre_id: CostCentreId,
    pub section_id: SectionId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionStatus {
    pub key: StatusKey,
    pub status: Status,
    pub set_by: PrincipalId,
    pub set_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blocker {
    pub cost_centre_id: CostCentreId,
    pub cost_centre: String,
    pub section_id: SectionId,
    pub section: String,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateResult {
    pub ready: bool,
    pub blocking: Vec<Blocker>,
}

impl GateResult {
    pub fn from_blocking(blocking: Vec<Blocker>) -> Self {
        Self {
            ready: blocking.is_empty(),
            blocking,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub cost_centre_id: CostCentreId,
    pub label: String,
    pub statuses: Vec<Status>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusMatrix {
    pub round_id: RoundId,
    pub data_version: u32,
    pub sections: Vec<String>,
    pub rows: Vec<MatrixRow>,
}

impl StatusMatrix {
    /// First column is the cost-centre label, then one glyph per section.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["Cost Centre".to_string()];
        header.extend(self.sections.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![row.label.as_str()];
            rec.extend(row.statuses.iter().map(|s| s.glyph()));
            w.write_record(&rec).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn row(&self, label: &str) -> Option<&MatrixRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn has_unsettled(&self) -> bool {
        self.rows.iter().any(|r| r.statuses.iter().any(|s| !s.is_settled()))
    }
}
