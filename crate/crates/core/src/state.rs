//! Committed engine state and the mutations that change it.
//!
//! Every commit is a list of [`Mutation`]s plus one sealed audit record.
//! Replaying the journal applies the same mutations in the same order, so
//! the in-memory state is always a pure function of the committed frames.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::audit::AuditRecord;
use crate::budget::{ActualsKey, BudgetCell, BudgetKey, CellMap, Cents, DataVersion, DataVersionState};
use crate::consolidation::ConsolidationReport;
use crate::model::*;
use crate::readiness::{SectionStatus, StatusKey};
use crate::template::{Template, TemplateVersion};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionToken {
    /// Hex SHA-256 of the bearer secret.
    pub token_hash: String,
    pub principal_id: PrincipalId,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub principals: BTreeMap<PrincipalId, Principal>,
    pub grants: BTreeMap<GrantId, RoleGrant>,
    pub grant_seq: u64,
    pub departments: BTreeMap<DepartmentId, Department>,
    pub cost_centres: BTreeMap<CostCentreId, CostCentre>,
    pub sections: BTreeMap<SectionId, Section>,
    /// `(cost centre, section)` pairs seeded as NotApplicable in new rounds.
    pub not_applicable: BTreeSet<(CostCentreId, SectionId)>,
    pub rounds: BTreeMap<RoundId, BudgetRound>,
    pub templates: BTreeMap<TemplateId, Template>,
    pub versions: BTreeMap<VersionId, TemplateVersion>,
    pub data_versions: BTreeMap<(RoundId, u32), DataVersion>,
    pub cells: CellMap,
    pub statuses: BTreeMap<StatusKey, SectionStatus>,
    pub actuals: BTreeMap<String, BTreeMap<ActualsKey, Cents>>,
    pub tokens: BTreeMap<String, SessionToken>,
    pub reports: BTreeMap<ReportId, ConsolidationReport>,
    pub audit: Vec<AuditRecord>,
    pub commit: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Mutation {
    PutPrincipal(Principal),
    PutGrant(RoleGrant),
    RemoveGrant(GrantId),
    PutDepartment(Department),
    PutCostCentre(CostCentre),
    PutSection(Section),
    SetApplicable {
        cost_centre_id: CostCentreId,
        section_id: SectionId,
        applicable: bool,
    },
    PutRound(BudgetRound),
    PutTemplate(Template),
    PutVersion(Box<TemplateVersion>),
    PutDataVersion(DataVersion),
    PutCell(BudgetCell),
    PutStatus(SectionStatus),
    /// Copies every cell and status of one data version into another.
    CopyDataVersion {
        round_id: RoundId,
        from: u32,
        to: u32,
    },
    ReplaceActuals {
        fiscal_label: String,
        rows: Vec<(ActualsKey, Cents)>,
    },
    PutToken(SessionToken),
    PutReport(Box<ConsolidationReport>),
}

/// What a journal frame carries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Commit {
    pub commit: u64,
    pub mutations: Vec<Mutation>,
    pub audit: AuditRecord,
}

impl State {
    pub fn apply(&mut self, m: Mutation) {
        match m {
            Mutation::PutPrincipal(p) => {
                self.principals.insert(p.id.clone(), p);
            }
            Mutation::PutGrant(g) => {
                self.grant_seq = self.grant_seq.max(g.id.0);
                self.grants.insert(g.id, g);
            }
            Mutation::RemoveGrant(id) => {
                self.grants.remove(&id);
            }
            Mutation::PutDepartment(d) => {
                self.departments.insert(d.id.clone(), d);
            }
            Mutation::PutCostCentre(c) => {
                self.cost_centres.insert(c.id, c);
            }
            Mutation::PutSection(s) => {
                self.sections.insert(s.id, s);
            }
            Mutation::SetApplicable {
                cost_centre_id,
                section_id,
                applicable,
            } => {
                if applicable {
                    self.not_applicable.remove(&(cost_centre_id, section_id));
                } else {
                    self.not_applicable.insert((cost_centre_id, section_id));
                }
            }
            Mutation::PutRound(r) => {
                self.rounds.insert(r.id, r);
            }
            Mutation::PutTemplate(t) => {
                self.templates.insert(t.id, t);
            }
            Mutation::PutVersion(v) => {
                self.versions.insert(v.id, *v);
            }
            Mutation::PutDataVersion(d) => {
                self.data_versions.insert((d.round_id, d.version), d);
            }
            Mutation::PutCell(c) => {
                self.cells.insert(c.key.clone(), c);
            }
            Mutation::PutStatus(s) => {
                self.statuses.insert(s.key.clone(), s);
            }
            Mutation::CopyDataVersion { round_id, from, to } => {
                let cells: Vec<BudgetCell> = self
                    .cells_of(round_id, from)
                    .map(|c| {
                        let mut c = c.clone();
                        c.key.data_version = to;
                        c
                    })
                    .collect();
                for c in cells {
                    self.cells.insert(c.key.clone(), c);
                }
                let statuses: Vec<SectionStatus> = self
                    .statuses
                    .values()
                    .filter(|s| s.key.round_id == round_id && s.key.data_version == from)
                    .map(|s| {
                        let mut s = s.clone();
                        s.key.data_version = to;
                        s
                    })
                    .collect();
                for s in statuses {
                    self.statuses.insert(s.key.clone(), s);
                }
            }
            Mutation::ReplaceActuals { fiscal_label, rows } => {
                self.actuals.insert(fiscal_label, rows.into_iter().collect());
            }
            Mutation::PutToken(t) => {
                self.tokens.insert(t.token_hash.clone(), t);
            }
            Mutation::PutReport(r) => {
                self.reports.insert(r.id, *r);
            }
        }
    }

    pub fn cells_of(&self, round_id: RoundId, data_version: u32) -> impl Iterator<Item = &BudgetCell> {
        self.cells
            .range(version_range(round_id, data_version))
            .map(|(_, c)| c)
    }

    pub fn latest_data_version(&self, round_id: RoundId) -> Option<&DataVersion> {
        self.data_versions
            .range((round_id, 0)..=(round_id, u32::MAX))
            .next_back()
            .map(|(_, d)| d)
    }

    pub fn editable_version(&self, round_id: RoundId) -> Option<&DataVersion> {
        self.latest_data_version(round_id)
            .filter(|d| d.state == DataVersionState::Editable)
    }

    pub fn cost_centre_by_code(&self, code: &str) -> Option<&CostCentre> {
        self.cost_centres.values().find(|c| c.code == code)
    }

    pub fn section_by_name(&self, name: &str) -> Option<&Section> {
        self.sections.values().find(|s| s.name == name)
    }

    pub fn department_of(&self, cc: CostCentreId) -> Option<&DepartmentId> {
        self.cost_centres.get(&cc).map(|c| &c.department_id)
    }

    /// Grant ids are never reused, including after revocation.
    pub fn next_grant_id(&self) -> GrantId {
        GrantId(self.grant_seq + 1)
    }

    pub fn next_cost_centre_id(&self) -> CostCentreId {
        CostCentreId(self.cost_centres.keys().next_back().map_or(0, |c| c.0) + 1)
    }

    pub fn next_section_id(&self) -> SectionId {
        SectionId(self.sections.keys().next_back().map_or(0, |s| s.0) + 1)
    }

    pub fn next_round_id(&self) -> RoundId {
        RoundId(self.rounds.keys().next_back().map_or(0, |r| r.0) + 1)
    }

    pub fn next_template_id(&self) -> TemplateId {
        TemplateId(self.templates.keys().next_back().map_or(0, |t| t.0) + 1)
    }

    pub fn next_version_id(&self) -> VersionId {
        VersionId(self.versions.keys().next_back().map_or(0, |v| v.0) + 1)
    }

    pub fn next_report_id(&self) -> ReportId {
        ReportId(self.reports.keys().next_back().map_or(0, |r| r.0) + 1)
    }
}

fn version_range(round_id: RoundId, data_version: u32) -> std::ops::Range<BudgetKey> {
    let key = |round_id, data_version| BudgetKey {
        round_id,
        data_version,
        cost_centre_id: CostCentreId(0),
        section_id: SectionId(0),
        line_item: String::new(),
        period: 0,
    };
    let hi = match data_version.checked_add(1) {
        Some(next) => key(round_id, next),
        None => key(RoundId(round_id.0 + 1), 0),
    };
    key(round_id, data_version)..hi
}
