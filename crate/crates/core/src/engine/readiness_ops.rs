use std::collections::BTreeSet;

use super::budget_ops::{existing_version, writable_version};
use super::{denied, one_dept, require, Effect, Engine};
use crate::access::{self, Action, ReasonCode};
use crate::error::{EngineError, Result};
use crate::model::*;
use crate::readiness::*;
use crate::state::{Mutation, State};

fn status_of(s: &State, round_id: RoundId, version: u32, cc: CostCentreId, section: SectionId) -> Status {
    let key = StatusKey {
        round_id,
        data_version: version,
        cost_centre_id: cc,
        section_id: section,
    };
    s.statuses.get(&key).map_or(Status::NotStarted, |st| st.status)
}

/// Every unsettled (cost centre × section) pair among cost centres whose
/// department is in `scope`.
pub(crate) fn gate(s: &State, round_id: RoundId, version: u32, scope: &BTreeSet<DepartmentId>) -> GateResult {
    let mut blocking = Vec::new();
    for cc in s.cost_centres.values().filter(|c| scope.contains(&c.department_id)) {
        for sec in s.sections.values() {
            let status = status_of(s, round_id, version, cc.id, sec.id);
            if !status.is_settled() {
                blocking.push(Blocker {
                    cost_centre_id: cc.id,
                    cost_centre: cc.label(),
                    section_id: sec.id,
                    section: sec.name.clone(),
                    status,
                });
            }
        }
    }
    GateResult::from_blocking(blocking)
}

pub(crate) fn check_departments(s: &State, scope: &BTreeSet<DepartmentId>) -> Result<()> {
    match scope.iter().find(|d| !s.departments.contains_key(d)) {
        Some(d) => Err(EngineError::UnknownDepartment(d.to_string())),
        None => Ok(()),
    }
}

impl Engine {
    /// Declares readiness of one pair. NotApplicable encodes structure, so
    /// setting or clearing it needs Owner or Admin.
    pub fn set_status(
        &mut self,
        actor: &PrincipalId,
        round_id: RoundId,
        data_version: u32,
        cost_centre: CostCentreId,
        section: SectionId,
        status: Status,
    ) -> Result<SectionStatus> {
        let code = self.state.cost_centres.get(&cost_centre).map(|c| c.code.clone()).unwrap_or_else(|| cost_centre.to_string());
        let target = format!("status/{round_id}/v{data_version}/{code}/{section}");
        self.run(actor, Action::SetStatus, target.clone(), |s, now| {
            require(s, actor, Action::SetStatus, None, &target)?;
            let dept = s
                .department_of(cost_centre)
                .ok_or_else(|| EngineError::UnknownKeyComponent(format!("cost centre {cost_centre}")))?;
            require(s, actor, Action::SetStatus, Some(&one_dept(dept)), &target)?;
            if !s.sections.contains_key(&section) {
                return Err(EngineError::UnknownKeyComponent(format!("section {section}")));
            }
            let old = status_of(s, round_id, data_version, cost_centre, section);
            let structural = status == Status::NotApplicable || old == Status::NotApplicable;
            if structural && !access::holds_role(s, actor, Role::Owner) && !access::holds_role(s, actor, Role::Admin) {
                return Err(denied(Action::SetStatus, &target, ReasonCode::NotApplicableReserved));
            }
            writable_version(s, round_id, data_version)?;
            let st = SectionStatus {
                key: StatusKey {
                    round_id,
                    data_version,
                    cost_centre_id: cost_centre,
                    section_id: section,
                },
                status,
                set_by: actor.clone(),
                set_at: now,
            };
            let detail = format!("old={} new={}", old.glyph(), status.glyph());
            Ok(Effect::new(st.clone(), vec![Mutation::PutStatus(st)], detail))
        })
    }

    /// Completion matrix over the caller's visible cost centres, in
    /// registration order, one column per section.
    pub fn status_matrix(&self, actor: &PrincipalId, round_id: RoundId, data_version: u32) -> Result<StatusMatrix> {
        let s = &self.state;
        require(s, actor, Action::ReadReference, None, &format!("status/{round_id}/v{data_version}"))?;
        existing_version(s, round_id, data_version)?;
        let visible = access::visible_departments(s, actor)?;
        let rows = s
            .cost_centres
            .values()
            .filter(|c| visible.contains(&c.department_id))
            .map(|c| MatrixRow {
                cost_centre_id: c.id,
                label: c.label(),
                statuses: s
                    .sections
                    .keys()
                    .map(|sec| status_of(s, round_id, data_version, c.id, *sec))
                    .collect(),
            })
            .collect();
        Ok(StatusMatrix {
            round_id,
            data_version,
            sections: s.sections.values().map(|x| x.name.clone()).collect(),
            rows,
        })
    }

    /// Readiness gate over a set of departments the caller can see.
    pub fn gate_check(
        &self,
        actor: &PrincipalId,
        round_id: RoundId,
        data_version: u32,
        scope: &BTreeSet<DepartmentId>,
    ) -> Result<GateResult> {
        let s = &self.state;
        require(s, actor, Action::ReadReference, Some(scope), &format!("status/{round_id}/v{data_version}/gate"))?;
        check_departments(s, scope)?;
        existing_version(s, round_id, data_version)?;
        Ok(gate(s, round_id, data_version, scope))
    }
}
