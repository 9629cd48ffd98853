//! Authorization: role → action permissions and departmental scoping.
//!
//! Decisions are pure functions of committed grant state. Absence of a
//! grant is denial. An action on a set of departments is allowed when the
//! grants whose role permits the action jointly cover the set.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::model::{DepartmentId, PrincipalId, Role, Scope};
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    ReadBudget,
    WriteBudget,
    SetStatus,
    CopyToWip,
    EditStructure,
    SubmitForAudit,
    AuditDecide,
    ReleaseLive,
    Consolidate,
    ConsolidateProvisional,
    ImportActuals,
    AdminRegistry,
    ReadAuditLog,
    /// Reading registry, round and template reference data.
    ReadReference,
}

impl Action {
    pub const ALL: [Action; 14] = [
        Action::ReadBudget,
        Action::WriteBudget,
        Action::SetStatus,
        Action::CopyToWip,
        Action::EditStructure,
        Action::SubmitForAudit,
        Action::AuditDecide,
        Action::ReleaseLive,
        Action::Consolidate,
        Action::ConsolidateProvisional,
        Action::ImportActuals,
        Action::AdminRegistry,
        Action::ReadAuditLog,
        Action::ReadReference,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::ReadBudget => "ReadBudget",
            Action::WriteBudget => "WriteBudget",
            Action::SetStatus => "SetStatus",
            Action::CopyToWip => "CopyToWip",
            Action::EditStructure => "EditStructure",
            Action::SubmitForAudit => "SubmitForAudit",
            Action::AuditDecide => "AuditDecide",
            Action::ReleaseLive => "ReleaseLive",
            Action::Consolidate => "Consolidate",
            Action::ConsolidateProvisional => "ConsolidateProvisional",
            Action::ImportActuals => "ImportActuals",
            Action::AdminRegistry => "AdminRegistry",
            Action::ReadAuditLog => "ReadAuditLog",
            Action::ReadReference => "ReadReference",
        }
    }

    pub fn parse(s: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.name() == s)
    }

    /// Steps of the structure change-control workflow.
    pub fn is_workflow(self) -> bool {
        matches!(
            self,
            Action::CopyToWip
                | Action::EditStructure
                | Action::SubmitForAudit
                | Action::AuditDecide
                | Action::ReleaseLive
        )
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The role → action table.
pub fn role_permits(role: Role, action: Action) -> bool {
    use Action::*;
    if action == ReadReference {
        return true;
    }
    match role {
        Role::User => matches!(action, ReadBudget | WriteBudget | SetStatus),
        Role::Editor => matches!(action, EditStructure | SubmitForAudit),
        Role::Auditor => matches!(action, AuditDecide | ReadAuditLog),
        Role::Owner => matches!(
            action,
            CopyToWip | ReleaseLive | ReadBudget | SetStatus | Consolidate | ConsolidateProvisional
        ),
        Role::SeniorManager => matches!(action, ReadBudget | Consolidate | ConsolidateProvisional),
        Role::Admin => matches!(action, AdminRegistry | ImportActuals | ReadAuditLog | SetStatus),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReasonCode {
    /// The principal holds no grants at all.
    NoGrant,
    /// No held role permits the action.
    RoleMissing,
    /// A change-control role is held, but not the one this step requires.
    SegregationRole,
    /// The resource lies outside the principal's departments.
    OutOfScope,
    InactivePrincipal,
    /// Person-per-version segregation: editor auditing, or auditor releasing.
    SegregationViolation,
    /// Only Owner or Admin may set or clear NotApplicable.
    NotApplicableReserved,
}

impl ReasonCode {
    pub fn code(self) -> &'static str {
        match self {
            ReasonCode::NoGrant => "NO_GRANT",
            ReasonCode::RoleMissing => "ROLE_MISSING",
            ReasonCode::SegregationRole => "SEGREGATION_ROLE",
            ReasonCode::OutOfScope => "OUT_OF_SCOPE",
            ReasonCode::InactivePrincipal => "INACTIVE_PRINCIPAL",
            ReasonCode::SegregationViolation => "SEGREGATION_VIOLATION",
            ReasonCode::NotApplicableReserved => "NOT_APPLICABLE_RESERVED",
        }
    }

    fn message(self) -> &'static str {
        match self {
            ReasonCode::NoGrant => "principal holds no grants",
            ReasonCode::RoleMissing => "no held role permits this action",
            ReasonCode::SegregationRole => "held change-control role may not perform this step",
            ReasonCode::OutOfScope => "resource is outside the principal's departments",
            ReasonCode::InactivePrincipal => "principal is inactive",
            ReasonCode::SegregationViolation => "same person may not hold two hats on one version",
            ReasonCode::NotApplicableReserved => "only Owner or Admin may mark sections not applicable",
        }
    }
}

impl fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.code(), self.message())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub allowed: bool,
    pub reason: Option<ReasonCode>,
}

impl Decision {
    fn allow() -> Self {
        Self {
            allowed: true,
            reason: None,
        }
    }

    fn deny(reason: ReasonCode) -> Self {
        Self {
            allowed: false,
            reason: Some(reason),
        }
    }
}

/// Decides whether `principal` may perform `action`, optionally on a set
/// of departments.
pub fn authorize(
    state: &State,
    principal: &PrincipalId,
    action: Action,
    resource_scope: Option<&BTreeSet<DepartmentId>>,
) -> Result<Decision> {
    let p = state
        .principals
        .get(principal)
        .ok_or_else(|| EngineError::UnknownPrincipal(principal.clone()))?;
    if !p.active {
        return Ok(Decision::deny(ReasonCode::InactivePrincipal));
    }
    let roles = held_roles(state, principal);
    if roles.is_empty() {
        return Ok(Decision::deny(ReasonCode::NoGrant));
    }
    if !roles.iter().any(|r| role_permits(*r, action)) {
        let reason = if action.is_workflow() && roles.iter().any(|r| r.is_workflow_role()) {
            ReasonCode::SegregationRole
        } else {
            ReasonCode::RoleMissing
        };
        return Ok(Decision::deny(reason));
    }
    if let Some(wanted) = resource_scope {
        if !wanted.is_subset(&permitted_departments(state, principal, action)) {
            return Ok(Decision::deny(ReasonCode::OutOfScope));
        }
    }
    Ok(Decision::allow())
}

pub fn held_roles(state: &State, principal: &PrincipalId) -> BTreeSet<Role> {
    state
        .grants
        .values()
        .filter(|g| &g.principal_id == principal)
        .map(|g| g.role)
        .collect()
}

/// Whether the principal (active) holds `role` under any scope.
pub fn holds_role(state: &State, principal: &PrincipalId, role: Role) -> bool {
    state.principals.get(principal).is_some_and(|p| p.active)
        && state
            .grants
            .values()
            .any(|g| &g.principal_id == principal && g.role == role)
}

/// Departments where `action` is permitted: the union of the scopes of
/// those grants whose role permits it. A department reached only through
/// some other role's grant does not count.
pub fn permitted_departments(state: &State, principal: &PrincipalId, action: Action) -> BTreeSet<DepartmentId> {
    if !state.principals.get(principal).is_some_and(|p| p.active) {
        return BTreeSet::new();
    }
    let mut out = BTreeSet::new();
    for g in state.grants.values() {
        if &g.principal_id != principal || !role_permits(g.role, action) {
            continue;
        }
        match &g.scope {
            Scope::AllDepartments => return state.departments.keys().cloned().collect(),
            Scope::Departments(set) => out.extend(set.iter().filter(|d| state.departments.contains_key(d)).cloned()),
        }
    }
    out
}

/// Union of every grant's departmental scope. `AllDepartments` expands to
/// the registry as it stands now.
pub fn visible_departments(state: &State, principal: &PrincipalId) -> Result<BTreeSet<DepartmentId>> {
    let p = state
        .principals
        .get(principal)
        .ok_or_else(|| EngineError::UnknownPrincipal(principal.clone()))?;
    if !p.active {
        return Ok(BTreeSet::new());
    }
    let mut out = BTreeSet::new();
    for g in state.grants.values().filter(|g| &g.principal_id == principal) {
        match &g.scope {
            Scope::AllDepartments => return Ok(state.departments.keys().cloned().collect()),
            Scope::Departments(set) => {
                out.extend(set.iter().filter(|d| state.departments.contains_key(d)).cloned())
            }
        }
    }
    Ok(out)
}
