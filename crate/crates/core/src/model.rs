//! Reference data: principals, roles and grants, departments, cost
//! centres, sections and budgeting rounds.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }
    };
}

macro_rules! numeric_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

string_id!(
    /// Opaque principal identifier, e.g. `"alice"`.
    PrincipalId
);
string_id!(DepartmentId);
numeric_id!(CostCentreId);
numeric_id!(SectionId);
numeric_id!(RoundId);
numeric_id!(TemplateId);
numeric_id!(VersionId);
numeric_id!(GrantId);
numeric_id!(ReportId);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Principal {
    pub id: PrincipalId,
    pub display_name: String,
    pub active: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    User,
    Editor,
    Auditor,
    Owner,
    SeniorManager,
    Admin,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::User,
        Role::Editor,
        Role::Auditor,
        Role::Owner,
        Role::SeniorManager,
        Role::Admin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Role::User => "User",
            Role::Editor => "Editor",
            Role::Auditor => "Auditor",
            Role::Owner => "Owner",
            Role::SeniorManager => "SeniorManager",
            Role::Admin => "Admin",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.name().eq_ignore_ascii_case(s))
    }

    /// Roles that take part in the structure change-control workflow.
    pub fn is_workflow_role(self) -> bool {
        matches!(self, Role::Owner | Role::Editor | Role::Auditor)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Departmental reach of a grant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    AllDepartments,
    Departments(BTreeSet<DepartmentId>),
}

impl Scope {
    pub fn covers(&self, dept: &DepartmentId) -> bool {
        match self {
            Scope::AllDepartments => true,
            Scope::Departments(set) => set.contains(dept),
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::AllDepartments => f.write_str("*"),
            Scope::Departments(set) => {
                let ids: Vec<&str> = set.iter().map(|d| d.as_str()).collect();
                write!(f, "{{{}}}", ids.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleGrant {
    pub id: GrantId,
    pub principal_id: PrincipalId,
    pub role: Role,
    pub scope: Scope,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Department {
    pub id: DepartmentId,
    pub name: String,
    pub parent_manager: Option<PrincipalId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostCentre {
    pub id: CostCentreId,
    pub code: String,
    pub name: String,
    pub department_id: DepartmentId,
    pub dormant: bool,
}

impl CostCentre {
    /// Row label as printed on the status board, e.g. `110 Hesel Direct`.
    pub fn label(&self) -> String {
        format!("{} {}", self.code, self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub id: SectionId,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoundState {
    Open,
    UnderConsideration,
    Approved,
    Closed,
}

/// Monthly periods per round.
pub const PERIODS: u8 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetRound {
    pub id: RoundId,
    pub label: String,
    pub state: RoundState,
    pub cycle_number: u32,
    /// Data version handed to management when the round entered consideration.
    pub considered_version: Option<u32>,
    /// Data version that carried the approval.
    pub approved_version: Option<u32>,
    /// Live template version the line-item vocabulary was derived from.
    pub template_version: Option<VersionId>,
    /// Valid `(section, line item)` pairs for budget entry in this round.
    pub vocabulary: BTreeSet<(SectionId, String)>,
    pub opened_at: DateTime<Utc>,
}

impl BudgetRound {
    /// Data version whose figures represent the round's outcome.
    pub fn final_version(&self, latest: u32) -> u32 {
        self.approved_version.unwrap_or(latest)
    }
}

/// Rejects control characters in user-supplied text. Audit canonical
/// serialization and the line-oriented exports rely on this.
pub(crate) fn check_text(field: &str, value: &str) -> crate::Result<()> {
    if value.chars().any(char::is_control) {
        return Err(crate::EngineError::InvalidInput(format!(
            "{field} contains control characters"
        )));
    }
    Ok(())
}
