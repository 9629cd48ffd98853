use thiserror::Error;

use crate::access::{Action, ReasonCode};
use crate::model::PrincipalId;
use crate::readiness::Blocker;

pub type Result<T, E = EngineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("unknown principal {0}")]
    UnknownPrincipal(PrincipalId),
    #[error("authentication failed")]
    AuthenticationFailed,
    #[error("{action} on {target} denied: {reason}")]
    Denied {
        action: Action,
        target: String,
        reason: ReasonCode,
    },
    #[error("cost centre code {0} already exists")]
    DuplicateCode(String),
    #[error("{0} already exists")]
    Duplicate(String),
    #[error("a round is already open")]
    RoundAlreadyOpen,
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("template already has a change in flight")]
    InFlightExists,
    #[error("template has no live version")]
    NoLiveVersion,
    #[error("no live template to seed from")]
    NoLiveTemplate,
    #[error("unknown template {0}")]
    UnknownTemplate(String),
    #[error("unknown version {0}")]
    UnknownVersion(String),
    #[error("unknown round {0}")]
    UnknownRound(String),
    #[error("unknown grant {0}")]
    UnknownGrant(String),
    #[error("unknown report {0}")]
    UnknownReport(String),
    #[error("unknown department {0}")]
    UnknownDepartment(String),
    #[error("unknown key component: {0}")]
    UnknownKeyComponent(String),
    #[error("data version is frozen")]
    VersionFrozen,
    #[error("round is not open for entry")]
    RoundNotOpen,
    #[error("grant scope must name at least one department")]
    InvalidScope,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid template document: {0}")]
    InvalidDocument(String),
    #[error("malformed row at line {line}: {message}")]
    MalformedRow { line: u64, message: String },
    #[error("unknown cost centre {code} at line {line}")]
    UnknownCostCentre { line: u64, code: String },
    #[error("consolidation gate blocked by {} section(s)", blocking.len())]
    GateBlocked { blocking: Vec<Blocker> },
    #[error("no comparator data: {0}")]
    UnknownComparator(String),
    #[error("store corrupt: first bad record {first_bad_seq}")]
    StoreCorrupt { first_bad_seq: u64 },
    #[error("storage failure: {0}")]
    Storage(String),
}

impl EngineError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::UnknownPrincipal(_) => "UNKNOWN_PRINCIPAL",
            EngineError::AuthenticationFailed => "AUTHENTICATION_FAILED",
            EngineError::Denied { reason, .. } => match reason {
                ReasonCode::SegregationViolation => "SEGREGATION_VIOLATION",
                _ => "PERMISSION_DENIED",
            },
            EngineError::DuplicateCode(_) => "DUPLICATE_CODE",
            EngineError::Duplicate(_) => "DUPLICATE",
            EngineError::RoundAlreadyOpen => "ROUND_ALREADY_OPEN",
            EngineError::InvalidState(_) => "INVALID_STATE",
            EngineError::InFlightExists => "IN_FLIGHT_EXISTS",
            EngineError::NoLiveVersion => "NO_LIVE_VERSION",
            EngineError::NoLiveTemplate => "NO_LIVE_TEMPLATE",
            EngineError::UnknownTemplate(_) => "UNKNOWN_TEMPLATE",
            EngineError::UnknownVersion(_) => "UNKNOWN_VERSION",
            EngineError::UnknownRound(_) => "UNKNOWN_ROUND",
            EngineError::UnknownGrant(_) => "UNKNOWN_GRANT",
            EngineError::UnknownReport(_) => "UNKNOWN_REPORT",
            EngineError::UnknownDepartment(_) => "UNKNOWN_DEPARTMENT",
            EngineError::UnknownKeyComponent(_) => "UNKNOWN_KEY_COMPONENT",
            EngineError::VersionFrozen => "VERSION_FROZEN",
            EngineError::RoundNotOpen => "ROUND_NOT_OPEN",
            EngineError::InvalidScope => "INVALID_SCOPE",
            EngineError::InvalidInput(_) => "INVALID_INPUT",
            EngineError::InvalidDocument(_) => "INVALID_DOCUMENT",
            EngineError::MalformedRow { .. } => "MALFORMED_ROW",
            EngineError::UnknownCostCentre { .. } => "UNKNOWN_COST_CENTRE",
            EngineError::GateBlocked { .. } => "GATE_BLOCKED",
            EngineError::UnknownComparator(_) => "UNKNOWN_COMPARATOR",
            EngineError::StoreCorrupt { .. } => "STORE_CORRUPT",
            EngineError::Storage(_) => "STORAGE",
        }
    }

    pub fn is_denial(&self) -> bool {
        matches!(self, EngineError::Denied { .. })
    }

    /// Detail text written to the audit record for a failed call.
    pub(crate) fn audit_detail(&self) -> String {
        match self {
            EngineError::Denied { reason, .. } => reason.code().to_string(),
            other => format!("{}: {}", other.code(), other),
        }
    }
}

impl From<std::io::Error> for EngineError {
    fn from(e: std::io::Error) -> Self {
        EngineError::Storage(e.to_string())
    }
}
