//! Governance engine for multi-user, spreadsheet-style budgeting.
//!
//! Budget figures live in a keyed store, separate from the template
//! structure that describes them. Structure changes go through a
//! role-segregated change-control workflow, data access is scoped to
//! departments, consolidation is gated on declared readiness, and every
//! action lands in a hash-chained audit log persisted in a single
//! journaled file.
//!
//! The [`Engine`] owns the committed [`State`] and the journal. Mutating
//! operations take `&mut self` and commit exactly one audit record per
//! call; reads take `&self`. [`SharedEngine`] wraps an engine for
//! concurrent use and records denied reads.

pub mod access;
pub mod audit;
pub mod budget;
pub mod clock;
pub mod consolidation;
pub mod demo;
mod engine;
pub mod error;
pub mod journal;
pub mod model;
pub mod readiness;
mod shared;
pub mod state;
pub mod template;

pub use access::{Action, Decision, ReasonCode};
pub use audit::{AuditFilter, AuditRecord, ChainVerdict, Outcome};
pub use clock::{Clock, ManualClock, SystemClock};
pub use engine::{verify_store_bytes, Engine, MintedToken, RoundSeed};
pub use error::{EngineError, Result};
pub use model::*;
pub use shared::SharedEngine;
pub use state::State;
