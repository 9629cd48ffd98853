use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Utc};

use crate::access::{self, Action, ReasonCode};
use crate::audit::{self, AuditDraft, AuditRecord, ChainVerdict, Outcome, GENESIS};
use crate::clock::Clock;
use crate::error::{EngineError, Result};
use crate::journal::{self, encode_frame, FileJournal, Journal};
use crate::model::{DepartmentId, PrincipalId};
use crate::state::{Commit, Mutation, State};

mod audit_ops;
mod budget_ops;
mod consolidation_ops;
mod readiness_ops;
mod registry;
mod rounds;
mod templates;

pub use registry::MintedToken;
pub use rounds::RoundSeed;

/// The governance engine: committed state plus the journal it is
/// rebuilt from.
pub struct Engine {
    state: State,
    journal: Journal,
    clock: Arc<dyn Clock>,
}

/// Result of an operation body: the value handed back to the caller, the
/// state changes to commit, and the audit detail text.
pub(crate) struct Effect<T> {
    value: T,
    mutations: Vec<Mutation>,
    detail: String,
}

impl<T> Effect<T> {
    fn new(value: T, mutations: Vec<Mutation>, detail: impl Into<String>) -> Self {
        Self {
            value,
            mutations,
            detail: detail.into(),
        }
    }
}

/// Checks `action` for `actor`, producing a `Denied` error on refusal.
pub(crate) fn require(
    state: &State,
    actor: &PrincipalId,
    action: Action,
    scope: Option<&BTreeSet<DepartmentId>>,
    target: &str,
) -> Result<()> {
    let decision = access::authorize(state, actor, action, scope)?;
    if decision.allowed {
        Ok(())
    } else {
        Err(denied(action, target, decision.reason.unwrap_or(ReasonCode::RoleMissing)))
    }
}

pub(crate) fn denied(action: Action, target: &str, reason: ReasonCode) -> EngineError {
    EngineError::Denied {
        action,
        target: target.to_string(),
        reason,
    }
}

pub(crate) fn one_dept(d: &DepartmentId) -> BTreeSet<DepartmentId> {
    BTreeSet::from([d.clone()])
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("commit", &self.state.commit)
            .field("store", &self.journal.path())
            .finish()
    }
}

impl Engine {
    /// An engine journaling to memory only.
    pub fn in_memory(clock: Arc<dyn Clock>) -> Self {
        Self {
            state: State::default(),
            journal: Journal::Memory(Vec::new()),
            clock,
        }
    }

    /// Opens (or creates) a store file, replaying every committed frame.
    /// A torn final frame is dropped; any other damage, or a broken audit
    /// chain, yields `StoreCorrupt`.
    pub fn open(path: &Path, sync: bool, clock: Arc<dyn Clock>) -> Result<Self> {
        let (mut file, bytes) = FileJournal::open(path, sync)?;
        let (state, committed_len) = replay(&bytes)?;
        file.truncate_to(committed_len as u64)?;
        Ok(Self {
            state,
            journal: Journal::File(file),
            clock,
        })
    }

    /// Rebuilds an in-memory engine from raw store bytes.
    pub fn from_bytes(bytes: &[u8], clock: Arc<dyn Clock>) -> Result<Self> {
        let (state, committed_len) = replay(bytes)?;
        Ok(Self {
            state,
            journal: Journal::Memory(bytes[..committed_len].to_vec()),
            clock,
        })
    }

    /// Independent in-memory copy of this engine, journal included.
    pub fn fork(&self) -> Result<Self> {
        Ok(Self {
            state: self.state.clone(),
            journal: Journal::Memory(self.journal.contents()?),
            clock: self.clock.clone(),
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    pub fn journal_bytes(&self) -> Result<Vec<u8>> {
        Ok(self.journal.contents()?)
    }

    pub fn verify_chain(&self) -> ChainVerdict {
        audit::verify_chain(&self.state.audit)
    }

    /// Seals a record and writes the frame; state changes only after the
    /// frame is durable.
    fn commit(&mut self, draft: AuditDraft, mutations: Vec<Mutation>, now: DateTime<Utc>) -> Result<u64> {
        let seq = self.state.commit + 1;
        let prev = self.state.audit.last().map(|r| r.this_hash).unwrap_or(GENESIS);
        let record = AuditRecord::seal(draft, seq, now, prev);
        let commit = Commit {
            commit: seq,
            mutations,
            audit: record,
        };
        let payload = serde_json::to_vec(&commit).map_err(|e| EngineError::Storage(e.to_string()))?;
        self.journal.append(&encode_frame(seq, &payload))?;
        apply_commit(&mut self.state, commit);
        Ok(seq)
    }

    /// Runs one mutating operation: exactly one audit record is committed,
    /// Ok with the operation's changes, or Denied / Error with none.
    pub(crate) fn run<T>(
        &mut self,
        actor: &PrincipalId,
        action: Action,
        target: impl Into<String>,
        op: impl FnOnce(&State, DateTime<Utc>) -> Result<Effect<T>>,
    ) -> Result<T> {
        if !self.state.principals.contains_key(actor) {
            return Err(EngineError::UnknownPrincipal(actor.clone()));
        }
        let target = target.into();
        let now = self.clock.now();
        let result = op(&self.state, now);
        let draft = |outcome, detail| AuditDraft {
            actor: actor.clone(),
            action,
            target: target.clone(),
            outcome,
            detail,
        };
        match result {
            Ok(effect) => {
                self.commit(draft(Outcome::Ok, effect.detail), effect.mutations, now)?;
                Ok(effect.value)
            }
            Err(err) => {
                let outcome = if err.is_denial() { Outcome::Denied } else { Outcome::Error };
                self.commit(draft(outcome, err.audit_detail()), Vec::new(), now)?;
                Err(err)
            }
        }
    }

    /// Records a denial raised by a read-only operation.
    pub fn record_denial(&mut self, actor: &PrincipalId, err: &EngineError) -> Result<()> {
        if let EngineError::Denied { action, target, .. } = err {
            if self.state.principals.contains_key(actor) {
                let now = self.clock.now();
                let draft = AuditDraft {
                    actor: actor.clone(),
                    action: *action,
                    target: target.clone(),
                    outcome: Outcome::Denied,
                    detail: err.audit_detail(),
                };
                self.commit(draft, Vec::new(), now)?;
            }
        }
        Ok(())
    }

    pub fn authorize(
        &self,
        principal: &PrincipalId,
        action: Action,
        scope: Option<&BTreeSet<DepartmentId>>,
    ) -> Result<access::Decision> {
        access::authorize(&self.state, principal, action, scope)
    }

    pub fn visible_departments(&self, principal: &PrincipalId) -> Result<BTreeSet<DepartmentId>> {
        access::visible_departments(&self.state, principal)
    }
}

fn apply_commit(state: &mut State, commit: Commit) {
    for m in commit.mutations {
        state.apply(m);
    }
    state.commit = commit.commit;
    state.audit.push(commit.audit);
}

/// Replays a journal into state. Returns the state and the length of the
/// committed prefix.
fn replay(bytes: &[u8]) -> Result<(State, usize)> {
    let scan = journal::scan(bytes).map_err(|c| EngineError::StoreCorrupt { first_bad_seq: c.commit })?;
    let mut state = State::default();
    for frame in scan.frames {
        let bad = EngineError::StoreCorrupt {
            first_bad_seq: frame.commit,
        };
        let commit: Commit = serde_json::from_slice(&frame.payload).map_err(|_| bad.clone())?;
        if commit.commit != frame.commit || commit.audit.seq != frame.commit {
            return Err(bad);
        }
        apply_commit(&mut state, commit);
    }
    if let Some(seq) = audit::verify_chain(&state.audit).first_bad_seq {
        return Err(EngineError::StoreCorrupt { first_bad_seq: seq });
    }
    Ok((state, scan.committed_len))
}

/// Offline integrity check of a store file's bytes.
pub fn verify_store_bytes(bytes: &[u8]) -> ChainVerdict {
    match replay(bytes) {
        Ok(_) => ChainVerdict::intact(),
        Err(EngineError::StoreCorrupt { first_bad_seq }) => ChainVerdict::broken_at(first_bad_seq),
        Err(_) => ChainVerdict::broken_at(1),
    }
}

#[cfg(test)]
pub(crate) mod testkit;
