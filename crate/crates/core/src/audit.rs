//! Hash-chained audit records.
//!
//! `this_hash = SHA-256(prev_hash ‖ canonical)` where `canonical` is the
//! UTF-8 fields `seq, timestamp, actor, action, target, outcome, detail`
//! joined by 0x1F. The first record chains from 32 zero bytes.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::access::Action;
use crate::clock::format_millis;
use crate::model::PrincipalId;

pub type Digest32 = [u8; 32];

pub const GENESIS: Digest32 = [0u8; 32];
const SEP: char = '\u{1f}';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Ok,
    Denied,
    Error,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Ok => "Ok",
            Outcome::Denied => "Denied",
            Outcome::Error => "Error",
        }
    }

    fn parse(s: &str) -> Option<Outcome> {
        [Outcome::Ok, Outcome::Denied, Outcome::Error]
            .into_iter()
            .find(|o| o.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub seq: u64,
    pub timestamp: DateTime<Utc>,
    pub actor: PrincipalId,
    pub action: Action,
    pub target: String,
    pub outcome: Outcome,
    pub detail: String,
    #[serde(with = "hex_digest")]
    pub prev_hash: Digest32,
    #[serde(with = "hex_digest")]
    pub this_hash: Digest32,
}

/// Fields of a record before sealing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditDraft {
    pub actor: PrincipalId,
    pub action: Action,
    pub target: String,
    pub outcome: Outcome,
    pub detail: String,
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_control() { ' ' } else { c }).collect()
}

pub fn canonical(
    seq: u64,
    timestamp: &DateTime<Utc>,
    actor: &str,
    action: &str,
    target: &str,
    outcome: &str,
    detail: &str,
) -> String {
    let ts = format_millis(timestamp);
    let seq = seq.to_string();
    [seq.as_str(), ts.as_str(), actor, action, target, outcome, detail].join(&SEP.to_string())
}

pub fn chain_hash(prev: &Digest32, canonical: &str) -> Digest32 {
    let mut h = Sha256::new();
    h.update(prev);
    h.update(canonical.as_bytes());
    h.finalize().into()
}

impl AuditRecord {
    pub fn seal(draft: AuditDraft, seq: u64, timestamp: DateTime<Utc>, prev_hash: Digest32) -> Self {
        let mut rec = AuditRecord {
            seq,
            timestamp,
            actor: PrincipalId::new(sanitize(draft.actor.as_str())),
            action: draft.action,
            target: sanitize(&draft.target),
            outcome: draft.outcome,
            detail: sanitize(&draft.detail),
            prev_hash,
            this_hash: [0; 32],
        };
        rec.this_hash = rec.recompute_hash();
        rec
    }

    pub fn canonical(&self) -> String {
        canonical(
            self.seq,
            &self.timestamp,
            self.actor.as_str(),
            self.action.name(),
            &self.target,
            self.outcome.name(),
            &self.detail,
        )
    }

    pub fn recompute_hash(&self) -> Digest32 {
        chain_hash(&self.prev_hash, &self.canonical())
    }

    /// One export line: canonical fields, then prev and this hash in hex,
    /// all separated by 0x1F.
    pub fn export_line(&self) -> String {
        format!(
            "{}{SEP}{}{SEP}{}",
            self.canonical(),
            hex::encode(self.prev_hash),
            hex::encode(self.this_hash)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainVerdict {
    pub intact: bool,
    pub first_bad_seq: Option<u64>,
}

impl ChainVerdict {
    pub fn intact() -> Self {
        Self {
            intact: true,
            first_bad_seq: None,
        }
    }

    pub fn broken_at(seq: u64) -> Self {
        Self {
            intact: false,
            first_bad_seq: Some(seq),
        }
    }
}

/// Recomputes every hash from genesis. A record is bad if its sequence
/// number is out of order, its predecessor link is wrong, or its stored
/// hash differs from recomputation.
pub fn verify_chain(records: &[AuditRecord]) -> ChainVerdict {
    let mut prev = GENESIS;
    for (i, r) in records.iter().enumerate() {
        let expected_seq = i as u64 + 1;
        if r.seq != expected_seq || r.prev_hash != prev || r.recompute_hash() != r.this_hash {
            return ChainVerdict::broken_at(expected_seq);
        }
        prev = r.this_hash;
    }
    ChainVerdict::intact()
}

/// Re-verifies an exported log from its text alone.
pub fn verify_export(text: &str) -> ChainVerdict {
    let mut prev = GENESIS;
    for (i, line) in text.lines().enumerate() {
        let expected_seq = i as u64 + 1;
        let fields: Vec<&str> = line.split(SEP).collect();
        let ok = fields.len() == 9 && {
            let canonical = fields[..7].join(&SEP.to_string());
            let stored_prev = hex::decode(fields[7]).ok();
            let stored_this = hex::decode(fields[8]).ok();
            fields[0] == expected_seq.to_string()
                && stored_prev.as_deref() == Some(&prev[..])
                && stored_this.as_deref() == Some(&chain_hash(&prev, &canonical)[..])
        };
        if !ok {
            return ChainVerdict::broken_at(expected_seq);
        }
        prev.copy_from_slice(&hex::decode(fields[8]).expect("checked above"));
    }
    ChainVerdict::intact()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditFilter {
    pub actor: Option<PrincipalId>,
    pub action: Option<Action>,
    pub outcome: Option<Outcome>,
    /// Inclusive lower bound.
    pub from: Option<DateTime<Utc>>,
    /// Exclusive upper bound.
    pub to: Option<DateTime<Utc>>,
    pub target_prefix: Option<String>,
}

impl AuditFilter {
    pub fn matches(&self, r: &AuditRecord) -> bool {
        self.actor.as_ref().is_none_or(|a| a == &r.actor)
            && self.action.is_none_or(|a| a == r.action)
            && self.outcome.is_none_or(|o| o == r.outcome)
            && self.from.is_none_or(|t| r.timestamp >= t)
            && self.to.is_none_or(|t| r.timestamp < t)
            && self.target_prefix.as_ref().is_none_or(|p| r.target.starts_with(p.as_str()))
    }
}

/// Parses an outcome name as written in exports.
pub fn parse_outcome(s: &str) -> Option<Outcome> {
    Outcome::parse(s)
}

mod hex_digest {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(d))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let s = String::deserialize(d)?;
        let bytes = hex::decode(&s).map_err(serde::de::Error::custom)?;
        bytes
            .try_into()
            .map_err(|_| serde::de::Error::custom("digest must be 32 bytes"))
    }
}
