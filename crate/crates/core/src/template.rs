//! Template structure documents and the change-control lifecycle.
//!
//! A template version moves `Wip → UnderAudit → Approved → Live →
//! Archived`; an auditor may refer it back from `UnderAudit` to `Wip`.
//! The engine enforces who may drive each transition; this module holds
//! the document model, its checksum, the structural lint and the bare
//! transition relation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{EngineError, Result};
use crate::model::{check_text, PrincipalId, TemplateId, VersionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ItemKind {
    Entry,
    Computed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineItemDef {
    pub name: String,
    pub kind: ItemKind,
    /// Opaque formula text; present only on computed items.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula_text: Option<String>,
    pub locked: bool,
}

impl LineItemDef {
    pub fn entry(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: ItemKind::Entry,
            formula_text: None,
            locked: false,
        }
    }

    pub fn computed(name: &str, formula: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: ItemKind::Computed,
            formula_text: Some(formula.to_string()),
            locked: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionDef {
    /// Registered section name, e.g. `Customer Sales`.
    pub name: String,
    pub items: Vec<LineItemDef>,
}

/// Structural content of a template. Serialized as JSON with the checksum
/// alongside; the checksum is not part of the hashed payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateDocument {
    pub sections: Vec<SectionDef>,
    #[serde(default)]
    pub structure_checksum: String,
}

#[derive(Serialize)]
struct CanonicalDocument<'a> {
    sections: &'a [SectionDef],
}

impl TemplateDocument {
    pub fn new(sections: Vec<SectionDef>) -> Self {
        let mut doc = Self {
            sections,
            structure_checksum: String::new(),
        };
        doc.structure_checksum = doc.compute_checksum();
        doc
    }

    /// SHA-256 over the canonical JSON of `{"sections": ...}`: object keys
    /// sorted, no insignificant whitespace.
    pub fn compute_checksum(&self) -> String {
        let value = serde_json::to_value(CanonicalDocument {
            sections: &self.sections,
        })
        .expect("template document serializes");
        let canonical = serde_json::to_vec(&value).expect("json value serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    /// Parses an imported JSON document. A supplied checksum must match
    /// the content; an empty one is filled in.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TemplateDocument =
            serde_json::from_str(text).map_err(|e| EngineError::InvalidDocument(e.to_string()))?;
        doc.sealed()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("template document serializes")
    }

    /// Checks the hard invariants and fills in or verifies the checksum.
    /// Lint findings are not errors here.
    pub fn sealed(mut self) -> Result<Self> {
        for section in &self.sections {
            check_text("section name", &section.name)?;
            for item in &section.items {
                check_text("line item name", &item.name)?;
                if item.kind == ItemKind::Entry && item.formula_text.is_some() {
                    return Err(EngineError::InvalidDocument(format!(
                        "entry item {:?} carries formula text",
                        item.name
                    )));
                }
            }
        }
        let computed = self.compute_checksum();
        if !self.structure_checksum.is_empty() && self.structure_checksum != computed {
            return Err(EngineError::InvalidDocument("structure checksum mismatch".into()));
        }
        self.structure_checksum = computed;
        Ok(self)
    }

    /// `(section name, item name)` for every data-entry item.
    pub fn entry_items(&self) -> impl Iterator<Item = (&str, &str)> {
        self.sections.iter().flat_map(|s| {
            s.items
                .iter()
                .filter(|i| i.kind == ItemKind::Entry)
                .map(move |i| (s.name.as_str(), i.name.as_str()))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LintKind {
    UnlockedFormula,
    LockedEntry,
    EmptyFormula,
    DuplicateName,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintViolation {
    pub kind: LintKind,
    pub section: String,
    pub item: String,
}

/// Structural integrity checks an auditor runs before passing a version.
pub fn lint_template(doc: &TemplateDocument) -> Vec<LintViolation> {
    let mut out = Vec::new();
    for section in &doc.sections {
        let mut seen = BTreeSet::new();
        for item in &section.items {
            let mut push = |kind| {
                out.push(LintViolation {
                    kind,
                    section: section.name.clone(),
                    item: item.name.clone(),
                })
            };
            match item.kind {
                ItemKind::Computed => {
                    if !item.locked {
                        push(LintKind::UnlockedFormula);
                    }
                    if item.formula_text.as_deref().is_none_or(|f| f.trim().is_empty()) {
                        push(LintKind::EmptyFormula);
                    }
                }
                ItemKind::Entry => {
                    if item.locked {
                        push(LintKind::LockedEntry);
                    }
                }
            }
            if !seen.insert(item.name.as_str()) {
                push(LintKind::DuplicateName);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TemplateState {
    Wip,
    UnderAudit,
    Approved,
    Live,
    Archived,
}

impl TemplateState {
    pub const ALL: [TemplateState; 5] = [
        TemplateState::Wip,
        TemplateState::UnderAudit,
        TemplateState::Approved,
        TemplateState::Live,
        TemplateState::Archived,
    ];

    pub fn in_flight(self) -> bool {
        matches!(self, TemplateState::Wip | TemplateState::UnderAudit | TemplateState::Approved)
    }

    /// Bare transition relation, ignoring actors.
    pub fn apply(self, step: Step) -> Option<TemplateState> {
        use TemplateState::*;
        match (self, step) {
            (Wip, Step::Edit) => Some(Wip),
            (Wip, Step::Submit) => Some(UnderAudit),
            (UnderAudit, Step::Pass) => Some(Approved),
            (UnderAudit, Step::Refer) => Some(Wip),
            (Approved, Step::Release) => Some(Live),
            (Live, Step::Supersede) => Some(Archived),
            _ => None,
        }
    }
}

impl fmt::Display for TemplateState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Workflow steps acting on a single version. `Supersede` happens to the
/// previous live version when another is released.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    Edit,
    Submit,
    Pass,
    Refer,
    Release,
    Supersede,
}

impl Step {
    pub const ALL: [Step; 6] = [
        Step::Edit,
        Step::Submit,
        Step::Pass,
        Step::Refer,
        Step::Release,
        Step::Supersede,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Refer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub to: TemplateState,
    pub by: PrincipalId,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateVersion {
    pub id: VersionId,
    pub template_id: TemplateId,
    pub version_number: u32,
    pub state: TemplateState,
    pub document: TemplateDocument,
    pub created_by: PrincipalId,
    pub edited_by: BTreeSet<PrincipalId>,
    pub audited_by: Option<PrincipalId>,
    pub released_by: Option<PrincipalId>,
    /// Auditor's note from the most recent referral.
    pub audit_note: Option<String>,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub id: TemplateId,
    pub name: String,
    /// Version ids in creation order.
    pub versions: Vec<VersionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub version_id: VersionId,
    pub version_number: u32,
    pub state: TemplateState,
    pub created_by: PrincipalId,
    pub edited_by: BTreeSet<PrincipalId>,
    pub audited_by: Option<PrincipalId>,
    pub released_by: Option<PrincipalId>,
    pub transitions: Vec<Transition>,
    pub checksum: String,
}

impl From<&TemplateVersion> for HistoryEntry {
    fn from(v: &TemplateVersion) -> Self {
        Self {
            version_id: v.id,
            version_number: v.version_number,
            state: v.state,
            created_by: v.created_by.clone(),
            edited_by: v.edited_by.clone(),
            audited_by: v.audited_by.clone(),
            released_by: v.released_by.clone(),
            transitions: v.transitions.clone(),
            checksum: v.document.structure_checksum.clone(),
        }
    }
}

/// Counts versions per state for one template.
pub fn state_census<'a>(versions: impl Iterator<Item = &'a TemplateVersion>) -> BTreeMap<TemplateState, usize> {
    let mut out = BTreeMap::new();
    for v in versions {
        *out.entry(v.state).or_insert(0) += 1;
    }
    out
}
