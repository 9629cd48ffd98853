use std::collections::BTreeSet;

use chrono::{DateTime, Utc};

use super::{denied, require, Effect, Engine};
use crate::access::{Action, ReasonCode};
use crate::error::{EngineError, Result};
use crate::model::*;
use crate::state::{Mutation, State};
use crate::template::*;

fn version(s: &State, id: VersionId) -> Result<&TemplateVersion> {
    s.versions.get(&id).ok_or_else(|| EngineError::UnknownVersion(id.to_string()))
}

fn template(s: &State, id: TemplateId) -> Result<&Template> {
    s.templates.get(&id).ok_or_else(|| EngineError::UnknownTemplate(id.to_string()))
}

fn expect_state(v: &TemplateVersion, wanted: TemplateState) -> Result<()> {
    if v.state == wanted {
        Ok(())
    } else {
        Err(EngineError::InvalidState(format!(
            "version {} is {}, expected {wanted}",
            v.version_number, v.state
        )))
    }
}

fn moved(mut v: TemplateVersion, to: TemplateState, by: &PrincipalId, at: DateTime<Utc>) -> TemplateVersion {
    v.state = to;
    v.transitions.push(Transition { to, by: by.clone(), at });
    v
}

fn put(v: TemplateVersion) -> Mutation {
    Mutation::PutVersion(Box::new(v))
}

fn vtarget(id: VersionId) -> String {
    format!("versions/{id}")
}

impl Engine {
    /// Creates a template whose first version is a Wip draft holding
    /// `document`, edited by the caller.
    pub fn create_template(&mut self, actor: &PrincipalId, name: &str, document: TemplateDocument) -> Result<TemplateVersion> {
        let target = format!("templates/{name}");
        self.run(actor, Action::EditStructure, target.clone(), |s, now| {
            require(s, actor, Action::EditStructure, None, &target)?;
            check_text("template name", name)?;
            if name.trim().is_empty() {
                return Err(EngineError::InvalidInput("template name must not be empty".into()));
            }
            if s.templates.values().any(|t| t.name == name) {
                return Err(EngineError::Duplicate(format!("template {name}")));
            }
            let document = document.sealed()?;
            let t = Template {
                id: s.next_template_id(),
                name: name.to_string(),
                versions: vec![s.next_version_id()],
            };
            let v = TemplateVersion {
                id: t.versions[0],
                template_id: t.id,
                version_number: 1,
                state: TemplateState::Wip,
                document,
                created_by: actor.clone(),
                edited_by: BTreeSet::from([actor.clone()]),
                audited_by: None,
                released_by: None,
                audit_note: None,
                transitions: vec![Transition {
                    to: TemplateState::Wip,
                    by: actor.clone(),
                    at: now,
                }],
            };
            let detail = format!("template={} version={} checksum={}", t.id, v.id, v.document.structure_checksum);
            Ok(Effect::new(v.clone(), vec![Mutation::PutTemplate(t), put(v)], detail))
        })
    }

    /// Owner copies the Live version into a new Wip version.
    pub fn copy_to_wip(&mut self, actor: &PrincipalId, template_id: TemplateId) -> Result<TemplateVersion> {
        let target = format!("templates/{template_id}");
        self.run(actor, Action::CopyToWip, target.clone(), |s, now| {
            require(s, actor, Action::CopyToWip, None, &target)?;
            let t = template(s, template_id)?;
            let versions: Vec<&TemplateVersion> = t.versions.iter().filter_map(|v| s.versions.get(v)).collect();
            if versions.iter().any(|v| v.state.in_flight()) {
                return Err(EngineError::InFlightExists);
            }
            let live = versions
                .iter()
                .find(|v| v.state == TemplateState::Live)
                .ok_or(EngineError::NoLiveVersion)?;
            let number = versions.iter().map(|v| v.version_number).max().unwrap_or(0) + 1;
            let v = TemplateVersion {
                id: s.next_version_id(),
                template_id,
                version_number: number,
                state: TemplateState::Wip,
                document: live.document.clone(),
                created_by: actor.clone(),
                edited_by: BTreeSet::new(),
                audited_by: None,
                released_by: None,
                audit_note: None,
                transitions: vec![Transition {
                    to: TemplateState::Wip,
                    by: actor.clone(),
                    at: now,
                }],
            };
            let mut t = t.clone();
            t.versions.push(v.id);
            let detail = format!("from=v{} to=v{number} version={}", live.version_number, v.id);
            Ok(Effect::new(v.clone(), vec![Mutation::PutTemplate(t), put(v)], detail))
        })
    }

    pub fn edit_wip(&mut self, actor: &PrincipalId, version_id: VersionId, document: TemplateDocument) -> Result<TemplateVersion> {
        let target = vtarget(version_id);
        self.run(actor, Action::EditStructure, target.clone(), |s, _| {
            require(s, actor, Action::EditStructure, None, &target)?;
            let v = version(s, version_id)?;
            expect_state(v, TemplateState::Wip)?;
            let document = document.sealed()?;
            let detail = format!("old={} new={}", v.document.structure_checksum, document.structure_checksum);
            let mut v = v.clone();
            v.document = document;
            v.edited_by.insert(actor.clone());
            Ok(Effect::new(v.clone(), vec![put(v)], detail))
        })
    }

    pub fn submit_for_audit(&mut self, actor: &PrincipalId, version_id: VersionId) -> Result<TemplateVersion> {
        let target = vtarget(version_id);
        self.run(actor, Action::SubmitForAudit, target.clone(), |s, now| {
            require(s, actor, Action::SubmitForAudit, None, &target)?;
            let v = version(s, version_id)?;
            expect_state(v, TemplateState::Wip)?;
            let lint = lint_template(&v.document).len();
            let v = moved(v.clone(), TemplateState::UnderAudit, actor, now);
            let detail = format!("checksum={} lint_violations={lint}", v.document.structure_checksum);
            Ok(Effect::new(v.clone(), vec![put(v)], detail))
        })
    }

    /// Pass moves to Approved; Refer returns to Wip keeping the editors
    /// and the note. An editor of the version may not audit it.
    pub fn audit_decision(
        &mut self,
        actor: &PrincipalId,
        version_id: VersionId,
        verdict: Verdict,
        note: &str,
    ) -> Result<TemplateVersion> {
        let target = vtarget(version_id);
        self.run(actor, Action::AuditDecide, target.clone(), |s, now| {
            require(s, actor, Action::AuditDecide, None, &target)?;
            check_text("audit note", note)?;
            let v = version(s, version_id)?;
            expect_state(v, TemplateState::UnderAudit)?;
            if v.edited_by.contains(actor) {
                return Err(denied(Action::AuditDecide, &target, ReasonCode::SegregationViolation));
            }
            let v = match verdict {
                Verdict::Pass => {
                    let mut v = moved(v.clone(), TemplateState::Approved, actor, now);
                    v.audited_by = Some(actor.clone());
                    v
                }
                Verdict::Refer => {
                    let mut v = moved(v.clone(), TemplateState::Wip, actor, now);
                    v.audit_note = Some(note.to_string());
                    v
                }
            };
            let detail = format!("verdict={verdict:?} checksum={}", v.document.structure_checksum);
            Ok(Effect::new(v.clone(), vec![put(v)], detail))
        })
    }

    /// Archives the current Live version and makes this one Live in the
    /// same commit. The auditor of the version may not release it.
    pub fn release_live(&mut self, actor: &PrincipalId, version_id: VersionId) -> Result<TemplateVersion> {
        let target = vtarget(version_id);
        self.run(actor, Action::ReleaseLive, target.clone(), |s, now| {
            require(s, actor, Action::ReleaseLive, None, &target)?;
            let v = version(s, version_id)?;
            expect_state(v, TemplateState::Approved)?;
            if v.audited_by.as_ref() == Some(actor) {
                return Err(denied(Action::ReleaseLive, &target, ReasonCode::SegregationViolation));
            }
            let t = template(s, v.template_id)?;
            let mut mutations = Vec::new();
            let mut detail = format!("live=v{}", v.version_number);
            for old in t.versions.iter().filter_map(|id| s.versions.get(id)) {
                if old.state == TemplateState::Live {
                    detail.push_str(&format!(" archived=v{}", old.version_number));
                    mutations.push(put(moved(old.clone(), TemplateState::Archived, actor, now)));
                }
            }
            let mut v = moved(v.clone(), TemplateState::Live, actor, now);
            v.released_by = Some(actor.clone());
            mutations.push(put(v.clone()));
            Ok(Effect::new(v, mutations, detail))
        })
    }

    pub fn list_templates(&self, actor: &PrincipalId) -> Result<Vec<Template>> {
        require(&self.state, actor, Action::ReadReference, None, "templates")?;
        Ok(self.state.templates.values().cloned().collect())
    }

    pub fn get_version(&self, actor: &PrincipalId, version_id: VersionId) -> Result<TemplateVersion> {
        require(&self.state, actor, Action::ReadReference, None, &vtarget(version_id))?;
        version(&self.state, version_id).cloned()
    }

    /// Advisory structural lint of a stored version.
    pub fn lint_version(&self, actor: &PrincipalId, version_id: VersionId) -> Result<Vec<LintViolation>> {
        require(&self.state, actor, Action::ReadReference, None, &vtarget(version_id))?;
        Ok(lint_template(&version(&self.state, version_id)?.document))
    }

    /// Every version of the template in creation order.
    pub fn version_history(&self, actor: &PrincipalId, template_id: TemplateId) -> Result<Vec<HistoryEntry>> {
        require(&self.state, actor, Action::ReadReference, None, &format!("templates/{template_id}"))?;
        let t = template(&self.state, template_id)?;
        Ok(t.versions
            .iter()
            .filter_map(|id| self.state.versions.get(id))
            .map(HistoryEntry::from)
            .collect())
    }
}
