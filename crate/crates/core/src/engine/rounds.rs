use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{require, Effect, Engine};
use crate::access::Action;
use crate::budget::{BudgetCell, DataVersion, DataVersionState};
use crate::error::{EngineError, Result};
use crate::model::*;
use crate::readiness::{SectionStatus, Status, StatusKey};
use crate::state::{Mutation, State};
use crate::template::TemplateState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSeed {
    /// `(section, line item)` pairs registered for entry.
    pub slots: usize,
    /// Cells copied from a prior round.
    pub copied_cells: usize,
}

pub(crate) fn round(s: &State, id: RoundId) -> Result<&BudgetRound> {
    s.rounds.get(&id).ok_or_else(|| EngineError::UnknownRound(id.to_string()))
}

/// Freezes `version` and opens `version + 1` as a copy of it.
pub(crate) fn freeze_and_copy(s: &State, round_id: RoundId, version: u32, now: DateTime<Utc>) -> Result<(DataVersion, Vec<Mutation>)> {
    let current = s
        .data_versions
        .get(&(round_id, version))
        .ok_or_else(|| EngineError::UnknownVersion(format!("{round_id}/{version}")))?;
    let mut frozen = current.clone();
    frozen.state = DataVersionState::Frozen;
    let next = DataVersion {
        round_id,
        version: version + 1,
        state: DataVersionState::Editable,
        created_at: now,
    };
    let mutations = vec![
        Mutation::PutDataVersion(frozen),
        Mutation::PutDataVersion(next.clone()),
        Mutation::CopyDataVersion {
            round_id,
            from: version,
            to: version + 1,
        },
    ];
    Ok((next, mutations))
}

fn freeze(s: &State, round_id: RoundId, version: u32) -> Option<Mutation> {
    s.data_versions
        .get(&(round_id, version))
        .filter(|d| d.state == DataVersionState::Editable)
        .map(|d| {
            let mut d = d.clone();
            d.state = DataVersionState::Frozen;
            Mutation::PutDataVersion(d)
        })
}

impl Engine {
    /// Opens a round at cycle 1 with data version 1, initializing every
    /// (cost centre × section) status from the applicability table.
    pub fn open_round(&mut self, actor: &PrincipalId, label: &str) -> Result<BudgetRound> {
        self.run(actor, Action::AdminRegistry, "rounds", |s, now| {
            require(s, actor, Action::AdminRegistry, None, "rounds")?;
            check_text("round label", label)?;
            if s.rounds.values().any(|r| r.state == RoundState::Open) {
                return Err(EngineError::RoundAlreadyOpen);
            }
            let r = BudgetRound {
                id: s.next_round_id(),
                label: label.to_string(),
                state: RoundState::Open,
                cycle_number: 1,
                considered_version: None,
                approved_version: None,
                template_version: None,
                vocabulary: BTreeSet::new(),
                opened_at: now,
            };
            let mut mutations = vec![
                Mutation::PutRound(r.clone()),
                Mutation::PutDataVersion(DataVersion {
                    round_id: r.id,
                    version: 1,
                    state: DataVersionState::Editable,
                    created_at: now,
                }),
            ];
            for cc in s.cost_centres.keys() {
                for sec in s.sections.keys() {
                    let status = if s.not_applicable.contains(&(*cc, *sec)) {
                        Status::NotApplicable
                    } else {
                        Status::NotStarted
                    };
                    mutations.push(Mutation::PutStatus(SectionStatus {
                        key: StatusKey {
                            round_id: r.id,
                            data_version: 1,
                            cost_centre_id: *cc,
                            section_id: *sec,
                        },
                        status,
                        set_by: actor.clone(),
                        set_at: now,
                    }));
                }
            }
            Ok(Effect::new(r.clone(), mutations, format!("round={} label={label}", r.id)))
        })
    }

    /// Hands the current data version to management: `Open → UnderConsideration`.
    pub fn submit_round(&mut self, actor: &PrincipalId, round_id: RoundId) -> Result<BudgetRound> {
        let target = format!("rounds/{round_id}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            require(s, actor, Action::AdminRegistry, None, &target)?;
            let mut r = round(s, round_id)?.clone();
            if r.state != RoundState::Open {
                return Err(EngineError::InvalidState(format!("round is {:?}", r.state)));
            }
            let latest = s.latest_data_version(round_id).map(|d| d.version).unwrap_or(1);
            r.state = RoundState::UnderConsideration;
            r.considered_version = Some(latest);
            let detail = format!("considered_version={latest}");
            Ok(Effect::new(r.clone(), vec![Mutation::PutRound(r)], detail))
        })
    }

    /// Starts the next revision cycle: `UnderConsideration → Open` with
    /// `cycle_number + 1`. The considered data version ends up frozen with
    /// an editable successor.
    pub fn advance_cycle(&mut self, actor: &PrincipalId, round_id: RoundId) -> Result<BudgetRound> {
        let target = format!("rounds/{round_id}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, now| {
            require(s, actor, Action::AdminRegistry, None, &target)?;
            let mut r = round(s, round_id)?.clone();
            if r.state != RoundState::UnderConsideration {
                return Err(EngineError::InvalidState(format!("round is {:?}", r.state)));
            }
            if s.rounds.values().any(|o| o.id != round_id && o.state == RoundState::Open) {
                return Err(EngineError::RoundAlreadyOpen);
            }
            let considered = r.considered_version.unwrap_or(1);
            let mut mutations = Vec::new();
            let still_editable = s
                .data_versions
                .get(&(round_id, considered))
                .is_some_and(|d| d.state == DataVersionState::Editable);
            if still_editable {
                let (_, m) = freeze_and_copy(s, round_id, considered, now)?;
                mutations.extend(m);
            }
            r.state = RoundState::Open;
            r.cycle_number += 1;
            r.considered_version = None;
            let detail = format!("cycle={}", r.cycle_number);
            mutations.insert(0, Mutation::PutRound(r.clone()));
            Ok(Effect::new(r, mutations, detail))
        })
    }

    /// Management approves the considered version.
    pub fn approve_round(&mut self, actor: &PrincipalId, round_id: RoundId) -> Result<BudgetRound> {
        let target = format!("rounds/{round_id}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            require(s, actor, Action::AdminRegistry, None, &target)?;
            let mut r = round(s, round_id)?.clone();
            if r.state != RoundState::UnderConsideration {
                return Err(EngineError::InvalidState(format!("round is {:?}", r.state)));
            }
            let considered = r.considered_version.unwrap_or(1);
            r.state = RoundState::Approved;
            r.approved_version = Some(considered);
            let mut mutations = vec![Mutation::PutRound(r.clone())];
            mutations.extend(freeze(s, round_id, considered));
            Ok(Effect::new(r, mutations, format!("approved_version={considered}")))
        })
    }

    /// Closes a round from any other state, freezing every data version.
    pub fn close_round(&mut self, actor: &PrincipalId, round_id: RoundId) -> Result<BudgetRound> {
        let target = format!("rounds/{round_id}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            require(s, actor, Action::AdminRegistry, None, &target)?;
            let mut r = round(s, round_id)?.clone();
            if r.state == RoundState::Closed {
                return Err(EngineError::InvalidState("round is already closed".into()));
            }
            r.state = RoundState::Closed;
            let mut mutations = vec![Mutation::PutRound(r.clone())];
            let versions: Vec<u32> = s
                .data_versions
                .range((round_id, 0)..=(round_id, u32::MAX))
                .map(|(k, _)| k.1)
                .collect();
            mutations.extend(versions.into_iter().filter_map(|v| freeze(s, round_id, v)));
            Ok(Effect::new(r, mutations, "closed"))
        })
    }

    /// Registers the round's line-item vocabulary from a template's live
    /// version, optionally copying a prior round's final figures into the
    /// current editable version.
    pub fn seed_round(
        &mut self,
        actor: &PrincipalId,
        round_id: RoundId,
        template_id: TemplateId,
        copy_from: Option<RoundId>,
    ) -> Result<RoundSeed> {
        let target = format!("rounds/{round_id}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, now| {
            require(s, actor, Action::AdminRegistry, None, &target)?;
            let mut r = round(s, round_id)?.clone();
            if r.state != RoundState::Open {
                return Err(EngineError::RoundNotOpen);
            }
            let template = s
                .templates
                .get(&template_id)
                .ok_or_else(|| EngineError::UnknownTemplate(template_id.to_string()))?;
            let live = template
                .versions
                .iter()
                .filter_map(|v| s.versions.get(v))
                .find(|v| v.state == TemplateState::Live)
                .ok_or(EngineError::NoLiveTemplate)?;
            let mut vocabulary = BTreeSet::new();
            for (section, item) in live.document.entry_items() {
                let sec = s
                    .section_by_name(section)
                    .ok_or_else(|| EngineError::UnknownKeyComponent(format!("section {section}")))?;
                vocabulary.insert((sec.id, item.to_string()));
            }
            r.template_version = Some(live.id);
            r.vocabulary = vocabulary;
            let mut mutations = vec![Mutation::PutRound(r.clone())];

            let mut copied = 0;
            if let Some(source_id) = copy_from {
                let source = round(s, source_id)?;
                if source_id == round_id {
                    return Err(EngineError::InvalidInput("cannot copy a round into itself".into()));
                }
                let latest = s.latest_data_version(source_id).map(|d| d.version).unwrap_or(1);
                let from_version = source.final_version(latest);
                let target_version = s.editable_version(round_id).ok_or(EngineError::VersionFrozen)?.version;
                for cell in s.cells_of(source_id, from_version) {
                    if !r.vocabulary.contains(&(cell.key.section_id, cell.key.line_item.clone())) {
                        continue;
                    }
                    let mut key = cell.key.clone();
                    key.round_id = round_id;
                    key.data_version = target_version;
                    mutations.push(Mutation::PutCell(BudgetCell {
                        key,
                        amount: cell.amount,
                        entered_by: actor.clone(),
                        entered_at: now,
                    }));
                    copied += 1;
                }
            }
            let seed = RoundSeed {
                slots: r.vocabulary.len(),
                copied_cells: copied,
            };
            let detail = format!("template_version={} slots={} copied={copied}", live.id, seed.slots);
            Ok(Effect::new(seed, mutations, detail))
        })
    }

    /// Freezes the current editable data version and opens the next one
    /// as a full copy.
    pub fn open_next_version(&mut self, actor: &PrincipalId, round_id: RoundId) -> Result<DataVersion> {
        let target = format!("rounds/{round_id}/versions");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, now| {
            require(s, actor, Action::AdminRegistry, None, &target)?;
            let r = round(s, round_id)?;
            if matches!(r.state, RoundState::Approved | RoundState::Closed) {
                return Err(EngineError::RoundNotOpen);
            }
            let current = s
                .editable_version(round_id)
                .ok_or_else(|| EngineError::InvalidState("no editable data version".into()))?;
            let (next, mutations) = freeze_and_copy(s, round_id, current.version, now)?;
            let detail = format!("frozen={} opened={}", current.version, next.version);
            Ok(Effect::new(next, mutations, detail))
        })
    }

    pub fn list_rounds(&self, actor: &PrincipalId) -> Result<Vec<BudgetRound>> {
        require(&self.state, actor, Action::ReadReference, None, "rounds")?;
        Ok(self.state.rounds.values().cloned().collect())
    }

    pub fn data_versions(&self, actor: &PrincipalId, round_id: RoundId) -> Result<Vec<DataVersion>> {
        require(&self.state, actor, Action::ReadReference, None, &format!("rounds/{round_id}"))?;
        round(&self.state, round_id)?;
        Ok(self
            .state
            .data_versions
            .range((round_id, 0)..=(round_id, u32::MAX))
            .map(|(_, d)| d.clone())
            .collect())
    }
}
