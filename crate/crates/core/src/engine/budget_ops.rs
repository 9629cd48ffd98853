use std::collections::BTreeSet;

use super::rounds::round;
use super::{one_dept, require, Effect, Engine};
use crate::access::{self, Action};
use crate::budget::*;
use crate::error::{EngineError, Result};
use crate::model::*;
use crate::state::{Mutation, State};

fn key_target(s: &State, key: &BudgetKey) -> String {
    let cc = s
        .cost_centres
        .get(&key.cost_centre_id)
        .map(|c| c.code.clone())
        .unwrap_or_else(|| key.cost_centre_id.to_string());
    format!(
        "budget/{}/v{}/{cc}/{}/{}/{}",
        key.round_id, key.data_version, key.section_id, key.line_item, key.period
    )
}

/// The data version must exist and be Editable, and the round must accept
/// entry into it: Open, or UnderConsideration for versions newer than the
/// one being considered.
pub(crate) fn writable_version(s: &State, round_id: RoundId, version: u32) -> Result<()> {
    let r = round(s, round_id)?;
    let dv = s
        .data_versions
        .get(&(round_id, version))
        .ok_or_else(|| EngineError::UnknownVersion(format!("{round_id}/{version}")))?;
    if dv.state == DataVersionState::Frozen {
        return Err(EngineError::VersionFrozen);
    }
    let accepts = match r.state {
        RoundState::Open => true,
        RoundState::UnderConsideration => r.considered_version.is_some_and(|c| version > c),
        RoundState::Approved | RoundState::Closed => false,
    };
    if accepts {
        Ok(())
    } else {
        Err(EngineError::RoundNotOpen)
    }
}

pub(crate) fn existing_version(s: &State, round_id: RoundId, version: u32) -> Result<()> {
    round(s, round_id)?;
    if s.data_versions.contains_key(&(round_id, version)) {
        Ok(())
    } else {
        Err(EngineError::UnknownVersion(format!("{round_id}/{version}")))
    }
}

/// Committed cells of one version, restricted to the filter and to the
/// departments the caller can see.
pub(crate) fn slice(
    s: &State,
    actor: &PrincipalId,
    round_id: RoundId,
    version: u32,
    filter: &SliceFilter,
) -> Result<Vec<BudgetCell>> {
    let target = format!("budget/{round_id}/v{version}");
    require(s, actor, Action::ReadBudget, filter.departments.as_ref(), &target)?;
    existing_version(s, round_id, version)?;
    let visible = access::permitted_departments(s, actor, Action::ReadBudget);
    let wanted = |d: &DepartmentId| visible.contains(d) && filter.departments.as_ref().is_none_or(|f| f.contains(d));
    Ok(s.cells_of(round_id, version)
        .filter(|c| filter.matches(c.key.cost_centre_id, c.key.section_id, c.key.period))
        .filter(|c| s.department_of(c.key.cost_centre_id).is_some_and(wanted))
        .cloned()
        .collect())
}

pub(crate) fn export_rows(s: &State, cells: &[BudgetCell]) -> Vec<ExportRow> {
    let mut rows: Vec<ExportRow> = cells
        .iter()
        .map(|c| ExportRow {
            cost_centre: s.cost_centres[&c.key.cost_centre_id].code.clone(),
            section: s.sections[&c.key.section_id].name.clone(),
            line_item: c.key.line_item.clone(),
            period: c.key.period,
            amount_cents: c.amount,
        })
        .collect();
    rows.sort();
    rows
}

impl Engine {
    /// Upserts one cell. Old and new amounts go to the audit detail.
    pub fn put_cell(&mut self, actor: &PrincipalId, key: BudgetKey, amount: Cents) -> Result<BudgetCell> {
        let target = key_target(&self.state, &key);
        self.run(actor, Action::WriteBudget, target.clone(), |s, now| {
            require(s, actor, Action::WriteBudget, None, &target)?;
            let dept = s
                .department_of(key.cost_centre_id)
                .ok_or_else(|| EngineError::UnknownKeyComponent(format!("cost centre {}", key.cost_centre_id)))?;
            require(s, actor, Action::WriteBudget, Some(&one_dept(dept)), &target)?;
            writable_version(s, key.round_id, key.data_version)?;
            if !s.sections.contains_key(&key.section_id) {
                return Err(EngineError::UnknownKeyComponent(format!("section {}", key.section_id)));
            }
            let r = &s.rounds[&key.round_id];
            if !r.vocabulary.contains(&(key.section_id, key.line_item.clone())) {
                return Err(EngineError::UnknownKeyComponent(format!("line item {:?}", key.line_item)));
            }
            if !valid_period(key.period) {
                return Err(EngineError::UnknownKeyComponent(format!("period {}", key.period)));
            }
            if !valid_amount(amount) {
                return Err(EngineError::InvalidInput(format!("amount {amount} out of range")));
            }
            let old = s.cells.get(&key).map(|c| c.amount.to_string()).unwrap_or_else(|| "none".into());
            let cell = BudgetCell {
                key: key.clone(),
                amount,
                entered_by: actor.clone(),
                entered_at: now,
            };
            let detail = format!("old={old} new={amount}");
            Ok(Effect::new(cell.clone(), vec![Mutation::PutCell(cell)], detail))
        })
    }

    pub fn get_slice(
        &self,
        actor: &PrincipalId,
        round_id: RoundId,
        data_version: u32,
        filter: &SliceFilter,
    ) -> Result<Vec<BudgetCell>> {
        slice(&self.state, actor, round_id, data_version, filter)
    }

    /// CSV export of a slice in the actuals layout plus `data_version`,
    /// rows sorted by cost centre, section, line item, period.
    pub fn export_slice(
        &self,
        actor: &PrincipalId,
        round_id: RoundId,
        data_version: u32,
        filter: &SliceFilter,
    ) -> Result<Vec<u8>> {
        let cells = slice(&self.state, actor, round_id, data_version, filter)?;
        let label = &self.state.rounds[&round_id].label;
        Ok(write_slice_csv(label, data_version, &export_rows(&self.state, &cells)))
    }

    /// All-or-nothing import; an existing label is replaced.
    pub fn import_actuals(&mut self, actor: &PrincipalId, fiscal_label: &str, source: &[u8]) -> Result<ImportSummary> {
        let target = format!("actuals/{fiscal_label}");
        self.run(actor, Action::ImportActuals, target.clone(), |s, _| {
            require(s, actor, Action::ImportActuals, None, &target)?;
            check_text("fiscal label", fiscal_label)?;
            if fiscal_label.is_empty() {
                return Err(EngineError::InvalidInput("fiscal label must not be empty".into()));
            }
            let records = parse_actuals(
                fiscal_label,
                source,
                |code| s.cost_centre_by_code(code).map(|c| c.id),
                |name| s.section_by_name(name).map(|x| x.id),
            )?;
            let replaced = s.actuals.get(fiscal_label).map_or(0, |a| a.len());
            let summary = ImportSummary {
                rows: records.len(),
                rejected: 0,
            };
            let rows = records.into_iter().map(|r| (r.key, r.amount)).collect();
            let m = Mutation::ReplaceActuals {
                fiscal_label: fiscal_label.to_string(),
                rows,
            };
            let detail = format!("rows={} replaced={replaced}", summary.rows);
            Ok(Effect::new(summary, vec![m], detail))
        })
    }

    /// Imported actuals for a label, restricted to the caller's departments.
    pub fn actuals(&self, actor: &PrincipalId, fiscal_label: &str) -> Result<Vec<ActualsRecord>> {
        let s = &self.state;
        require(s, actor, Action::ReadBudget, None, &format!("actuals/{fiscal_label}"))?;
        let visible: BTreeSet<DepartmentId> = access::permitted_departments(s, actor, Action::ReadBudget);
        let rows = s
            .actuals
            .get(fiscal_label)
            .ok_or_else(|| EngineError::UnknownComparator(format!("actuals {fiscal_label}")))?;
        Ok(rows
            .iter()
            .filter(|(k, _)| s.department_of(k.cost_centre_id).is_some_and(|d| visible.contains(d)))
            .map(|(k, v)| ActualsRecord {
                fiscal_label: fiscal_label.to_string(),
                key: k.clone(),
                amount: *v,
            })
            .collect())
    }
}
