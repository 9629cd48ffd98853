use std::collections::{BTreeMap, BTreeSet};

use super::budget_ops::existing_version;
use super::readiness_ops::{check_departments, gate};
use super::rounds::round;
use super::{require, Effect, Engine};
use crate::access::{self, Action};
use crate::budget::Cents;
use crate::consolidation::*;
use crate::error::{EngineError, Result};
use crate::model::*;
use crate::state::{Mutation, State};

/// Sums a version's cells per `(section, line item)` over the scope.
fn line_sums(s: &State, round_id: RoundId, version: u32, scope: &BTreeSet<DepartmentId>) -> BTreeMap<(String, String), Cents> {
    let mut out = BTreeMap::new();
    for c in s.cells_of(round_id, version) {
        if s.department_of(c.key.cost_centre_id).is_some_and(|d| scope.contains(d)) {
            let key = (s.sections[&c.key.section_id].name.clone(), c.key.line_item.clone());
            *out.entry(key).or_insert(0) += c.amount;
        }
    }
    out
}

fn comparator_sums(
    s: &State,
    round_id: RoundId,
    version: u32,
    scope: &BTreeSet<DepartmentId>,
    comparator: &Comparator,
) -> Result<BTreeMap<(String, String), Cents>> {
    match comparator {
        Comparator::PriorDataVersion => {
            let prior = version.checked_sub(1).filter(|v| *v >= 1);
            match prior.filter(|v| s.data_versions.contains_key(&(round_id, *v))) {
                Some(v) => Ok(line_sums(s, round_id, v, scope)),
                None => Err(EngineError::UnknownComparator(format!("no data version before {version}"))),
            }
        }
        Comparator::PriorRound => {
            let prior = s
                .rounds
                .range(..round_id)
                .next_back()
                .map(|(_, r)| r)
                .ok_or_else(|| EngineError::UnknownComparator("no prior round".into()))?;
            let latest = s.latest_data_version(prior.id).map_or(1, |d| d.version);
            Ok(line_sums(s, prior.id, prior.final_version(latest), scope))
        }
        Comparator::Actuals(label) => {
            let rows = s
                .actuals
                .get(label)
                .ok_or_else(|| EngineError::UnknownComparator(format!("actuals {label}")))?;
            let mut out = BTreeMap::new();
            for (k, v) in rows {
                if s.department_of(k.cost_centre_id).is_some_and(|d| scope.contains(d)) {
                    let key = (s.sections[&k.section_id].name.clone(), k.line_item.clone());
                    *out.entry(key).or_insert(0) += v;
                }
            }
            Ok(out)
        }
    }
}

fn scope_text(scope: &BTreeSet<DepartmentId>) -> String {
    let ids: Vec<&str> = scope.iter().map(|d| d.as_str()).collect();
    format!("{{{}}}", ids.join(","))
}

impl Engine {
    /// Exact integer totals over the scope. If the readiness gate is not
    /// passed the call fails with `GateBlocked` unless `allow_provisional`
    /// is set and the caller holds SeniorManager or Owner, in which case
    /// the report is marked provisional.
    pub fn consolidate(
        &mut self,
        actor: &PrincipalId,
        round_id: RoundId,
        data_version: u32,
        scope: &BTreeSet<DepartmentId>,
        allow_provisional: bool,
    ) -> Result<ConsolidationReport> {
        let target = format!("consolidation/{round_id}/v{data_version}/{}", scope_text(scope));
        let ready = self.state.data_versions.contains_key(&(round_id, data_version))
            && gate(&self.state, round_id, data_version, scope).ready;
        let action = if !ready && allow_provisional {
            Action::ConsolidateProvisional
        } else {
            Action::Consolidate
        };
        self.run(actor, action, target.clone(), |s, now| {
            require(s, actor, action, Some(scope), &target)?;
            check_departments(s, scope)?;
            existing_version(s, round_id, data_version)?;
            let g = gate(s, round_id, data_version, scope);
            if !g.ready {
                if !allow_provisional {
                    return Err(EngineError::GateBlocked { blocking: g.blocking });
                }
                let senior = access::holds_role(s, actor, Role::SeniorManager) || access::holds_role(s, actor, Role::Owner);
                if !senior {
                    return Err(super::denied(action, &target, crate::access::ReasonCode::RoleMissing));
                }
            }
            let mut acc = Accumulator::default();
            for c in s.cells_of(round_id, data_version) {
                let cc = &s.cost_centres[&c.key.cost_centre_id];
                if scope.contains(&cc.department_id) {
                    let key = TotalKey {
                        section: s.sections[&c.key.section_id].name.clone(),
                        line_item: c.key.line_item.clone(),
                        period: c.key.period,
                    };
                    acc.add(&cc.code, key, c.amount);
                }
            }
            let (totals, by_cost_centre) = acc.finish();
            let verification_stamp = stamp(&report_body(scope, &totals));
            let report = ConsolidationReport {
                id: s.next_report_id(),
                round_id,
                data_version,
                scope: scope.clone(),
                provisional: !g.ready,
                blocking: g.blocking,
                totals,
                by_cost_centre,
                generated_by: actor.clone(),
                generated_at: now,
                verification_stamp,
            };
            let detail = format!(
                "report={} provisional={} stamp={}",
                report.id, report.provisional, report.verification_stamp
            );
            Ok(Effect::new(report.clone(), vec![Mutation::PutReport(Box::new(report))], detail))
        })
    }

    /// Per-line variance of the version against a comparator.
    pub fn kpi_report(
        &mut self,
        actor: &PrincipalId,
        round_id: RoundId,
        data_version: u32,
        scope: &BTreeSet<DepartmentId>,
        comparator: Comparator,
    ) -> Result<KpiReport> {
        let target = format!("kpi/{round_id}/v{data_version}/{}", scope_text(scope));
        self.run(actor, Action::Consolidate, target.clone(), |s, _| {
            require(s, actor, Action::Consolidate, Some(scope), &target)?;
            check_departments(s, scope)?;
            round(s, round_id)?;
            existing_version(s, round_id, data_version)?;
            let current = line_sums(s, round_id, data_version, scope);
            let other = comparator_sums(s, round_id, data_version, scope, &comparator)?;
            let report = KpiReport {
                round_id,
                data_version,
                scope: scope.clone(),
                comparator: comparator.clone(),
                lines: kpi_lines(&current, &other),
            };
            let detail = format!("comparator={comparator:?} lines={}", report.lines.len());
            Ok(Effect::new(report, vec![], detail))
        })
    }

    pub fn get_report(&self, actor: &PrincipalId, id: ReportId) -> Result<ConsolidationReport> {
        let target = format!("reports/{id}");
        require(&self.state, actor, Action::Consolidate, None, &target)?;
        let report = self
            .state
            .reports
            .get(&id)
            .ok_or_else(|| EngineError::UnknownReport(id.to_string()))?;
        require(&self.state, actor, Action::Consolidate, Some(&report.scope), &target)?;
        Ok(report.clone())
    }

    /// Deterministic CSV with the `#stamp,<hex>` trailer.
    pub fn export_report(&self, actor: &PrincipalId, id: ReportId) -> Result<Vec<u8>> {
        Ok(export_csv(&self.get_report(actor, id)?))
    }
}
