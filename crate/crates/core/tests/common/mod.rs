#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use govsheet_core::template::{LineItemDef, SectionDef, TemplateDocument};
use govsheet_core::*;

pub fn fresh() -> (Engine, PrincipalId) {
    let mut e = Engine::in_memory(Arc::new(ManualClock::default()));
    let admin = PrincipalId::new("admin");
    e.bootstrap_admin(&admin).unwrap();
    (e, admin)
}

pub fn depts(ids: &[&str]) -> BTreeSet<DepartmentId> {
    ids.iter().map(|d| DepartmentId::new(*d)).collect()
}

pub fn principal(e: &mut Engine, admin: &PrincipalId, id: &str) -> PrincipalId {
    e.add_principal(admin, id, id).unwrap();
    PrincipalId::new(id)
}

pub fn doc(items: &[&str]) -> TemplateDocument {
    TemplateDocument::new(vec![SectionDef {
        name: "Other".into(),
        items: items.iter().map(|i| LineItemDef::entry(i)).collect(),
    }])
}

/// The demo world plus the admin that seeded it.
pub fn demo_world() -> (Engine, PrincipalId, demo::DemoSeed) {
    let (mut e, admin) = fresh();
    let seed = demo::seed(&mut e, &admin).unwrap();
    (e, admin, seed)
}

/// A round over departments `d0..dN`, each with one cost centre `c-dK`,
/// seeded from a live template with one section, "Other", holding `items`.
pub struct Small {
    pub engine: Engine,
    pub admin: PrincipalId,
    pub round: RoundId,
    pub template: TemplateId,
    pub section: SectionId,
    pub depts: Vec<DepartmentId>,
    pub centres: Vec<CostCentreId>,
}

pub const SMALL_ITEMS: [&str; 2] = ["Rent", "Rates"];

pub fn small(n_depts: usize) -> Small {
    let (mut e, admin) = fresh();
    let mut ds = Vec::new();
    let mut centres = Vec::new();
    for k in 0..n_depts {
        let d = e.add_department(&admin, &format!("d{k}"), &format!("Dept {k}"), None).unwrap();
        centres.push(e.create_cost_centre(&admin, &format!("c-d{k}"), "Centre", &d.id, false).unwrap().id);
        ds.push(d.id);
    }
    let section = e.add_section(&admin, "Other").unwrap().id;
    let template = live_template(&mut e, &admin, doc(&SMALL_ITEMS));
    let round = e.open_round(&admin, "R1").unwrap().id;
    e.seed_round(&admin, round, template, None).unwrap();
    Small {
        engine: e,
        admin,
        round,
        template,
        section,
        depts: ds,
        centres,
    }
}

/// Runs a document through the full change-control workflow with
/// dedicated editor, auditor and owner principals.
pub fn live_template(e: &mut Engine, admin: &PrincipalId, document: TemplateDocument) -> TemplateId {
    let cast = [("cc-editor", Role::Editor), ("cc-auditor", Role::Auditor), ("cc-owner", Role::Owner)];
    for (id, role) in cast {
        if !e.state().principals.contains_key(&PrincipalId::new(id)) {
            principal(e, admin, id);
            e.grant(admin, &PrincipalId::new(id), role, Scope::AllDepartments).unwrap();
        }
    }
    let [editor, auditor, owner] = cast.map(|(id, _)| PrincipalId::new(id));
    let name = format!("T{}", e.state().templates.len() + 1);
    let v = e.create_template(&editor, &name, document).unwrap();
    e.submit_for_audit(&editor, v.id).unwrap();
    e.audit_decision(&auditor, v.id, govsheet_core::template::Verdict::Pass, "ok").unwrap();
    e.release_live(&owner, v.id).unwrap();
    v.template_id
}

pub fn key(round: RoundId, version: u32, cc: CostCentreId, section: SectionId, item: &str, period: u8) -> budget::BudgetKey {
    budget::BudgetKey {
        round_id: round,
        data_version: version,
        cost_centre_id: cc,
        section_id: section,
        line_item: item.to_string(),
        period,
    }
}

/// Adds `id` holding `role` over `scope` (`None` for all departments).
pub fn grantee(e: &mut Engine, admin: &PrincipalId, id: &str, role: Role, scope: Option<&[&DepartmentId]>) -> PrincipalId {
    let p = PrincipalId::new(id);
    if !e.state().principals.contains_key(&p) {
        principal(e, admin, id);
    }
    let scope = match scope {
        None => Scope::AllDepartments,
        Some(ds) => Scope::Departments(ds.iter().map(|d| (*d).clone()).collect()),
    };
    e.grant(admin, &p, role, scope).unwrap();
    p
}
