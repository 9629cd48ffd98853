//! Small fixture world for engine unit tests.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::clock::ManualClock;
use crate::engine::Engine;
use crate::model::*;
use crate::template::{LineItemDef, SectionDef, TemplateDocument, Verdict};

pub(crate) struct World {
    pub engine: Engine,
    pub admin: PrincipalId,
    pub clock: Arc<ManualClock>,
}

/// Two sections with three entry items each, plus one locked total.
pub(crate) fn sample_document() -> TemplateDocument {
    let section = |name: &str, items: [&str; 3]| {
        let mut defs: Vec<LineItemDef> = items.iter().map(|i| LineItemDef::entry(i)).collect();
        defs.push(LineItemDef::computed("Total", "=SUM(ABOVE)"));
        SectionDef {
            name: name.into(),
            items: defs,
        }
    };
    TemplateDocument::new(vec![
        section("Customer Sales", ["Licence revenue", "Services", "Maintenance"]),
        section("Computer Assets", ["Hardware", "Software", "Leases"]),
    ])
}

impl World {
    /// Departments `sales` and `ops`, cost centres 110 (sales) and 160
    /// (ops), sections Customer Sales and Computer Assets.
    pub fn new() -> Self {
        let clock = Arc::new(ManualClock::default());
        let mut engine = Engine::in_memory(clock.clone());
        let admin = PrincipalId::new("admin");
        engine.bootstrap_admin(&admin).unwrap();
        engine.add_department(&admin, "sales", "Sales", None).unwrap();
        engine.add_department(&admin, "ops", "Operations", None).unwrap();
        engine.create_cost_centre(&admin, "110", "Direct", &DepartmentId::new("sales"), false).unwrap();
        engine.create_cost_centre(&admin, "160", "Corporate", &DepartmentId::new("ops"), false).unwrap();
        engine.add_section(&admin, "Customer Sales").unwrap();
        engine.add_section(&admin, "Computer Assets").unwrap();
        Self { engine, admin, clock }
    }

    pub fn dept(&self, id: &str) -> DepartmentId {
        DepartmentId::new(id)
    }

    pub fn cc(&self, code: &str) -> CostCentreId {
        self.engine.state().cost_centre_by_code(code).unwrap().id
    }

    pub fn section(&self, name: &str) -> SectionId {
        self.engine.state().section_by_name(name).unwrap().id
    }

    fn ensure_principal(&mut self, id: &str) -> PrincipalId {
        let pid = PrincipalId::new(id);
        if !self.engine.state().principals.contains_key(&pid) {
            self.engine.add_principal(&self.admin, id, id).unwrap();
        }
        pid
    }

    /// A principal holding User over the named departments.
    pub fn user_in(&mut self, id: &str, depts: &[&str]) -> PrincipalId {
        let pid = self.ensure_principal(id);
        let scope: BTreeSet<DepartmentId> = depts.iter().map(|d| DepartmentId::new(*d)).collect();
        self.engine.grant(&self.admin, &pid, Role::User, Scope::Departments(scope)).unwrap();
        pid
    }

    /// A principal holding `role` over all departments.
    pub fn with_role(&mut self, id: &str, role: Role) -> PrincipalId {
        let pid = self.ensure_principal(id);
        self.engine.grant(&self.admin, &pid, role, Scope::AllDepartments).unwrap();
        pid
    }

    /// A template with [`sample_document`] released as Live v1.
    pub fn live_template(&mut self) -> TemplateId {
        let editor = self.with_role("t-editor", Role::Editor);
        let auditor = self.with_role("t-auditor", Role::Auditor);
        let owner = self.with_role("t-owner", Role::Owner);
        let e = &mut self.engine;
        let v = e.create_template(&editor, "Standard", sample_document()).unwrap();
        e.submit_for_audit(&editor, v.id).unwrap();
        e.audit_decision(&auditor, v.id, Verdict::Pass, "").unwrap();
        e.release_live(&owner, v.id).unwrap();
        v.template_id
    }

    /// Round "FY" opened and seeded from a live template.
    pub fn seeded_round(&mut self) -> RoundId {
        let t = self.live_template();
        let r = self.engine.open_round(&self.admin, "FY").unwrap();
        self.engine.seed_round(&self.admin, r.id, t, None).unwrap();
        r.id
    }
}
