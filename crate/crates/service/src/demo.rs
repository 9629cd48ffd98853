//! Builds the demonstration world through the HTTP API, acting as each
//! demo principal in turn.

use std::collections::BTreeMap;

use govsheet_core::demo::{self, COST_CENTRES, DEPARTMENTS, PRINCIPALS, SECTIONS};
use govsheet_core::model::{BudgetRound, CostCentre, Section};
use govsheet_core::readiness::Status;
use govsheet_core::template::TemplateVersion;
use govsheet_core::MintedToken;
use serde_json::{json, Value};

use crate::client::{Client, Result};

#[derive(Debug, Clone)]
pub struct DemoWorld {
    pub round_id: u64,
    pub template_id: u64,
    /// Bearer token per demo principal.
    pub tokens: BTreeMap<String, String>,
}

/// `admin` must carry an administrator token.
pub fn seed(admin: &Client) -> Result<DemoWorld> {
    for (id, name) in DEPARTMENTS {
        let _: Value = admin.post("/registry/departments", &json!({"id": id, "name": name}))?;
    }
    let mut sections = Vec::new();
    for name in SECTIONS {
        let s: Section = admin.post("/registry/sections", &json!({"name": name}))?;
        sections.push(s.id);
    }
    let mut centres = Vec::new();
    for c in COST_CENTRES {
        let created: CostCentre = admin.post(
            "/registry/cost-centres",
            &json!({"code": c.code, "name": c.name, "department_id": c.department, "dormant": c.dormant}),
        )?;
        for (glyph, section) in c.row.iter().zip(&sections) {
            if demo::status_of_glyph(glyph) == Status::NotApplicable {
                let _: Value = admin.put(
                    "/registry/applicability",
                    &json!({"cost_centre_id": created.id, "section_id": section, "applicable": false}),
                )?;
            }
        }
        centres.push((created.id, c));
    }
    let mut tokens = BTreeMap::new();
    for p in PRINCIPALS {
        let _: Value = admin.post("/registry/users", &json!({"id": p.id, "display_name": p.display_name}))?;
        let _: Value = admin.post(
            "/grants",
            &json!({"principal_id": p.id, "role": p.role, "departments": p.departments}),
        )?;
        let t: MintedToken = admin.post("/auth/token", &json!({"principal_id": p.id}))?;
        tokens.insert(p.id.to_string(), t.token);
    }
    let as_ = |id: &str| admin.with_token(tokens[id].clone());

    let v: TemplateVersion = as_("editor").post(
        "/templates",
        &json!({"name": demo::TEMPLATE_NAME, "document": demo::template_document()}),
    )?;
    let _: Value = as_("editor").post(&format!("/versions/{}/submit", v.id), &json!({}))?;
    let _: Value = as_("auditor").post(
        &format!("/versions/{}/audit", v.id),
        &json!({"verdict": "Pass", "note": "structure checked"}),
    )?;
    let _: Value = as_("owner").post(&format!("/versions/{}/release", v.id), &json!({}))?;

    let round: BudgetRound = admin.post("/rounds", &json!({"label": demo::ROUND_LABEL}))?;
    let _: Value = admin.post(&format!("/rounds/{}/seed", round.id), &json!({"template_id": v.template_id}))?;
    for (id, c) in &centres {
        let manager = as_(demo::manager_of(c.department).as_str());
        for (glyph, section) in c.row.iter().zip(&sections) {
            if demo::status_of_glyph(glyph) == Status::Completed {
                let _: Value = manager.put(
                    "/status",
                    &json!({
                        "round_id": round.id,
                        "data_version": 1,
                        "cost_centre_id": id,
                        "section_id": section,
                        "status": Status::Completed,
                    }),
                )?;
            }
        }
    }
    Ok(DemoWorld {
        round_id: round.id.0,
        template_id: v.template_id.0,
        tokens,
    })
}
