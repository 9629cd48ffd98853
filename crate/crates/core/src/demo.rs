//! The demonstration world: 28 cost centres across five departments, the
//! six standard sections, and completion statuses as printed in the
//! consolidation-dependency chart of the original budgeting process.
//!
//! Three codes appear twice in that chart (110, 160, 181). Codes are
//! unique in the registry, so the second occurrence of each carries a
//! `-2` suffix.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::model::*;
use crate::readiness::Status;
use crate::template::{LineItemDef, SectionDef, TemplateDocument, Verdict};
use crate::Engine;

pub const SECTIONS: [&str; 6] = [
    "Customer Sales",
    "Employee Overheads",
    "Computer Assets",
    "Property Assets",
    "Rent and Rates",
    "Other",
];

/// `(id, name)`
pub const DEPARTMENTS: [(&str, &str); 5] = [
    ("direct", "Direct Sales"),
    ("public", "Public Sector and Contracts"),
    ("accounts", "Key Accounts"),
    ("ireland", "Ireland"),
    ("wholesale", "Wholesale"),
];

#[derive(Debug, Clone, Copy)]
pub struct DemoCostCentre {
    pub code: &'static str,
    pub name: &'static str,
    pub department: &'static str,
    pub dormant: bool,
    /// Status glyph per section, `C` or `X`.
    pub row: [&'static str; 6],
}

const fn cc(code: &'static str, name: &'static str, department: &'static str, row: [&'static str; 6]) -> DemoCostCentre {
    DemoCostCentre {
        code,
        name,
        department,
        dormant: false,
        row,
    }
}

const fn dormant(code: &'static str, department: &'static str, row: [&'static str; 6]) -> DemoCostCentre {
    DemoCostCentre {
        code,
        name: "(Dormant)",
        department,
        dormant: true,
        row,
    }
}

const SALES: [&str; 6] = ["C", "C", "X", "X", "X", "C"];
const NO_SALES: [&str; 6] = ["X", "C", "X", "X", "X", "C"];
const OTHER_ONLY: [&str; 6] = ["X", "X", "X", "X", "X", "C"];

/// In chart order.
pub const COST_CENTRES: [DemoCostCentre; 28] = [
    cc("110", "Hesel Direct", "direct", SALES),
    cc("110-2", "Local Government", "public", SALES),
    dormant("121", "direct", SALES),
    cc("125", "Central Government", "public", SALES),
    cc("130", "ST Catinogun", "direct", SALES),
    cc("135", "SMB", "direct", SALES),
    cc("140", "Contracts", "public", NO_SALES),
    cc("160", "Corporate", "accounts", SALES),
    cc("181", "Further Education", "public", SALES),
    cc("152", "Xerox", "accounts", SALES),
    cc("163", "ST Central Services", "public", NO_SALES),
    cc("155", "Key Accounts", "accounts", SALES),
    cc("160-2", "Health Contract", "public", SALES),
    cc("161", "Health Direct", "direct", SALES),
    cc("170", "Hesel Existing", "accounts", SALES),
    cc("171", "SMB New Nth", "direct", SALES),
    dormant("172", "direct", NO_SALES),
    cc("173", "Mid Market North", "accounts", SALES),
    cc("175", "SMB New Sth", "direct", SALES),
    cc("180", "Scotland", "accounts", SALES),
    cc("181-2", "Southern Ireland", "ireland", OTHER_ONLY),
    cc("192", "Ireland", "ireland", OTHER_ONLY),
    cc("193", "Indirect N Ireland", "ireland", OTHER_ONLY),
    cc("194", "ROI Wholesale", "ireland", OTHER_ONLY),
    cc("195", "Northern Ireland", "ireland", OTHER_ONLY),
    cc("196", "ROI UK Sales", "ireland", OTHER_ONLY),
    cc("197", "NI Wholesale", "ireland", OTHER_ONLY),
    cc("400", "Wholesale Existing", "wholesale", SALES),
];

#[derive(Debug, Clone, Copy)]
pub struct DemoPrincipal {
    pub id: &'static str,
    pub display_name: &'static str,
    pub role: Role,
    /// `None` grants all departments.
    pub departments: Option<&'static [&'static str]>,
}

pub const PRINCIPALS: [DemoPrincipal; 9] = [
    DemoPrincipal {
        id: "owner",
        display_name: "Finance Owner",
        role: Role::Owner,
        departments: None,
    },
    DemoPrincipal {
        id: "editor",
        display_name: "Template Editor",
        role: Role::Editor,
        departments: None,
    },
    DemoPrincipal {
        id: "auditor",
        display_name: "Internal Auditor",
        role: Role::Auditor,
        departments: None,
    },
    DemoPrincipal {
        id: "director",
        display_name: "Sales Director",
        role: Role::SeniorManager,
        departments: None,
    },
    DemoPrincipal {
        id: "mgr-direct",
        display_name: "Direct Sales Manager",
        role: Role::User,
        departments: Some(&["direct"]),
    },
    DemoPrincipal {
        id: "mgr-public",
        display_name: "Public Sector Manager",
        role: Role::User,
        departments: Some(&["public"]),
    },
    DemoPrincipal {
        id: "mgr-accounts",
        display_name: "Key Accounts Manager",
        role: Role::User,
        departments: Some(&["accounts"]),
    },
    DemoPrincipal {
        id: "mgr-ireland",
        display_name: "Ireland Manager",
        role: Role::User,
        departments: Some(&["ireland"]),
    },
    DemoPrincipal {
        id: "mgr-wholesale",
        display_name: "Wholesale Manager",
        role: Role::User,
        departments: Some(&["wholesale"]),
    },
];

pub const TEMPLATE_NAME: &str = "Departmental Budget";
pub const ROUND_LABEL: &str = "FY-Q3 reforecast";

/// Entry lines per section; each section also gets a locked total.
pub const LINE_ITEMS: [(&str, &[&str]); 6] = [
    ("Customer Sales", &["Licence revenue", "Services revenue", "Maintenance revenue"]),
    ("Employee Overheads", &["Salaries", "Pensions", "Training"]),
    ("Computer Assets", &["Hardware", "Software"]),
    ("Property Assets", &["Buildings", "Fixtures"]),
    ("Rent and Rates", &["Rent", "Rates"]),
    ("Other", &["Travel", "Consumables", "Sundry"]),
];

pub fn template_document() -> TemplateDocument {
    TemplateDocument::new(
        LINE_ITEMS
            .iter()
            .map(|(section, items)| {
                let mut defs: Vec<LineItemDef> = items.iter().map(|i| LineItemDef::entry(i)).collect();
                defs.push(LineItemDef::computed(&format!("Total {}", section.to_lowercase()), "=SUM(ABOVE)"));
                SectionDef {
                    name: section.to_string(),
                    items: defs,
                }
            })
            .collect(),
    )
}

/// The manager responsible for a department.
pub fn manager_of(department: &str) -> PrincipalId {
    PrincipalId::new(format!("mgr-{department}"))
}

pub fn status_of_glyph(glyph: &str) -> Status {
    Status::from_glyph(glyph).expect("demo glyphs are C or X")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemoSeed {
    pub round_id: RoundId,
    pub template_id: TemplateId,
}

/// Builds the demo world in `engine` as `admin`. X pairs are registered
/// as not applicable before the round opens; C pairs are then declared
/// Completed by each department's manager.
pub fn seed(engine: &mut Engine, admin: &PrincipalId) -> Result<DemoSeed> {
    for (id, name) in DEPARTMENTS {
        engine.add_department(admin, id, name, None)?;
    }
    let mut sections = Vec::new();
    for name in SECTIONS {
        sections.push(engine.add_section(admin, name)?.id);
    }
    let mut centres = Vec::new();
    for c in COST_CENTRES {
        let created = engine.create_cost_centre(admin, c.code, c.name, &DepartmentId::new(c.department), c.dormant)?;
        for (glyph, section) in c.row.iter().zip(&sections) {
            if status_of_glyph(glyph) == Status::NotApplicable {
                engine.set_applicability(admin, created.id, *section, false)?;
            }
        }
        centres.push((created.id, c));
    }
    for p in PRINCIPALS {
        engine.add_principal(admin, p.id, p.display_name)?;
        let scope = match p.departments {
            None => Scope::AllDepartments,
            Some(ds) => Scope::Departments(ds.iter().map(|d| DepartmentId::new(*d)).collect::<BTreeSet<_>>()),
        };
        engine.grant(admin, &PrincipalId::new(p.id), p.role, scope)?;
    }

    let (editor, auditor, owner) = (PrincipalId::new("editor"), PrincipalId::new("auditor"), PrincipalId::new("owner"));
    let v = engine.create_template(&editor, TEMPLATE_NAME, template_document())?;
    engine.submit_for_audit(&editor, v.id)?;
    engine.audit_decision(&auditor, v.id, Verdict::Pass, "structure checked")?;
    engine.release_live(&owner, v.id)?;

    let round = engine.open_round(admin, ROUND_LABEL)?;
    engine.seed_round(admin, round.id, v.template_id, None)?;
    for (id, c) in &centres {
        let manager = manager_of(c.department);
        for (glyph, section) in c.row.iter().zip(&sections) {
            if status_of_glyph(glyph) == Status::Completed {
                engine.set_status(&manager, round.id, 1, *id, *section, Status::Completed)?;
            }
        }
    }
    Ok(DemoSeed {
        round_id: round.id,
        template_id: v.template_id,
    })
}
