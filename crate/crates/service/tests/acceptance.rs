//! Acceptance suite. Runs every criterion at its stated tolerance and time
//! limit and prints one PASS/FAIL line per criterion; exits nonzero if any
//! fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use govsheet::client::{Client, ClientError};
use govsheet_core::budget::{BudgetKey, SliceFilter};
use govsheet_core::consolidation;
use govsheet_core::readiness::Status;
use govsheet_core::template::{LineItemDef, SectionDef, Step, TemplateDocument, TemplateState, Verdict};
use govsheet_core::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "status matrix fixture",
            limit: Some(Duration::from_secs(1)),
            run: status_matrix_fixture,
        },
        Criterion {
            name: "workflow state machine",
            limit: Some(Duration::from_secs(30)),
            run: workflow_state_machine,
        },
        Criterion {
            name: "scope soundness",
            limit: None,
            run: scope_soundness,
        },
        Criterion {
            name: "consolidation oracle",
            limit: None,
            run: consolidation_oracle,
        },
        Criterion {
            name: "data versioning",
            limit: None,
            run: data_versioning,
        },
        Criterion {
            name: "audit chain",
            limit: None,
            run: audit_chain,
        },
        Criterion {
            name: "end-to-end cycle",
            limit: Some(Duration::from_secs(10)),
            run: end_to_end_cycle,
        },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = started.elapsed();
        let limit = c.limit.map(|l| format!(", limit {} s", l.as_secs())).unwrap_or_default();
        let timing = format!("{:.2} s{limit}", elapsed.as_secs_f64());
        match result {
            Ok(detail) if c.limit.is_none_or(|l| elapsed < l) => println!("PASS  {}: {detail} ({timing})", c.name),
            Ok(detail) => {
                failed += 1;
                println!("FAIL  {}: too slow; {detail} ({timing})", c.name);
            }
            Err(why) => {
                failed += 1;
                println!("FAIL  {}: {why} ({timing})", c.name);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

// ---- shared helpers ----

fn clock() -> Arc<ManualClock> {
    Arc::new(ManualClock::default())
}

fn fresh() -> (Engine, PrincipalId) {
    let mut e = Engine::in_memory(clock());
    let admin = PrincipalId::new("admin");
    e.bootstrap_admin(&admin).unwrap();
    (e, admin)
}

fn doc(items: &[&str]) -> TemplateDocument {
    TemplateDocument::new(vec![SectionDef {
        name: "Other".into(),
        items: items.iter().map(|i| LineItemDef::entry(i)).collect(),
    }])
}

/// Departments `d0..dN` with one cost centre `c-dK` each, a section
/// "Other" and an open round seeded from a live template.
struct World {
    engine: Engine,
    admin: PrincipalId,
    round: RoundId,
    section: SectionId,
    depts: Vec<DepartmentId>,
    centres: Vec<CostCentreId>,
}

const ITEMS: [&str; 2] = ["Rent", "Rates"];

fn world_in(mut e: Engine, admin: PrincipalId, n: usize) -> World {
    let mut depts = Vec::new();
    let mut centres = Vec::new();
    for k in 0..n {
        let d = e.add_department(&admin, &format!("d{k}"), &format!("Dept {k}"), None).unwrap();
        centres.push(e.create_cost_centre(&admin, &format!("c-d{k}"), "Centre", &d.id, false).unwrap().id);
        depts.push(d.id);
    }
    let section = e.add_section(&admin, "Other").unwrap().id;
    let cast = [("w-editor", Role::Editor), ("w-auditor", Role::Auditor), ("w-owner", Role::Owner)];
    for (id, role) in cast {
        e.add_principal(&admin, id, id).unwrap();
        e.grant(&admin, &PrincipalId::new(id), role, Scope::AllDepartments).unwrap();
    }
    let (ed, au, ow) = (PrincipalId::new("w-editor"), PrincipalId::new("w-auditor"), PrincipalId::new("w-owner"));
    let v = e.create_template(&ed, "Budget", doc(&ITEMS)).unwrap();
    e.submit_for_audit(&ed, v.id).unwrap();
    e.audit_decision(&au, v.id, Verdict::Pass, "ok").unwrap();
    e.release_live(&ow, v.id).unwrap();
    let round = e.open_round(&admin, "R1").unwrap().id;
    e.seed_round(&admin, round, v.template_id, None).unwrap();
    World {
        engine: e,
        admin,
        round,
        section,
        depts,
        centres,
    }
}

fn world(n: usize) -> World {
    let (e, admin) = fresh();
    world_in(e, admin, n)
}

fn key(round: RoundId, version: u32, cc: CostCentreId, section: SectionId, item: &str, period: u8) -> BudgetKey {
    BudgetKey {
        round_id: round,
        data_version: version,
        cost_centre_id: cc,
        section_id: section,
        line_item: item.into(),
        period,
    }
}

fn outcome_of<T>(r: &Result<T>) -> govsheet_core::Outcome {
    match r {
        Ok(_) => govsheet_core::Outcome::Ok,
        Err(e) if e.is_denial() => govsheet_core::Outcome::Denied,
        Err(_) => govsheet_core::Outcome::Error,
    }
}

// ---- 1. status matrix fixture ----

/// The completion chart, transcribed row by row. Codes that appear twice
/// carry a `-2` suffix on their second appearance.
const CHART: &str = "\
Cost Centre,Customer Sales,Employee Overheads,Computer Assets,Property Assets,Rent and Rates,Other
110 Hesel Direct,C,C,X,X,X,C
110-2 Local Government,C,C,X,X,X,C
121 (Dormant),C,C,X,X,X,C
125 Central Government,C,C,X,X,X,C
130 ST Catinogun,C,C,X,X,X,C
135 SMB,C,C,X,X,X,C
140 Contracts,X,C,X,X,X,C
160 Corporate,C,C,X,X,X,C
181 Further Education,C,C,X,X,X,C
152 Xerox,C,C,X,X,X,C
163 ST Central Services,X,C,X,X,X,C
155 Key Accounts,C,C,X,X,X,C
160-2 Health Contract,C,C,X,X,X,C
161 Health Direct,C,C,X,X,X,C
170 Hesel Existing,C,C,X,X,X,C
171 SMB New Nth,C,C,X,X,X,C
172 (Dormant),X,C,X,X,X,C
173 Mid Market North,C,C,X,X,X,C
175 SMB New Sth,C,C,X,X,X,C
180 Scotland,C,C,X,X,X,C
181-2 Southern Ireland,X,X,X,X,X,C
192 Ireland,X,X,X,X,X,C
193 Indirect N Ireland,X,X,X,X,X,C
194 ROI Wholesale,X,X,X,X,X,C
195 Northern Ireland,X,X,X,X,X,C
196 ROI UK Sales,X,X,X,X,X,C
197 NI Wholesale,X,X,X,X,X,C
400 Wholesale Existing,C,C,X,X,X,C
";

fn status_matrix_fixture() -> Outcome {
    let server = common::InProcess::start();
    let world = govsheet::demo::seed(&server.admin()).map_err(|e| e.to_string())?;
    let csv = server
        .admin()
        .get_text(&format!("/status/matrix?format=csv&round={}", world.round_id))
        .map_err(|e| e.to_string())?;
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    ensure!(rows.len() == 29, "{} data rows", rows.len() - 1);
    ensure!(rows.iter().all(|r| r.len() == 7), "every row has 6 section columns");
    let row = |label: &str| rows.iter().find(|r| r[0] == label).map(|r| r[1..].join(","));
    ensure!(row("110 Hesel Direct").as_deref() == Some("C,C,X,X,X,C"), "110 Hesel Direct: {:?}", row("110 Hesel Direct"));
    ensure!(row("140 Contracts").as_deref() == Some("X,C,X,X,X,C"), "140 Contracts: {:?}", row("140 Contracts"));
    ensure!(csv == CHART, "export differs from the chart:\n{csv}");
    Ok("28 x 6 via the API, byte-exact CSV".into())
}

// ---- 2. workflow state machine ----

#[derive(Debug, Clone, Copy)]
enum WOp {
    Create(usize, usize),
    Copy(usize, usize),
    Edit(usize, usize, u8),
    Submit(usize, usize),
    Audit(usize, usize, bool),
    Release(usize, usize),
}

const CAST: [(&str, &[Role]); 6] = [
    ("owner", &[Role::Owner]),
    ("editor", &[Role::Editor]),
    ("auditor", &[Role::Auditor]),
    ("editor-auditor", &[Role::Editor, Role::Auditor]),
    ("owner-auditor", &[Role::Owner, Role::Auditor]),
    ("editor-owner", &[Role::Editor, Role::Owner]),
];

fn random_wop(rng: &mut ChaCha8Rng) -> WOp {
    let (t, p) = (rng.gen_range(0..3), rng.gen_range(0..6));
    match rng.gen_range(0..15) {
        0 => WOp::Create(t, p),
        1 | 2 => WOp::Copy(t, p),
        3..=5 => WOp::Edit(t, p, rng.gen()),
        6..=8 => WOp::Submit(t, p),
        9..=11 => WOp::Audit(t, p, rng.gen_bool(0.7)),
        _ => WOp::Release(t, p),
    }
}

fn legal(from: TemplateState, to: TemplateState) -> bool {
    use TemplateState::*;
    matches!(
        (from, to),
        (Wip, UnderAudit) | (UnderAudit, Approved) | (UnderAudit, Wip) | (Approved, Live) | (Live, Archived)
    )
}

fn workflow_violation(e: &Engine) -> Option<String> {
    let s = e.state();
    for t in s.templates.values() {
        let versions: Vec<_> = t.versions.iter().map(|id| &s.versions[id]).collect();
        let live = versions.iter().filter(|v| v.state == TemplateState::Live).count();
        if live > 1 {
            return Some(format!("{live} live versions of {}", t.name));
        }
        let in_flight = versions.iter().filter(|v| v.state.in_flight()).count();
        if in_flight > 1 {
            return Some(format!("{in_flight} in-flight versions of {}", t.name));
        }
        for v in &versions {
            if let Some(a) = &v.audited_by {
                if v.edited_by.contains(a) {
                    return Some(format!("{a} audited a version they edited"));
                }
                if v.released_by.as_ref() == Some(a) {
                    return Some(format!("{a} released a version they audited"));
                }
            }
            let states: Vec<TemplateState> = v.transitions.iter().map(|x| x.to).collect();
            if states.first() != Some(&TemplateState::Wip) || states.last() != Some(&v.state) {
                return Some("transition log does not start in Wip or end in the current state".into());
            }
            if let Some(w) = states.windows(2).find(|w| !legal(w[0], w[1])) {
                return Some(format!("illegal transition {:?} -> {:?}", w[0], w[1]));
            }
            if v.state == TemplateState::Live && v.audited_by.is_none() {
                return Some("live version without an auditor".into());
            }
        }
    }
    None
}

fn workflow_state_machine() -> Outcome {
    // Reachability over the bare transition relation: every path from Wip
    // that reaches Live passes UnderAudit then Approved.
    let mut frontier = vec![vec![TemplateState::Wip]];
    let mut reached_live = 0;
    for _ in 0..8 {
        let mut next = Vec::new();
        for path in &frontier {
            let last = *path.last().unwrap();
            for step in Step::ALL {
                if let Some(to) = last.apply(step).filter(|to| *to != last) {
                    ensure!(legal(last, to), "relation allows {last:?} -> {to:?}");
                    let mut p = path.clone();
                    p.push(to);
                    if to == TemplateState::Live {
                        reached_live += 1;
                        let i = p.len() - 1;
                        ensure!(
                            p[i - 2..i] == [TemplateState::UnderAudit, TemplateState::Approved],
                            "Live reached via {:?}",
                            p
                        );
                    }
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    ensure!(reached_live > 0, "Live unreachable");

    let (mut base, admin) = fresh();
    let mut cast = Vec::new();
    for (id, roles) in CAST {
        base.add_principal(&admin, id, id).unwrap();
        let p = PrincipalId::new(id);
        for r in roles.iter() {
            base.grant(&admin, &p, *r, Scope::AllDepartments).unwrap();
        }
        cast.push(p);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let (mut ops, mut releases, mut segregation_refusals) = (0usize, 0usize, 0usize);
    for seq in 0..10_000 {
        let mut e = base.fork().unwrap();
        let len = rng.gen_range(1..=40);
        for _ in 0..len {
            let op = random_wop(&mut rng);
            let template = |e: &Engine, t: usize| {
                let name = format!("T{t}");
                e.state().templates.values().find(|x| x.name == name).map(|x| x.id)
            };
            let latest = |e: &Engine, t: usize| {
                template(e, t)
                    .and_then(|id| e.state().templates[&id].versions.last().copied())
                    .unwrap_or(VersionId(u64::MAX))
            };
            // Model of the segregation rules, checked against the engine.
            let holds = |p: usize, r: Role| CAST[p].1.contains(&r);
            let must_refuse = match op {
                WOp::Audit(t, p, _) => holds(p, Role::Auditor) && e
                    .state()
                    .versions
                    .get(&latest(&e, t))
                    .is_some_and(|v| v.state == TemplateState::UnderAudit && v.edited_by.contains(&cast[p])),
                WOp::Release(t, p) => holds(p, Role::Owner) && e
                    .state()
                    .versions
                    .get(&latest(&e, t))
                    .is_some_and(|v| v.state == TemplateState::Approved && v.audited_by.as_ref() == Some(&cast[p])),
                _ => false,
            };
            let before = e.state().audit.len();
            let r = match op {
                WOp::Create(t, p) => e.create_template(&cast[p], &format!("T{t}"), doc(&["Rent"])).map(drop),
                WOp::Copy(t, p) => {
                    let id = template(&e, t).unwrap_or(TemplateId(u64::MAX));
                    e.copy_to_wip(&cast[p], id).map(drop)
                }
                WOp::Edit(t, p, salt) => {
                    let v = latest(&e, t);
                    e.edit_wip(&cast[p], v, doc(&["Rent", &format!("Line {salt}")])).map(drop)
                }
                WOp::Submit(t, p) => {
                    let v = latest(&e, t);
                    e.submit_for_audit(&cast[p], v).map(drop)
                }
                WOp::Audit(t, p, pass) => {
                    let v = latest(&e, t);
                    let verdict = if pass { Verdict::Pass } else { Verdict::Refer };
                    e.audit_decision(&cast[p], v, verdict, "checked").map(drop)
                }
                WOp::Release(t, p) => {
                    let v = latest(&e, t);
                    e.release_live(&cast[p], v).map(drop)
                }
            };
            ops += 1;
            ensure!(e.state().audit.len() == before + 1, "sequence {seq}: {op:?} left {} records", e.state().audit.len() - before);
            ensure!(
                e.state().audit.last().unwrap().outcome == outcome_of(&r),
                "sequence {seq}: {op:?} recorded the wrong outcome"
            );
            if must_refuse {
                ensure!(
                    matches!(&r, Err(err) if err.code() == "SEGREGATION_VIOLATION"),
                    "sequence {seq}: {op:?} should be a segregation violation, got {r:?}"
                );
                segregation_refusals += 1;
            }
            if r.is_ok() && matches!(op, WOp::Release(..)) {
                releases += 1;
            }
            if let Some(v) = workflow_violation(&e) {
                return Err(format!("sequence {seq}: {v} after {op:?}"));
            }
        }
        ensure!(e.verify_chain().intact, "sequence {seq}: chain broken");
    }
    ensure!(releases > 0 && segregation_refusals > 0, "vacuous run");
    Ok(format!(
        "10000 sequences, {ops} operations, 0 violations ({releases} releases, {segregation_refusals} segregation refusals)"
    ))
}

// ---- 3. scope soundness ----

type GrantTable = Vec<Vec<(Role, Option<Vec<usize>>)>>;

const READERS: [Role; 3] = [Role::User, Role::Owner, Role::SeniorManager];

fn oracle_allows(table: &GrantTable, p: usize, d: usize, write: bool) -> bool {
    table[p].iter().any(|(role, scope)| {
        let role_ok = if write { *role == Role::User } else { READERS.contains(role) };
        role_ok && scope.as_ref().is_none_or(|s| s.contains(&d))
    })
}

fn check_scope_table(table: &GrantTable) -> std::result::Result<usize, String> {
    let mut w = world(4);
    let names = ["alice", "bob", "carol"];
    for (p, grants) in table.iter().enumerate() {
        w.engine.add_principal(&w.admin, names[p], names[p]).unwrap();
        for (role, scope) in grants {
            let scope = match scope {
                None => Scope::AllDepartments,
                Some(ds) => Scope::Departments(ds.iter().map(|d| w.depts[*d].clone()).collect()),
            };
            w.engine.grant(&w.admin, &PrincipalId::new(names[p]), *role, scope).unwrap();
        }
    }
    let seeder = PrincipalId::new("seeder");
    w.engine.add_principal(&w.admin, "seeder", "Seeder").unwrap();
    w.engine.grant(&w.admin, &seeder, Role::User, Scope::AllDepartments).unwrap();
    for (d, cc) in w.centres.iter().enumerate() {
        w.engine.put_cell(&seeder, key(w.round, 1, *cc, w.section, "Rent", 1), 100 + d as i64).unwrap();
    }
    let (round, section, centres, depts) = (w.round, w.section, w.centres.clone(), w.depts.clone());
    let shared = SharedEngine::new(w.engine);
    let mut checks = 0;
    for (p, name) in names.iter().enumerate() {
        let pid = PrincipalId::new(*name);
        for d in 0..4 {
            for write in [false, true] {
                let before = shared.inspect(|e| e.state().audit.len());
                let result = if write {
                    shared.write(|e| e.put_cell(&pid, key(round, 1, centres[d], section, "Rates", 2), 7).map(drop))
                } else {
                    let filter = SliceFilter {
                        departments: Some(BTreeSet::from([depts[d].clone()])),
                        ..Default::default()
                    };
                    shared.read(&pid, |e| e.get_slice(&pid, round, 1, &filter).map(drop))
                };
                let want = oracle_allows(table, p, d, write);
                let kind = if write { "write" } else { "read" };
                if result.is_ok() != want {
                    return Err(format!("{name} {kind} d{d}: engine {:?}, grant table says {want}", result.err()));
                }
                let added: Vec<AuditRecord> = shared.inspect(|e| e.state().audit[before..].to_vec());
                if !want {
                    let denied = added.iter().filter(|r| r.outcome == govsheet_core::Outcome::Denied).count();
                    if added.len() != 1 || denied != 1 {
                        return Err(format!("{name} {kind} d{d}: {} records, {denied} Denied", added.len()));
                    }
                    if added[0].actor != pid {
                        return Err(format!("{name} {kind} d{d}: record attributed to {}", added[0].actor));
                    }
                }
                checks += 1;
            }
        }
        // An unfiltered read returns exactly the readable departments' cells.
        let readable: BTreeSet<CostCentreId> = (0..4).filter(|d| oracle_allows(table, p, *d, false)).map(|d| centres[d]).collect();
        let got = shared.read(&pid, |e| e.get_slice(&pid, round, 1, &SliceFilter::default()));
        if let Ok(cells) = got {
            let seen: BTreeSet<CostCentreId> = cells.iter().map(|c| c.key.cost_centre_id).collect();
            if !seen.is_subset(&readable) || !readable.iter().all(|cc| seen.contains(cc)) {
                return Err(format!("{name}: unfiltered read covers {seen:?}, expected {readable:?}"));
            }
        } else if !readable.is_empty() {
            return Err(format!("{name}: unfiltered read refused but {readable:?} readable"));
        }
    }
    Ok(checks)
}

fn scope_soundness() -> Outcome {
    let fixed: GrantTable = vec![
        vec![(Role::User, Some(vec![0, 1]))],
        vec![(Role::User, Some(vec![2])), (Role::SeniorManager, Some(vec![3]))],
        vec![(Role::Owner, Some(vec![0, 3])), (Role::Auditor, None), (Role::Editor, Some(vec![1]))],
    ];
    let checks = check_scope_table(&fixed)?;
    ensure!(checks == 24, "{checks} cells checked");
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let roles = Role::ALL;
    let tables = 100;
    for n in 0..tables {
        let table: GrantTable = (0..3)
            .map(|_| {
                (0..rng.gen_range(0..4))
                    .map(|_| {
                        let role = *roles.choose(&mut rng).unwrap();
                        let scope = if rng.gen_bool(0.2) {
                            None
                        } else {
                            Some((0..4).filter(|_| rng.gen_bool(0.4)).collect::<Vec<_>>()).filter(|s| !s.is_empty())
                        };
                        (role, scope.or(Some(vec![rng.gen_range(0..4)])))
                    })
                    .collect()
            })
            .collect();
        check_scope_table(&table).map_err(|e| format!("random table {n}: {e}"))?;
    }
    Ok(format!("3 x 4 x {{read, write}} exact on the fixed table and {tables} random tables; one Denied record per denial"))
}

// ---- 4. consolidation oracle ----

type Totals = BTreeMap<(String, String, u8), i128>;

fn naive_totals(e: &Engine, round: RoundId) -> Totals {
    let mut out = Totals::new();
    for (dept, _) in demo::DEPARTMENTS {
        let filter = SliceFilter {
            departments: Some(BTreeSet::from([DepartmentId::new(dept)])),
            ..Default::default()
        };
        let bytes = e.export_slice(&demo::manager_of(dept), round, 1, &filter).unwrap();
        for line in String::from_utf8(bytes).unwrap().lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            *out.entry((f[2].to_string(), f[3].to_string(), f[4].parse().unwrap())).or_insert(0) +=
                f[5].parse::<i128>().unwrap();
        }
    }
    out
}

fn report_totals(r: &consolidation::ConsolidationReport) -> Totals {
    r.totals
        .iter()
        .map(|t| ((t.section.clone(), t.line_item.clone(), t.period), t.amount_cents as i128))
        .collect()
}

fn consolidation_oracle() -> Outcome {
    let (mut base, admin) = fresh();
    let seed = demo::seed(&mut base, &admin).unwrap();
    let full: BTreeSet<DepartmentId> = demo::DEPARTMENTS.iter().map(|(d, _)| DepartmentId::new(*d)).collect();
    let (director, owner) = (PrincipalId::new("director"), PrincipalId::new("owner"));
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let (mut blocked_patterns, mut cells_total) = (0, 0);
    for n in 0..100 {
        let mut e = base.fork().unwrap();
        let density = rng.gen_range(0.01..0.25);
        for c in demo::COST_CENTRES {
            let cc = e.state().cost_centre_by_code(c.code).unwrap().id;
            for (section, items) in demo::LINE_ITEMS {
                let sid = e.state().section_by_name(section).unwrap().id;
                for item in items.iter() {
                    for period in 1..=12u8 {
                        if rng.gen_bool(density) {
                            let amount = rng.gen_range(-9_000_000_000i64..9_000_000_000);
                            e.put_cell(&demo::manager_of(c.department), key(seed.round_id, 1, cc, sid, item, period), amount)
                                .unwrap();
                            cells_total += 1;
                        }
                    }
                }
            }
        }
        let mut reopened = BTreeSet::new();
        if rng.gen_bool(0.5) {
            for _ in 0..rng.gen_range(1..4) {
                let c = demo::COST_CENTRES.choose(&mut rng).unwrap();
                let col = rng.gen_range(0..6);
                if c.row[col] == "C" {
                    let cc = e.state().cost_centre_by_code(c.code).unwrap().id;
                    let sid = e.state().section_by_name(demo::SECTIONS[col]).unwrap().id;
                    let status = *[Status::NotStarted, Status::InProgress].choose(&mut rng).unwrap();
                    e.set_status(&demo::manager_of(c.department), seed.round_id, 1, cc, sid, status).unwrap();
                    reopened.insert((cc, sid));
                }
            }
        }
        let naive = naive_totals(&e, seed.round_id);
        let report = if reopened.is_empty() {
            let r = e.consolidate(&director, seed.round_id, 1, &full, false).map_err(|x| format!("pattern {n}: {x}"))?;
            ensure!(!r.provisional, "pattern {n}: ready gate gave a provisional report");
            r
        } else {
            blocked_patterns += 1;
            for who in [&director, &owner] {
                match e.consolidate(who, seed.round_id, 1, &full, false) {
                    Err(EngineError::GateBlocked { blocking }) => {
                        let got: BTreeSet<_> = blocking.iter().map(|b| (b.cost_centre_id, b.section_id)).collect();
                        ensure!(got == reopened, "pattern {n}: blockers {got:?}, expected {reopened:?}");
                    }
                    other => return Err(format!("pattern {n}: {who} strict consolidation gave {other:?}")),
                }
            }
            for who in [PrincipalId::new("mgr-direct"), admin.clone(), PrincipalId::new("auditor")] {
                let r = e.consolidate(&who, seed.round_id, 1, &full, true);
                ensure!(matches!(&r, Err(x) if x.is_denial()), "pattern {n}: {who} forced a provisional report");
            }
            let by_owner = e.consolidate(&owner, seed.round_id, 1, &full, true).map_err(|x| x.to_string())?;
            let r = e.consolidate(&director, seed.round_id, 1, &full, true).map_err(|x| x.to_string())?;
            ensure!(r.provisional && by_owner.provisional, "pattern {n}: report not marked provisional");
            ensure!(by_owner.totals == r.totals, "pattern {n}: owner and director disagree");
            r
        };
        ensure!(report_totals(&report) == naive, "pattern {n}: engine totals differ from the naive sum");
        ensure!(
            consolidation::verify_export(&e.export_report(&director, report.id).unwrap()),
            "pattern {n}: report export does not verify"
        );
    }
    Ok(format!(
        "100 patterns ({cells_total} cells) exact to the cent; {blocked_patterns} gated patterns blocked unless provisional by a senior role"
    ))
}

// ---- 5. data versioning ----

fn frozen_image(e: &Engine, round: RoundId, version: u32) -> Vec<u8> {
    let owner = PrincipalId::new("w-owner");
    let mut bytes = e.export_slice(&owner, round, version, &SliceFilter::default()).unwrap();
    let cells = e.get_slice(&owner, round, version, &SliceFilter::default()).unwrap();
    bytes.extend(serde_json::to_vec(&cells).unwrap());
    bytes
}

fn data_versioning() -> Outcome {
    let mut w = world(3);
    let mgr = PrincipalId::new("mgr");
    w.engine.add_principal(&w.admin, "mgr", "Manager").unwrap();
    w.engine.grant(&w.admin, &mgr, Role::User, Scope::AllDepartments).unwrap();
    for (i, cc) in w.centres.iter().enumerate() {
        for p in 1..=3 {
            w.engine.put_cell(&mgr, key(w.round, 1, *cc, w.section, "Rent", p), (i as i64 + 1) * 1000 + p as i64).unwrap();
        }
    }
    w.engine.open_next_version(&w.admin, w.round).unwrap();
    let before = w.engine.state().audit.len();
    let r = w.engine.put_cell(&mgr, key(w.round, 1, w.centres[0], w.section, "Rent", 1), 1);
    ensure!(matches!(r, Err(EngineError::VersionFrozen)), "write after freeze gave {r:?}");
    ensure!(w.engine.state().audit.len() == before + 1, "rejected write not recorded once");
    let mut frozen: BTreeMap<u32, Vec<u8>> = BTreeMap::from([(1, frozen_image(&w.engine, w.round, 1))]);
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut latest = 2u32;
    let (mut rejected, mut freezes) = (1, 1);
    for n in 0..1000 {
        let cc = *w.centres.choose(&mut rng).unwrap();
        let item = *ITEMS.choose(&mut rng).unwrap();
        let period = rng.gen_range(1..=12);
        match rng.gen_range(0..100) {
            0..=54 => {
                w.engine
                    .put_cell(&mgr, key(w.round, latest, cc, w.section, item, period), rng.gen_range(-1_000_000..1_000_000))
                    .map_err(|e| format!("op {n}: {e}"))?;
            }
            55..=74 => {
                let v = *frozen.keys().collect::<Vec<_>>().choose(&mut rng).unwrap();
                let r = w.engine.put_cell(&mgr, key(w.round, *v, cc, w.section, item, period), 5);
                ensure!(matches!(r, Err(EngineError::VersionFrozen)), "op {n}: write to frozen v{v} gave {r:?}");
                rejected += 1;
            }
            75..=84 => {
                let status = *[Status::NotStarted, Status::InProgress, Status::Completed].choose(&mut rng).unwrap();
                w.engine.set_status(&mgr, w.round, latest, cc, w.section, status).map_err(|e| format!("op {n}: {e}"))?;
            }
            85..=89 => {
                let csv = format!(
                    "fiscal,cost_centre,section,line_item,period,amount_cents\nFY{n},c-d0,Other,{item},{period},{}\n",
                    rng.gen_range(0..1000)
                );
                w.engine.import_actuals(&w.admin, &format!("FY{n}"), csv.as_bytes()).map_err(|e| format!("op {n}: {e}"))?;
            }
            90..=96 => {
                let scope: BTreeSet<DepartmentId> = w.depts.iter().cloned().collect();
                let v = rng.gen_range(1..=latest);
                w.engine
                    .consolidate(&PrincipalId::new("w-owner"), w.round, v, &scope, true)
                    .map_err(|e| format!("op {n}: {e}"))?;
            }
            _ => {
                let dv = w.engine.open_next_version(&w.admin, w.round).map_err(|e| format!("op {n}: {e}"))?;
                frozen.insert(latest, frozen_image(&w.engine, w.round, latest));
                latest = dv.version;
                freezes += 1;
            }
        }
        for (v, image) in &frozen {
            ensure!(frozen_image(&w.engine, w.round, *v) == *image, "op {n}: frozen v{v} changed");
        }
    }
    ensure!(w.engine.verify_chain().intact, "chain broken");
    Ok(format!(
        "freeze-then-write rejected ({rejected} attempts); {freezes} frozen versions byte-identical across 1000 operations"
    ))
}

// ---- 6. audit chain ----

/// `(commit, start, end)` of every complete frame.
fn frame_spans(bytes: &[u8]) -> Vec<(u64, usize, usize)> {
    let mut out = Vec::new();
    let mut at = 0;
    while at + 24 <= bytes.len() {
        let commit = u64::from_le_bytes(bytes[at + 4..at + 12].try_into().unwrap());
        let len = u32::from_le_bytes(bytes[at + 12..at + 16].try_into().unwrap()) as usize;
        let end = at + 24 + len + 32;
        assert!(end <= bytes.len());
        out.push((commit, at, end));
        at = end;
    }
    assert_eq!(at, bytes.len());
    out
}

fn random_workload(w: &mut World, rng: &mut ChaCha8Rng, calls: usize) {
    let actors = [w.admin.clone(), PrincipalId::new("w-owner"), PrincipalId::new("w-editor"), PrincipalId::new("nobody")];
    w.engine.add_principal(&w.admin, "nobody", "No Grants").ok();
    for _ in 0..calls {
        let who = actors.choose(rng).unwrap().clone();
        let cc = *w.centres.choose(rng).unwrap();
        let _ = match rng.gen_range(0..6) {
            0 | 1 => w.engine.put_cell(&who, key(w.round, 1, cc, w.section, "Rent", rng.gen_range(1..=12)), rng.gen()).map(drop),
            2 => w.engine.set_status(&who, w.round, 1, cc, w.section, Status::InProgress).map(drop),
            3 => w.engine.add_section(&who, &format!("S{}", rng.gen::<u32>())).map(drop),
            4 => w.engine.query_audit(&who, &AuditFilter::default()).map(drop),
            _ => w
                .engine
                .consolidate(&who, w.round, 1, &w.depts.iter().cloned().collect(), rng.gen())
                .map(drop),
        };
    }
}

fn audit_chain() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.gsj");
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    {
        let mut e = Engine::open(&path, false, clock()).unwrap();
        let admin = PrincipalId::new("admin");
        e.bootstrap_admin(&admin).unwrap();
        let mut w = world_in(e, admin, 3);
        random_workload(&mut w, &mut rng, 60);
        ensure!(w.engine.verify_chain().intact, "chain broken after workload");
    }
    let bytes = std::fs::read(&path).unwrap();
    let reopened = Engine::from_bytes(&bytes, clock()).map_err(|e| format!("reopen: {e}"))?;
    ensure!(reopened.verify_chain().intact, "chain broken after reopen");
    let spans = frame_spans(&bytes);
    ensure!(spans.len() == reopened.state().audit.len(), "one frame per record");

    // Every byte of every persisted record, flipped.
    let mut flips = 0;
    for &(commit, start, end) in &spans {
        for at in start..end {
            let mut bad = bytes.clone();
            bad[at] ^= rng.gen_range(1..=255u8);
            match Engine::from_bytes(&bad, clock()) {
                Err(EngineError::StoreCorrupt { first_bad_seq }) if first_bad_seq == commit => {}
                other => return Err(format!("flip at byte {at} (record {commit}): {:?}", other.map(|_| "accepted"))),
            }
            flips += 1;
        }
    }

    // Kill during a live workload, then restart.
    let mut acked_total = 0;
    for round in 0..3 {
        acked_total += kill_and_restart(&mut rng, round)?;
    }
    Ok(format!(
        "{} records verify; {flips}/{flips} single-byte flips attributed to the right record; 3 kill-and-restart runs consistent ({acked_total} acknowledged writes kept)",
        spans.len()
    ))
}

type Cell = (u64, u64, String, u8);

fn kill_and_restart(rng: &mut ChaCha8Rng, run: usize) -> std::result::Result<usize, String> {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store.gsj");
    let server = common::ServeProcess::start(dir.path(), &store);
    let world = govsheet::demo::seed(&server.admin()).map_err(|e| e.to_string())?;
    let centres: Vec<Value> = server.admin().get("/registry/cost-centres").map_err(|e| e.to_string())?;
    let sections: Vec<Value> = server.admin().get("/registry/sections").map_err(|e| e.to_string())?;
    let section_id = |name: &str| sections.iter().find(|s| s["name"] == name).unwrap()["id"].as_u64().unwrap();

    let acked: Arc<Mutex<BTreeMap<Cell, i64>>> = Arc::default();
    let attempted: Arc<Mutex<BTreeMap<Cell, i64>>> = Arc::default();
    let refused: Arc<Mutex<Vec<String>>> = Arc::default();
    let stop = Arc::new(AtomicBool::new(false));
    let mut workers = Vec::new();
    for (dept, _) in demo::DEPARTMENTS {
        let client = server.admin().with_token(world.tokens[&format!("mgr-{dept}")].clone());
        let mut keys = Vec::new();
        for period in 1..=12u8 {
            for (section, items) in demo::LINE_ITEMS {
                for item in items.iter() {
                    for c in centres.iter().filter(|c| c["department_id"] == dept && c["dormant"] == json!(false)) {
                        keys.push((c["id"].as_u64().unwrap(), section_id(section), item.to_string(), period));
                    }
                }
            }
        }
        let (acked, attempted, refused, stop) = (acked.clone(), attempted.clone(), refused.clone(), stop.clone());
        let (round, seed) = (world.round_id, rng.gen::<u64>());
        workers.push(thread::spawn(move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for cell in keys {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let amount = rng.gen_range(-1_000_000i64..1_000_000);
                attempted.lock().unwrap().insert(cell.clone(), amount);
                let body = json!({"round_id": round, "data_version": 1, "cost_centre_id": cell.0, "section_id": cell.1,
                                  "line_item": cell.2, "period": cell.3, "amount_cents": amount});
                match client.put::<Value>("/budget/cells", &body) {
                    Ok(_) => {
                        acked.lock().unwrap().insert(cell, amount);
                    }
                    Err(e @ ClientError::Api { .. }) => {
                        refused.lock().unwrap().push(e.to_string());
                        break;
                    }
                    Err(_) => break,
                }
            }
        }));
    }
    thread::sleep(Duration::from_millis(rng.gen_range(100..400)));
    server.kill();
    stop.store(true, Ordering::Relaxed);
    for w in workers {
        w.join().unwrap();
    }
    let refused = refused.lock().unwrap().clone();
    ensure!(refused.is_empty(), "run {run}: writes refused: {refused:?}");
    let acked = acked.lock().unwrap().clone();
    let attempted = attempted.lock().unwrap().clone();
    ensure!(!acked.is_empty(), "run {run}: no writes before the kill");

    let bytes = std::fs::read(&store).unwrap();
    ensure!(verify_store_bytes(&bytes).intact, "run {run}: store does not verify after the kill");
    let again = common::ServeProcess::start(dir.path(), &store);
    let verdict: Value = again.admin().get("/audit/verify").map_err(|e| e.to_string())?;
    ensure!(verdict["intact"] == json!(true), "run {run}: chain broken after restart");
    let director = again.admin().with_token(world.tokens["director"].clone());
    let cells: Vec<Value> = director.get(&format!("/budget/cells?round={}", world.round_id)).map_err(|e| e.to_string())?;
    let persisted: BTreeMap<Cell, i64> = cells
        .iter()
        .map(|c| {
            let k = &c["key"];
            (
                (
                    k["cost_centre_id"].as_u64().unwrap(),
                    k["section_id"].as_u64().unwrap(),
                    k["line_item"].as_str().unwrap().to_string(),
                    k["period"].as_u64().unwrap() as u8,
                ),
                c["amount"].as_i64().unwrap(),
            )
        })
        .collect();
    for (cell, amount) in &acked {
        ensure!(persisted.get(cell) == Some(amount), "run {run}: acknowledged write {cell:?} lost");
    }
    for (cell, amount) in &persisted {
        ensure!(attempted.get(cell) == Some(amount), "run {run}: cell {cell:?} was never written");
    }
    let writes: Vec<Value> = again.admin().get("/audit?action=WriteBudget&outcome=Ok").map_err(|e| e.to_string())?;
    ensure!(writes.len() == persisted.len(), "run {run}: {} write records for {} cells", writes.len(), persisted.len());
    Ok(acked.len())
}

// ---- 7. end-to-end cycle ----

struct Script {
    url: String,
    tokens: BTreeMap<String, String>,
    admin: Client,
    /// `(actor, action, outcome)` of every audited call made, in order.
    expected: Vec<(String, String, String)>,
}

impl Script {
    fn client(&self, who: &str) -> Client {
        match who {
            "admin" => self.admin.clone(),
            _ => Client::new(&self.url, Some(self.tokens[who].clone())),
        }
    }

    fn call(&mut self, who: &str, action: &str, f: impl FnOnce(&Client) -> std::result::Result<Value, ClientError>) -> std::result::Result<Value, String> {
        let r = f(&self.client(who));
        let outcome = match &r {
            Ok(_) => "Ok",
            Err(e) if e.status() == Some(403) => "Denied",
            Err(_) => "Error",
        };
        self.expected.push((who.to_string(), action.to_string(), outcome.to_string()));
        r.map_err(|e| format!("{who} {action}: {e}"))
    }
}

fn end_to_end_cycle() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store.gsj");
    let server = common::ServeProcess::start(dir.path(), &store);
    let world = govsheet::demo::seed(&server.admin()).map_err(|e| e.to_string())?;
    let start: Value = server.admin().get("/audit/verify").map_err(|e| e.to_string())?;
    let start = start["records"].as_u64().unwrap() as usize;
    let mut s = Script {
        url: server.url.clone(),
        tokens: world.tokens.clone(),
        admin: server.admin(),
        expected: Vec::new(),
    };
    let round = world.round_id;
    let centres: Vec<Value> = s.admin.get("/registry/cost-centres").map_err(|e| e.to_string())?;
    let sections: Vec<Value> = s.admin.get("/registry/sections").map_err(|e| e.to_string())?;
    let other = sections.iter().find(|x| x["name"] == "Other").unwrap()["id"].as_u64().unwrap();
    let live: Vec<(u64, String, String)> = centres
        .iter()
        .filter(|c| c["dormant"] == json!(false))
        .map(|c| {
            let dept = c["department_id"].as_str().unwrap().to_string();
            (c["id"].as_u64().unwrap(), c["code"].as_str().unwrap().to_string(), format!("mgr-{dept}"))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut figures: BTreeMap<(u64, &str, u8), i64> = BTreeMap::new();

    let status = |v: u32, cc: u64, st: &str| {
        json!({"round_id": round, "data_version": v, "cost_centre_id": cc, "section_id": other, "status": st})
    };
    let cell = |v: u32, cc: u64, item: &str, period: u8, amount: i64| {
        json!({"round_id": round, "data_version": v, "cost_centre_id": cc, "section_id": other,
               "line_item": item, "period": period, "amount_cents": amount})
    };
    let expected_totals = |figures: &BTreeMap<(u64, &str, u8), i64>| {
        let mut t: BTreeMap<(String, u8), i64> = BTreeMap::new();
        for ((_, item, period), amount) in figures {
            *t.entry((item.to_string(), *period)).or_insert(0) += amount;
        }
        t
    };
    let totals_of = |report: &Value| -> BTreeMap<(String, u8), i64> {
        report["totals"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| {
                (
                    (t["line_item"].as_str().unwrap().to_string(), t["period"].as_u64().unwrap() as u8),
                    t["amount_cents"].as_i64().unwrap(),
                )
            })
            .collect()
    };

    // Cycle 1: enter, complete, consolidate.
    for (cc, _, mgr) in &live {
        s.call(mgr, "SetStatus", |c| c.put("/status", &status(1, *cc, "InProgress")))?;
        for item in ["Travel", "Consumables"] {
            for period in 1..=3u8 {
                let amount = rng.gen_range(0..5_000_000);
                s.call(mgr, "WriteBudget", |c| c.put("/budget/cells", &cell(1, *cc, item, period, amount)))?;
                figures.insert((*cc, item, period), amount);
            }
        }
    }
    let gate: Value = s.client("director").get(&format!("/status?round={round}&version=1")).map_err(|e| e.to_string())?;
    ensure!(gate["ready"] == json!(false) && gate["blocking"].as_array().unwrap().len() == live.len(), "gate should list every centre in progress");
    let blocked = s.call("director", "Consolidate", |c| c.post("/consolidate", &json!({"round_id": round, "data_version": 1})));
    ensure!(blocked.is_err(), "consolidation before completion must be blocked");
    for (cc, _, mgr) in &live {
        s.call(mgr, "SetStatus", |c| c.put("/status", &status(1, *cc, "Completed")))?;
    }
    let first = s.call("director", "Consolidate", |c| c.post("/consolidate", &json!({"round_id": round, "data_version": 1})))?;
    ensure!(first["provisional"] == json!(false), "cycle 1 report provisional");
    ensure!(totals_of(&first) == expected_totals(&figures), "cycle 1 totals differ from the entered figures");

    // Advance to cycle 2; v1 freezes and v2 starts as a copy.
    s.call("admin", "AdminRegistry", |c| c.post(&format!("/rounds/{round}/submit"), &json!({})))?;
    let advanced = s.call("admin", "AdminRegistry", |c| c.post(&format!("/rounds/{round}/advance"), &json!({})))?;
    ensure!(advanced["cycle_number"] == json!(2), "round not in cycle 2: {advanced}");
    let versions: Vec<Value> = s.client("owner").get(&format!("/rounds/{round}/versions")).map_err(|e| e.to_string())?;
    ensure!(versions.len() == 2 && versions[0]["state"] == "Frozen" && versions[1]["state"] == "Editable", "versions: {versions:?}");
    let (cc0, _, mgr0) = live[0].clone();
    let late = s.call(&mgr0, "WriteBudget", |c| c.put("/budget/cells", &cell(1, cc0, "Travel", 1, 1)));
    ensure!(late.as_ref().err().is_some_and(|e| e.contains("VERSION_FROZEN")), "write to frozen v1: {late:?}");

    // Adjust in v2, complete again, re-consolidate.
    let mut deltas: BTreeMap<(String, u8), i64> = BTreeMap::new();
    let adjusting: Vec<_> = live.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    for (cc, _, mgr) in &adjusting {
        s.call(mgr, "SetStatus", |c| c.put("/status", &status(2, *cc, "InProgress")))?;
        let period = rng.gen_range(1..=3u8);
        let old = figures[&(*cc, "Travel", period)];
        let new = old + rng.gen_range(-100_000..100_000);
        s.call(mgr, "WriteBudget", |c| c.put("/budget/cells", &cell(2, *cc, "Travel", period, new)))?;
        figures.insert((*cc, "Travel", period), new);
        *deltas.entry(("Travel".into(), period)).or_insert(0) += new - old;
        s.call(mgr, "SetStatus", |c| c.put("/status", &status(2, *cc, "Completed")))?;
    }
    ensure!(!deltas.is_empty(), "no adjustments made");
    let second = s.call("director", "Consolidate", |c| c.post("/consolidate", &json!({"round_id": round})))?;
    ensure!(second["data_version"] == json!(2) && second["provisional"] == json!(false), "cycle 2 report: {second}");
    ensure!(totals_of(&second) == expected_totals(&figures), "cycle 2 totals differ from the adjusted figures");
    let kpi = s.call("director", "Consolidate", |c| {
        c.post("/kpi", &json!({"round_id": round, "data_version": 2, "comparator": {"kind": "PriorDataVersion"}}))
    })?;
    for line in kpi["lines"].as_array().unwrap() {
        let item = line["line_item"].as_str().unwrap();
        let delta = line["current"].as_i64().unwrap() - line["comparator_value"].as_i64().unwrap();
        ensure!(line["variance"] == json!(delta), "KPI variance for {item} inconsistent");
        let want: i64 = deltas.iter().filter(|((i, _), _)| i == item).map(|(_, d)| d).sum();
        ensure!(delta == want, "KPI variance for {item}: {delta}, expected {want}");
    }
    let kept: Value = s.client("director").get(&format!("/reports/{}", first["id"])).map_err(|e| e.to_string())?;
    ensure!(kept == first, "cycle 1 report changed");
    let csv = s.client("director").get_text(&format!("/reports/{}/export.csv", second["id"])).map_err(|e| e.to_string())?;
    ensure!(consolidation::verify_export(csv.as_bytes()), "report export does not verify");

    // Attribution: the log holds exactly the calls made, in order.
    let log: Vec<Value> = s.admin.get("/audit").map_err(|e| e.to_string())?;
    let ours = &log[start..start + s.expected.len()];
    for (i, (r, (actor, action, outcome))) in ours.iter().zip(&s.expected).enumerate() {
        ensure!(
            r["actor"] == json!(actor) && r["action"] == json!(action) && r["outcome"] == json!(outcome),
            "step {i}: logged {} {} {}, expected {actor} {action} {outcome}",
            r["actor"],
            r["action"],
            r["outcome"]
        );
    }
    ensure!(log.len() == start + s.expected.len(), "{} unexpected records", log.len() - start - s.expected.len());
    let verdict: Value = s.admin.get("/audit/verify").map_err(|e| e.to_string())?;
    ensure!(verdict["intact"] == json!(true), "chain broken");
    Ok(format!(
        "2 cycles over {} cost centres via HTTP only; {} steps, each attributed in the log",
        live.len(),
        s.expected.len()
    ))
}
