use std::collections::BTreeSet;

use chrono::{DateTime, Duration, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{require, Effect, Engine};
use crate::access::Action;
use crate::clock::format_millis;
use crate::error::{EngineError, Result};
use crate::model::*;
use crate::state::{Mutation, SessionToken, State};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MintedToken {
    pub token: String,
    pub principal_id: PrincipalId,
    pub expires_at: DateTime<Utc>,
}

pub(crate) fn token_hash(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

fn admin(state: &State, actor: &PrincipalId, target: &str) -> Result<()> {
    require(state, actor, Action::AdminRegistry, None, target)
}

fn check_id(field: &str, id: &str) -> Result<()> {
    if id.trim().is_empty() {
        return Err(EngineError::InvalidInput(format!("{field} must not be empty")));
    }
    check_text(field, id)
}

impl Engine {
    /// Creates the bootstrap administrator with an all-departments Admin
    /// grant if it does not exist yet.
    pub fn bootstrap_admin(&mut self, id: &PrincipalId) -> Result<()> {
        if self.state.principals.contains_key(id) {
            return Ok(());
        }
        check_id("principal id", id.as_str())?;
        let now = self.clock.now();
        let grant = RoleGrant {
            id: self.state.next_grant_id(),
            principal_id: id.clone(),
            role: Role::Admin,
            scope: Scope::AllDepartments,
        };
        let draft = crate::audit::AuditDraft {
            actor: id.clone(),
            action: Action::AdminRegistry,
            target: format!("registry/users/{id}"),
            outcome: crate::audit::Outcome::Ok,
            detail: "bootstrap administrator".into(),
        };
        let mutations = vec![
            Mutation::PutPrincipal(Principal {
                id: id.clone(),
                display_name: id.to_string(),
                active: true,
            }),
            Mutation::PutGrant(grant),
        ];
        self.commit(draft, mutations, now)?;
        Ok(())
    }

    pub fn add_principal(&mut self, actor: &PrincipalId, id: &str, display_name: &str) -> Result<Principal> {
        let target = format!("registry/users/{id}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            admin(s, actor, &target)?;
            check_id("principal id", id)?;
            check_text("display name", display_name)?;
            let pid = PrincipalId::new(id);
            if s.principals.contains_key(&pid) {
                return Err(EngineError::Duplicate(format!("principal {id}")));
            }
            let p = Principal {
                id: pid,
                display_name: display_name.to_string(),
                active: true,
            };
            Ok(Effect::new(p.clone(), vec![Mutation::PutPrincipal(p)], "created"))
        })
    }

    pub fn set_principal_active(&mut self, actor: &PrincipalId, id: &PrincipalId, active: bool) -> Result<Principal> {
        let target = format!("registry/users/{id}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            admin(s, actor, &target)?;
            let mut p = s
                .principals
                .get(id)
                .cloned()
                .ok_or_else(|| EngineError::UnknownPrincipal(id.clone()))?;
            p.active = active;
            Ok(Effect::new(p.clone(), vec![Mutation::PutPrincipal(p)], format!("active={active}")))
        })
    }

    pub fn add_department(
        &mut self,
        actor: &PrincipalId,
        id: &str,
        name: &str,
        parent_manager: Option<PrincipalId>,
    ) -> Result<Department> {
        let target = format!("registry/departments/{id}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            admin(s, actor, &target)?;
            check_id("department id", id)?;
            check_text("department name", name)?;
            let did = DepartmentId::new(id);
            if s.departments.contains_key(&did) {
                return Err(EngineError::Duplicate(format!("department {id}")));
            }
            if let Some(m) = &parent_manager {
                if !s.principals.contains_key(m) {
                    return Err(EngineError::UnknownPrincipal(m.clone()));
                }
            }
            let d = Department {
                id: did,
                name: name.to_string(),
                parent_manager,
            };
            Ok(Effect::new(d.clone(), vec![Mutation::PutDepartment(d)], "created"))
        })
    }

    pub fn create_cost_centre(
        &mut self,
        actor: &PrincipalId,
        code: &str,
        name: &str,
        department_id: &DepartmentId,
        dormant: bool,
    ) -> Result<CostCentre> {
        let target = format!("registry/cost-centres/{code}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            admin(s, actor, &target)?;
            check_id("cost centre code", code)?;
            check_text("cost centre name", name)?;
            if s.cost_centre_by_code(code).is_some() {
                return Err(EngineError::DuplicateCode(code.to_string()));
            }
            if !s.departments.contains_key(department_id) {
                return Err(EngineError::UnknownDepartment(department_id.to_string()));
            }
            let cc = CostCentre {
                id: s.next_cost_centre_id(),
                code: code.to_string(),
                name: name.to_string(),
                department_id: department_id.clone(),
                dormant,
            };
            let detail = format!("department={department_id} dormant={dormant}");
            Ok(Effect::new(cc.clone(), vec![Mutation::PutCostCentre(cc)], detail))
        })
    }

    /// Cost centres are never deleted; they go dormant.
    pub fn set_cost_centre_dormant(&mut self, actor: &PrincipalId, id: CostCentreId, dormant: bool) -> Result<CostCentre> {
        let code = self.state.cost_centres.get(&id).map(|c| c.code.clone()).unwrap_or_else(|| id.to_string());
        let target = format!("registry/cost-centres/{code}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            admin(s, actor, &target)?;
            let mut cc = s
                .cost_centres
                .get(&id)
                .cloned()
                .ok_or_else(|| EngineError::UnknownKeyComponent(format!("cost centre {id}")))?;
            cc.dormant = dormant;
            Ok(Effect::new(cc.clone(), vec![Mutation::PutCostCentre(cc)], format!("dormant={dormant}")))
        })
    }

    pub fn add_section(&mut self, actor: &PrincipalId, name: &str) -> Result<Section> {
        let target = format!("registry/sections/{name}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            admin(s, actor, &target)?;
            check_id("section name", name)?;
            if s.section_by_name(name).is_some() {
                return Err(EngineError::Duplicate(format!("section {name}")));
            }
            let section = Section {
                id: s.next_section_id(),
                name: name.to_string(),
            };
            Ok(Effect::new(section.clone(), vec![Mutation::PutSection(section)], "created"))
        })
    }

    /// Marks a section as (not) applicable to a cost centre; rounds opened
    /// afterwards start those pairs as NotApplicable.
    pub fn set_applicability(
        &mut self,
        actor: &PrincipalId,
        cost_centre: CostCentreId,
        section: SectionId,
        applicable: bool,
    ) -> Result<()> {
        let target = format!("registry/applicability/{cost_centre}/{section}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            admin(s, actor, &target)?;
            if !s.cost_centres.contains_key(&cost_centre) {
                return Err(EngineError::UnknownKeyComponent(format!("cost centre {cost_centre}")));
            }
            if !s.sections.contains_key(&section) {
                return Err(EngineError::UnknownKeyComponent(format!("section {section}")));
            }
            let m = Mutation::SetApplicable {
                cost_centre_id: cost_centre,
                section_id: section,
                applicable,
            };
            Ok(Effect::new((), vec![m], format!("applicable={applicable}")))
        })
    }

    /// Adds a grant. Departments already covered by an existing grant of
    /// the same principal and role are dropped; if nothing new remains the
    /// covering grant is returned unchanged.
    pub fn grant(&mut self, actor: &PrincipalId, principal: &PrincipalId, role: Role, scope: Scope) -> Result<RoleGrant> {
        let target = format!("grants/{principal}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            admin(s, actor, &target)?;
            if !s.principals.contains_key(principal) {
                return Err(EngineError::UnknownPrincipal(principal.clone()));
            }
            if let Scope::Departments(set) = &scope {
                if set.is_empty() {
                    return Err(EngineError::InvalidScope);
                }
                if let Some(d) = set.iter().find(|d| !s.departments.contains_key(d)) {
                    return Err(EngineError::UnknownDepartment(d.to_string()));
                }
            }
            let existing: Vec<&RoleGrant> = s
                .grants
                .values()
                .filter(|g| &g.principal_id == principal && g.role == role)
                .collect();
            let uncovered = match &scope {
                Scope::AllDepartments => {
                    if let Some(g) = existing.iter().find(|g| g.scope == Scope::AllDepartments) {
                        return Ok(Effect::new((*g).clone(), vec![], format!("collapsed into grant {}", g.id)));
                    }
                    Scope::AllDepartments
                }
                Scope::Departments(set) => {
                    let rest: BTreeSet<DepartmentId> = set
                        .iter()
                        .filter(|d| !existing.iter().any(|g| g.scope.covers(d)))
                        .cloned()
                        .collect();
                    if rest.is_empty() {
                        let covering = existing
                            .iter()
                            .find(|g| set.iter().all(|d| g.scope.covers(d)))
                            .or(existing.first())
                            .expect("covered implies an existing grant");
                        return Ok(Effect::new(
                            (*covering).clone(),
                            vec![],
                            format!("collapsed into grant {}", covering.id),
                        ));
                    }
                    Scope::Departments(rest)
                }
            };
            let g = RoleGrant {
                id: s.next_grant_id(),
                principal_id: principal.clone(),
                role,
                scope: uncovered,
            };
            let detail = format!("grant={} role={} scope={}", g.id, g.role, g.scope);
            Ok(Effect::new(g.clone(), vec![Mutation::PutGrant(g)], detail))
        })
    }

    pub fn revoke(&mut self, actor: &PrincipalId, grant_id: GrantId) -> Result<RoleGrant> {
        let target = format!("grants/{grant_id}");
        self.run(actor, Action::AdminRegistry, target.clone(), |s, _| {
            admin(s, actor, &target)?;
            let g = s
                .grants
                .get(&grant_id)
                .cloned()
                .ok_or_else(|| EngineError::UnknownGrant(grant_id.to_string()))?;
            let detail = format!("principal={} role={} scope={}", g.principal_id, g.role, g.scope);
            Ok(Effect::new(g, vec![Mutation::RemoveGrant(grant_id)], detail))
        })
    }

    /// Issues a bearer token for `principal`. Only its hash is stored.
    pub fn mint_token(&mut self, actor: &PrincipalId, principal: &PrincipalId, ttl: Duration) -> Result<MintedToken> {
        let target = format!("tokens/{principal}");
        let mut secret = [0u8; 32];
        rand::thread_rng().fill_bytes(&mut secret);
        let token = hex::encode(secret);
        self.run(actor, Action::AdminRegistry, target.clone(), |s, now| {
            admin(s, actor, &target)?;
            if !s.principals.contains_key(principal) {
                return Err(EngineError::UnknownPrincipal(principal.clone()));
            }
            if ttl <= Duration::zero() {
                return Err(EngineError::InvalidInput("token lifetime must be positive".into()));
            }
            let expires_at = now + ttl;
            let record = SessionToken {
                token_hash: token_hash(&token),
                principal_id: principal.clone(),
                expires_at,
            };
            let minted = MintedToken {
                token: token.clone(),
                principal_id: principal.clone(),
                expires_at,
            };
            Ok(Effect::new(
                minted,
                vec![Mutation::PutToken(record)],
                format!("expires={}", format_millis(&expires_at)),
            ))
        })
    }

    /// Maps a bearer token to its principal. Unknown and expired tokens
    /// fail, as do tokens of deactivated principals.
    pub fn authenticate(&self, token: &str) -> Result<PrincipalId> {
        let rec = self
            .state
            .tokens
            .get(&token_hash(token))
            .ok_or(EngineError::AuthenticationFailed)?;
        if rec.expires_at <= self.clock.now() {
            return Err(EngineError::AuthenticationFailed);
        }
        if !self.state.principals.get(&rec.principal_id).is_some_and(|p| p.active) {
            return Err(EngineError::AuthenticationFailed);
        }
        Ok(rec.principal_id.clone())
    }

    fn reference<T>(&self, actor: &PrincipalId, target: &str, f: impl FnOnce(&State) -> T) -> Result<T> {
        require(&self.state, actor, Action::ReadReference, None, target)?;
        Ok(f(&self.state))
    }

    pub fn list_principals(&self, actor: &PrincipalId) -> Result<Vec<Principal>> {
        self.reference(actor, "registry/users", |s| s.principals.values().cloned().collect())
    }

    pub fn list_departments(&self, actor: &PrincipalId) -> Result<Vec<Department>> {
        self.reference(actor, "registry/departments", |s| s.departments.values().cloned().collect())
    }

    pub fn list_cost_centres(&self, actor: &PrincipalId) -> Result<Vec<CostCentre>> {
        self.reference(actor, "registry/cost-centres", |s| s.cost_centres.values().cloned().collect())
    }

    pub fn list_sections(&self, actor: &PrincipalId) -> Result<Vec<Section>> {
        self.reference(actor, "registry/sections", |s| s.sections.values().cloned().collect())
    }

    pub fn list_grants(&self, actor: &PrincipalId) -> Result<Vec<RoleGrant>> {
        require(&self.state, actor, Action::AdminRegistry, None, "grants")?;
        Ok(self.state.grants.values().cloned().collect())
    }
}
