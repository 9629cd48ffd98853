//! The `/api/v1` HTTP surface. Every handler authenticates the bearer
//! token first; the engine call behind it authorizes, acts and writes the
//! audit record.

use std::collections::BTreeSet;
use std::time::Instant;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path, Request, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use chrono::{DateTime, Duration, Utc};
use govsheet_core::budget::{BudgetKey, Cents, SliceFilter};
use govsheet_core::consolidation::Comparator;
use govsheet_core::readiness::Status;
use govsheet_core::template::{TemplateDocument, Verdict};
use govsheet_core::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ADMIN_PRINCIPAL;

#[derive(Clone)]
pub struct AppState {
    pub engine: SharedEngine,
    admin_token: Option<String>,
}

impl AppState {
    pub fn new(engine: SharedEngine, admin_token: Option<String>) -> Self {
        Self { engine, admin_token }
    }

    /// Runs a mutation on the blocking pool; the engine serializes writers.
    async fn write<T: Send + 'static>(
        &self,
        f: impl FnOnce(&mut Engine) -> govsheet_core::Result<T> + Send + 'static,
    ) -> Result<T, ApiError> {
        let engine = self.engine.clone();
        Ok(tokio::task::spawn_blocking(move || engine.write(f)).await??)
    }

    async fn read<T: Send + 'static>(
        &self,
        actor: PrincipalId,
        f: impl FnOnce(&Engine, &PrincipalId) -> govsheet_core::Result<T> + Send + 'static,
    ) -> Result<T, ApiError> {
        let engine = self.engine.clone();
        Ok(tokio::task::spawn_blocking(move || engine.read(&actor, |e| f(e, &actor))).await??)
    }

    fn latest_version(&self, round: RoundId) -> u32 {
        self.engine
            .inspect(|e| e.state().latest_data_version(round).map(|d| d.version))
            .unwrap_or(1)
    }

    fn all_departments(&self) -> BTreeSet<DepartmentId> {
        self.engine.inspect(|e| e.state().departments.keys().cloned().collect())
    }
}

/// Errors as returned to clients: `{"error": {"code", "message", ...}}`.
#[derive(Debug)]
pub enum ApiError {
    Engine(EngineError),
    Unauthenticated,
    BadRequest(String),
    Internal(String),
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::AuthenticationFailed => ApiError::Unauthenticated,
            other => ApiError::Engine(other),
        }
    }
}

impl From<tokio::task::JoinError> for ApiError {
    fn from(e: tokio::task::JoinError) -> Self {
        ApiError::Internal(e.to_string())
    }
}

pub fn status_of(e: &EngineError) -> StatusCode {
    use EngineError::*;
    match e {
        AuthenticationFailed => StatusCode::UNAUTHORIZED,
        Denied { .. } => StatusCode::FORBIDDEN,
        UnknownPrincipal(_) | UnknownTemplate(_) | UnknownVersion(_) | UnknownRound(_) | UnknownGrant(_)
        | UnknownReport(_) | UnknownDepartment(_) => StatusCode::NOT_FOUND,
        DuplicateCode(_) | Duplicate(_) | RoundAlreadyOpen | InvalidState(_) | InFlightExists | NoLiveVersion
        | NoLiveTemplate | VersionFrozen | RoundNotOpen | GateBlocked { .. } => StatusCode::CONFLICT,
        UnknownKeyComponent(_) | InvalidScope | InvalidInput(_) | InvalidDocument(_) | MalformedRow { .. }
        | UnknownCostCentre { .. } | UnknownComparator(_) => StatusCode::UNPROCESSABLE_ENTITY,
        StoreCorrupt { .. } | Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::Unauthenticated => (
                StatusCode::UNAUTHORIZED,
                json!({"code": "AUTHENTICATION_FAILED", "message": "missing, unknown or expired token"}),
            ),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, json!({"code": "BAD_REQUEST", "message": m})),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({"code": "INTERNAL", "message": m})),
            ApiError::Engine(e) => {
                let mut body = json!({"code": e.code(), "message": e.to_string()});
                match &e {
                    EngineError::Denied { action, target, reason } => {
                        body["reason"] = json!(reason);
                        body["action"] = json!(action);
                        body["target"] = json!(target);
                    }
                    EngineError::GateBlocked { blocking } => body["blocking"] = json!(blocking),
                    EngineError::MalformedRow { line, .. } | EngineError::UnknownCostCentre { line, .. } => {
                        body["line"] = json!(line)
                    }
                    EngineError::StoreCorrupt { first_bad_seq } => body["first_bad_seq"] = json!(first_bad_seq),
                    _ => {}
                }
                (status_of(&e), body)
            }
        };
        (status, Json(json!({ "error": body }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// The authenticated principal.
pub struct Caller(pub PrincipalId);

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

impl FromRequestParts<AppState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, app: &AppState) -> Result<Self, ApiError> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or(ApiError::Unauthenticated)?;
        if let Some(admin) = &app.admin_token {
            if constant_time_eq(token.as_bytes(), admin.as_bytes()) {
                return Ok(Caller(PrincipalId::new(ADMIN_PRINCIPAL)));
            }
        }
        let token = token.to_string();
        let id = app.engine.inspect(|e| e.authenticate(&token))?;
        Ok(Caller(id))
    }
}

/// JSON body with errors in the API's format.
pub struct Body<T>(pub T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| Body(v))
            .map_err(|e: JsonRejection| ApiError::BadRequest(e.body_text()))
    }
}

/// Query string with errors in the API's format.
pub struct Q<T>(pub T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequestParts<S> for Q<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        axum::extract::Query::<T>::from_request_parts(parts, state)
            .await
            .map(|q| Q(q.0))
            .map_err(|e: QueryRejection| ApiError::BadRequest(e.body_text()))
    }
}

fn text(content_type: &'static str, body: impl Into<axum::body::Body>) -> Response {
    let mut r = Response::new(body.into());
    r.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    r
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/auth/token", post(mint_token))
        .route("/registry/users", get(list_users).post(add_user))
        .route("/registry/users/{id}", put(set_user_active))
        .route("/registry/departments", get(list_departments).post(add_department))
        .route("/registry/cost-centres", get(list_cost_centres).post(add_cost_centre))
        .route("/registry/cost-centres/{id}", put(set_dormant))
        .route("/registry/sections", get(list_sections).post(add_section))
        .route("/registry/applicability", put(set_applicability))
        .route("/grants", get(list_grants).post(grant))
        .route("/grants/{id}", axum::routing::delete(revoke))
        .route("/rounds", get(list_rounds).post(open_round))
        .route("/rounds/{id}/advance", post(advance_round))
        .route("/rounds/{id}/submit", post(submit_round))
        .route("/rounds/{id}/approve", post(approve_round))
        .route("/rounds/{id}/close", post(close_round))
        .route("/rounds/{id}/seed", post(seed_round))
        .route("/rounds/{id}/versions", get(data_versions))
        .route("/templates", get(list_templates).post(create_template))
        .route("/templates/{id}/wip", post(copy_to_wip))
        .route("/templates/{id}/history", get(history))
        .route("/versions/{id}", get(get_version))
        .route("/versions/{id}/lint", get(lint_version))
        .route("/versions/{id}/document", put(edit_document))
        .route("/versions/{id}/submit", post(submit_version))
        .route("/versions/{id}/audit", post(audit_version))
        .route("/versions/{id}/release", post(release_version))
        .route("/budget/cells", get(get_cells).put(put_cell))
        .route("/budget/export.csv", get(export_cells))
        .route("/budget/next-version", post(next_version))
        .route("/actuals/import", post(import_actuals))
        .route("/actuals", get(get_actuals))
        .route("/status", get(gate).put(set_status))
        .route("/status/matrix", get(matrix))
        .route("/consolidate", post(consolidate))
        .route("/kpi", post(kpi))
        .route("/reports/{id}", get(get_report))
        .route("/reports/{id}/export.csv", get(export_report))
        .route("/audit", get(query_audit))
        .route("/audit/export", get(export_audit))
        .route("/audit/verify", get(verify_audit))
        .with_state(app)
}

/// The API mounted under `/api/v1`, with request logging.
pub fn app(state: AppState) -> Router {
    Router::new()
        .nest("/api/v1", router(state))
        .layer(middleware::from_fn(log_request))
}

async fn log_request(req: Request, next: Next) -> Response {
    let (method, path) = (req.method().clone(), req.uri().path().to_string());
    let started = Instant::now();
    let response = next.run(req).await;
    tracing::info!(%method, %path, status = response.status().as_u16(), ms = started.elapsed().as_millis() as u64, "request");
    response
}

// ---- auth and registry ----

#[derive(Deserialize)]
struct TokenRequest {
    principal_id: PrincipalId,
    #[serde(default = "default_ttl")]
    ttl_seconds: i64,
}

fn default_ttl() -> i64 {
    24 * 3600
}

async fn mint_token(State(app): State<AppState>, Caller(p): Caller, Body(b): Body<TokenRequest>) -> ApiResult<MintedToken> {
    let ttl = Duration::seconds(b.ttl_seconds);
    app.write(move |e| e.mint_token(&p, &b.principal_id, ttl)).await.map(Json)
}

async fn list_users(State(app): State<AppState>, Caller(p): Caller) -> ApiResult<Vec<Principal>> {
    app.read(p, |e, p| e.list_principals(p)).await.map(Json)
}

#[derive(Deserialize)]
struct NewUser {
    id: String,
    #[serde(default)]
    display_name: Option<String>,
}

async fn add_user(State(app): State<AppState>, Caller(p): Caller, Body(b): Body<NewUser>) -> ApiResult<Principal> {
    let name = b.display_name.unwrap_or_else(|| b.id.clone());
    app.write(move |e| e.add_principal(&p, &b.id, &name)).await.map(Json)
}

#[derive(Deserialize)]
struct Active {
    active: bool,
}

async fn set_user_active(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<String>,
    Body(b): Body<Active>,
) -> ApiResult<Principal> {
    app.write(move |e| e.set_principal_active(&p, &PrincipalId::new(id), b.active)).await.map(Json)
}

async fn list_departments(State(app): State<AppState>, Caller(p): Caller) -> ApiResult<Vec<Department>> {
    app.read(p, |e, p| e.list_departments(p)).await.map(Json)
}

#[derive(Deserialize)]
struct NewDepartment {
    id: String,
    name: String,
    #[serde(default)]
    parent_manager: Option<PrincipalId>,
}

async fn add_department(State(app): State<AppState>, Caller(p): Caller, Body(b): Body<NewDepartment>) -> ApiResult<Department> {
    app.write(move |e| e.add_department(&p, &b.id, &b.name, b.parent_manager)).await.map(Json)
}

async fn list_cost_centres(State(app): State<AppState>, Caller(p): Caller) -> ApiResult<Vec<CostCentre>> {
    app.read(p, |e, p| e.list_cost_centres(p)).await.map(Json)
}

#[derive(Deserialize)]
struct NewCostCentre {
    code: String,
    name: String,
    department_id: DepartmentId,
    #[serde(default)]
    dormant: bool,
}

async fn add_cost_centre(State(app): State<AppState>, Caller(p): Caller, Body(b): Body<NewCostCentre>) -> ApiResult<CostCentre> {
    app.write(move |e| e.create_cost_centre(&p, &b.code, &b.name, &b.department_id, b.dormant))
        .await
        .map(Json)
}

#[derive(Deserialize)]
struct Dormant {
    dormant: bool,
}

async fn set_dormant(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
    Body(b): Body<Dormant>,
) -> ApiResult<CostCentre> {
    app.write(move |e| e.set_cost_centre_dormant(&p, CostCentreId(id), b.dormant)).await.map(Json)
}

async fn list_sections(State(app): State<AppState>, Caller(p): Caller) -> ApiResult<Vec<Section>> {
    app.read(p, |e, p| e.list_sections(p)).await.map(Json)
}

#[derive(Deserialize)]
struct NewSection {
    name: String,
}

async fn add_section(State(app): State<AppState>, Caller(p): Caller, Body(b): Body<NewSection>) -> ApiResult<Section> {
    app.write(move |e| e.add_section(&p, &b.name)).await.map(Json)
}

#[derive(Deserialize)]
struct Applicability {
    cost_centre_id: CostCentreId,
    section_id: SectionId,
    applicable: bool,
}

async fn set_applicability(State(app): State<AppState>, Caller(p): Caller, Body(b): Body<Applicability>) -> ApiResult<Value> {
    app.write(move |e| e.set_applicability(&p, b.cost_centre_id, b.section_id, b.applicable))
        .await
        .map(|()| Json(json!({"applicable": b.applicable})))
}

async fn list_grants(State(app): State<AppState>, Caller(p): Caller) -> ApiResult<Vec<RoleGrant>> {
    app.read(p, |e, p| e.list_grants(p)).await.map(Json)
}

#[derive(Deserialize)]
struct NewGrant {
    principal_id: PrincipalId,
    role: Role,
    /// Omitted for all departments.
    #[serde(default)]
    departments: Option<BTreeSet<DepartmentId>>,
}

async fn grant(State(app): State<AppState>, Caller(p): Caller, Body(b): Body<NewGrant>) -> ApiResult<RoleGrant> {
    let scope = match b.departments {
        None => Scope::AllDepartments,
        Some(ds) => Scope::Departments(ds),
    };
    app.write(move |e| e.grant(&p, &b.principal_id, b.role, scope)).await.map(Json)
}

async fn revoke(State(app): State<AppState>, Caller(p): Caller, Path(id): Path<u64>) -> ApiResult<RoleGrant> {
    app.write(move |e| e.revoke(&p, GrantId(id))).await.map(Json)
}

// ---- rounds ----

async fn list_rounds(State(app): State<AppState>, Caller(p): Caller) -> ApiResult<Vec<BudgetRound>> {
    app.read(p, |e, p| e.list_rounds(p)).await.map(Json)
}

#[derive(Deserialize)]
struct NewRound {
    label: String,
}

async fn open_round(State(app): State<AppState>, Caller(p): Caller, Body(b): Body<NewRound>) -> ApiResult<BudgetRound> {
    app.write(move |e| e.open_round(&p, &b.label)).await.map(Json)
}

async fn advance_round(State(app): State<AppState>, Caller(p): Caller, Path(id): Path<u64>) -> ApiResult<BudgetRound> {
    app.write(move |e| e.advance_cycle(&p, RoundId(id))).await.map(Json)
}

async fn submit_round(State(app): State<AppState>, Caller(p): Caller, Path(id): Path<u64>) -> ApiResult<BudgetRound> {
    app.write(move |e| e.submit_round(&p, RoundId(id))).await.map(Json)
}

async fn approve_round(State(app): State<AppState>, Caller(p): Caller, Path(id): Path<u64>) -> ApiResult<BudgetRound> {
    app.write(move |e| e.approve_round(&p, RoundId(id))).await.map(Json)
}

async fn close_round(State(app): State<AppState>, Caller(p): Caller, Path(id): Path<u64>) -> ApiResult<BudgetRound> {
    app.write(move |e| e.close_round(&p, RoundId(id))).await.map(Json)
}

#[derive(Deserialize)]
struct SeedRequest {
    template_id: TemplateId,
    #[serde(default)]
    copy_from: Option<RoundId>,
}

async fn seed_round(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
    Body(b): Body<SeedRequest>,
) -> ApiResult<RoundSeed> {
    app.write(move |e| e.seed_round(&p, RoundId(id), b.template_id, b.copy_from)).await.map(Json)
}

async fn data_versions(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
) -> ApiResult<Vec<govsheet_core::budget::DataVersion>> {
    app.read(p, move |e, p| e.data_versions(p, RoundId(id))).await.map(Json)
}

// ---- templates ----

async fn list_templates(State(app): State<AppState>, Caller(p): Caller) -> ApiResult<Vec<template::Template>> {
    app.read(p, |e, p| e.list_templates(p)).await.map(Json)
}

#[derive(Deserialize)]
struct NewTemplate {
    name: String,
    document: TemplateDocument,
}

async fn create_template(
    State(app): State<AppState>,
    Caller(p): Caller,
    Body(b): Body<NewTemplate>,
) -> ApiResult<template::TemplateVersion> {
    app.write(move |e| e.create_template(&p, &b.name, b.document)).await.map(Json)
}

async fn copy_to_wip(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
) -> ApiResult<template::TemplateVersion> {
    app.write(move |e| e.copy_to_wip(&p, TemplateId(id))).await.map(Json)
}

async fn history(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
) -> ApiResult<Vec<template::HistoryEntry>> {
    app.read(p, move |e, p| e.version_history(p, TemplateId(id))).await.map(Json)
}

async fn get_version(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
) -> ApiResult<template::TemplateVersion> {
    app.read(p, move |e, p| e.get_version(p, VersionId(id))).await.map(Json)
}

async fn lint_version(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
) -> ApiResult<Vec<template::LintViolation>> {
    app.read(p, move |e, p| e.lint_version(p, VersionId(id))).await.map(Json)
}

#[derive(Deserialize)]
struct DocumentBody {
    document: TemplateDocument,
}

async fn edit_document(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
    Body(b): Body<DocumentBody>,
) -> ApiResult<template::TemplateVersion> {
    app.write(move |e| e.edit_wip(&p, VersionId(id), b.document)).await.map(Json)
}

async fn submit_version(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
) -> ApiResult<template::TemplateVersion> {
    app.write(move |e| e.submit_for_audit(&p, VersionId(id))).await.map(Json)
}

#[derive(Deserialize)]
struct AuditVerdict {
    verdict: Verdict,
    #[serde(default)]
    note: String,
}

async fn audit_version(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
    Body(b): Body<AuditVerdict>,
) -> ApiResult<template::TemplateVersion> {
    app.write(move |e| e.audit_decision(&p, VersionId(id), b.verdict, &b.note)).await.map(Json)
}

async fn release_version(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
) -> ApiResult<template::TemplateVersion> {
    app.write(move |e| e.release_live(&p, VersionId(id))).await.map(Json)
}

// ---- budget data ----

/// Comma separated values in a query string.
fn list<T>(raw: &Option<String>, parse: impl Fn(&str) -> Result<T, ApiError>) -> Result<Option<BTreeSet<T>>, ApiError>
where
    T: Ord,
{
    raw.as_ref()
        .map(|s| s.split(',').filter(|x| !x.is_empty()).map(|x| parse(x.trim())).collect())
        .transpose()
}

fn number(field: &'static str) -> impl Fn(&str) -> Result<u64, ApiError> {
    move |s| s.parse().map_err(|_| ApiError::BadRequest(format!("{field}: {s:?} is not a number")))
}

#[derive(Deserialize)]
struct SliceQuery {
    round: u64,
    #[serde(default)]
    version: Option<u32>,
    #[serde(default)]
    departments: Option<String>,
    #[serde(default)]
    cost_centres: Option<String>,
    #[serde(default)]
    sections: Option<String>,
    #[serde(default)]
    periods: Option<String>,
}

impl SliceQuery {
    fn filter(&self) -> Result<SliceFilter, ApiError> {
        Ok(SliceFilter {
            departments: list(&self.departments, |d| Ok(DepartmentId::new(d)))?,
            cost_centres: list(&self.cost_centres, |c| number("cost_centres")(c).map(CostCentreId))?,
            sections: list(&self.sections, |c| number("sections")(c).map(SectionId))?,
            periods: list(&self.periods, |c| {
                number("periods")(c).and_then(|n| u8::try_from(n).map_err(|_| ApiError::BadRequest("periods".into())))
            })?,
        })
    }
}

async fn get_cells(State(app): State<AppState>, Caller(p): Caller, Q(q): Q<SliceQuery>) -> ApiResult<Vec<govsheet_core::budget::BudgetCell>> {
    let filter = q.filter()?;
    let round = RoundId(q.round);
    let version = q.version.unwrap_or_else(|| app.latest_version(round));
    app.read(p, move |e, p| e.get_slice(p, round, version, &filter)).await.map(Json)
}

async fn export_cells(State(app): State<AppState>, Caller(p): Caller, Q(q): Q<SliceQuery>) -> Result<Response, ApiError> {
    let filter = q.filter()?;
    let round = RoundId(q.round);
    let version = q.version.unwrap_or_else(|| app.latest_version(round));
    let bytes = app.read(p, move |e, p| e.export_slice(p, round, version, &filter)).await?;
    Ok(text("text/csv; charset=utf-8", bytes))
}

#[derive(Deserialize)]
struct CellWrite {
    round_id: RoundId,
    data_version: u32,
    cost_centre_id: CostCentreId,
    section_id: SectionId,
    line_item: String,
    period: u8,
    amount_cents: Cents,
}

async fn put_cell(State(app): State<AppState>, Caller(p): Caller, Body(b): Body<CellWrite>) -> ApiResult<govsheet_core::budget::BudgetCell> {
    let key = BudgetKey {
        round_id: b.round_id,
        data_version: b.data_version,
        cost_centre_id: b.cost_centre_id,
        section_id: b.section_id,
        line_item: b.line_item,
        period: b.period,
    };
    app.write(move |e| e.put_cell(&p, key, b.amount_cents)).await.map(Json)
}

#[derive(Deserialize)]
struct RoundRef {
    round_id: RoundId,
}

async fn next_version(
    State(app): State<AppState>,
    Caller(p): Caller,
    Body(b): Body<RoundRef>,
) -> ApiResult<govsheet_core::budget::DataVersion> {
    app.write(move |e| e.open_next_version(&p, b.round_id)).await.map(Json)
}

#[derive(Deserialize)]
struct Fiscal {
    fiscal: String,
}

async fn import_actuals(
    State(app): State<AppState>,
    Caller(p): Caller,
    Q(q): Q<Fiscal>,
    body: axum::body::Bytes,
) -> ApiResult<govsheet_core::budget::ImportSummary> {
    app.write(move |e| e.import_actuals(&p, &q.fiscal, &body)).await.map(Json)
}

async fn get_actuals(
    State(app): State<AppState>,
    Caller(p): Caller,
    Q(q): Q<Fiscal>,
) -> ApiResult<Vec<govsheet_core::budget::ActualsRecord>> {
    app.read(p, move |e, p| e.actuals(p, &q.fiscal)).await.map(Json)
}

// ---- readiness ----

#[derive(Deserialize)]
struct GateQuery {
    round: u64,
    #[serde(default)]
    version: Option<u32>,
    /// Comma separated; all departments when omitted.
    #[serde(default)]
    departments: Option<String>,
}

async fn gate(State(app): State<AppState>, Caller(p): Caller, Q(q): Q<GateQuery>) -> ApiResult<readiness::GateResult> {
    let round = RoundId(q.round);
    let version = q.version.unwrap_or_else(|| app.latest_version(round));
    let scope = list(&q.departments, |d| Ok(DepartmentId::new(d)))?.unwrap_or_else(|| app.all_departments());
    app.read(p, move |e, p| e.gate_check(p, round, version, &scope)).await.map(Json)
}

#[derive(Deserialize)]
struct StatusWrite {
    round_id: RoundId,
    data_version: u32,
    cost_centre_id: CostCentreId,
    section_id: SectionId,
    status: Status,
}

async fn set_status(
    State(app): State<AppState>,
    Caller(p): Caller,
    Body(b): Body<StatusWrite>,
) -> ApiResult<readiness::SectionStatus> {
    app.write(move |e| e.set_status(&p, b.round_id, b.data_version, b.cost_centre_id, b.section_id, b.status))
        .await
        .map(Json)
}

#[derive(Deserialize)]
struct MatrixQuery {
    round: u64,
    #[serde(default)]
    version: Option<u32>,
    /// `json` (default) or `csv`.
    #[serde(default)]
    format: Option<String>,
}

async fn matrix(State(app): State<AppState>, Caller(p): Caller, Q(q): Q<MatrixQuery>) -> Result<Response, ApiError> {
    let round = RoundId(q.round);
    let version = q.version.unwrap_or_else(|| app.latest_version(round));
    let m = app.read(p, move |e, p| e.status_matrix(p, round, version)).await?;
    match q.format.as_deref() {
        None | Some("json") => Ok(Json(m).into_response()),
        Some("csv") => Ok(text("text/csv; charset=utf-8", m.to_csv())),
        Some(other) => Err(ApiError::BadRequest(format!("unknown format {other:?}"))),
    }
}

// ---- consolidation ----

#[derive(Deserialize)]
struct ConsolidateRequest {
    round_id: RoundId,
    #[serde(default)]
    data_version: Option<u32>,
    /// All registered departments when omitted.
    #[serde(default)]
    departments: Option<BTreeSet<DepartmentId>>,
    #[serde(default)]
    allow_provisional: bool,
}

async fn consolidate(
    State(app): State<AppState>,
    Caller(p): Caller,
    Body(b): Body<ConsolidateRequest>,
) -> ApiResult<consolidation::ConsolidationReport> {
    let version = b.data_version.unwrap_or_else(|| app.latest_version(b.round_id));
    let scope = b.departments.unwrap_or_else(|| app.all_departments());
    app.write(move |e| e.consolidate(&p, b.round_id, version, &scope, b.allow_provisional))
        .await
        .map(Json)
}

#[derive(Deserialize)]
struct KpiRequest {
    round_id: RoundId,
    #[serde(default)]
    data_version: Option<u32>,
    #[serde(default)]
    departments: Option<BTreeSet<DepartmentId>>,
    comparator: Comparator,
}

async fn kpi(State(app): State<AppState>, Caller(p): Caller, Body(b): Body<KpiRequest>) -> ApiResult<consolidation::KpiReport> {
    let version = b.data_version.unwrap_or_else(|| app.latest_version(b.round_id));
    let scope = b.departments.unwrap_or_else(|| app.all_departments());
    app.write(move |e| e.kpi_report(&p, b.round_id, version, &scope, b.comparator))
        .await
        .map(Json)
}

async fn get_report(
    State(app): State<AppState>,
    Caller(p): Caller,
    Path(id): Path<u64>,
) -> ApiResult<consolidation::ConsolidationReport> {
    app.read(p, move |e, p| e.get_report(p, ReportId(id))).await.map(Json)
}

async fn export_report(State(app): State<AppState>, Caller(p): Caller, Path(id): Path<u64>) -> Result<Response, ApiError> {
    let bytes = app.read(p, move |e, p| e.export_report(p, ReportId(id))).await?;
    Ok(text("text/csv; charset=utf-8", bytes))
}

// ---- audit ----

#[derive(Deserialize)]
struct AuditQuery {
    #[serde(default)]
    actor: Option<PrincipalId>,
    #[serde(default)]
    action: Option<String>,
    #[serde(default)]
    outcome: Option<String>,
    #[serde(default)]
    from: Option<DateTime<Utc>>,
    #[serde(default)]
    to: Option<DateTime<Utc>>,
    #[serde(default)]
    target_prefix: Option<String>,
}

async fn query_audit(State(app): State<AppState>, Caller(p): Caller, Q(q): Q<AuditQuery>) -> ApiResult<Vec<AuditRecord>> {
    let action = q
        .action
        .map(|a| Action::parse(&a).ok_or_else(|| ApiError::BadRequest(format!("unknown action {a:?}"))))
        .transpose()?;
    let outcome = q
        .outcome
        .map(|o| audit::parse_outcome(&o).ok_or_else(|| ApiError::BadRequest(format!("unknown outcome {o:?}"))))
        .transpose()?;
    let filter = AuditFilter {
        actor: q.actor,
        action,
        outcome,
        from: q.from,
        to: q.to,
        target_prefix: q.target_prefix,
    };
    app.write(move |e| e.query_audit(&p, &filter)).await.map(Json)
}

async fn export_audit(State(app): State<AppState>, Caller(p): Caller) -> Result<Response, ApiError> {
    let body = app.write(move |e| e.export_audit(&p)).await?;
    Ok(text("text/plain; charset=utf-8", body))
}

#[derive(Serialize)]
struct VerifyResponse {
    intact: bool,
    first_bad_seq: Option<u64>,
    records: usize,
}

async fn verify_audit(State(app): State<AppState>, Caller(p): Caller) -> ApiResult<VerifyResponse> {
    let (verdict, records) = app
        .read(p, |e, p| Ok((e.verify_chain_as(p)?, e.state().audit.len())))
        .await?;
    Ok(Json(VerifyResponse {
        intact: verdict.intact,
        first_bad_seq: verdict.first_bad_seq,
        records,
    }))
}
