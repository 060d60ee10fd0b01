//! Routes and handlers.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, RawQuery, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use genrules::formats::{
    decode, parse_generalized, parse_ruleset_any, parse_taxonomies, parse_transactions, validate_document,
    write_generalized, write_ruleset, ArtifactKind,
};
use genrules::gart::{generalize_with_warnings, GartOptions, GeneralizedRuleSet};
use genrules::measures::Measure;
use genrules::miner::mine;
use genrules::model::{MiningParams, Side};
use genrules::query::{
    drilldown_expanded, drilldown_measures, drilldown_sources, export_view, run_query, view_rule, RuleQuery, RuleView,
};
use genrules::Error;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::store::{now, run_id, ArtifactMeta, GeneralizationRun, RunStatus, Store};

pub struct AppState {
    pub store: Store,
    /// Parsed results by artifact id. Artifacts never change, so entries
    /// never go stale.
    results: RwLock<HashMap<String, Arc<GeneralizedRuleSet>>>,
}

impl AppState {
    pub fn new(store: Store) -> Arc<AppState> {
        Arc::new(AppState { store, results: RwLock::new(HashMap::new()) })
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    BadRequest(String),
    Invalid(Error),
    Conflict(String),
    Internal(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Query(m) => ApiError::BadRequest(m),
            Error::NotAvailable(m) => ApiError::Conflict(m),
            other => ApiError::Invalid(other),
        }
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, json!({"error": "not_found", "message": m})),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, json!({"error": "bad_request", "message": m})),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, json!({"error": "not_available", "message": m})),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({"error": "internal", "message": m})),
            ApiError::Invalid(e) => {
                let mut body = json!({"error": "validation", "message": e.to_string()});
                if let Error::Parse { line, column, .. } = e {
                    body["line"] = json!(line);
                    body["column"] = json!(column);
                }
                (StatusCode::UNPROCESSABLE_ENTITY, body)
            }
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        // POST takes a kind, GET an id
        .route("/artifacts/{id}", get(artifact).post(create_artifact))
        .route("/artifacts/{id}/raw", get(artifact_raw))
        .route("/mine", post(run_mine))
        .route("/generalize", post(run_generalization))
        .route("/runs/{id}", get(run))
        .route("/results/{id}/rules", get(query_rules))
        .route("/results/{id}/export", get(export_rules))
        .route("/results/{id}/rules/{key}/expanded", get(rule_expanded))
        .route("/results/{id}/rules/{key}/sources", get(rule_sources))
        .route("/results/{id}/rules/{key}/measures", get(rule_measures))
        .with_state(state)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"status": "ok"}))
}

fn load(state: &AppState, id: &str, kind: ArtifactKind, role: &str) -> ApiResult<(ArtifactMeta, String)> {
    let (meta, bytes) = state.store.raw(id)?.ok_or_else(|| ApiError::NotFound(format!("no {role} {id:?}")))?;
    if meta.kind != kind {
        return Err(ApiError::Invalid(Error::Document(format!(
            "{role} {id} is a {} artifact, expected {kind}",
            meta.kind
        ))));
    }
    let text = decode(&bytes)?.to_string();
    Ok((meta, text))
}

fn load_result(state: &AppState, id: &str) -> ApiResult<Arc<GeneralizedRuleSet>> {
    if let Some(set) = state.results.read().unwrap_or_else(|e| e.into_inner()).get(id) {
        return Ok(set.clone());
    }
    let (_, text) = load(state, id, ArtifactKind::GeneralizedRuleSet, "result")?;
    let set = Arc::new(parse_generalized(&text)?);
    state.results.write().unwrap_or_else(|e| e.into_inner()).insert(id.to_string(), set.clone());
    Ok(set)
}

#[derive(Deserialize)]
struct NameParam {
    name: Option<String>,
}

#[derive(Serialize)]
struct Created {
    #[serde(flatten)]
    meta: ArtifactMeta,
    warnings: Vec<String>,
}

async fn create_artifact(
    State(state): State<Arc<AppState>>,
    Path(kind): Path<String>,
    Query(params): Query<NameParam>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Created>)> {
    let kind: ArtifactKind = kind
        .parse()
        .map_err(|_| ApiError::NotFound(format!("unknown artifact kind {kind:?}")))?;
    let warnings = validate_document(kind, decode(&body)?)?;
    let name = params.name.unwrap_or_default();
    let (meta, new) = state.store.put(kind, &name, &body)?;
    let status = if new { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(Created { meta, warnings })))
}

async fn artifact(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<serde_json::Value>> {
    let (meta, bytes) = state.store.raw(&id)?.ok_or_else(|| ApiError::NotFound(format!("no artifact {id:?}")))?;
    let mut body = serde_json::to_value(&meta).map_err(|e| ApiError::Internal(e.to_string()))?;
    body["payload"] = json!(decode(&bytes)?);
    Ok(Json(body))
}

async fn artifact_raw(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let (meta, bytes) = state.store.raw(&id)?.ok_or_else(|| ApiError::NotFound(format!("no artifact {id:?}")))?;
    let (content_type, ext) = match meta.kind {
        ArtifactKind::Transactions | ArtifactKind::Taxonomy => ("text/plain; charset=utf-8", "txt"),
        ArtifactKind::RuleSet if !bytes.starts_with(b"{") => ("text/plain; charset=utf-8", "txt"),
        ArtifactKind::RuleSet | ArtifactKind::GeneralizedRuleSet => ("application/json", "json"),
    };
    let mut resp = bytes.into_response();
    let headers = resp.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    headers.insert("x-artifact-kind", HeaderValue::from_static(meta.kind.as_str()));
    if let Ok(v) = HeaderValue::from_str(&format!("attachment; filename=\"{}-{}.{ext}\"", meta.kind, meta.id)) {
        headers.insert(header::CONTENT_DISPOSITION, v);
    }
    Ok(resp)
}

#[derive(Deserialize)]
struct MineRequest {
    dataset_id: String,
    #[serde(default)]
    min_support: Option<f64>,
    #[serde(default)]
    min_confidence: Option<f64>,
    #[serde(default)]
    max_items: Option<usize>,
    #[serde(default)]
    name: Option<String>,
}

async fn run_mine(
    State(state): State<Arc<AppState>>,
    Json(req): Json<MineRequest>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let (meta, text) = load(&state, &req.dataset_id, ArtifactKind::Transactions, "dataset")?;
    let defaults = MiningParams::default();
    let params = MiningParams::new(
        req.min_support.unwrap_or(defaults.min_support),
        req.min_confidence.unwrap_or(defaults.min_confidence),
        req.max_items.unwrap_or(defaults.max_items),
    )?;
    let body = tokio::task::spawn_blocking(move || -> genrules::Result<(String, usize)> {
        let db = parse_transactions(&text)?.value;
        let rules = mine(&db, &params)?;
        Ok((write_ruleset(&rules), rules.len()))
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?;
    let (doc, count) = body?;
    let name = req.name.unwrap_or_else(|| format!("rules of {}", if meta.name.is_empty() { &meta.id } else { &meta.name }));
    let (stored, new) = state.store.put(ArtifactKind::RuleSet, &name, doc.as_bytes())?;
    let status = if new { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(json!({"ruleset_id": stored.id, "rules": count, "mining_params": params, "artifact": stored}))))
}

#[derive(Deserialize)]
struct GeneralizeRequest {
    ruleset_id: String,
    taxonomyset_id: String,
    #[serde(default)]
    dataset_id: Option<String>,
    #[serde(default = "default_side")]
    side: String,
    #[serde(default)]
    options: GartOptions,
    /// Answer at once with a pending run instead of waiting for it.
    #[serde(default, rename = "async")]
    run_async: bool,
}

fn default_side() -> String {
    "lhs".into()
}

struct Inputs {
    rules: String,
    taxonomies: String,
    dataset: Option<String>,
    name: String,
}

fn execute(state: &AppState, run: &GeneralizationRun, inputs: Inputs) -> ApiResult<(String, Vec<String>)> {
    let rules = parse_ruleset_any(&inputs.rules)?.value;
    let taxes = parse_taxonomies(&inputs.taxonomies)?.value;
    let db = inputs.dataset.as_deref().map(parse_transactions).transpose()?.map(|p| p.value);
    let (set, warnings) = generalize_with_warnings(&rules, &taxes, run.side, &run.options, db.as_ref())?;
    let doc = write_generalized(&set);
    let (meta, _) = state.store.put(ArtifactKind::GeneralizedRuleSet, &inputs.name, doc.as_bytes())?;
    Ok((meta.id, warnings.iter().map(ToString::to_string).collect()))
}

fn finish(state: &AppState, mut run: GeneralizationRun, inputs: Inputs) -> ApiResult<GeneralizationRun> {
    match execute(state, &run, inputs) {
        Ok((result_id, warnings)) => {
            run.status = RunStatus::Done;
            run.result_id = Some(result_id);
            run.warnings = warnings;
        }
        Err(ApiError::Invalid(e)) => {
            run.status = RunStatus::Failed;
            run.error = Some(e.to_string());
        }
        Err(other) => return Err(other),
    }
    state.store.put_run(&run)?;
    Ok(run)
}

async fn run_generalization(
    State(state): State<Arc<AppState>>,
    Json(req): Json<GeneralizeRequest>,
) -> ApiResult<(StatusCode, Json<GeneralizationRun>)> {
    let side: Side = req.side.parse().map_err(|e: Error| ApiError::BadRequest(e.to_string()))?;
    req.options.validate()?;
    let (rules_meta, rules) = load(&state, &req.ruleset_id, ArtifactKind::RuleSet, "ruleset")?;
    let (tax_meta, taxonomies) = load(&state, &req.taxonomyset_id, ArtifactKind::Taxonomy, "taxonomy set")?;
    let dataset = match &req.dataset_id {
        Some(id) => Some(load(&state, id, ArtifactKind::Transactions, "dataset")?.1),
        None => None,
    };
    let id = run_id(&rules_meta.id, &tax_meta.id, req.dataset_id.as_deref(), side, &req.options);
    if let Some(existing) = state.store.run(&id)? {
        if existing.status != RunStatus::Failed {
            return Ok((StatusCode::OK, Json(existing)));
        }
    }
    let run = GeneralizationRun {
        id,
        ruleset_id: rules_meta.id.clone(),
        taxonomyset_id: tax_meta.id.clone(),
        dataset_id: req.dataset_id.clone(),
        side,
        options: req.options,
        status: RunStatus::Pending,
        result_id: None,
        warnings: Vec::new(),
        error: None,
        created_at: now(),
    };
    let label = |m: &ArtifactMeta| if m.name.is_empty() { m.id.clone() } else { m.name.clone() };
    let inputs = Inputs { rules, taxonomies, dataset, name: format!("{} by {}", label(&rules_meta), label(&tax_meta)) };

    if req.run_async {
        state.store.put_run(&run)?;
        let pending = run.clone();
        let worker = state.clone();
        tokio::task::spawn_blocking(move || {
            let id = run.id.clone();
            if let Err(e) = finish(&worker, run, inputs) {
                // storage trouble; record what we can
                if let Ok(Some(mut r)) = worker.store.run(&id) {
                    r.status = RunStatus::Failed;
                    r.error = Some(format!("{e:?}"));
                    let _ = worker.store.put_run(&r);
                }
            }
        });
        return Ok((StatusCode::ACCEPTED, Json(pending)));
    }
    let worker = state.clone();
    let done = tokio::task::spawn_blocking(move || finish(&worker, run, inputs))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    let status = if done.status == RunStatus::Done { StatusCode::CREATED } else { StatusCode::UNPROCESSABLE_ENTITY };
    Ok((status, Json(done)))
}

async fn run(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<GeneralizationRun>> {
    state.store.run(&id)?.map(Json).ok_or_else(|| ApiError::NotFound(format!("no run {id:?}")))
}

fn parse_query(raw: Option<&str>) -> ApiResult<RuleQuery> {
    let pairs: Vec<(String, String)> = form_urlencoded::parse(raw.unwrap_or("").as_bytes()).into_owned().collect();
    Ok(RuleQuery::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?)
}

async fn query_rules(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    RawQuery(raw): RawQuery,
) -> ApiResult<Json<Vec<RuleView>>> {
    let q = parse_query(raw.as_deref())?;
    let set = load_result(&state, &id)?;
    Ok(Json(run_query(&set, &q)?))
}

async fn export_rules(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    RawQuery(raw): RawQuery,
) -> ApiResult<Response> {
    let q = parse_query(raw.as_deref())?;
    let set = load_result(&state, &id)?;
    let text = export_view(&run_query(&set, &q)?);
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

fn rule_view(state: &AppState, id: &str, key: &str) -> ApiResult<(Arc<GeneralizedRuleSet>, RuleView)> {
    let set = load_result(state, id)?;
    let rule = set
        .find_digest(key)
        .ok_or_else(|| ApiError::NotFound(format!("no rule {key:?} in result {id}")))?;
    let view = view_rule(rule, &Measure::ALL, set.mining_params.as_ref());
    Ok((set.clone(), view))
}

#[derive(Serialize)]
struct Expansion {
    lhs: genrules::model::Itemset,
    rhs: genrules::model::Itemset,
}

async fn rule_expanded(
    State(state): State<Arc<AppState>>,
    Path((id, key)): Path<(String, String)>,
) -> ApiResult<Json<Vec<Expansion>>> {
    let (set, view) = rule_view(&state, &id, &key)?;
    let pairs = drilldown_expanded(&view, &set.taxonomies)?;
    Ok(Json(pairs.into_iter().map(|(lhs, rhs)| Expansion { lhs, rhs }).collect()))
}

async fn rule_sources(
    State(state): State<Arc<AppState>>,
    Path((id, key)): Path<(String, String)>,
) -> ApiResult<Json<Vec<genrules::model::AssociationRule>>> {
    let (_, view) = rule_view(&state, &id, &key)?;
    Ok(Json(drilldown_sources(&view)?))
}

async fn rule_measures(
    State(state): State<Arc<AppState>>,
    Path((id, key)): Path<(String, String)>,
) -> ApiResult<Json<genrules::query::MeasureDrilldown>> {
    let (set, view) = rule_view(&state, &id, &key)?;
    Ok(Json(drilldown_measures(&view, set.mining_params.as_ref())?))
}
