//! JSON-over-HTTP rating sessions.
//!
//! The session directory is the source of truth: every handler loads the
//! session, applies one transition and writes it back before answering, so a
//! response is only sent once the new state is on disk. Requests touching the
//! same session are serialized by a per-session lock; different sessions
//! proceed independently.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use counterpoint_core::melody_io::{
    format_melody_doc, parse_melody_doc, render_midi, DocError, PersistError, SessionStore,
};
use counterpoint_core::{
    Generation, Melody, Scheme, SchemeConfig, Session, SessionError, SessionStatus,
};

#[derive(Clone)]
pub struct AppState {
    store: SessionStore,
    locks: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>>,
    create: Arc<tokio::sync::Mutex<()>>,
}

impl AppState {
    pub fn new(store: SessionStore) -> Self {
        Self {
            store,
            locks: Arc::default(),
            create: Arc::default(),
        }
    }

    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/generations/{g}", get(get_generation))
        .route(
            "/sessions/{id}/generations/{g}/individuals/{i}/rating",
            put(rate),
        )
        .route(
            "/sessions/{id}/generations/{g}/individuals/{i}/midi",
            get(midi),
        )
        .route(
            "/sessions/{id}/generations/{g}/individuals/{i}/events",
            get(events),
        )
        .route("/sessions/{id}/evolve", post(evolve))
        .route("/sessions/{id}/complete", post(complete))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl ToString) -> Self {
        Self {
            status,
            body: json!({ "error": message.to_string() }),
        }
    }

    fn with(mut self, field: &str, value: serde_json::Value) -> Self {
        self.body[field] = value;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::ScoreOutOfRange(_) => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::SessionComplete
            | SessionError::StaleGeneration { .. }
            | SessionError::UnratedIndividual(_) => StatusCode::CONFLICT,
            SessionError::NoSuchGeneration(_) | SessionError::BadIndex { .. } => {
                StatusCode::NOT_FOUND
            }
            SessionError::Evolution(_) | SessionError::Fitness(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        let err = ApiError::new(status, &e);
        match e {
            SessionError::UnratedIndividual(missing) => err.with("unrated", json!(missing)),
            _ => err,
        }
    }
}

impl From<PersistError> for ApiError {
    fn from(e: PersistError) -> Self {
        let status = match e {
            PersistError::NotFound(_) | PersistError::InvalidId(_) => StatusCode::NOT_FOUND,
            PersistError::SchemaMismatch { .. } | PersistError::Io(_) => {
                tracing::error!("session store: {e}");
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        ApiError::new(status, e)
    }
}

impl From<DocError> for ApiError {
    fn from(e: DocError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, &e).with("line", json!(e.line))
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        // axum reports syntax errors as 400 and shape errors as 422
        ApiError::new(e.status(), e.body_text())
    }
}

type ApiResult<T> = Result<T, ApiError>;

// ---- views ----------------------------------------------------------------

#[derive(Serialize)]
struct SessionView {
    id: String,
    scheme: Scheme,
    seed: u64,
    mutate_offspring: bool,
    status: SessionStatus,
    current_generation: u64,
    population_size: usize,
    base_melody: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_melody: Option<FinalView>,
}

#[derive(Serialize)]
struct FinalView {
    generation: u64,
    index: usize,
    id: u64,
    melody: String,
}

impl SessionView {
    fn of(s: &Session) -> Self {
        let current = s.current();
        let final_melody = s.final_individual().map(|ind| FinalView {
            generation: current.index,
            index: current
                .individuals
                .iter()
                .position(|i| i.id == ind.id)
                .expect("final individual is in the last generation"),
            id: ind.id,
            melody: format_melody_doc(&ind.melody),
        });
        Self {
            id: s.id.clone(),
            scheme: s.config.scheme,
            seed: s.config.seed,
            mutate_offspring: s.config.mutate_offspring,
            status: s.status,
            current_generation: current.index,
            population_size: current.len(),
            base_melody: format_melody_doc(&s.base),
            final_melody,
        }
    }
}

#[derive(Serialize)]
struct GenerationView {
    index: u64,
    current: bool,
    unrated: Vec<usize>,
    individuals: Vec<IndividualView>,
}

#[derive(Serialize)]
struct IndividualView {
    index: usize,
    id: u64,
    rating: Option<u8>,
    genome: String,
    melody: String,
}

impl GenerationView {
    fn of(g: &Generation, current: bool) -> Self {
        Self {
            index: g.index,
            current,
            unrated: g.unrated(),
            individuals: g
                .individuals
                .iter()
                .enumerate()
                .map(|(index, i)| IndividualView {
                    index,
                    id: i.id,
                    rating: i.rating.map(|r| r.value()),
                    genome: i.genome().to_string(),
                    melody: format_melody_doc(&i.melody),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct EventView {
    /// MIDI note number; `null` for a rest.
    pitch: Option<u8>,
    ticks: u32,
    onset: u32,
}

fn event_views(m: &Melody) -> Vec<EventView> {
    let mut onset = 0;
    m.events()
        .map(|e| {
            let v = EventView {
                pitch: e.pitch.midi(),
                ticks: e.ticks(),
                onset,
            };
            onset += e.ticks();
            v
        })
        .collect()
}

// ---- handlers -------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    melody: String,
    scheme: Scheme,
    seed: Option<u64>,
    #[serde(default)]
    mutate_offspring: bool,
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let Json(req) = body?;
    let base = parse_melody_doc(&req.melody)?;
    let seed = req.seed.unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or_default()
    });
    let mut config = SchemeConfig::new(req.scheme, seed);
    config.mutate_offspring = req.mutate_offspring;

    let _guard = state.create.lock().await;
    let id = state.store.next_id()?;
    let session = Session::create(id, base, config);
    state.store.save(&session)?;
    tracing::info!(id = %session.id, scheme = %req.scheme, seed, "session created");
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "session": SessionView::of(&session),
            "generation": GenerationView::of(session.current(), true),
        })),
    ))
}

async fn list_sessions(State(state): State<AppState>) -> ApiResult<Json<Vec<String>>> {
    Ok(Json(state.store.ids()?))
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<SessionView>> {
    let lock = state.lock_for(&id);
    let _guard = lock.lock().await;
    Ok(Json(SessionView::of(&state.store.load(&id)?)))
}

async fn get_generation(
    State(state): State<AppState>,
    Path((id, g)): Path<(String, u64)>,
) -> ApiResult<Json<GenerationView>> {
    let lock = state.lock_for(&id);
    let _guard = lock.lock().await;
    let s = state.store.load(&id)?;
    let gen = s.generation(g)?;
    Ok(Json(GenerationView::of(
        gen,
        gen.index == s.current().index,
    )))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RateRequest {
    score: i64,
}

async fn rate(
    State(state): State<AppState>,
    Path((id, g, i)): Path<(String, u64, usize)>,
    body: Result<Json<RateRequest>, JsonRejection>,
) -> ApiResult<Json<GenerationView>> {
    let Json(req) = body?;
    let lock = state.lock_for(&id);
    let _guard = lock.lock().await;
    let mut s = state.store.load(&id)?;
    s.rate(g, i, req.score)?;
    state.store.save(&s)?;
    Ok(Json(GenerationView::of(s.current(), true)))
}

async fn evolve(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<GenerationView>> {
    let lock = state.lock_for(&id);
    let _guard = lock.lock().await;
    let mut s = state.store.load(&id)?;
    s.evolve()?;
    state.store.save(&s)?;
    Ok(Json(GenerationView::of(s.current(), true)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompleteRequest {
    individual: usize,
}

async fn complete(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<CompleteRequest>, JsonRejection>,
) -> ApiResult<Json<SessionView>> {
    let Json(req) = body?;
    let lock = state.lock_for(&id);
    let _guard = lock.lock().await;
    let mut s = state.store.load(&id)?;
    // the index comes from the body, so a bad one is a bad request, not a
    // missing resource
    s.complete(req.individual).map_err(|e| match e {
        SessionError::BadIndex { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e),
        other => other.into(),
    })?;
    state.store.save(&s)?;
    Ok(Json(SessionView::of(&s)))
}

async fn load_pair(state: &AppState, id: &str, g: u64, i: usize) -> ApiResult<(Melody, Melody)> {
    let lock = state.lock_for(id);
    let _guard = lock.lock().await;
    let s = state.store.load(id)?;
    let gen = s.generation(g)?;
    let ind = gen.individuals.get(i).ok_or(SessionError::BadIndex {
        index: i,
        size: gen.len(),
    })?;
    Ok((s.base.clone(), ind.melody.clone()))
}

async fn midi(
    State(state): State<AppState>,
    Path((id, g, i)): Path<(String, u64, usize)>,
) -> ApiResult<Response> {
    let (base, cp) = load_pair(&state, &id, g, i).await?;
    let disposition = format!("attachment; filename=\"{id}-g{g}-i{i}.mid\"");
    Ok((
        [
            (header::CONTENT_TYPE, "audio/midi".to_string()),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        render_midi(&base, &cp),
    )
        .into_response())
}

async fn events(
    State(state): State<AppState>,
    Path((id, g, i)): Path<(String, u64, usize)>,
) -> ApiResult<Json<serde_json::Value>> {
    let (base, cp) = load_pair(&state, &id, g, i).await?;
    Ok(Json(json!({
        "tempo_bpm": 120,
        "ticks_per_quarter": 8,
        "seconds_per_tick": 0.0625,
        "total_ticks": counterpoint_core::genome::MELODY_TICKS,
        "base": event_views(&base),
        "counterpoint": event_views(&cp),
    })))
}
