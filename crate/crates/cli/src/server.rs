//! JSON-over-HTTP service for browsing runs, fronts and solutions and for
//! launching runs.

use std::collections::{BTreeMap, HashSet};
use std::sync::{Arc, Mutex};

use archrecon_core::explore::{
    filter_solutions, launch_constrained_run, reference_solutions, solution_detail, ConstrainRequest, FilterQuery,
    RefSolution, SolutionRef,
};
use archrecon_core::harness::{indicator_report, reference_front};
use archrecon_core::indicators::contribution;
use archrecon_core::{Error, RunDefinition, RunRecord, RunStatus, Store};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

/// An error with the status code it maps to.
#[derive(Debug)]
pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match &self.0 {
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::PinConflict { .. } => StatusCode::CONFLICT,
            Error::Parse { .. }
            | Error::UnknownNode { .. }
            | Error::UnboundPin { .. }
            | Error::PinOutOfRange { .. }
            | Error::Config(_)
            | Error::UnknownAlgorithm(_)
            | Error::Json(_) => StatusCode::BAD_REQUEST,
            Error::Contract(_) | Error::CorruptStore { .. } | Error::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.0.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs submitted runs in the background, at most `workers` at a time, and
/// never the same run twice concurrently.
#[derive(Debug)]
pub struct Scheduler {
    permits: Arc<Semaphore>,
    active: Mutex<HashSet<String>>,
}

impl Scheduler {
    pub fn new(workers: usize) -> Self {
        Scheduler {
            permits: Arc::new(Semaphore::new(workers.max(1))),
            active: Mutex::new(HashSet::new()),
        }
    }
}

#[derive(Debug)]
pub struct AppState {
    pub store: Store,
    pub scheduler: Scheduler,
}

impl AppState {
    pub fn new(store: Store, workers: usize) -> Arc<Self> {
        Arc::new(AppState {
            store,
            scheduler: Scheduler::new(workers),
        })
    }

    /// Registers `definition` and schedules it unless it is complete or already scheduled.
    pub fn submit(self: &Arc<Self>, definition: RunDefinition) -> Result<RunRecord, Error> {
        let record = self.store.enqueue(&definition)?;
        if record.status == RunStatus::Done {
            return Ok(record);
        }
        if !self.scheduler.active.lock().unwrap().insert(record.id.clone()) {
            return Ok(record);
        }
        let state = self.clone();
        let id = record.id.clone();
        tokio::spawn(async move {
            let permit = state.scheduler.permits.clone().acquire_owned().await;
            let worker = state.clone();
            let result = tokio::task::spawn_blocking(move || worker.store.execute(&definition)).await;
            drop(permit);
            match result {
                Ok(Ok(_)) => log::info!("run {id} finished"),
                Ok(Err(e)) => log::warn!("run {id} failed: {e}"),
                Err(e) => {
                    log::error!("run {id} panicked: {e}");
                    let _ = state.store.mark(&id, RunStatus::Failed, Some(e.to_string()));
                }
            }
            state.scheduler.active.lock().unwrap().remove(&id);
        });
        Ok(record)
    }

    /// Reschedules runs left queued or running by an earlier process.
    pub fn resume_pending(self: &Arc<Self>) -> Result<usize, Error> {
        let mut n = 0;
        for record in self.store.list()? {
            if matches!(record.status, RunStatus::Queued | RunStatus::Running) {
                self.submit(self.store.definition(&record.id)?)?;
                n += 1;
            }
        }
        Ok(n)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/runs", post(create_run).get(list_runs))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/snapshots", get(get_snapshots))
        .route("/runs/{id}/front", get(get_front))
        .route("/runs/{id}/filter", post(filter_run))
        .route("/runs/{id}/constrain", post(constrain_run))
        .route("/solutions/{solution}", get(get_solution))
        .route("/reference-front", get(get_reference_front))
        .route("/indicators", get(get_indicators))
        .with_state(state)
}

pub async fn serve(store: Store, host: &str, port: u16, workers: usize) -> anyhow::Result<()> {
    let state = AppState::new(store, workers);
    let resumed = state.resume_pending()?;
    if resumed > 0 {
        log::info!("resumed {resumed} pending runs");
    }
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

async fn blocking<T, F>(state: &Arc<AppState>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Store) -> Result<T, Error> + Send + 'static,
{
    let state = state.clone();
    tokio::task::spawn_blocking(move || f(&state.store))
        .await
        .map_err(|e| ApiError(Error::Contract(format!("request task failed: {e}"))))?
        .map(Json)
        .map_err(ApiError)
}

async fn create_run(State(state): State<Arc<AppState>>, Json(definition): Json<RunDefinition>) -> Result<(StatusCode, Json<RunRecord>), ApiError> {
    definition.config.validate()?;
    definition.problem()?;
    let record = state.submit(definition)?;
    let code = if record.status == RunStatus::Done { StatusCode::OK } else { StatusCode::ACCEPTED };
    Ok((code, Json(record)))
}

async fn list_runs(State(state): State<Arc<AppState>>) -> ApiResult<Vec<RunRecord>> {
    blocking(&state, |s| s.list()).await
}

async fn get_run(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<RunRecord> {
    blocking(&state, move |s| s.record(&id)).await
}

#[derive(Debug, Deserialize)]
struct FromQuery {
    #[serde(default)]
    from: usize,
}

async fn get_snapshots(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<FromQuery>,
) -> ApiResult<Vec<archrecon_core::Snapshot>> {
    blocking(&state, move |s| s.snapshots(&id, q.from)).await
}

async fn get_front(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Vec<RefSolution>> {
    blocking(&state, move |s| archrecon_core::explore::run_solutions(s, &id)).await
}

async fn filter_run(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(query): Json<FilterQuery>,
) -> ApiResult<Vec<RefSolution>> {
    blocking(&state, move |s| filter_solutions(s, &id, &query)).await
}

async fn constrain_run(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(request): Json<ConstrainRequest>,
) -> Result<(StatusCode, Json<RunRecord>), ApiError> {
    let (record, definition) = {
        let state = state.clone();
        tokio::task::spawn_blocking(move || launch_constrained_run(&state.store, &id, &request))
            .await
            .map_err(|e| ApiError(Error::Contract(e.to_string())))??
    };
    let record = if record.status == RunStatus::Done { record } else { state.submit(definition)? };
    Ok((StatusCode::ACCEPTED, Json(record)))
}

async fn get_solution(
    State(state): State<Arc<AppState>>,
    Path(solution): Path<String>,
) -> ApiResult<archrecon_core::explore::SolutionDetail> {
    blocking(&state, move |s| solution_detail(s, &solution.parse::<SolutionRef>()?)).await
}

#[derive(Debug, Deserialize)]
struct RunsQuery {
    #[serde(default)]
    runs: Option<String>,
    #[serde(default)]
    stride: Option<usize>,
}

impl RunsQuery {
    /// Listed runs, or every completed run.
    fn ids(&self, store: &Store) -> Result<Vec<String>, Error> {
        let ids: Vec<String> = match &self.runs {
            Some(list) => list.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect(),
            None => store
                .list()?
                .into_iter()
                .filter(|r| r.status == RunStatus::Done)
                .map(|r| r.id)
                .collect(),
        };
        if ids.is_empty() {
            return Err(Error::NotFound("completed runs".into()));
        }
        Ok(ids)
    }
}

/// The reference front with each point resolved to a solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceFrontView {
    pub runs: Vec<String>,
    pub solutions: Vec<RefSolution>,
    /// Share of reference points credited to each run.
    pub contributions: BTreeMap<String, f64>,
}

async fn get_reference_front(State(state): State<Arc<AppState>>, Query(q): Query<RunsQuery>) -> ApiResult<ReferenceFrontView> {
    blocking(&state, move |s| {
        let ids = q.ids(s)?;
        let reference = reference_front(s, &ids)?;
        let contributions = ids
            .iter()
            .map(|id| Ok((id.clone(), contribution(id, &reference)?)))
            .collect::<Result<_, Error>>()?;
        Ok(ReferenceFrontView {
            solutions: reference_solutions(s, &reference)?,
            runs: reference.inputs,
            contributions,
        })
    })
    .await
}

async fn get_indicators(
    State(state): State<Arc<AppState>>,
    Query(q): Query<RunsQuery>,
) -> ApiResult<Vec<archrecon_core::IndicatorRecord>> {
    blocking(&state, move |s| indicator_report(s, &q.ids(s)?, q.stride.unwrap_or(1))).await
}
