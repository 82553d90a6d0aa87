//! JSON HTTP API over a set of in-memory datasets.
//!
//! Each dataset holds the latest snapshot behind a lock that is only taken
//! long enough to clone an `Arc`. Decisions for one dataset are serialized by
//! a per-dataset async mutex; when the dataset has a backing file, the new
//! snapshot is written before it becomes visible.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderName, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rpys_core::{
    ClusterId, ClusterIndicators, DecisionError, MergeDecision, ParsedCitedRef, PublicationId,
    Scale, SpectrumError,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;
use tower_http::cors::CorsLayer;

use crate::config::SessionConfig;
use crate::export::{export_clusters_csv, export_spectrum_csv, ExportError};
use crate::ingest::{self, FormatChoice};
use crate::session::{
    advance, create_session, AnalysisError, SessionError, SessionEvent, SessionSnapshot,
};

pub const VERSION_HEADER: &str = "x-snapshot-version";
const BODY_LIMIT: usize = 256 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorCode {
    BadRequest,
    NotFound,
    Conflict,
    Internal,
}

impl ErrorCode {
    fn status(self) -> StatusCode {
        match self {
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            detail: None,
        }
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadRequest, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Internal, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        let kind = match &e {
            AnalysisError::Spectrum(SpectrumError::EmptyCorpus) => "EmptyCorpus",
            AnalysisError::Spectrum(_) => "InvalidSpectrumConfig",
            AnalysisError::Segment(_) => "SegmentFit",
            AnalysisError::Indicator(_) => "EmptyPartition",
        };
        ApiError::bad_request(e.to_string()).with_detail(json!({ "error": kind }))
    }
}

impl From<ExportError> for ApiError {
    fn from(e: ExportError) -> Self {
        match e {
            ExportError::Analysis(a) => a.into(),
            ExportError::Io(io) => ApiError::internal(io.to_string()),
        }
    }
}

impl From<DecisionError> for ApiError {
    fn from(e: DecisionError) -> Self {
        match &e {
            DecisionError::UnknownCluster(id) => {
                ApiError::not_found(e.to_string()).with_detail(json!({ "cluster_id": id }))
            }
            _ => ApiError::bad_request(e.to_string()),
        }
    }
}

fn rejection(message: String) -> ApiError {
    ApiError::bad_request(message)
}

/// JSON body that also carries the snapshot version it reflects.
#[derive(Debug, Serialize)]
struct Versioned<T> {
    version: u64,
    data: T,
}

fn versioned<T: Serialize>(version: u64, data: T) -> Response {
    with_version(Json(Versioned { version, data }).into_response(), version)
}

fn with_version(mut response: Response, version: u64) -> Response {
    response.headers_mut().insert(
        HeaderName::from_static(VERSION_HEADER),
        HeaderValue::from(version),
    );
    response
}

struct Dataset {
    current: RwLock<Arc<SessionSnapshot>>,
    writer: Mutex<()>,
    path: Option<PathBuf>,
}

impl Dataset {
    fn snapshot(&self) -> Arc<SessionSnapshot> {
        Arc::clone(&self.current.read().expect("snapshot lock poisoned"))
    }
}

/// All datasets served by one process.
pub struct Store {
    datasets: RwLock<HashMap<String, Arc<Dataset>>>,
    defaults: SessionConfig,
    data_dir: Option<PathBuf>,
}

impl Store {
    pub fn new(defaults: SessionConfig, data_dir: Option<PathBuf>) -> Self {
        Store {
            datasets: RwLock::new(HashMap::new()),
            defaults,
            data_dir,
        }
    }

    /// Registers a snapshot and returns its dataset id. `path` maps the id to
    /// the file that every later decision is written to.
    pub fn insert(
        &self,
        snapshot: SessionSnapshot,
        path: impl FnOnce(&str) -> Option<PathBuf>,
    ) -> String {
        let mut map = self.datasets.write().expect("store lock poisoned");
        let base = format!("d{}", &snapshot.corpus_ref()[..12]);
        let mut id = base.clone();
        let mut n = 1;
        while map.contains_key(&id) {
            n += 1;
            id = format!("{base}-{n}");
        }
        let path = path(&id);
        let dataset = Dataset {
            current: RwLock::new(Arc::new(snapshot)),
            writer: Mutex::new(()),
            path,
        };
        map.insert(id.clone(), Arc::new(dataset));
        id
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .datasets
            .read()
            .expect("store lock poisoned")
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    pub fn snapshot(&self, id: &str) -> Option<Arc<SessionSnapshot>> {
        self.dataset(id).map(|d| d.snapshot())
    }

    fn dataset(&self, id: &str) -> Option<Arc<Dataset>> {
        self.datasets
            .read()
            .expect("store lock poisoned")
            .get(id)
            .cloned()
    }

    fn require(&self, id: &str) -> Result<Arc<Dataset>, ApiError> {
        self.dataset(id)
            .ok_or_else(|| ApiError::not_found(format!("unknown dataset {id}")))
    }

    /// Applies a decision to the latest snapshot of `id`. A pinned
    /// `expected_version` that is not the latest is a conflict.
    pub async fn apply(
        &self,
        id: &str,
        decision: MergeDecision,
        expected_version: Option<u64>,
    ) -> Result<Arc<SessionSnapshot>, ApiError> {
        let dataset = self.require(id)?;
        let _guard = dataset.writer.lock().await;
        let current = dataset.snapshot();
        if let Some(expected) = expected_version {
            if expected != current.version() {
                return Err(ApiError::new(ErrorCode::Conflict, "snapshot version is stale")
                    .with_detail(json!({ "expected_version": expected, "current_version": current.version() })));
            }
        }
        let next = match advance(&current, decision) {
            Ok(s) => Arc::new(s),
            Err(SessionError::Decision(e)) => return Err(e.into()),
            Err(e) => return Err(ApiError::internal(e.to_string())),
        };
        write_through(&dataset, &next).await?;
        *dataset.current.write().expect("snapshot lock poisoned") = Arc::clone(&next);
        Ok(next)
    }

    /// Writes the latest snapshot of `id` to its backing file, if any.
    pub async fn persist(&self, id: &str) -> Result<(), ApiError> {
        let dataset = self.require(id)?;
        let _guard = dataset.writer.lock().await;
        write_through(&dataset, &dataset.snapshot()).await
    }
}

async fn write_through(dataset: &Dataset, snapshot: &Arc<SessionSnapshot>) -> Result<(), ApiError> {
    let Some(path) = dataset.path.clone() else {
        return Ok(());
    };
    let snapshot = Arc::clone(snapshot);
    tokio::task::spawn_blocking(move || snapshot.save(&path))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::internal(e.to_string()))
}

type Shared = Arc<Store>;

/// Builds the API router. `cors_origin` allows one browser origin.
pub fn router(store: Shared, cors_origin: Option<&str>) -> Result<Router, String> {
    let mut app = Router::new()
        .route("/datasets", get(list_datasets).post(create_dataset))
        .route("/datasets/{id}/spectrum", get(spectrum))
        .route("/datasets/{id}/peaks", get(peaks))
        .route("/datasets/{id}/years/{rpy}/clusters", get(year_clusters))
        .route("/datasets/{id}/clusters/{cid}", get(cluster))
        .route("/datasets/{id}/decisions", post(decide))
        .route("/datasets/{id}/segments", get(segments))
        .route("/datasets/{id}/export/spectrum.csv", get(spectrum_csv))
        .route("/datasets/{id}/export/clusters.csv", get(clusters_csv))
        .route("/datasets/{id}/versions", get(versions))
        .fallback(|| async { ApiError::not_found("no such route") })
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(store);
    if let Some(origin) = cors_origin {
        let origin =
            HeaderValue::from_str(origin).map_err(|_| format!("invalid CORS origin {origin:?}"))?;
        app = app.layer(
            CorsLayer::new()
                .allow_origin(origin)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE])
                .expose_headers([HeaderName::from_static(VERSION_HEADER)]),
        );
    }
    Ok(app)
}

/// Serves `app` until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NewDataset {
    content: String,
    #[serde(default)]
    format: FormatChoice,
    #[serde(default)]
    config: Option<SessionConfig>,
}

#[derive(Debug, Serialize)]
struct DatasetSummary {
    dataset_id: String,
    version: u64,
    n_publications: usize,
    n_refs: usize,
    n_clusters: usize,
    diagnostics: Vec<rpys_core::Diagnostic>,
}

fn summary(id: String, s: &SessionSnapshot) -> DatasetSummary {
    DatasetSummary {
        dataset_id: id,
        version: s.version(),
        n_publications: s.corpus().publications.len(),
        n_refs: s.corpus().n_refs(),
        n_clusters: s.partition().len(),
        diagnostics: s.corpus().diagnostics.clone(),
    }
}

async fn list_datasets(State(store): State<Shared>) -> Response {
    let rows: Vec<DatasetSummary> = store
        .ids()
        .into_iter()
        .filter_map(|id| store.snapshot(&id).map(|s| summary(id, &s)))
        .collect();
    Json(rows).into_response()
}

async fn create_dataset(
    State(store): State<Shared>,
    body: Result<Json<NewDataset>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(body) = body.map_err(|e| rejection(e.body_text()))?;
    let corpus = ingest::parse(body.content.as_bytes(), body.format)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let config = body.config.unwrap_or_else(|| store.defaults.clone());
    let snapshot = create_session(corpus, config).map_err(|e| match e {
        SessionError::EmptyCorpus => {
            ApiError::bad_request(e.to_string()).with_detail(json!({ "error": "EmptyCorpus" }))
        }
        SessionError::Cluster(_) => ApiError::bad_request(e.to_string()),
        other => ApiError::internal(other.to_string()),
    })?;
    let summary = summary(String::new(), &snapshot);
    let data_dir = store.data_dir.clone();
    let id = store.insert(snapshot, |id| {
        data_dir.map(|dir| dir.join(format!("{id}.session.json")))
    });
    store.persist(&id).await?;
    Ok(with_version(
        (
            StatusCode::CREATED,
            Json(DatasetSummary {
                dataset_id: id,
                ..summary
            }),
        )
            .into_response(),
        1,
    ))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumQuery {
    min_rpy: Option<i32>,
    max_rpy: Option<i32>,
}

async fn spectrum(
    State(store): State<Shared>,
    Path(id): Path<String>,
    query: Result<Query<SpectrumQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(q) = query.map_err(|e| rejection(e.body_text()))?;
    let s = store.require(&id)?.snapshot();
    let points: Vec<_> = s
        .spectrum()?
        .into_iter()
        .filter(|p| q.min_rpy.is_none_or(|y| p.rpy >= y) && q.max_rpy.is_none_or(|y| p.rpy <= y))
        .collect();
    Ok(versioned(s.version(), points))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PeaksQuery {
    min_deviation: Option<f64>,
    max_rpy: Option<i32>,
}

async fn peaks(
    State(store): State<Shared>,
    Path(id): Path<String>,
    query: Result<Query<PeaksQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(q) = query.map_err(|e| rejection(e.body_text()))?;
    let s = store.require(&id)?.snapshot();
    Ok(versioned(s.version(), s.peaks(q.min_deviation, q.max_rpy)?))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopQuery {
    top: Option<usize>,
}

async fn year_clusters(
    State(store): State<Shared>,
    path: Result<Path<(String, i32)>, PathRejection>,
    query: Result<Query<TopQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Path((id, rpy)) = path.map_err(|e| rejection(e.body_text()))?;
    let Query(q) = query.map_err(|e| rejection(e.body_text()))?;
    let s = store.require(&id)?.snapshot();
    let top = q.top.unwrap_or(s.config().top_k);
    Ok(versioned(s.version(), s.clusters_for_year(rpy, top)?))
}

#[derive(Debug, Serialize)]
struct ClusterDetail<'a> {
    cluster_id: &'a ClusterId,
    canonical: &'a str,
    rpy: Option<i32>,
    n_cr: u64,
    members: &'a [ParsedCitedRef],
    citing_year_profile: BTreeMap<i32, u64>,
    indicators: Option<ClusterIndicators>,
}

async fn cluster(
    State(store): State<Shared>,
    Path((id, cid)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let s = store.require(&id)?.snapshot();
    let cid = ClusterId(cid);
    let c = s
        .cluster(&cid)
        .ok_or_else(|| ApiError::not_found(format!("unknown cluster {cid}")))?;
    let citing: BTreeSet<&PublicationId> = c.members.iter().map(|m| &m.key.citing).collect();
    let mut profile = BTreeMap::new();
    for pid in &citing {
        if let Some(p) = s.corpus().publication(pid) {
            *profile.entry(p.pub_year).or_insert(0u64) += 1;
        }
    }
    let indicators = match c.rpy {
        Some(_) => s.indicators()?.into_iter().find(|r| r.cluster_id == cid),
        None => None,
    };
    let detail = ClusterDetail {
        cluster_id: &c.cluster_id,
        canonical: &c.canonical.raw,
        rpy: c.rpy,
        n_cr: citing.len() as u64,
        members: &c.members,
        citing_year_profile: profile,
        indicators,
    };
    Ok(versioned(s.version(), detail))
}

#[derive(Debug, Deserialize)]
struct DecisionRequest {
    #[serde(flatten)]
    decision: MergeDecision,
    #[serde(default)]
    expected_version: Option<u64>,
}

#[derive(Debug, Serialize)]
struct DecisionAccepted {
    version: u64,
    n_clusters: usize,
}

async fn decide(
    State(store): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<DecisionRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body.map_err(|e| rejection(e.body_text()))?;
    let s = store.apply(&id, req.decision, req.expected_version).await?;
    let accepted = DecisionAccepted {
        version: s.version(),
        n_clusters: s.partition().len(),
    };
    Ok(with_version(Json(accepted).into_response(), s.version()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentsQuery {
    k_max: Option<usize>,
    min_len: Option<usize>,
    scale: Option<Scale>,
}

async fn segments(
    State(store): State<Shared>,
    Path(id): Path<String>,
    query: Result<Query<SegmentsQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(q) = query.map_err(|e| rejection(e.body_text()))?;
    let s = store.require(&id)?.snapshot();
    Ok(versioned(
        s.version(),
        s.segments(q.k_max, q.min_len, q.scale)?,
    ))
}

fn csv_response(bytes: Vec<u8>, version: u64) -> Response {
    with_version(
        ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], bytes).into_response(),
        version,
    )
}

async fn spectrum_csv(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let s = store.require(&id)?.snapshot();
    let mut buf = Vec::new();
    export_spectrum_csv(&s, &mut buf)?;
    Ok(csv_response(buf, s.version()))
}

async fn clusters_csv(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let s = store.require(&id)?.snapshot();
    let mut buf = Vec::new();
    export_clusters_csv(&s, &mut buf)?;
    Ok(csv_response(buf, s.version()))
}

#[derive(Debug, Serialize)]
struct HistoryEntry<'a> {
    version: u64,
    #[serde(flatten)]
    event: &'a SessionEvent,
}

async fn versions(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let s = store.require(&id)?.snapshot();
    let history: Vec<HistoryEntry> = s
        .events()
        .iter()
        .enumerate()
        .map(|(i, event)| HistoryEntry {
            version: i as u64 + 2,
            event,
        })
        .collect();
    Ok(versioned(s.version(), history))
}
