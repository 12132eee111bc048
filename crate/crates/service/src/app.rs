use std::collections::{BTreeMap, HashMap};
use std::convert::Infallible;
use std::path::Path;
use std::sync::{Arc, OnceLock, RwLock};

use axum::body::{Body, Bytes};
use axum::extract::{Path as UrlPath, Query as UrlQuery, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{NaiveDate, Utc};
use plenum_core::index::{IndexError, IndexSnapshot, Query};
use plenum_core::model::{PartyRef, SpanKind, SpeechContribution, TopicLabel};
use serde::{Deserialize, Serialize};
use tracing::{error, info};

use crate::config::ServiceConfig;
use crate::export::{self, ExportError};
use crate::querylog::{self, Denylist, QueryLogEntry, QueryLogger, TermCount};
use crate::snippet::{snippet, Snippet};

const EXPORT_CHUNK: usize = 64;
const DEFAULT_TOP_TERMS: usize = 10;

/// A loaded snapshot with lazily computed aggregates.
#[derive(Debug)]
pub struct Loaded {
    pub index: IndexSnapshot,
    topics: OnceLock<BTreeMap<u32, BTreeMap<String, u64>>>,
}

impl Loaded {
    pub fn new(index: IndexSnapshot) -> Self {
        Self {
            index,
            topics: OnceLock::new(),
        }
    }

    pub fn topics(&self) -> &BTreeMap<u32, BTreeMap<String, u64>> {
        self.topics.get_or_init(|| self.index.aggregate_topics())
    }
}

pub struct AppState {
    snapshot: RwLock<Option<Arc<Loaded>>>,
    pub config: ServiceConfig,
    pub denylist: Denylist,
    logger: QueryLogger,
}

impl AppState {
    pub fn new(config: ServiceConfig, denylist: Denylist, logger: QueryLogger) -> Self {
        Self {
            snapshot: RwLock::new(None),
            config,
            denylist,
            logger,
        }
    }

    /// The snapshot requests should use; `None` until one is installed.
    pub fn current(&self) -> Option<Arc<Loaded>> {
        self.snapshot.read().expect("snapshot lock poisoned").clone()
    }

    /// Atomically replaces the served snapshot.
    pub fn install(&self, index: IndexSnapshot) {
        let loaded = Arc::new(Loaded::new(index));
        *self.snapshot.write().expect("snapshot lock poisoned") = Some(loaded);
    }

    pub fn load_from(&self, path: &Path) -> Result<usize, IndexError> {
        let index = IndexSnapshot::load(path)?;
        let n = index.doc_count();
        self.install(index);
        Ok(n)
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "InvalidQuery", message)
    }

    fn unavailable() -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "IndexUnavailable",
            "no index snapshot is loaded yet",
        )
    }
}

impl From<IndexError> for ApiError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::InvalidQuery(m) => Self::invalid(m),
            other => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", other.to_string()),
        }
    }
}

impl From<ExportError> for ApiError {
    fn from(e: ExportError) -> Self {
        match e {
            ExportError::Query(q) => q.into(),
            ExportError::BadCap { .. } => Self::new(StatusCode::BAD_REQUEST, "InvalidCap", e.to_string()),
            ExportError::CapExceeded { .. } => Self::new(StatusCode::PAYLOAD_TOO_LARGE, "CapExceeded", e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(ErrorBody {
            error: self.kind,
            message: &self.message,
        });
        (self.status, body).into_response()
    }
}

type Shared = Arc<AppState>;

fn snapshot(state: &AppState) -> Result<Arc<Loaded>, ApiError> {
    state.current().ok_or_else(ApiError::unavailable)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitSummary {
    pub id: String,
    pub score: f64,
    pub date: NaiveDate,
    pub speaker: String,
    pub party: PartyRef,
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<TopicLabel>,
    pub snippet: Snippet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub total: usize,
    pub page: u32,
    pub page_size: u32,
    pub hits: Vec<HitSummary>,
}

async fn search(
    State(state): State<Shared>,
    UrlQuery(params): UrlQuery<HashMap<String, String>>,
) -> Result<Json<SearchResponse>, ApiError> {
    let raw = params
        .get("q")
        .ok_or_else(|| ApiError::invalid("missing query parameter q"))?;
    let query = Query::from_json(raw)?;
    let loaded = snapshot(&state)?;
    let page = loaded.index.search(&query)?;
    state
        .logger
        .log(QueryLogEntry::new(&query, Utc::now(), &state.denylist));
    let terms = IndexSnapshot::scoring_terms(&query);
    let hits = page
        .hits
        .into_iter()
        .map(|h| {
            let r = loaded.index.get(&h.id).expect("hits exist in the snapshot");
            HitSummary {
                speaker: r.speaker.display_name().to_string(),
                party: r.speaker.party.clone(),
                role: r.role.as_str().to_string(),
                topic: r.topic.clone(),
                snippet: snippet(&r.text, &terms, state.config.snippet_chars),
                id: h.id,
                score: h.score,
                date: h.date,
            }
        })
        .collect();
    Ok(Json(SearchResponse {
        total: page.total,
        page: page.page,
        page_size: page.page_size,
        hits,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechResponse {
    pub record: SpeechContribution,
    /// NER annotator ids present on the record, sorted.
    pub annotators: Vec<String>,
}

async fn speech(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Json<SpeechResponse>, ApiError> {
    let loaded = snapshot(&state)?;
    let record = loaded
        .index
        .get(&id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UnknownId", format!("no record with id {id:?}")))?
        .clone();
    let mut annotators: Vec<String> = record
        .annotations
        .iter()
        .filter(|a| a.kind == SpanKind::NerEntity)
        .map(|a| a.annotator.clone())
        .collect();
    annotators.sort();
    annotators.dedup();
    Ok(Json(SpeechResponse { record, annotators }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportRequest {
    pub query: Query,
    /// Defaults to the configured export cap.
    #[serde(default)]
    pub cap: Option<usize>,
    /// Return the first `cap` records instead of failing when more match.
    #[serde(default)]
    pub truncate: bool,
}

async fn export_bundle(State(state): State<Shared>, body: Bytes) -> Result<Response, ApiError> {
    let req: ExportRequest = serde_json::from_slice(&body).map_err(|e| ApiError::invalid(e.to_string()))?;
    let loaded = snapshot(&state)?;
    let max = state.config.export_cap;
    let plan = export::plan(&loaded.index, &req.query, req.cap.unwrap_or(max), max, req.truncate)?;
    let head = export::head(&req.query, &export::timestamp(Utc::now()));
    let tail = export::tail(plan.truncated);
    let ids = Arc::new(plan.ids);
    let chunks = ids.len().div_ceil(EXPORT_CHUNK);
    let records = (0..chunks).map(move |c| {
        let mut buf = Vec::new();
        let from = c * EXPORT_CHUNK;
        for (i, id) in ids[from..(from + EXPORT_CHUNK).min(ids.len())].iter().enumerate() {
            let r = loaded.index.get(id).expect("planned ids exist in the snapshot");
            buf.extend(export::record(r, from + i == 0));
        }
        buf
    });
    let pieces = std::iter::once(head).chain(records).chain(std::iter::once(tail));
    let stream = futures::stream::iter(pieces.map(|b| Ok::<_, Infallible>(Bytes::from(b))));
    Ok((
        [
            (header::CONTENT_TYPE, "application/json"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"export.json\""),
        ],
        Body::from_stream(stream),
    )
        .into_response())
}

async fn top_terms(
    State(state): State<Shared>,
    UrlQuery(params): UrlQuery<HashMap<String, String>>,
) -> Result<Json<Vec<TermCount>>, ApiError> {
    let n = match params.get("n") {
        Some(v) => v.trim().parse::<usize>().map_err(|_| {
            ApiError::new(
                StatusCode::BAD_REQUEST,
                "InvalidParameter",
                format!("n must be a non-negative integer, got {v:?}"),
            )
        })?,
        None => DEFAULT_TOP_TERMS,
    };
    let dir = state.config.log_path.clone();
    let entries = tokio::task::spawn_blocking(move || querylog::read_entries(&dir))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?;
    Ok(Json(querylog::top_terms(&entries, n, &state.denylist)))
}

async fn topics(State(state): State<Shared>) -> Result<Json<BTreeMap<u32, BTreeMap<String, u64>>>, ApiError> {
    let loaded = snapshot(&state)?;
    Ok(Json(loaded.topics().clone()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub index_loaded: bool,
    pub doc_count: usize,
}

async fn healthz(State(state): State<Shared>) -> Json<Health> {
    let loaded = state.current();
    Json(Health {
        status: "ok".into(),
        index_loaded: loaded.is_some(),
        doc_count: loaded.map_or(0, |l| l.index.doc_count()),
    })
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/search", get(search))
        .route("/api/speech/:id", get(speech))
        .route("/api/export", post(export_bundle))
        .route("/api/stats/top-terms", get(top_terms))
        .route("/api/stats/topics", get(topics))
        .route("/healthz", get(healthz))
        .with_state(state)
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("denylist {path}: {source}")]
    Denylist {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Runs the service until Ctrl-C. The snapshot loads in the background;
/// until it is ready, index-backed endpoints answer 503.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let denylist = match &config.denylist_path {
        Some(p) => Denylist::from_file(p).map_err(|source| ServeError::Denylist {
            path: p.display().to_string(),
            source,
        })?,
        None => Denylist::default(),
    };
    let addr = format!("{}:{}", config.bind, config.port);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|source| ServeError::Bind {
            addr: addr.clone(),
            source,
        })?;
    let (logger, writer) = QueryLogger::spawn(config.log_path.clone());
    let state = Arc::new(AppState::new(config, denylist, logger));

    let loader = state.clone();
    tokio::task::spawn_blocking(move || {
        let path = loader.config.index_path.clone();
        match loader.load_from(&path) {
            Ok(n) => info!(docs = n, path = %path.display(), "index snapshot loaded"),
            Err(e) => error!(path = %path.display(), "cannot load index snapshot: {e}"),
        }
    });

    info!(%addr, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    // The router, and with it the last logger, is gone; wait for the log to drain.
    let _ = writer.await;
    Ok(())
}
