//! HTTP facade over the tag cluster engine.
//!
//! | Method | Path        | Purpose                                          |
//! |--------|-------------|--------------------------------------------------|
//! | POST   | `/corpus`   | replace the active corpus with a JSONL body      |
//! | GET    | `/query`    | run a query (`q`, repeated `and`, parameters)    |
//! | GET    | `/tags/top` | most used tags, the entry-point tag cloud        |
//! | GET    | `/healthz`  | liveness and whether a corpus is loaded          |
//!
//! The query protocol is stateless: every refinement rides in its own `and=`
//! parameter, so a click in the UI only rewrites the URL.

use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, RawQuery, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use tagclust_core::{
    build_index, execute, load_corpus, ClusterParams, FolksonomyIndex, Linkage, Measure, Query, QueryOptions, Ranking,
};
use thiserror::Error;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_MAX_CORPUS_BYTES: usize = 64 * 1024 * 1024;
pub const DEFAULT_TOP_TAGS: usize = 50;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Serve(#[from] std::io::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen_port: u16,
    pub max_corpus_bytes: usize,
    /// Parameters used when a request omits them.
    pub defaults: QueryOptions,
    /// `None` allows any origin.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen_port: DEFAULT_PORT,
            max_corpus_bytes: DEFAULT_MAX_CORPUS_BYTES,
            defaults: QueryOptions::default(),
            cors_origin: None,
        }
    }
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.max_corpus_bytes == 0 {
            return Err(ServiceError::Config("max corpus bytes must be positive".into()));
        }
        if self.defaults.page_size == 0 || self.defaults.page == 0 {
            return Err(ServiceError::Config("page size must be positive".into()));
        }
        Ok(())
    }
}

/// Shared state: the active index snapshot plus configuration.
pub struct AppState {
    snapshot: RwLock<Option<Arc<FolksonomyIndex>>>,
    config: ServiceConfig,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            snapshot: RwLock::new(None),
            config,
        }
    }

    pub fn with_index(config: ServiceConfig, index: FolksonomyIndex) -> Self {
        let state = Self::new(config);
        state.replace(index);
        state
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// Current snapshot. Queries keep using the snapshot they started with
    /// even if the corpus is replaced meanwhile.
    pub fn snapshot(&self) -> Option<Arc<FolksonomyIndex>> {
        self.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn replace(&self, index: FolksonomyIndex) {
        let index = Arc::new(index);
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = Some(index);
    }
}

/// A request parameter that failed validation; rendered as 422.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: &'static str,
    pub error: String,
}

impl FieldError {
    fn new(field: &'static str, error: impl Into<String>) -> Self {
        Self {
            field,
            error: error.into(),
        }
    }
}

impl IntoResponse for FieldError {
    fn into_response(self) -> Response {
        (StatusCode::UNPROCESSABLE_ENTITY, Json(self)).into_response()
    }
}

fn bad_request(message: String) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({ "error": message }))).into_response()
}

fn query_pairs(raw: Option<&str>) -> Vec<(String, String)> {
    raw.map(|r| {
        form_urlencoded::parse(r.as_bytes())
            .map(|(k, v)| (k.into_owned(), v.into_owned()))
            .collect()
    })
    .unwrap_or_default()
}

fn parse_positive(field: &'static str, value: &str) -> Result<usize, FieldError> {
    match value.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(FieldError::new(
            field,
            format!("expected a positive integer, got {value:?}"),
        )),
    }
}

/// Parses the `/query` parameters, falling back to `defaults` for omitted ones.
pub fn parse_query_params(raw: Option<&str>, defaults: &QueryOptions) -> Result<(Query, QueryOptions), FieldError> {
    let mut base: Option<String> = None;
    let mut refinements: Vec<String> = Vec::new();
    let mut opts = *defaults;
    let mut cluster: ClusterParams = defaults.cluster;

    for (key, value) in query_pairs(raw) {
        match key.as_str() {
            "q" => base = Some(value),
            "and" => refinements.push(value),
            "measure" => {
                cluster.measure = value
                    .parse::<Measure>()
                    .map_err(|e| FieldError::new("measure", e.to_string()))?
            }
            "method" => {
                cluster.method = value
                    .parse::<Linkage>()
                    .map_err(|e| FieldError::new("method", e.to_string()))?
            }
            "threshold" => {
                let t: f64 = value
                    .parse()
                    .map_err(|_| FieldError::new("threshold", format!("not a number: {value:?}")))?;
                if !(0.0..=1.0).contains(&t) {
                    return Err(FieldError::new("threshold", format!("{t} is outside [0, 1]")));
                }
                cluster.threshold = t;
            }
            "support_floor" => {
                cluster.support_floor = u32::try_from(parse_positive("support_floor", &value)?)
                    .map_err(|_| FieldError::new("support_floor", "too large"))?
            }
            "ranking" => {
                opts.ranking = value
                    .parse::<Ranking>()
                    .map_err(|e| FieldError::new("ranking", e.to_string()))?
            }
            "page" => opts.page = parse_positive("page", &value)?,
            "page_size" => opts.page_size = parse_positive("page_size", &value)?,
            _ => {}
        }
    }

    let base = base.ok_or_else(|| FieldError::new("q", "missing query term"))?;
    let query = Query::with_refinements(&base, &refinements).map_err(|e| {
        let field = if tagclust_core::corpus::normalize_tag(&base).is_empty() {
            "q"
        } else {
            "and"
        };
        FieldError::new(field, e.to_string())
    })?;
    opts.cluster = ClusterParams::new(
        cluster.measure,
        cluster.method,
        cluster.threshold,
        cluster.support_floor,
    )
    .map_err(|e| FieldError::new("threshold", e.to_string()))?;
    Ok((query, opts))
}

async fn post_corpus(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let parsed = tokio::task::spawn_blocking(move || load_corpus(body.as_ref()).map(build_index)).await;
    match parsed {
        Ok(Ok(index)) => {
            let summary = json!({
                "bookmarks": index.bookmark_count(),
                "tags": index.tag_universe().len(),
                "duplicates_dropped": index.corpus().duplicates_dropped,
            });
            tracing::info!(%summary, "corpus replaced");
            state.replace(index);
            (StatusCode::OK, Json(summary)).into_response()
        }
        Ok(Err(e)) => bad_request(e.to_string()),
        Err(e) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({ "error": e.to_string() })),
        )
            .into_response(),
    }
}

async fn get_query(State(state): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> Response {
    let (query, opts) = match parse_query_params(raw.as_deref(), &state.config.defaults) {
        Ok(parsed) => parsed,
        Err(e) => return e.into_response(),
    };
    let index = state.snapshot().unwrap_or_else(|| Arc::new(FolksonomyIndex::empty()));
    match execute(&index, &query, &opts) {
        Ok(result) => Json(result).into_response(),
        Err(e) => FieldError::new("page", e.to_string()).into_response(),
    }
}

#[derive(Serialize)]
struct TopTag<'a> {
    tag: &'a str,
    freq: usize,
}

async fn get_top_tags(State(state): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> Response {
    let mut n = DEFAULT_TOP_TAGS;
    for (key, value) in query_pairs(raw.as_deref()) {
        if key == "n" {
            n = match parse_positive("n", &value) {
                Ok(n) => n,
                Err(e) => return e.into_response(),
            };
        }
    }
    let Some(index) = state.snapshot() else {
        return Json(Vec::<TopTag<'_>>::new()).into_response();
    };
    let top: Vec<TopTag<'_>> = index
        .top_tags(n)
        .into_iter()
        .map(|(tag, freq)| TopTag { tag, freq })
        .collect();
    Json(top).into_response()
}

async fn healthz(State(state): State<Arc<AppState>>) -> Response {
    Json(json!({ "status": "ok", "corpus_loaded": state.snapshot().is_some() })).into_response()
}

fn cors(config: &ServiceConfig) -> CorsLayer {
    let origin = match config.cors_origin.as_deref().map(HeaderValue::from_str) {
        Some(Ok(v)) => AllowOrigin::exact(v),
        _ => AllowOrigin::any(),
    };
    CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers(Any)
}

pub fn router(state: Arc<AppState>) -> Router {
    let limit = state.config.max_corpus_bytes;
    let cors = cors(&state.config);
    Router::new()
        .route("/corpus", post(post_corpus).layer(DefaultBodyLimit::max(limit)))
        .route("/query", get(get_query))
        .route("/tags/top", get(get_top_tags))
        .route("/healthz", get(healthz))
        .layer(cors)
        .with_state(state)
}

pub async fn bind(port: u16) -> Result<TcpListener, ServiceError> {
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    TcpListener::bind(addr)
        .await
        .map_err(|source| ServiceError::Bind { addr, source })
}

/// Serves on an already bound listener until ctrl-c.
pub async fn serve_on(listener: TcpListener, state: Arc<AppState>) -> Result<(), ServiceError> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "listening");
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

pub async fn serve(config: ServiceConfig, initial: Option<FolksonomyIndex>) -> Result<(), ServiceError> {
    config.validate()?;
    let listener = bind(config.listen_port).await?;
    let state = Arc::new(match initial {
        Some(index) => AppState::with_index(config, index),
        None => AppState::new(config),
    });
    serve_on(listener, state).await
}
