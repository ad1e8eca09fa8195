//! JSON-over-HTTP front end.
//!
//! Endpoints (all `GET`):
//!
//! | path | body |
//! |------|------|
//! | `/autocomplete?q&limit&ontology` | ranked matches |
//! | `/terms/{id}` | term record with its annotation count |
//! | `/terms/{id}/{parents,children,ancestors,descendants}?relations=` | term summaries |
//! | `/search?term&descendants&relations&composites&ancestor_composites&bridges&annotation_type&object_type` | query result |
//! | `/ontologies` | loaded ontologies |
//! | `/stats` | corpus counts |
//!
//! The engine is an immutable snapshot shared behind an `Arc`; handlers
//! never lock.

use std::collections::{BTreeSet, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde::Serialize;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::annotation::AnnotationType;
use crate::engine::{DataSources, Engine, LoadError};
use crate::lexical::AutocompleteError;
use crate::obo::Synonym;
use crate::ontology::{LookupError, RelationSet};
use crate::query::QueryRequest;

pub const DEFAULT_AUTOCOMPLETE_LIMIT: usize = 10;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub obo_files: Vec<PathBuf>,
    pub annotation_file: Option<PathBuf>,
    pub bridge_files: Vec<PathBuf>,
    pub lenient: bool,
    pub cors_allowed_origin: Option<String>,
}

impl ServiceConfig {
    pub fn sources(&self) -> DataSources {
        DataSources {
            obo_files: self.obo_files.clone(),
            annotation_file: self.annotation_file.clone(),
            bridge_files: self.bridge_files.clone(),
            lenient: self.lenient,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("port must be in 1..=65535")]
    InvalidPort,
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("invalid CORS origin {0:?}")]
    InvalidOrigin(String),
    #[error("cannot bind port {port}: {source}")]
    Bind {
        port: u16,
        #[source]
        source: std::io::Error,
    },
}

/// JSON error body with a status code.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    error: String,
    term: Option<String>,
}

impl ApiError {
    fn bad_request(error: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            error: error.into(),
            term: None,
        }
    }
}

impl From<LookupError> for ApiError {
    fn from(err: LookupError) -> Self {
        match err {
            LookupError::UnknownTerm(term) => Self {
                status: StatusCode::NOT_FOUND,
                error: "unknown term".into(),
                term: Some(term),
            },
            LookupError::EmptyRelationSet => Self::bad_request(err.to_string()),
        }
    }
}

impl From<AutocompleteError> for ApiError {
    fn from(err: AutocompleteError) -> Self {
        Self::bad_request(err.to_string())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    term: Option<&'a str>,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: &self.error,
            term: self.term.as_deref(),
        };
        json_response(self.status, &body)
    }
}

fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    let body = serde_json::to_vec(value).expect("response types serialize");
    (
        status,
        [(
            header::CONTENT_TYPE,
            HeaderValue::from_static("application/json"),
        )],
        body,
    )
        .into_response()
}

fn ok<T: Serialize>(value: &T) -> Response {
    json_response(StatusCode::OK, value)
}

type Params = Query<HashMap<String, String>>;

fn flag(params: &HashMap<String, String>, name: &str, default: bool) -> Result<bool, ApiError> {
    match params.get(name).map(String::as_str) {
        None => Ok(default),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(other) => Err(ApiError::bad_request(format!(
            "parameter {name} must be true or false, got {other:?}"
        ))),
    }
}

fn relations(params: &HashMap<String, String>) -> Result<RelationSet, ApiError> {
    match params.get("relations") {
        None => Ok(RelationSet::default()),
        Some(list) => RelationSet::parse_list(list).map_err(ApiError::bad_request),
    }
}

/// Builds a [`QueryRequest`] from `/search` query parameters.
pub fn search_request(params: &HashMap<String, String>) -> Result<QueryRequest, ApiError> {
    let term = params
        .get("term")
        .filter(|t| !t.is_empty())
        .ok_or_else(|| ApiError::bad_request("missing parameter term"))?;
    let defaults = QueryRequest::new(term.clone());
    let annotation_type_filter = params
        .get("annotation_type")
        .map(|t| t.parse::<AnnotationType>())
        .transpose()
        .map_err(ApiError::bad_request)?;
    Ok(QueryRequest {
        include_descendants: flag(params, "descendants", defaults.include_descendants)?,
        relations: relations(params)?,
        include_composites: flag(params, "composites", defaults.include_composites)?,
        include_ancestor_composites: flag(
            params,
            "ancestor_composites",
            defaults.include_ancestor_composites,
        )?,
        include_bridges: flag(params, "bridges", defaults.include_bridges)?,
        annotation_type_filter,
        object_type_filter: params.get("object_type").cloned(),
        term: defaults.term,
    })
}

/// Body of `/terms/{id}`.
#[derive(Debug, Serialize)]
pub struct TermBody<'a> {
    pub id: &'a str,
    pub name: &'a str,
    pub definition: Option<&'a str>,
    pub synonyms: &'a [Synonym],
    pub obsolete: bool,
    pub synthetic: bool,
    pub ontology: &'a str,
    pub annotation_count: usize,
}

/// One entry of `/terms/{id}/{direction}`.
#[derive(Debug, Serialize)]
pub struct TermSummary<'a> {
    pub id: &'a str,
    pub name: &'a str,
    pub ontology: &'a str,
    pub annotation_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Parents,
    Children,
    Ancestors,
    Descendants,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parents" => Ok(Direction::Parents),
            "children" => Ok(Direction::Children),
            "ancestors" => Ok(Direction::Ancestors),
            "descendants" => Ok(Direction::Descendants),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

/// Term details with its default-relation annotation count.
pub fn term_body<'a>(engine: &'a Engine, id: &str) -> Result<TermBody<'a>, LookupError> {
    let term = engine.ontology.term_info(id)?;
    Ok(TermBody {
        id: &term.id,
        name: &term.name,
        definition: term.definition.as_deref(),
        synonyms: &term.synonyms,
        obsolete: term.obsolete,
        synthetic: term.synthetic,
        ontology: &term.ontology,
        annotation_count: engine.annotation_count(&term.id, RelationSet::default())?,
    })
}

/// Neighbors or closure of `id` in one direction, sorted by id.
pub fn related_terms<'a>(
    engine: &'a Engine,
    id: &str,
    direction: Direction,
    relations: RelationSet,
) -> Result<Vec<TermSummary<'a>>, LookupError> {
    let ont = &engine.ontology;
    let ids: BTreeSet<&str> = match direction {
        Direction::Parents => ont.parents(id, relations)?,
        Direction::Children => ont.children(id, relations)?,
        Direction::Ancestors => ont.ancestors(id, relations)?,
        Direction::Descendants => ont.descendants(id, relations)?,
    };
    ids.into_iter()
        .map(|tid| {
            let t = ont.term_info(tid)?;
            Ok(TermSummary {
                id: &t.id,
                name: &t.name,
                ontology: &t.ontology,
                annotation_count: engine.annotation_count(tid, RelationSet::default())?,
            })
        })
        .collect()
}

async fn autocomplete(State(engine): State<Arc<Engine>>, Query(params): Params) -> Response {
    let run = || -> Result<Response, ApiError> {
        let q = params
            .get("q")
            .ok_or_else(|| ApiError::bad_request("missing parameter q"))?;
        let limit = match params.get("limit") {
            None => DEFAULT_AUTOCOMPLETE_LIMIT,
            Some(l) => l
                .parse::<usize>()
                .map_err(|_| ApiError::bad_request(format!("invalid limit {l:?}")))?,
        };
        let matches =
            engine
                .lexicon
                .autocomplete(q, limit, params.get("ontology").map(String::as_str))?;
        Ok(ok(&matches))
    };
    run().unwrap_or_else(IntoResponse::into_response)
}

async fn term(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> Response {
    match term_body(&engine, &id) {
        Ok(body) => ok(&body),
        Err(e) => ApiError::from(e).into_response(),
    }
}

async fn related(
    State(engine): State<Arc<Engine>>,
    Path((id, direction)): Path<(String, String)>,
    Query(params): Params,
) -> Response {
    let Ok(direction) = direction.parse::<Direction>() else {
        return not_found().await;
    };
    let run = || -> Result<Response, ApiError> {
        let rels = relations(&params)?;
        Ok(ok(&related_terms(&engine, &id, direction, rels)?))
    };
    run().unwrap_or_else(IntoResponse::into_response)
}

async fn search(State(engine): State<Arc<Engine>>, Query(params): Params) -> Response {
    let run = || -> Result<Response, ApiError> {
        let request = search_request(&params)?;
        Ok(ok(&engine.execute_search(&request)?))
    };
    run().unwrap_or_else(IntoResponse::into_response)
}

async fn ontologies(State(engine): State<Arc<Engine>>) -> Response {
    ok(&engine.ontology.ontologies().collect::<Vec<_>>())
}

async fn stats(State(engine): State<Arc<Engine>>) -> Response {
    ok(&engine.stats())
}

async fn not_found() -> Response {
    json_response(
        StatusCode::NOT_FOUND,
        &ErrorBody {
            error: "unknown endpoint",
            term: None,
        },
    )
}

/// Routes without CORS.
pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/autocomplete", get(autocomplete))
        .route("/terms/{id}", get(term))
        .route("/terms/{id}/{direction}", get(related))
        .route("/search", get(search))
        .route("/ontologies", get(ontologies))
        .route("/stats", get(stats))
        .fallback(not_found)
        .with_state(engine)
}

fn cors(origin: &str) -> Result<CorsLayer, StartupError> {
    let value = HeaderValue::from_str(origin)
        .map_err(|_| StartupError::InvalidOrigin(origin.to_string()))?;
    Ok(CorsLayer::new()
        .allow_origin(AllowOrigin::exact(value))
        .allow_methods([axum::http::Method::GET]))
}

/// Loaded engine bound to a listening socket, ready to serve.
pub struct RunningService {
    listener: tokio::net::TcpListener,
    app: Router,
    pub engine: Arc<Engine>,
}

impl RunningService {
    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub async fn serve(self) -> std::io::Result<()> {
        axum::serve(self.listener, self.app).await
    }

    pub async fn serve_with_shutdown<F>(self, signal: F) -> std::io::Result<()>
    where
        F: std::future::Future<Output = ()> + Send + 'static,
    {
        axum::serve(self.listener, self.app)
            .with_graceful_shutdown(signal)
            .await
    }
}

/// Loads every file, builds the indices and binds `0.0.0.0:port`. Fails
/// before binding if any file does not load.
pub async fn start_service(config: &ServiceConfig) -> Result<RunningService, StartupError> {
    if config.port == 0 {
        return Err(StartupError::InvalidPort);
    }
    let engine = Arc::new(Engine::load(&config.sources())?);
    for warning in &engine.warnings {
        tracing::warn!("{warning}");
    }
    let mut app = router(engine.clone());
    if let Some(origin) = &config.cors_allowed_origin {
        app = app.layer(cors(origin)?);
    }
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port))
        .await
        .map_err(|source| StartupError::Bind {
            port: config.port,
            source,
        })?;
    tracing::info!(port = config.port, stats = ?engine.stats(), "serving");
    Ok(RunningService {
        listener,
        app,
        engine,
    })
}
