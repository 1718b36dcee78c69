//! HTTP facade over a single in-memory session.
//!
//! Reads and what-ifs run concurrently. Committed edits go through one writer
//! and bump a version token that clients echo back in `If-Match`; a stale
//! token is refused with 409. When the service was started from a file,
//! every commit is written back to it.

mod error;

use std::fs;
use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::header::{CONTENT_TYPE, ETAG, IF_MATCH};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::Router;
use ordagg_core::session::parse_json;
use ordagg_core::{
    evaluate, what_if, EvaluationReport, ImportanceEdit, Patch, QuantifierSpec, ScoreEdit, Session,
};
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;

pub use error::{ApiError, Detail, ErrorCode};

struct Loaded {
    session: Session,
    version: u64,
}

/// The service's single session slot.
pub struct AppState {
    slot: RwLock<Option<Loaded>>,
    mirror: Option<PathBuf>,
}

impl AppState {
    /// Starts empty. Commits are mirrored to `mirror` when given.
    pub fn new(mirror: Option<PathBuf>) -> Self {
        Self {
            slot: RwLock::new(None),
            mirror,
        }
    }

    /// Starts with `session` at version 1.
    pub fn with_session(session: Session, mirror: Option<PathBuf>) -> Self {
        Self {
            slot: RwLock::new(Some(Loaded {
                session,
                version: 1,
            })),
            mirror,
        }
    }

    /// Current version token, if a session is loaded.
    pub fn version(&self) -> Option<u64> {
        self.slot.read().expect("lock").as_ref().map(|l| l.version)
    }

    fn snapshot(&self) -> Result<(Session, u64), ApiError> {
        let guard = self.slot.read().expect("lock");
        let loaded = guard.as_ref().ok_or_else(ApiError::no_session)?;
        Ok((loaded.session.clone(), loaded.version))
    }

    /// Replaces or edits the session under the write lock. `edit` receives the
    /// current session (if any) and returns the new one.
    fn commit(
        &self,
        expected: Option<u64>,
        edit: impl FnOnce(Option<&Session>) -> Result<Session, ApiError>,
    ) -> Result<(EvaluationReport, u64), ApiError> {
        let mut guard = self.slot.write().expect("lock");
        let current = guard.as_ref().map(|l| l.version).unwrap_or(0);
        if let Some(expected) = expected {
            if expected != current {
                return Err(ApiError::new(
                    ErrorCode::Conflict,
                    format!("version {expected} is stale; current version is {current}"),
                ));
            }
        }
        let next = edit(guard.as_ref().map(|l| &l.session))?;
        let report = evaluate(&next)?;
        if let Some(path) = &self.mirror {
            write_atomically(path, &next.save()).map_err(|err| {
                ApiError::new(
                    ErrorCode::Io,
                    format!("could not write {}: {err}", path.display()),
                )
            })?;
        }
        let version = current + 1;
        *guard = Some(Loaded {
            session: next,
            version,
        });
        Ok((report, version))
    }
}

fn write_atomically(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn etag(version: u64) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{version}\"")).expect("digits are valid header text")
}

/// Reads `If-Match`. Accepts `"3"`, `W/"3"`, `3` and `*`.
fn expected_version(headers: &HeaderMap) -> Result<Option<u64>, ApiError> {
    let Some(value) = headers.get(IF_MATCH) else {
        return Ok(None);
    };
    let text = value.to_str().unwrap_or("").trim();
    if text == "*" {
        return Ok(None);
    }
    let digits = text.trim_start_matches("W/").trim_matches('"');
    digits.parse().map(Some).map_err(|_| ApiError {
        code: ErrorCode::Parse,
        message: "malformed If-Match header".into(),
        details: vec![Detail {
            path: "If-Match".into(),
            problem: format!("expected a version token, got {text:?}"),
        }],
    })
}

fn json_response(body: String, version: Option<u64>) -> Response {
    let mut resp = (StatusCode::OK, [(CONTENT_TYPE, "application/json")], body).into_response();
    if let Some(v) = version {
        resp.headers_mut().insert(ETAG, etag(v));
    }
    resp
}

async fn get_session(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let (session, version) = state.snapshot()?;
    let body = String::from_utf8(session.save()).expect("session files are UTF-8");
    Ok(json_response(body, Some(version)))
}

async fn get_report(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let (session, version) = state.snapshot()?;
    let report = evaluate(&session)?;
    Ok(json_response(report.to_json(), Some(version)))
}

async fn put_session(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let expected = expected_version(&headers)?;
    let session = Session::load(&body)?;
    let (report, version) = state.commit(expected, |_| Ok(session))?;
    Ok(json_response(report.to_json(), Some(version)))
}

fn commit_patch(state: &AppState, headers: &HeaderMap, patch: Patch) -> Result<Response, ApiError> {
    let expected = expected_version(headers)?;
    let (report, version) = state.commit(expected, |current| {
        let current = current.ok_or_else(ApiError::no_session)?;
        Ok(patch.apply(current)?)
    })?;
    Ok(json_response(report.to_json(), Some(version)))
}

async fn patch_importances(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let importances: Vec<ImportanceEdit> = parse_json(&body)?;
    commit_patch(
        &state,
        &headers,
        Patch {
            importances,
            ..Patch::default()
        },
    )
}

async fn patch_quantifier(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let quantifier: QuantifierSpec = parse_json(&body)?;
    commit_patch(
        &state,
        &headers,
        Patch {
            quantifier: Some(quantifier),
            ..Patch::default()
        },
    )
}

async fn patch_scores(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let scores: Vec<ScoreEdit> = parse_json(&body)?;
    commit_patch(
        &state,
        &headers,
        Patch {
            scores,
            ..Patch::default()
        },
    )
}

async fn post_whatif(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let patch: Patch = parse_json(&body)?;
    let (session, version) = state.snapshot()?;
    let outcome = what_if(&session, &patch)?;
    Ok(json_response(outcome.to_json(), Some(version)))
}

async fn placeholder_index() -> Html<&'static str> {
    Html(
        "<!doctype html><title>ordagg</title>\
         <p>No panel bundle configured. The JSON API is under <code>/api</code>.</p>",
    )
}

async fn api_not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

/// Builds the router. Static panel assets are served from `assets` when given.
pub fn router(state: Arc<AppState>, assets: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/session", get(get_session).put(put_session))
        .route("/report", get(get_report))
        .route("/importances", patch(patch_importances))
        .route("/quantifier", patch(patch_quantifier))
        .route("/scores", patch(patch_scores))
        .route("/whatif", post(post_whatif))
        .fallback(api_not_found)
        .with_state(state);
    let app = Router::new().nest("/api", api);
    let app = match assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(placeholder_index)),
    };
    app.layer(TraceLayer::new_for_http())
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub listen: SocketAddr,
    pub session_path: Option<PathBuf>,
    pub assets: Option<PathBuf>,
}

#[derive(Debug)]
pub enum ServeError {
    Io(io::Error),
    Session(ordagg_core::SessionError),
}

impl std::fmt::Display for ServeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ServeError::Io(e) => write!(f, "{e}"),
            ServeError::Session(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ServeError {}

/// Loads the session file (if any) and serves until the task is dropped.
pub async fn serve(config: ServeConfig) -> Result<(), ServeError> {
    let state = match &config.session_path {
        Some(path) => {
            let bytes = fs::read(path).map_err(ServeError::Io)?;
            let session = Session::load(&bytes).map_err(ServeError::Session)?;
            AppState::with_session(session, Some(path.clone()))
        }
        None => AppState::new(None),
    };
    let app = router(Arc::new(state), config.assets.as_deref());
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(ServeError::Io)?;
    tracing::info!(addr = %config.listen, "listening");
    axum::serve(listener, app).await.map_err(ServeError::Io)
}
