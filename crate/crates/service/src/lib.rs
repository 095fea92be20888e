//! HTTP API over a loaded dataset.
//!
//! | Route                    | Result                                          |
//! |--------------------------|-------------------------------------------------|
//! | `GET /api/images`        | images with sizes and per-class counts, by id   |
//! | `GET /api/images/{id}`   | the image file                                  |
//! | `POST /api/query`        | `{"answer": <Answer>, "query": <parsed query>}` |
//! | `GET /api/vocabulary`    | sorted class labels                             |
//!
//! Handlers read an immutable snapshot of the [`Store`]; a reload builds a
//! new dataset and swaps it in whole.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::{Body, Bytes};
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde_json::{json, Value};
use zoolog_core::dataset::{Dataset, DatasetError};
use zoolog_core::overlay::mime_type;
use zoolog_core::query::ParsedQuery;
use zoolog_core::reasoner::{answer, error_body, AskError, ReasonError};

/// The current dataset, replaced atomically on reload.
pub struct Store {
    current: RwLock<Arc<Dataset>>,
    config: Option<PathBuf>,
}

impl Store {
    pub fn new(dataset: Dataset) -> Self {
        Store {
            current: RwLock::new(Arc::new(dataset)),
            config: None,
        }
    }

    pub fn from_config(path: &Path) -> Result<Self, DatasetError> {
        let mut store = Store::new(Dataset::load(path)?);
        store.config = Some(path.to_path_buf());
        Ok(store)
    }

    pub fn snapshot(&self) -> Arc<Dataset> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn replace(&self, dataset: Dataset) {
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(dataset);
    }

    /// Reloads from the config file the store was built from. On error the
    /// old dataset stays in place.
    pub fn reload(&self) -> Result<(), DatasetError> {
        if let Some(path) = &self.config {
            self.replace(Dataset::load(path)?);
        }
        Ok(())
    }
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/api/images", get(list_images))
        .route("/api/images/{id}", get(image_file))
        .route("/api/query", post(query))
        .route("/api/vocabulary", get(vocabulary))
        .with_state(store)
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error(status: StatusCode, code: &str, message: &str, question: &str) -> Response {
    json_response(status, error_body(code, message, question).to_string())
}

async fn list_images(State(store): State<Arc<Store>>) -> Response {
    let ds = store.snapshot();
    let images: Vec<Value> = ds
        .kbs()
        .map(|kb| {
            json!({
                "id": kb.image.id,
                "width": kb.image.width,
                "height": kb.image.height,
                "classes": kb.class_counts,
            })
        })
        .collect();
    json_response(StatusCode::OK, Value::Array(images).to_string())
}

async fn image_file(State(store): State<Arc<Store>>, UrlPath(id): UrlPath<String>) -> Response {
    let ds = store.snapshot();
    let Some(kb) = ds.kb(&id) else {
        return error(StatusCode::NOT_FOUND, "UnknownImage", &format!("unknown image `{id}`"), "");
    };
    let Some(path) = kb.image.path.clone() else {
        return error(
            StatusCode::CONFLICT,
            "NoImagePath",
            &format!("image `{id}` has no file path"),
            "",
        );
    };
    match tokio::fs::read(&path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, mime_type(&path))], Body::from(bytes)).into_response(),
        Err(e) => error(
            StatusCode::NOT_FOUND,
            "ImageFileUnreadable",
            &format!("{}: {e}", path.display()),
            "",
        ),
    }
}

fn query_echo(pq: &ParsedQuery) -> Value {
    let task = pq.task.active().map(|t| t.as_str());
    let scores: serde_json::Map<String, Value> =
        pq.task.scores.iter().map(|(l, s)| (l.as_str().to_string(), json!(s))).collect();
    json!({ "entities": pq.entities, "task": task, "scores": scores })
}

async fn query(State(store): State<Arc<Store>>, body: Bytes) -> Response {
    let Ok(Value::Object(req)) = serde_json::from_slice::<Value>(&body) else {
        return error(StatusCode::BAD_REQUEST, "MalformedBody", "body must be a JSON object", "");
    };
    let Some(question) = req.get("question").and_then(Value::as_str) else {
        return error(StatusCode::BAD_REQUEST, "MalformedBody", "`question` must be a string", "");
    };
    let image_id = match req.get("image_id") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.as_str()),
        Some(_) => {
            return error(StatusCode::BAD_REQUEST, "MalformedBody", "`image_id` must be a string", question)
        }
    };

    let ds = store.snapshot();
    let pq = match ds.parser().parse(question) {
        Ok(pq) => pq,
        Err(e) => {
            let e = AskError::from(e);
            return error(StatusCode::UNPROCESSABLE_ENTITY, e.code(), &e.to_string(), question);
        }
    };
    if pq.entities.is_empty() {
        let e = AskError::from(ReasonError::NoEntities {
            question: question.to_string(),
        });
        return error(StatusCode::UNPROCESSABLE_ENTITY, e.code(), &e.to_string(), question);
    }
    let Some(image_id) = image_id else {
        return error(StatusCode::BAD_REQUEST, "MalformedBody", "`image_id` is required", question);
    };
    let Some(kb) = ds.kb(image_id) else {
        return error(
            StatusCode::NOT_FOUND,
            "UnknownImage",
            &format!("unknown image `{image_id}`"),
            question,
        );
    };
    match answer(kb, &pq) {
        // The answer is spliced in verbatim so its bytes match the library's.
        Ok(ans) => json_response(
            StatusCode::OK,
            format!(r#"{{"answer":{},"query":{}}}"#, ans.to_json(), query_echo(&pq)),
        ),
        Err(e) => {
            let e = AskError::from(e);
            let status = if e.is_parse_failure() {
                StatusCode::UNPROCESSABLE_ENTITY
            } else {
                StatusCode::INTERNAL_SERVER_ERROR
            };
            error(status, e.code(), &e.to_string(), question)
        }
    }
}

async fn vocabulary(State(store): State<Arc<Store>>) -> Response {
    json_response(StatusCode::OK, json!(store.snapshot().vocabulary()).to_string())
}

/// Reloads the store whenever the process receives SIGHUP.
#[cfg(unix)]
pub fn reload_on_sighup(store: Arc<Store>) -> std::io::Result<tokio::task::JoinHandle<()>> {
    use tokio::signal::unix::{signal, SignalKind};
    let mut hup = signal(SignalKind::hangup())?;
    Ok(tokio::spawn(async move {
        while hup.recv().await.is_some() {
            match store.reload() {
                Ok(()) => eprintln!("dataset reloaded"),
                Err(e) => eprintln!("reload failed, keeping the previous dataset: {e}"),
            }
        }
    }))
}

/// Serves the API on `listener` until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, store: Arc<Store>) -> std::io::Result<()> {
    #[cfg(unix)]
    reload_on_sighup(store.clone())?;
    axum::serve(listener, router(store)).await
}
