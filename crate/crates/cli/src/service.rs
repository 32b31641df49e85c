//! JSON-over-HTTP access to a set of trained models.
//!
//! | Route | Body | Reply |
//! |---|---|---|
//! | `GET /models` | | `[{id, mode, vocab_size, language}]` |
//! | `POST /tokenize` | `{model_id, text, gold_segmentation?, alignment?}` | per-word tokens, offsets and, with gold, μ_e and boundary flags |
//! | `POST /compare` | `{model_ids, text, gold_segmentation?}` | one `/tokenize` reply per model |
//!
//! Errors are `{"error": "..."}` with status 400 or 404.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use morphbpe::inspect::{inspect_text, WordView};
use morphbpe::{load_model, Error, Mode, TokenizerModel};
use serde::{Deserialize, Serialize};

pub type Models = BTreeMap<String, TokenizerModel>;

/// Loads every `*.json` file in `dir`; the file stem is the model id.
pub fn load_models(dir: &Path) -> morphbpe::Result<Models> {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut models = Models::new();
    for entry in entries {
        let path = entry
            .map_err(|source| Error::Io {
                path: dir.to_owned(),
                source,
            })?
            .path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        models.insert(id.to_owned(), load_model(&path)?);
    }
    Ok(models)
}

pub fn router(models: Models) -> Router {
    Router::new()
        .route("/models", get(list_models))
        .route("/tokenize", post(tokenize))
        .route("/compare", post(compare))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "no such route") })
        .layer(middleware::from_fn(cors))
        .with_state(Arc::new(models))
}

async fn cors(req: Request, next: Next) -> Response {
    let mut res = if req.method() == Method::OPTIONS {
        StatusCode::NO_CONTENT.into_response()
    } else {
        next.run(req).await
    };
    let h = res.headers_mut();
    h.insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
    h.insert(
        header::ACCESS_CONTROL_ALLOW_METHODS,
        HeaderValue::from_static("GET, POST, OPTIONS"),
    );
    h.insert(
        header::ACCESS_CONTROL_ALLOW_HEADERS,
        HeaderValue::from_static("content-type"),
    );
    res
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, r.body_text())
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = match e {
            Error::Config(m) => m,
            other => other.to_string(),
        };
        ApiError::new(StatusCode::BAD_REQUEST, message)
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelInfo {
    pub id: String,
    pub mode: Mode,
    pub vocab_size: usize,
    pub language: Option<String>,
}

async fn list_models(State(models): State<Arc<Models>>) -> Json<Vec<ModelInfo>> {
    Json(
        models
            .iter()
            .map(|(id, m)| ModelInfo {
                id: id.clone(),
                mode: m.mode(),
                vocab_size: m.vocab_size(),
                language: m.language().map(str::to_owned),
            })
            .collect(),
    )
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenizeRequest {
    pub model_id: String,
    pub text: String,
    /// One morpheme list per whitespace-delimited word of `text`.
    #[serde(default)]
    pub gold_segmentation: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub alignment: bool,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TokenizeResponse {
    pub model_id: String,
    pub mode: Mode,
    pub vocab_size: usize,
    pub words: Vec<WordView>,
    /// Mean over words whose gold split was usable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_mu_e: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareRequest {
    pub model_ids: Vec<String>,
    pub text: String,
    #[serde(default)]
    pub gold_segmentation: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CompareResponse {
    pub results: Vec<TokenizeResponse>,
}

fn run_one(
    models: &Models,
    id: &str,
    text: &str,
    gold: Option<&[Vec<String>]>,
    alignment: bool,
) -> Result<TokenizeResponse, ApiError> {
    let model = models
        .get(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown model {id:?}")))?;
    let words = inspect_text(model, text, gold, alignment)?;
    let scored: Vec<u32> = words.iter().filter_map(|w| w.mu_e).collect();
    let mean_mu_e =
        (!scored.is_empty()).then(|| scored.iter().map(|&d| f64::from(d)).sum::<f64>() / scored.len() as f64);
    Ok(TokenizeResponse {
        model_id: id.to_owned(),
        mode: model.mode(),
        vocab_size: model.vocab_size(),
        words,
        mean_mu_e,
    })
}

async fn tokenize(
    State(models): State<Arc<Models>>,
    body: Result<Json<TokenizeRequest>, JsonRejection>,
) -> Result<Json<TokenizeResponse>, ApiError> {
    let Json(req) = body?;
    run_one(
        &models,
        &req.model_id,
        &req.text,
        req.gold_segmentation.as_deref(),
        req.alignment,
    )
    .map(Json)
}

async fn compare(
    State(models): State<Arc<Models>>,
    body: Result<Json<CompareRequest>, JsonRejection>,
) -> Result<Json<CompareResponse>, ApiError> {
    let Json(req) = body?;
    if req.model_ids.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "model_ids is empty"));
    }
    let results = req
        .model_ids
        .iter()
        .map(|id| run_one(&models, id, &req.text, req.gold_segmentation.as_deref(), true))
        .collect::<Result<_, _>>()?;
    Ok(Json(CompareResponse { results }))
}
