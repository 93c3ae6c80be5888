//! JSON scoring API.
//!
//! The weight set is loaded once and shared read-only between requests. When
//! it could not be loaded the service stays up but reports itself unready.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kfrisk_core::model::ModelWeights;
use kfrisk_core::service::{score_csv, score_request, FieldError, PredictRequest, PredictResponse, ServiceError};
use serde_json::json;

#[derive(Clone)]
pub struct AppState {
    weights: Result<Arc<ModelWeights>, Arc<str>>,
}

impl AppState {
    pub fn ready(weights: ModelWeights) -> Self {
        Self {
            weights: Ok(Arc::new(weights)),
        }
    }

    pub fn unready(reason: impl Into<String>) -> Self {
        Self {
            weights: Err(reason.into().into()),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/predict", post(predict))
        .route("/api/v1/predict-csv", post(predict_csv))
        .with_state(state)
}

fn unready(reason: &str) -> Response {
    (
        StatusCode::SERVICE_UNAVAILABLE,
        Json(json!({"status": "unready", "reason": reason})),
    )
        .into_response()
}

fn field_errors(status: StatusCode, errors: Vec<FieldError>) -> Response {
    (status, Json(json!({ "errors": errors }))).into_response()
}

fn scored(result: Result<PredictResponse, ServiceError>) -> Response {
    use kfrisk_core::Error;
    match result {
        Ok(body) => Json(body).into_response(),
        Err(e) => {
            let status = match &e {
                ServiceError::Validation(_)
                | ServiceError::Engine(Error::Parse { .. } | Error::Domain(_) | Error::Empty(_)) => {
                    StatusCode::UNPROCESSABLE_ENTITY
                }
                ServiceError::Engine(_) => StatusCode::INTERNAL_SERVER_ERROR,
            };
            field_errors(status, e.field_errors())
        }
    }
}

async fn health(State(state): State<AppState>) -> Response {
    match &state.weights {
        Ok(w) => Json(json!({"status": "ready", "hidden_size": w.hidden_size()})).into_response(),
        Err(reason) => unready(reason),
    }
}

async fn predict(State(state): State<AppState>, body: Bytes) -> Response {
    let weights = match &state.weights {
        Ok(w) => w,
        Err(reason) => return unready(reason),
    };
    let de = &mut serde_json::Deserializer::from_slice(&body);
    let request: PredictRequest = match serde_path_to_error::deserialize(de) {
        Ok(r) => r,
        Err(e) => {
            let path = e.path().to_string();
            let field = if path == "." { String::new() } else { path };
            return field_errors(
                StatusCode::BAD_REQUEST,
                vec![FieldError {
                    field,
                    message: e.into_inner().to_string(),
                }],
            );
        }
    };
    scored(score_request(&request, weights))
}

async fn predict_csv(State(state): State<AppState>, body: Bytes) -> Response {
    match &state.weights {
        Ok(w) => scored(score_csv(&body, w)),
        Err(reason) => unready(reason),
    }
}
