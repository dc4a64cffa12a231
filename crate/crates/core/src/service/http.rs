use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::{Created, Reply, Service, Session, SurveyForm, SurveyReport, SurveyResult};
use crate::error::Error;

struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::Unknown { .. } | Error::SessionNotFound(_) => StatusCode::NOT_FOUND,
            Error::SessionClosed(_) | Error::SessionOpen(_) | Error::DuplicateSurvey(_) => StatusCode::CONFLICT,
            Error::InvalidSurvey(_) | Error::EmptyInput(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            log::error!("{}", self.0);
        }
        (status, Json(json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Deserialize)]
struct NewSession {
    system_id: String,
}

#[derive(Deserialize)]
struct Message {
    text: String,
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/systems", get(systems))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/messages", post(message))
        .route("/sessions/{id}/survey", post(survey))
        .route("/reports/surveys", get(report))
        .with_state(service)
}

async fn systems(State(s): State<Arc<Service>>) -> Json<Vec<String>> {
    Json(s.systems())
}

async fn create(State(s): State<Arc<Service>>, Json(body): Json<NewSession>) -> Result<(StatusCode, Json<Created>), ApiError> {
    Ok((StatusCode::CREATED, Json(s.create_session(&body.system_id)?)))
}

async fn show(State(s): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<Session> {
    Ok(Json(s.session(&id)?))
}

async fn message(State(s): State<Arc<Service>>, Path(id): Path<String>, Json(body): Json<Message>) -> ApiResult<Reply> {
    Ok(Json(s.post_message(&id, &body.text)?))
}

async fn survey(State(s): State<Arc<Service>>, Path(id): Path<String>, Json(form): Json<SurveyForm>) -> ApiResult<SurveyResult> {
    let result = SurveyResult::try_from(form)?;
    s.post_survey(&id, result)?;
    Ok(Json(result))
}

async fn report(State(s): State<Arc<Service>>) -> Json<SurveyReport> {
    Json(s.report())
}

/// Serves until ctrl-c, sweeping idle sessions once a minute.
pub async fn serve(service: Arc<Service>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    let sweeper = Arc::clone(&service);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            match sweeper.sweep() {
                Ok(0) => {}
                Ok(n) => log::info!("closed {n} idle sessions"),
                Err(e) => log::error!("sweep failed: {e}"),
            }
        }
    });
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
