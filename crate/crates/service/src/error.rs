use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use logex_core::exercise::ExerciseError;
use logex_core::feedforward::FeedError;
use logex_core::session::SessionError;
use logex_core::state::StateError;
use serde_json::json;

/// An error response: `{"error": message}` with an HTTP status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::UnknownExercise(_) | SessionError::NotFinished(_) => StatusCode::CONFLICT,
            SessionError::State(StateError::NoBackwardChain) => StatusCode::BAD_REQUEST,
            SessionError::State(_) => StatusCode::CONFLICT,
            SessionError::Feed(FeedError::BadLevel(_)) => StatusCode::BAD_REQUEST,
            SessionError::Feed(FeedError::AlreadySolved) => StatusCode::CONFLICT,
            SessionError::Feed(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<ExerciseError> for ApiError {
    fn from(e: ExerciseError) -> Self {
        let status = match e {
            ExerciseError::Syntax(_) | ExerciseError::PayloadMismatch(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, e.to_string())
    }
}
