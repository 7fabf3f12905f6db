use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use decalpaint_core::ValidationReport;
use serde::Serialize;

/// Error body: `{"error": kind, "message": text}` plus the validation report
/// when a mesh was rejected.
#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ValidationReport>,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            error,
            message: message.into(),
            report: None,
        }
    }

    pub fn bad_request(error: &'static str, message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, error, message.to_string())
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "NotFound",
            format!("unknown {what} {id:?}"),
        )
    }

    pub fn validation(report: ValidationReport) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            error: "ValidationFailed",
            message: report.to_string(),
            report: Some(report),
        }
    }

    pub fn internal(message: impl ToString) -> Self {
        Self::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "Internal",
            message.to_string(),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}
