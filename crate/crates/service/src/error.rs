use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use geneweave_core::ingest::Location;
use serde::Serialize;

/// Error payload: `{error_code, message, location?}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub error_code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error_code: code,
                message: message.into(),
                location: None,
            },
        }
    }

    pub fn code(&self) -> &'static str {
        self.body.error_code
    }

    pub fn bad_parameter(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BAD_PARAMETER", message)
    }

    pub fn not_loaded(what: &str) -> Self {
        Self::new(StatusCode::CONFLICT, "NOT_LOADED", format!("{what} dataset not loaded"))
    }

    pub fn unknown_session(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "UNKNOWN_SESSION", format!("no session {id:?}"))
    }

    pub fn corrupt_snapshot(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "CORRUPT_SNAPSHOT", message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "IO_ERROR", message)
    }
}

impl From<geneweave_core::Error> for ApiError {
    fn from(e: geneweave_core::Error) -> Self {
        let status = match e.code() {
            "UNKNOWN_CLUSTER" | "UNKNOWN_GENE" | "UNKNOWN_DISEASE" => StatusCode::NOT_FOUND,
            "BAD_PARAMETER" => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError {
            status,
            body: ErrorBody {
                error_code: e.code(),
                message: e.to_string(),
                location: e.location(),
            },
        }
    }
}

impl From<geneweave_core::ingest::IngestError> for ApiError {
    fn from(e: geneweave_core::ingest::IngestError) -> Self {
        geneweave_core::Error::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, axum::Json(self.body)).into_response()
    }
}
