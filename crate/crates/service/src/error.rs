use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ordagg_core::{EvalError, ParseError, PatchError, SessionError, ValidationError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    Parse,
    Validation,
    NotFound,
    Conflict,
    Io,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::Parse => StatusCode::BAD_REQUEST,
            ErrorCode::Validation => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::Io => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detail {
    pub path: String,
    pub problem: String,
}

/// Body of every error response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default)]
    pub details: Vec<Detail>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            details: Vec::new(),
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    pub fn no_session() -> Self {
        Self::not_found("no session is loaded")
    }
}

impl From<ParseError> for ApiError {
    fn from(err: ParseError) -> Self {
        Self {
            code: ErrorCode::Parse,
            message: "request body is not a valid document".into(),
            details: vec![Detail {
                path: err.path,
                problem: format!("{} (line {}, column {})", err.message, err.line, err.column),
            }],
        }
    }
}

impl From<ValidationError> for ApiError {
    fn from(err: ValidationError) -> Self {
        Self {
            code: ErrorCode::Validation,
            message: format!("{} validation problem(s)", err.violations.len()),
            details: err
                .violations
                .into_iter()
                .map(|v| Detail {
                    path: v.path,
                    problem: v.problem,
                })
                .collect(),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(err: SessionError) -> Self {
        match err {
            SessionError::Parse(e) => e.into(),
            SessionError::Invalid(e) => e.into(),
        }
    }
}

impl From<EvalError> for ApiError {
    fn from(err: EvalError) -> Self {
        match err {
            EvalError::Invalid(e) => e.into(),
            EvalError::Unit {
                ref proposal,
                ref expert,
                ..
            } => Self {
                code: ErrorCode::Validation,
                message: err.to_string(),
                details: vec![Detail {
                    path: format!("scores[proposal={proposal},expert={expert}]"),
                    problem: err.to_string(),
                }],
            },
            EvalError::Aggregate { ref proposal, .. } => Self {
                code: ErrorCode::Validation,
                message: err.to_string(),
                details: vec![Detail {
                    path: format!("proposals.{proposal}"),
                    problem: err.to_string(),
                }],
            },
        }
    }
}

impl From<PatchError> for ApiError {
    fn from(err: PatchError) -> Self {
        match err {
            PatchError::Invalid(e) => e.into(),
            PatchError::Eval(e) => e.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}
