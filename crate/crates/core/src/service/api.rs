//! Request and response bodies, and the error envelope.

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Request};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
use crate::layout::LayeredLayout;
use crate::model::{EvidenceKind, ModelKind, NodeKind, Polarity};
use crate::search::SearchHit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(with = "status_code")]
    pub status: StatusCode,
    pub code: String,
    pub detail: String,
    pub offending_id: Option<String>,
}

mod status_code {
    use axum::http::StatusCode;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: &StatusCode, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_u16(s.as_u16())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<StatusCode, D::Error> {
        StatusCode::from_u16(u16::deserialize(d)?).map_err(de::Error::custom)
    }
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, detail: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_owned(),
            detail: detail.into(),
            offending_id: None,
        }
    }

    pub fn bad_request(detail: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", detail)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, code) = match &e {
            Error::Validation { .. }
            | Error::InvalidDocument(_)
            | Error::Domain(_)
            | Error::IncompleteLog(_) => (StatusCode::UNPROCESSABLE_ENTITY, "validation_error"),
            Error::NotFound { .. } => (StatusCode::NOT_FOUND, "not_found"),
            Error::Conflict { .. } => (StatusCode::CONFLICT, "conflict"),
            Error::StaleRevision { .. } => (StatusCode::CONFLICT, "stale_revision"),
            Error::UnsupportedVersion { .. } => (StatusCode::BAD_REQUEST, "unsupported_version"),
            Error::Parse { .. } => (StatusCode::BAD_REQUEST, "bad_request"),
            Error::Io(_) => (StatusCode::SERVICE_UNAVAILABLE, "unavailable"),
            Error::StaleIndex { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        ApiError {
            status,
            code: code.to_owned(),
            offending_id: e.offending_id().map(str::to_owned),
            detail: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

/// JSON body extractor whose failures use the error envelope (400).
pub struct Body<T>(pub T);

impl<S, T> FromRequest<S> for Body<T>
where
    S: Send + Sync,
    T: DeserializeOwned,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(rejection) => Err(ApiError::bad_request(match rejection {
                JsonRejection::JsonDataError(e) => format!("invalid body: {}", e.body_text()),
                other => other.body_text(),
            })),
        }
    }
}

/// Revision named by the `If-Match` header. Quotes and a weak marker are
/// tolerated so ETag values can be echoed back unchanged.
pub fn if_match(headers: &HeaderMap) -> Result<u64, ApiError> {
    let raw = headers
        .get(axum::http::header::IF_MATCH)
        .ok_or_else(|| ApiError::bad_request("If-Match header with the document revision is required"))?
        .to_str()
        .map_err(|_| ApiError::bad_request("If-Match header is not text"))?;
    let trimmed = raw.trim().trim_start_matches("W/").trim_matches('"');
    trimmed
        .parse()
        .map_err(|_| ApiError::bad_request(format!("If-Match must be a revision number, got {raw:?}")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateModel {
    pub kind: ModelKind,
    pub title: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateNode {
    pub kind: NodeKind,
    pub label: String,
    #[serde(default)]
    pub notes: Option<String>,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateLink {
    pub source: String,
    pub target: String,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttachEvidence {
    pub kind: EvidenceKind,
    pub text: String,
    #[serde(default)]
    pub locator: Option<String>,
}

/// Result of a mutation: the id created or removed, links removed along
/// with a node, and the document after the change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeResponse {
    pub id: Option<String>,
    pub removed_link_ids: Vec<String>,
    pub document: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub id: String,
    pub kind: ModelKind,
    pub title: String,
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutResponse {
    pub model_id: String,
    pub revision: u64,
    pub layout: LayeredLayout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub model_id: String,
    pub revision: u64,
    pub hits: Vec<SearchHit>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct LayoutParams {
    pub incremental: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct SearchParams {
    pub q: Option<String>,
    pub kind: Option<String>,
    pub polarity: Option<String>,
    pub evidence: Option<String>,
    pub limit: Option<usize>,
}
