//! HTTP API over a directory of model files.
//!
//! Every model lives in `<data dir>/<model id>.dreams.json`. Mutations must
//! carry `If-Match: <revision>`; the change is applied to a copy, written to
//! disk and only then published, so a failed write leaves the served state
//! untouched. Mutations of one model queue behind a per-model lock. Layouts
//! and search indexes are cached until the next change.

mod api;

use std::collections::BTreeMap;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::rejection::QueryRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::header::{CONTENT_TYPE, ETAG, IF_MATCH};
use axum::http::{HeaderMap, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, patch, post};
use axum::{Json, Router};
use serde_json::Value;
use tokio::sync::Mutex;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use api::{
    if_match, ApiError, AttachEvidence, ChangeResponse, CreateLink, CreateModel, CreateNode, LayoutParams,
    LayoutResponse, ModelSummary, SearchParams, SearchResponse,
};
use api::Body;

use crate::error::{Error, Result};
use crate::layout::{layout, LayeredLayout, LayoutConfig};
use crate::metrics::{model_stats, MetricsReport};
use crate::model::{LinkPatch, ModelDocument, NodeDetails, NodePatch};
use crate::search::{build_index, query, SearchIndex, SearchQuery};
use crate::store;

pub const DEFAULT_BIND: &str = "127.0.0.1:7421";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub bind: String,
    /// Allowed browser origins; `None` allows any origin.
    pub cors_origins: Option<Vec<String>>,
    pub layout: LayoutConfig,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data_dir: data_dir.into(),
            bind: DEFAULT_BIND.to_owned(),
            cors_origins: None,
            layout: LayoutConfig::default(),
        }
    }
}

#[derive(Default)]
struct Slot {
    doc: Option<Arc<ModelDocument>>,
    // index 0: fresh layout, 1: incremental
    layouts: [Option<Arc<LayeredLayout>>; 2],
    seed: Option<Arc<LayeredLayout>>,
    index: Option<Arc<SearchIndex>>,
}

/// Served models and their caches.
pub struct Store {
    dir: PathBuf,
    layout_config: LayoutConfig,
    models: RwLock<BTreeMap<String, Arc<Mutex<Slot>>>>,
}

fn file_for(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}{}", store::FILE_EXTENSION))
}

fn safe_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Store {
    /// Loads every model file in `dir` (creating the directory if needed)
    /// and deletes temp files left by interrupted writes. Unreadable files
    /// are skipped with a warning.
    pub fn open(dir: &Path, layout_config: LayoutConfig) -> Result<Self> {
        layout_config.validate()?;
        std::fs::create_dir_all(dir)?;
        let mut models = BTreeMap::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if store::is_temp_file(&path) {
                tracing::info!(path = %path.display(), "removing interrupted write");
                let _ = std::fs::remove_file(&path);
                continue;
            }
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
            let Some(stem) = name.strip_suffix(store::FILE_EXTENSION) else { continue };
            let doc = match std::fs::read_to_string(&path).map_err(Error::from).and_then(|t| store::deserialize(&t)) {
                Ok(doc) if doc.id == stem => doc,
                Ok(doc) => {
                    tracing::warn!(path = %path.display(), id = %doc.id, "file name does not match model id, skipped");
                    continue;
                }
                Err(e) => {
                    tracing::warn!(path = %path.display(), error = %e, "unreadable model file, skipped");
                    continue;
                }
            };
            let slot = Slot {
                doc: Some(Arc::new(doc)),
                ..Slot::default()
            };
            models.insert(stem.to_owned(), Arc::new(Mutex::new(slot)));
        }
        tracing::info!(count = models.len(), dir = %dir.display(), "models loaded");
        Ok(Store {
            dir: dir.to_owned(),
            layout_config,
            models: RwLock::new(models),
        })
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>> {
        self.models
            .read()
            .expect("model table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::not_found("model", id))
    }

    fn persist(&self, doc: &ModelDocument) -> Result<()> {
        let text = store::serialize(doc)?;
        store::write_atomic(&file_for(&self.dir, &doc.id), text.as_bytes())?;
        Ok(())
    }

    pub async fn list(&self) -> Vec<Arc<ModelDocument>> {
        let slots: Vec<_> = self.models.read().expect("model table poisoned").values().cloned().collect();
        let mut out = Vec::new();
        for slot in slots {
            out.extend(slot.lock().await.doc.clone());
        }
        out
    }

    pub async fn get(&self, id: &str) -> Result<Arc<ModelDocument>> {
        let slot = self.slot(id)?;
        let guard = slot.lock().await;
        guard.doc.clone().ok_or_else(|| Error::not_found("model", id))
    }

    /// Persists and publishes a new model.
    pub fn insert(&self, doc: ModelDocument) -> Result<Arc<ModelDocument>> {
        if !safe_id(&doc.id) {
            return Err(Error::validation_at(
                "model id may only contain letters, digits, '_' and '-'",
                doc.id.clone(),
            ));
        }
        let mut models = self.models.write().expect("model table poisoned");
        if models.contains_key(&doc.id) {
            return Err(Error::Conflict {
                detail: "a model with this id already exists".into(),
                id: Some(doc.id.clone()),
            });
        }
        self.persist(&doc)?;
        let doc = Arc::new(doc);
        let slot = Slot {
            doc: Some(doc.clone()),
            ..Slot::default()
        };
        models.insert(doc.id.clone(), Arc::new(Mutex::new(slot)));
        Ok(doc)
    }

    /// Applies `change` to a copy of the model at revision `expected`,
    /// writes it, then makes it current.
    pub async fn mutate<R>(
        &self,
        id: &str,
        expected: u64,
        change: impl FnOnce(&mut ModelDocument) -> Result<R>,
    ) -> Result<(Arc<ModelDocument>, R)> {
        let slot = self.slot(id)?;
        let mut guard = slot.lock().await;
        let current = guard.doc.as_ref().ok_or_else(|| Error::not_found("model", id))?;
        if current.revision != expected {
            return Err(Error::StaleRevision {
                expected,
                current: current.revision,
            });
        }
        let mut next = ModelDocument::clone(current);
        let out = change(&mut next)?;
        self.persist(&next)?;
        let next = Arc::new(next);
        guard.doc = Some(next.clone());
        guard.layouts = [None, None];
        guard.index = None;
        Ok((next, out))
    }

    pub async fn remove(&self, id: &str, expected: u64) -> Result<()> {
        let slot = self.slot(id)?;
        let mut guard = slot.lock().await;
        let current = guard.doc.as_ref().ok_or_else(|| Error::not_found("model", id))?;
        if current.revision != expected {
            return Err(Error::StaleRevision {
                expected,
                current: current.revision,
            });
        }
        match std::fs::remove_file(file_for(&self.dir, id)) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        *guard = Slot::default();
        self.models.write().expect("model table poisoned").remove(id);
        Ok(())
    }

    /// Layout of the current revision. An incremental layout is seeded from
    /// the last layout handed out for this model.
    pub async fn layout(&self, id: &str, incremental: bool) -> Result<(Arc<ModelDocument>, Arc<LayeredLayout>)> {
        let slot = self.slot(id)?;
        let mut guard = slot.lock().await;
        let doc = guard.doc.clone().ok_or_else(|| Error::not_found("model", id))?;
        let key = usize::from(incremental);
        if let Some(cached) = &guard.layouts[key] {
            return Ok((doc, cached.clone()));
        }
        let previous = if incremental { guard.seed.clone() } else { None };
        let computed = Arc::new(layout(&doc, &self.layout_config, previous.as_deref())?);
        guard.layouts[key] = Some(computed.clone());
        guard.seed = Some(computed.clone());
        Ok((doc, computed))
    }

    pub async fn search(&self, id: &str, q: &SearchQuery) -> Result<SearchResponse> {
        let slot = self.slot(id)?;
        let mut guard = slot.lock().await;
        let doc = guard.doc.clone().ok_or_else(|| Error::not_found("model", id))?;
        let index = guard.index.get_or_insert_with(|| Arc::new(build_index(&doc))).clone();
        drop(guard);
        Ok(SearchResponse {
            model_id: doc.id.clone(),
            revision: doc.revision,
            hits: query(&index, &doc, q)?,
        })
    }

    pub async fn stats(&self, id: &str) -> Result<MetricsReport> {
        let (doc, layout) = self.layout(id, false).await?;
        model_stats(&doc, &layout)
    }
}

type Shared = Arc<Store>;
type ApiResult = std::result::Result<Response, ApiError>;

fn etag(revision: u64) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{revision}\"")).expect("digits are a valid header")
}

fn document(status: StatusCode, doc: &ModelDocument) -> Response {
    let mut resp = (status, Json(store::to_value(doc))).into_response();
    resp.headers_mut().insert(ETAG, etag(doc.revision));
    resp
}

fn change(status: StatusCode, doc: &ModelDocument, id: Option<String>, removed: Vec<String>) -> Response {
    let body = ChangeResponse {
        id,
        removed_link_ids: removed,
        document: store::to_value(doc),
    };
    let mut resp = (status, Json(body)).into_response();
    resp.headers_mut().insert(ETAG, etag(doc.revision));
    resp
}

fn params<T>(q: std::result::Result<Query<T>, QueryRejection>) -> std::result::Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn list_models(State(store): State<Shared>) -> Json<Vec<ModelSummary>> {
    Json(
        store
            .list()
            .await
            .iter()
            .map(|d| ModelSummary {
                id: d.id.clone(),
                kind: d.kind,
                title: d.title.clone(),
                revision: d.revision,
            })
            .collect(),
    )
}

/// Creates a model from `{kind, title}`, or imports a whole document when
/// the body carries a `schema_version`.
async fn create_model(State(store): State<Shared>, Body(body): Body<Value>) -> ApiResult {
    let doc = if body.get("schema_version").is_some() {
        store::deserialize(&body.to_string())?
    } else {
        let req: CreateModel =
            serde_json::from_value(body).map_err(|e| ApiError::bad_request(format!("invalid body: {e}")))?;
        ModelDocument::new(req.kind, &req.title)?
    };
    let doc = store.insert(doc)?;
    Ok(document(StatusCode::CREATED, &doc))
}

async fn get_model(State(store): State<Shared>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let doc = store.get(&id).await?;
    Ok(document(StatusCode::OK, &doc))
}

async fn delete_model(State(store): State<Shared>, UrlPath(id): UrlPath<String>, headers: HeaderMap) -> ApiResult {
    let expected = if_match(&headers)?;
    store.remove(&id, expected).await?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

async fn add_node(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    Body(req): Body<CreateNode>,
) -> ApiResult {
    let expected = if_match(&headers)?;
    let details = NodeDetails {
        notes: req.notes,
        tags: req.tags,
    };
    let (doc, nid) = store
        .mutate(&id, expected, |m| m.add_node_with(req.kind, &req.label, details))
        .await?;
    Ok(change(StatusCode::CREATED, &doc, Some(nid), Vec::new()))
}

async fn update_node(
    State(store): State<Shared>,
    UrlPath((id, nid)): UrlPath<(String, String)>,
    headers: HeaderMap,
    Body(patch): Body<NodePatch>,
) -> ApiResult {
    let expected = if_match(&headers)?;
    let (doc, ()) = store.mutate(&id, expected, |m| m.update_node(&nid, patch)).await?;
    Ok(change(StatusCode::OK, &doc, Some(nid), Vec::new()))
}

async fn remove_node(
    State(store): State<Shared>,
    UrlPath((id, nid)): UrlPath<(String, String)>,
    headers: HeaderMap,
) -> ApiResult {
    let expected = if_match(&headers)?;
    let (doc, removed) = store.mutate(&id, expected, |m| m.remove_node(&nid)).await?;
    Ok(change(StatusCode::OK, &doc, Some(nid), removed))
}

async fn add_link(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    Body(req): Body<CreateLink>,
) -> ApiResult {
    let expected = if_match(&headers)?;
    let (doc, lid) = store
        .mutate(&id, expected, |m| m.add_link(&req.source, &req.target, req.polarity))
        .await?;
    Ok(change(StatusCode::CREATED, &doc, Some(lid), Vec::new()))
}

async fn update_link(
    State(store): State<Shared>,
    UrlPath((id, lid)): UrlPath<(String, String)>,
    headers: HeaderMap,
    Body(patch): Body<LinkPatch>,
) -> ApiResult {
    let expected = if_match(&headers)?;
    let (doc, ()) = store.mutate(&id, expected, |m| m.update_link(&lid, patch)).await?;
    Ok(change(StatusCode::OK, &doc, Some(lid), Vec::new()))
}

async fn remove_link(
    State(store): State<Shared>,
    UrlPath((id, lid)): UrlPath<(String, String)>,
    headers: HeaderMap,
) -> ApiResult {
    let expected = if_match(&headers)?;
    let (doc, link) = store.mutate(&id, expected, |m| m.remove_link(&lid)).await?;
    Ok(change(StatusCode::OK, &doc, Some(link.id.clone()), vec![link.id]))
}

async fn attach_evidence(
    State(store): State<Shared>,
    UrlPath((id, lid)): UrlPath<(String, String)>,
    headers: HeaderMap,
    Body(req): Body<AttachEvidence>,
) -> ApiResult {
    let expected = if_match(&headers)?;
    let (doc, eid) = store
        .mutate(&id, expected, |m| {
            m.attach_evidence(&lid, req.kind, &req.text, req.locator.as_deref())
        })
        .await?;
    Ok(change(StatusCode::CREATED, &doc, Some(eid), Vec::new()))
}

async fn detach_evidence(
    State(store): State<Shared>,
    UrlPath((id, lid, eid)): UrlPath<(String, String, String)>,
    headers: HeaderMap,
) -> ApiResult {
    let expected = if_match(&headers)?;
    let (doc, item) = store.mutate(&id, expected, |m| m.detach_evidence(&lid, &eid)).await?;
    Ok(change(StatusCode::OK, &doc, Some(item.id), Vec::new()))
}

async fn get_layout(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    q: std::result::Result<Query<LayoutParams>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let (doc, layout) = store.layout(&id, p.incremental.unwrap_or(false)).await?;
    let body = LayoutResponse {
        model_id: doc.id.clone(),
        revision: doc.revision,
        layout: LayeredLayout::clone(&layout),
    };
    let mut resp = Json(body).into_response();
    resp.headers_mut().insert(ETAG, etag(doc.revision));
    Ok(resp)
}

/// Turns query-string parameters into a [`SearchQuery`]. Unknown filter
/// values are a malformed request.
pub fn search_query(p: SearchParams) -> std::result::Result<SearchQuery, ApiError> {
    fn parse<T: std::str::FromStr<Err = Error>>(v: Option<String>) -> std::result::Result<Option<T>, ApiError> {
        v.filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e: Error| ApiError::bad_request(e.to_string())))
            .transpose()
    }
    Ok(SearchQuery {
        text: p.q.unwrap_or_default(),
        kind_filter: parse(p.kind)?,
        polarity_filter: parse(p.polarity)?,
        evidence_filter: parse(p.evidence)?,
        limit: p.limit.unwrap_or(crate::search::DEFAULT_LIMIT),
    })
}

async fn search(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    q: std::result::Result<Query<SearchParams>, QueryRejection>,
) -> ApiResult {
    let query = search_query(params(q)?)?;
    Ok(Json(store.search(&id, &query).await?).into_response())
}

async fn stats(State(store): State<Shared>, UrlPath(id): UrlPath<String>) -> ApiResult {
    Ok(Json(store.stats(&id).await?).into_response())
}

fn cors(origins: Option<&[String]>) -> Result<CorsLayer> {
    let allow = match origins {
        None => AllowOrigin::any(),
        Some(list) => {
            let values = list
                .iter()
                .map(|o| HeaderValue::from_str(o).map_err(|_| Error::validation(format!("bad CORS origin {o:?}"))))
                .collect::<Result<Vec<_>>>()?;
            AllowOrigin::list(values)
        }
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST, Method::PATCH, Method::DELETE])
        .allow_headers([CONTENT_TYPE, IF_MATCH])
        .expose_headers([ETAG]))
}

/// The API routes over `store`.
pub fn router(store: Arc<Store>, cors_origins: Option<&[String]>) -> Result<Router> {
    let models = Router::new()
        .route("/models", get(list_models).post(create_model))
        .route("/models/{id}", get(get_model).delete(delete_model))
        .route("/models/{id}/nodes", post(add_node))
        .route("/models/{id}/nodes/{nid}", patch(update_node).delete(remove_node))
        .route("/models/{id}/links", post(add_link))
        .route("/models/{id}/links/{lid}", patch(update_link).delete(remove_link))
        .route("/models/{id}/links/{lid}/evidence", post(attach_evidence))
        .route("/models/{id}/links/{lid}/evidence/{eid}", delete(detach_evidence))
        .route("/models/{id}/layout", get(get_layout))
        .route("/models/{id}/search", get(search))
        .route("/models/{id}/stats", get(stats))
        .with_state(store);
    Ok(models.layer(cors(cors_origins)?))
}

/// Binds, announces `listening on http://<addr>` on stdout, and serves until
/// Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<()> {
    let store = Arc::new(Store::open(&config.data_dir, config.layout.clone())?);
    let app = router(store, config.cors_origins.as_deref())?;
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    let addr: SocketAddr = listener.local_addr()?;
    {
        let mut out = std::io::stdout().lock();
        writeln!(out, "listening on http://{addr}")?;
        out.flush()?;
    }
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelKind, NodeKind, Polarity};

    fn open() -> (tempfile::TempDir, Store) {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path(), LayoutConfig::default()).unwrap();
        (dir, store)
    }

    #[tokio::test]
    async fn mutate_checks_revision_and_persists() {
        let (dir, store) = open();
        let doc = store.insert(ModelDocument::new(ModelKind::ReferenceModel, "RM").unwrap()).unwrap();
        let (d1, a) = store
            .mutate(&doc.id, 0, |m| m.add_node(NodeKind::KeyFactor, "a"))
            .await
            .unwrap();
        assert_eq!(d1.revision, 1);
        let stale = store.mutate(&doc.id, 0, |m| m.add_node(NodeKind::KeyFactor, "b")).await;
        assert!(matches!(stale, Err(Error::StaleRevision { expected: 0, current: 1 })));
        let (d2, _) = store
            .mutate(&doc.id, 1, |m| {
                let b = m.add_node(NodeKind::KeyFactor, "b")?;
                m.add_link(&a, &b, Polarity::Positive)
            })
            .await
            .unwrap();
        let on_disk = std::fs::read_to_string(file_for(dir.path(), &doc.id)).unwrap();
        assert_eq!(store::deserialize(&on_disk).unwrap(), *d2);

        let reopened = Store::open(dir.path(), LayoutConfig::default()).unwrap();
        assert_eq!(*reopened.get(&doc.id).await.unwrap(), *d2);
    }

    #[tokio::test]
    async fn failed_change_leaves_state() {
        let (_dir, store) = open();
        let doc = store.insert(ModelDocument::new(ModelKind::ImpactModel, "IM").unwrap()).unwrap();
        let bad = store.mutate(&doc.id, 0, |m| m.add_link("n_x", "n_y", Polarity::Positive)).await;
        assert!(matches!(bad, Err(Error::NotFound { .. })));
        assert_eq!(store.get(&doc.id).await.unwrap().revision, 0);
    }

    #[tokio::test]
    async fn layout_cache_follows_revision() {
        let (_dir, store) = open();
        let doc = store.insert(ModelDocument::new(ModelKind::ImpactModel, "IM").unwrap()).unwrap();
        let (_, l0) = store.layout(&doc.id, false).await.unwrap();
        let (_, again) = store.layout(&doc.id, false).await.unwrap();
        assert!(Arc::ptr_eq(&l0, &again));
        store.mutate(&doc.id, 0, |m| m.add_node(NodeKind::KeyFactor, "a")).await.unwrap();
        let (_, l1) = store.layout(&doc.id, true).await.unwrap();
        assert_eq!(l1.layer_of.len(), 1);
    }

    #[tokio::test]
    async fn open_skips_junk_and_cleans_temp() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(".m_x.dreams.json.tmp-1"), "{").unwrap();
        std::fs::write(dir.path().join("m_y.dreams.json"), "{").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "hi").unwrap();
        let store = Store::open(dir.path(), LayoutConfig::default()).unwrap();
        assert!(store.list().await.is_empty());
        assert!(!dir.path().join(".m_x.dreams.json.tmp-1").exists());
    }

    #[test]
    fn error_codes() {
        let cases = [
            (Error::validation("x"), 422, "validation_error"),
            (Error::not_found("node", "n_1"), 404, "not_found"),
            (
                Error::Conflict {
                    detail: "dup".into(),
                    id: None,
                },
                409,
                "conflict",
            ),
            (Error::StaleRevision { expected: 1, current: 2 }, 409, "stale_revision"),
            (Error::UnsupportedVersion { found: None }, 400, "unsupported_version"),
        ];
        for (e, status, code) in cases {
            let api = ApiError::from(e);
            assert_eq!((api.status.as_u16(), api.code.as_str()), (status, code));
        }
        assert_eq!(ApiError::from(Error::not_found("node", "n_1")).offending_id.as_deref(), Some("n_1"));
    }

    #[test]
    fn if_match_forms() {
        let mut h = HeaderMap::new();
        assert!(if_match(&h).is_err());
        for (raw, want) in [("3", 3), ("\"4\"", 4), ("W/\"5\"", 5)] {
            h.insert(IF_MATCH, HeaderValue::from_static(raw));
            assert_eq!(if_match(&h).unwrap(), want);
        }
        h.insert(IF_MATCH, HeaderValue::from_static("abc"));
        assert!(if_match(&h).is_err());
    }
}
