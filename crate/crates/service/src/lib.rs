//! HTTP + JSON service: sessions holding uploaded datasets, view and overlay
//! queries, highlight queries and snapshot persistence.

pub mod error;
pub mod session;
pub mod snapshot;

use std::collections::{BTreeSet, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use geneweave_core::enrichment::build_disease_gene_map;
use geneweave_core::highlight::HighlightMode;
use geneweave_core::ingest::{
    parse_cluster_table, parse_disease_table, parse_interaction_table, ClusterDataset, ClusterId, ClusteringKind, GeneId,
};
use geneweave_core::views::{self, ViewConfig};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub use error::{ApiError, ErrorBody};
use session::{Datasets, Payload, Session, SessionStore};

pub const DEFAULT_BODY_LIMIT: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub view: ViewConfig,
    pub body_limit: usize,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            view: ViewConfig::default(),
            body_limit: DEFAULT_BODY_LIMIT,
            static_dir: None,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
    pub config: Arc<ServiceConfig>,
}

pub fn router(config: ServiceConfig) -> Router {
    let body_limit = config.body_limit;
    let static_dir = config.static_dir.clone();
    let state = AppState {
        store: Arc::default(),
        config: Arc::new(config),
    };
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/datasets/{kind}", post(upload_dataset))
        .route("/sessions/{id}/cluster-view", get(cluster_view))
        .route("/sessions/{id}/clusters/{cid}/gene-view", get(gene_view))
        .route("/sessions/{id}/diseases", get(list_diseases))
        .route("/sessions/{id}/overlay", get(overlay))
        .route("/sessions/{id}/highlight", get(highlight))
        .route("/sessions/{id}/snapshot", post(save_snapshot))
        .route("/snapshots:load", post(load_snapshot))
        .with_state(state)
        .layer(DefaultBodyLimit::max(body_limit));
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(CorsLayer::permissive())
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(config)).await
}

fn json_bytes(status: StatusCode, bytes: impl Into<Bytes>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], bytes.into()).into_response()
}

fn json<T: Serialize>(status: StatusCode, payload: &T) -> Response {
    json_bytes(status, views::to_json(payload))
}

fn payload(bytes: Payload) -> Response {
    json_bytes(StatusCode::OK, Bytes::from_owner(bytes))
}

type Params = Query<HashMap<String, String>>;

fn param<T: std::str::FromStr>(params: &HashMap<String, String>, name: &str) -> Result<Option<T>, ApiError> {
    match params.get(name) {
        None => Ok(None),
        Some(raw) => raw
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ApiError::bad_parameter(format!("{name}: cannot parse {raw:?}"))),
    }
}

fn required<T: std::str::FromStr>(params: &HashMap<String, String>, name: &str) -> Result<T, ApiError> {
    param(params, name)?.ok_or_else(|| ApiError::bad_parameter(format!("missing query parameter {name}")))
}

fn resolve_cluster(ds: &ClusterDataset, reference: &str) -> Result<ClusterId, ApiError> {
    ds.resolve_cluster(reference)
        .ok_or_else(|| geneweave_core::genemodel::ModelError::UnknownCluster(reference.to_string()))
        .map_err(|e| geneweave_core::Error::from(e).into())
}

/// Layout work runs on the blocking pool.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f).await.expect("worker task panicked")
}

#[derive(Serialize)]
struct SessionCreated {
    session_id: String,
    seed: u64,
}

async fn create_session(State(state): State<AppState>, Query(params): Params) -> Result<Response, ApiError> {
    let seed = param::<u64>(&params, "seed")?;
    let session = state.store.create(seed, Datasets::default());
    Ok(json(StatusCode::CREATED, &SessionCreated {
        session_id: session.id.clone(),
        seed: session.seed,
    }))
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct UploadReport {
    pub dataset: String,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ClusteringKind>,
    pub warnings: Vec<String>,
}

fn unknown_gene_warning(count: usize, what: &str) -> Option<String> {
    (count > 0).then(|| format!("{count} {what} not present in the cluster dataset"))
}

async fn upload_dataset(
    State(state): State<AppState>,
    Path((id, kind)): Path<(String, String)>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    let session = state.store.get(&id)?;
    let body = body.map_err(|e| {
        if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
            ApiError::new(
                StatusCode::PAYLOAD_TOO_LARGE,
                "PAYLOAD_TOO_LARGE",
                format!("upload exceeds the {} byte limit", state.config.body_limit),
            )
        } else {
            ApiError::new(StatusCode::BAD_REQUEST, "BAD_REQUEST", e.body_text())
        }
    })?;
    let text = std::str::from_utf8(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "BAD_ENCODING", format!("body is not UTF-8: {e}")))?
        .to_string();

    let report = blocking(move || -> Result<UploadReport, ApiError> {
        let current = session.snapshot().data.clone();
        let mut warnings = Vec::new();
        let report = match kind.as_str() {
            "cluster" => {
                let ds = parse_cluster_table(&text)?;
                let orphans = (0..ds.genes().len()).filter(|&g| ds.gene_memberships(g).is_empty()).count();
                if orphans > 0 {
                    warnings.push(format!("{orphans} genes belong to no cluster"));
                }
                let report = UploadReport {
                    dataset: kind,
                    rows: ds.genes().len(),
                    kind: Some(ds.kind()),
                    warnings,
                };
                session.update(|d| d.cluster = Some(Arc::new(ds)));
                report
            }
            "interaction" => {
                let ia = parse_interaction_table(&text)?;
                let loops = ia.self_loops().count();
                if loops > 0 {
                    warnings.push(format!("{loops} self-loop interactions"));
                }
                if let Some(cl) = &current.cluster {
                    let unknown: BTreeSet<GeneId> = ia
                        .edges()
                        .iter()
                        .flat_map(|e| [e.source, e.target])
                        .filter(|g| !cl.contains_gene(*g))
                        .collect();
                    warnings.extend(unknown_gene_warning(unknown.len(), "interacting genes are"));
                }
                let report = UploadReport {
                    dataset: kind,
                    rows: ia.row_count(),
                    kind: None,
                    warnings,
                };
                session.update(|d| d.interaction = Some(Arc::new(ia)));
                report
            }
            "disease" => {
                let dd = parse_disease_table(&text)?;
                if let Some(cl) = &current.cluster {
                    let names: BTreeSet<&str> = cl.genes().iter().map(|g| g.name.as_str()).collect();
                    let unknown: BTreeSet<&str> = dd
                        .records()
                        .iter()
                        .map(|r| r.gene_name.as_str())
                        .filter(|n| !names.contains(n))
                        .collect();
                    warnings.extend(unknown_gene_warning(unknown.len(), "disease-associated genes are"));
                }
                let report = UploadReport {
                    dataset: kind,
                    rows: dd.records().len(),
                    kind: None,
                    warnings,
                };
                session.update(|d| d.disease = Some(Arc::new(dd)));
                report
            }
            other => {
                return Err(ApiError::new(
                    StatusCode::NOT_FOUND,
                    "UNKNOWN_DATASET_KIND",
                    format!("dataset kind {other:?} is not one of cluster, interaction, disease"),
                ))
            }
        };
        Ok(report)
    })
    .await?;
    Ok(json(StatusCode::OK, &report))
}

pub fn cluster_view_payload(
    session: &Session,
    config: &ViewConfig,
    min_overlap: usize,
    seed: u64,
) -> Result<Payload, ApiError> {
    let generation = session.snapshot();
    let ds = generation.data.cluster()?;
    generation.cluster_views.get_or_compute((min_overlap, seed), || {
        let view = views::cluster_view(ds, config, session.seed, min_overlap, seed)?;
        Ok(views::to_json(&view).into())
    })
}

async fn cluster_view(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    let session = state.store.get(&id)?;
    let min_overlap = param(&params, "min_overlap")?.unwrap_or(1);
    let seed = param(&params, "seed")?.unwrap_or(session.seed);
    let bytes = blocking(move || cluster_view_payload(&session, &state.config.view, min_overlap, seed)).await?;
    Ok(payload(bytes))
}

async fn gene_view(
    State(state): State<AppState>,
    Path((id, cid)): Path<(String, String)>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    let session = state.store.get(&id)?;
    let seed = param(&params, "seed")?.unwrap_or(session.seed);
    let bytes = blocking(move || -> Result<Payload, ApiError> {
        let generation = session.snapshot();
        let ds = generation.data.cluster()?;
        let ia = generation.data.interaction()?;
        let cluster = resolve_cluster(ds, &cid)?;
        generation.gene_views.get_or_compute((cluster.0, seed), || {
            let view = views::gene_view(ds, ia, cluster, &state.config.view, seed)?;
            Ok(views::to_json(&view).into())
        })
    })
    .await?;
    Ok(payload(bytes))
}

async fn list_diseases(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = state.store.get(&id)?;
    let generation = session.snapshot();
    let dd = generation.data.disease()?;
    Ok(json(StatusCode::OK, &views::disease_list(dd)))
}

async fn overlay(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    let session = state.store.get(&id)?;
    let disease: String = required(&params, "disease")?;
    let cluster_ref: Option<String> = param(&params, "cluster_id")?;
    let min_overlap = param(&params, "min_overlap")?.unwrap_or(1);
    let bytes = blocking(move || -> Result<Vec<u8>, ApiError> {
        let generation = session.snapshot();
        let ds = generation.data.cluster()?;
        let dd = generation.data.disease()?;
        let dmap = build_disease_gene_map(dd, &disease).map_err(geneweave_core::Error::from)?;
        let config = &state.config.view;
        Ok(match cluster_ref {
            None => views::to_json(&views::cluster_overlay_view(ds, &dmap, config, min_overlap)?),
            Some(reference) => {
                let ia = generation.data.interaction()?;
                let cluster = resolve_cluster(ds, &reference)?;
                views::to_json(&views::gene_overlay_view(ds, ia, cluster, &dmap, config)?)
            }
        })
    })
    .await?;
    Ok(json_bytes(StatusCode::OK, bytes))
}

async fn highlight(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    let session = state.store.get(&id)?;
    let cluster_ref: String = required(&params, "cluster_id")?;
    let gene: u64 = required(&params, "gene")?;
    let mode_name: String = required(&params, "mode")?;
    let parameter: f64 = required(&params, "param")?;
    let mode = HighlightMode::parse(&mode_name, parameter).map_err(geneweave_core::Error::from)?;
    let bytes = blocking(move || -> Result<Vec<u8>, ApiError> {
        let generation = session.snapshot();
        let ds = generation.data.cluster()?;
        let ia = generation.data.interaction()?;
        let cluster = resolve_cluster(ds, &cluster_ref)?;
        let view = views::highlight_view(ds, ia, cluster, GeneId(gene), mode, &state.config.view)?;
        Ok(views::to_json(&view))
    })
    .await?;
    Ok(json_bytes(StatusCode::OK, bytes))
}

#[derive(Deserialize)]
struct PathRequest {
    path: PathBuf,
}

fn path_request(body: Result<Bytes, BytesRejection>) -> Result<PathBuf, ApiError> {
    let body = body.map_err(|e| ApiError::bad_parameter(e.body_text()))?;
    serde_json::from_slice::<PathRequest>(&body)
        .map(|r| r.path)
        .map_err(|e| ApiError::bad_parameter(format!("expected {{\"path\": ...}}: {e}")))
}

#[derive(Serialize)]
struct SnapshotSaved {
    path: PathBuf,
    bytes: usize,
}

async fn save_snapshot(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    let session = state.store.get(&id)?;
    let path = path_request(body)?;
    let saved = blocking(move || {
        let doc = snapshot::SnapshotDoc::capture(session.seed, &session.snapshot().data);
        snapshot::save(&path, &doc).map(|bytes| SnapshotSaved { path, bytes })
    })
    .await?;
    Ok(json(StatusCode::OK, &saved))
}

async fn load_snapshot(State(state): State<AppState>, body: Result<Bytes, BytesRejection>) -> Result<Response, ApiError> {
    let path = path_request(body)?;
    let (seed, data) = blocking(move || -> Result<_, ApiError> {
        let doc = snapshot::load(&path)?;
        Ok((doc.seed, doc.restore()?))
    })
    .await?;
    let session = state.store.create(Some(seed), data);
    Ok(json(StatusCode::CREATED, &SessionCreated {
        session_id: session.id.clone(),
        seed: session.seed,
    }))
}
