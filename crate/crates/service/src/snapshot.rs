//! Session persistence. Datasets are stored as their canonical table text and
//! re-parsed on load, so a loaded session runs the exact same code paths.

use std::path::Path;
use std::sync::Arc;

use axum::http::StatusCode;
use geneweave_core::ingest::{parse_cluster_table, parse_disease_table, parse_interaction_table};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::session::Datasets;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDoc {
    pub format_version: u64,
    pub seed: u64,
    pub datasets: SnapshotTables,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SnapshotTables {
    pub cluster: Option<String>,
    pub interaction: Option<String>,
    pub disease: Option<String>,
}

impl SnapshotDoc {
    pub fn capture(seed: u64, data: &Datasets) -> Self {
        SnapshotDoc {
            format_version: FORMAT_VERSION,
            seed,
            datasets: SnapshotTables {
                cluster: data.cluster.as_ref().map(|d| d.to_table()),
                interaction: data.interaction.as_ref().map(|d| d.to_table()),
                disease: data.disease.as_ref().map(|d| d.to_table()),
            },
        }
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ApiError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| ApiError::corrupt_snapshot(format!("not a JSON document: {e}")))?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(FORMAT_VERSION) => {}
            Some(other) => {
                return Err(ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "VERSION_MISMATCH",
                    format!("snapshot format version {other} is not supported (expected {FORMAT_VERSION})"),
                ))
            }
            None => return Err(ApiError::corrupt_snapshot("missing format_version")),
        }
        serde_json::from_value(value).map_err(|e| ApiError::corrupt_snapshot(e.to_string()))
    }

    pub fn restore(&self) -> Result<Datasets, ApiError> {
        let bad = |kind: &str, e: geneweave_core::ingest::IngestError| {
            ApiError::corrupt_snapshot(format!("stored {kind} table does not parse: {e}"))
        };
        let t = &self.datasets;
        Ok(Datasets {
            cluster: t
                .cluster
                .as_deref()
                .map(|s| parse_cluster_table(s).map(Arc::new).map_err(|e| bad("cluster", e)))
                .transpose()?,
            interaction: t
                .interaction
                .as_deref()
                .map(|s| parse_interaction_table(s).map(Arc::new).map_err(|e| bad("interaction", e)))
                .transpose()?,
            disease: t
                .disease
                .as_deref()
                .map(|s| parse_disease_table(s).map(Arc::new).map_err(|e| bad("disease", e)))
                .transpose()?,
        })
    }
}

pub fn save(path: &Path, doc: &SnapshotDoc) -> Result<usize, ApiError> {
    let bytes = serde_json::to_vec_pretty(doc).expect("snapshot serializes");
    std::fs::write(path, &bytes).map_err(|e| ApiError::io(format!("{}: {e}", path.display())))?;
    Ok(bytes.len())
}

pub fn load(path: &Path) -> Result<SnapshotDoc, ApiError> {
    let bytes = std::fs::read(path).map_err(|e| ApiError::io(format!("{}: {e}", path.display())))?;
    SnapshotDoc::decode(&bytes)
}
