use thiserror::Error;

use crate::enrichment::EnrichmentError;
use crate::genemodel::ModelError;
use crate::highlight::HighlightError;
use crate::ingest::{IngestError, Location};
use crate::layout::LayoutError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Enrichment(#[from] EnrichmentError),
    #[error(transparent)]
    Highlight(#[from] HighlightError),
}

impl Error {
    /// Stable machine-readable code, distinct per error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Ingest(e) => e.code(),
            Error::Model(ModelError::EmptyDataset) => "EMPTY_DATASET",
            Error::Model(ModelError::UnknownCluster(_)) => "UNKNOWN_CLUSTER",
            Error::Model(ModelError::BadParameter(_)) => "BAD_PARAMETER",
            Error::Layout(_) => "BAD_PARAMETER",
            Error::Enrichment(EnrichmentError::UnknownDisease(_)) => "UNKNOWN_DISEASE",
            Error::Enrichment(EnrichmentError::BadParameter(_)) => "BAD_PARAMETER",
            Error::Highlight(HighlightError::UnknownGene(_)) => "UNKNOWN_GENE",
            Error::Highlight(HighlightError::BadParameter(_)) => "BAD_PARAMETER",
        }
    }

    pub fn location(&self) -> Option<Location> {
        match self {
            Error::Ingest(e) => e.location(),
            _ => None,
        }
    }
}
