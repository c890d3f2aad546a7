//! Graph analytics and layout for exploring gene clusters together with
//! gene-gene interactions and gene-disease associations.
//!
//! Two graph levels are built from the input tables: a cluster graph whose
//! nodes are gene clusters and whose edges count shared genes, and a
//! per-cluster gene graph of interaction edges. On top of either, a disease
//! overlay colors clusters by EASE enrichment and genes by study p-value.

pub mod enrichment;
pub mod error;
pub mod genemodel;
pub mod highlight;
pub mod ingest;
pub mod layout;
pub mod views;

pub use error::Error;
pub use ingest::{ClusterId, GeneId};
