//! JSON payloads for the Cluster View, Gene View, Disease Mode overlays and
//! highlight queries. The HTTP service and the CLI both serialize through
//! [`to_json`], so identical inputs give byte-identical documents.
//!
//! Floating-point fields are rounded to 12 significant digits before
//! serialization.

use serde::{Deserialize, Serialize, Serializer};

use crate::enrichment::{
    cluster_overlay, gene_overlay, ColorClass, DiseaseGeneMap, OverlayParams,
};
use crate::error::Error;
use crate::genemodel::{build_cluster_graph, build_gene_graph, GeneGraph, ModelParams};
use crate::highlight::{highlight, HighlightMode};
use crate::ingest::{ClusterDataset, ClusterId, GeneId, InteractionDataset};
use crate::layout::{compute_layout, LayoutParams};

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Decimal text for a float at 12 significant digits, shortest form.
pub fn format_significant(x: f64) -> String {
    serde_json::to_string(&round_significant(x)).expect("finite float")
}

fn sig<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_significant(*x))
}

fn sig_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&round_significant(*v)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewConfig {
    pub model: ModelParams,
    pub layout: LayoutParams,
    pub overlay: OverlayParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutMeta {
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterViewNode {
    pub id: ClusterId,
    pub name: String,
    pub gene_count: usize,
    #[serde(serialize_with = "sig")]
    pub mean_association: f64,
    #[serde(serialize_with = "sig")]
    pub x: f64,
    #[serde(serialize_with = "sig")]
    pub y: f64,
    #[serde(serialize_with = "sig")]
    pub minor_radius: f64,
    #[serde(serialize_with = "sig")]
    pub major_radius: f64,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterViewEdge {
    pub a: ClusterId,
    pub b: ClusterId,
    pub overlap: usize,
    #[serde(serialize_with = "sig")]
    pub width: f64,
    #[serde(serialize_with = "sig")]
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterView {
    pub min_overlap: usize,
    pub nodes: Vec<ClusterViewNode>,
    pub edges: Vec<ClusterViewEdge>,
    pub layout: LayoutMeta,
}

pub fn cluster_view(
    ds: &ClusterDataset,
    config: &ViewConfig,
    palette_seed: u64,
    min_overlap: usize,
    layout_seed: u64,
) -> Result<ClusterView, Error> {
    let graph = build_cluster_graph(ds, min_overlap, &config.model, palette_seed)?;
    let params = config.layout.with_seed(layout_seed);
    let state = compute_layout(graph.nodes.len(), &graph.weighted_edges(), &params)?;
    let nodes = graph
        .nodes
        .iter()
        .zip(&state.positions)
        .map(|(n, p)| ClusterViewNode {
            id: n.cluster,
            name: n.name.clone(),
            gene_count: n.gene_count,
            mean_association: n.mean_association,
            x: p[0],
            y: p[1],
            minor_radius: n.geometry.minor_radius,
            major_radius: n.geometry.major_radius,
            color: n.geometry.base_color.hex(),
        })
        .collect();
    let edges = graph
        .edges
        .iter()
        .map(|e| ClusterViewEdge {
            a: e.a,
            b: e.b,
            overlap: e.overlap,
            width: e.width,
            intensity: e.intensity,
        })
        .collect();
    Ok(ClusterView {
        min_overlap,
        nodes,
        edges,
        layout: LayoutMeta {
            seed: layout_seed,
            iterations: state.iteration,
            converged: state.converged,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieEntry {
    pub cluster: ClusterId,
    #[serde(serialize_with = "sig")]
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneViewNode {
    pub id: GeneId,
    pub name: String,
    #[serde(serialize_with = "sig")]
    pub x: f64,
    #[serde(serialize_with = "sig")]
    pub y: f64,
    #[serde(serialize_with = "sig")]
    pub radius: f64,
    #[serde(serialize_with = "sig")]
    pub association: f64,
    pub pie: Vec<PieEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneViewEdge {
    pub a: GeneId,
    pub b: GeneId,
    #[serde(serialize_with = "sig")]
    pub score: f64,
    #[serde(serialize_with = "sig")]
    pub width: f64,
    #[serde(serialize_with = "sig")]
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneView {
    pub cluster: ClusterId,
    pub cluster_name: String,
    pub nodes: Vec<GeneViewNode>,
    pub edges: Vec<GeneViewEdge>,
    pub layout: LayoutMeta,
}

pub fn gene_view(
    ds: &ClusterDataset,
    ia: &InteractionDataset,
    cluster: ClusterId,
    config: &ViewConfig,
    layout_seed: u64,
) -> Result<GeneView, Error> {
    let graph = build_gene_graph(ds, ia, cluster, &config.model)?;
    let params = config.layout.with_seed(layout_seed);
    let state = compute_layout(graph.nodes.len(), &graph.weighted_edges(), &params)?;
    Ok(gene_view_from_graph(ds, &graph, &state.positions, LayoutMeta {
        seed: layout_seed,
        iterations: state.iteration,
        converged: state.converged,
    }))
}

fn gene_view_from_graph(
    ds: &ClusterDataset,
    graph: &GeneGraph,
    positions: &[[f64; 2]],
    layout: LayoutMeta,
) -> GeneView {
    GeneView {
        cluster: graph.cluster,
        cluster_name: ds.cluster_name(graph.cluster).unwrap_or_default().to_string(),
        nodes: graph
            .nodes
            .iter()
            .zip(positions)
            .map(|(n, p)| GeneViewNode {
                id: n.gene,
                name: n.name.clone(),
                x: p[0],
                y: p[1],
                radius: n.radius,
                association: n.association,
                pie: n
                    .pie
                    .iter()
                    .map(|s| PieEntry {
                        cluster: s.cluster,
                        fraction: s.fraction,
                    })
                    .collect(),
            })
            .collect(),
        edges: graph
            .edges
            .iter()
            .map(|e| GeneViewEdge {
                a: e.a,
                b: e.b,
                score: e.score,
                width: e.width,
                intensity: e.intensity,
            })
            .collect(),
        layout,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterOverlayEntry {
    pub cluster: ClusterId,
    #[serde(serialize_with = "sig")]
    pub ease_p: f64,
    pub color_class: ColorClass,
    pub color: String,
    #[serde(serialize_with = "sig")]
    pub opacity: f64,
    pub k: u64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeOpacity {
    pub a: ClusterId,
    pub b: ClusterId,
    #[serde(serialize_with = "sig")]
    pub opacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterOverlay {
    pub disease: String,
    pub population: u64,
    pub disease_genes: u64,
    pub clusters: Vec<ClusterOverlayEntry>,
    pub edges: Vec<EdgeOpacity>,
}

/// Cluster-level Disease Mode styling. An edge is dimmed when both of its
/// clusters are dimmed.
pub fn cluster_overlay_view(
    ds: &ClusterDataset,
    dmap: &DiseaseGeneMap,
    config: &ViewConfig,
    min_overlap: usize,
) -> Result<ClusterOverlay, Error> {
    let results = cluster_overlay(ds, dmap, config.model.membership_threshold, &config.overlay);
    let graph = build_cluster_graph(ds, min_overlap, &config.model, 0)?;
    let dimmed = |c: ClusterId| results[c.0].dimmed();
    let edges = graph
        .edges
        .iter()
        .map(|e| EdgeOpacity {
            a: e.a,
            b: e.b,
            opacity: if dimmed(e.a) && dimmed(e.b) {
                config.overlay.dim_value
            } else {
                1.0
            },
        })
        .collect();
    let population = ds.genes().len() as u64;
    let disease_genes = results.first().map_or(0, |r| r.pop_hits);
    Ok(ClusterOverlay {
        disease: dmap.disease.clone(),
        population,
        disease_genes,
        clusters: results
            .into_iter()
            .map(|r| ClusterOverlayEntry {
                cluster: r.cluster,
                ease_p: r.ease_p,
                color_class: r.color_class,
                color: r.color_class.rgb().hex(),
                opacity: r.opacity,
                k: r.cluster_hits,
                n: r.cluster_size,
            })
            .collect(),
        edges,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneOverlayItem {
    pub gene: GeneId,
    #[serde(serialize_with = "sig_opt", skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneOverlay {
    pub disease: String,
    pub cluster: ClusterId,
    pub genes: Vec<GeneOverlayItem>,
}

pub fn gene_overlay_view(
    ds: &ClusterDataset,
    ia: &InteractionDataset,
    cluster: ClusterId,
    dmap: &DiseaseGeneMap,
    config: &ViewConfig,
) -> Result<GeneOverlay, Error> {
    let graph = build_gene_graph(ds, ia, cluster, &config.model)?;
    Ok(GeneOverlay {
        disease: dmap.disease.clone(),
        cluster,
        genes: gene_overlay(&graph, dmap, &config.overlay)
            .into_iter()
            .map(|e| GeneOverlayItem {
                gene: e.gene,
                p: e.p,
                color: e.color.hex(),
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighlightNode {
    pub gene: GeneId,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighlightLink {
    pub a: GeneId,
    pub b: GeneId,
    #[serde(serialize_with = "sig")]
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighlightView {
    pub cluster: ClusterId,
    pub origin: GeneId,
    pub mode: &'static str,
    #[serde(serialize_with = "sig")]
    pub parameter: f64,
    pub nodes: Vec<HighlightNode>,
    pub edges: Vec<HighlightLink>,
}

pub fn highlight_view(
    ds: &ClusterDataset,
    ia: &InteractionDataset,
    cluster: ClusterId,
    origin: GeneId,
    mode: HighlightMode,
    config: &ViewConfig,
) -> Result<HighlightView, Error> {
    let graph = build_gene_graph(ds, ia, cluster, &config.model)?;
    let result = highlight(&graph, origin, mode)?;
    let (name, parameter) = match mode {
        HighlightMode::Levels(l) => ("levels", l as f64),
        HighlightMode::Threshold(t) => ("threshold", t),
        HighlightMode::TopN(n) => ("top_n", n as f64),
    };
    Ok(HighlightView {
        cluster,
        origin,
        mode: name,
        parameter,
        nodes: result
            .nodes
            .iter()
            .map(|n| HighlightNode {
                gene: n.gene,
                level: n.level,
            })
            .collect(),
        edges: result
            .edges
            .iter()
            .map(|e| HighlightLink {
                a: e.a,
                b: e.b,
                score: e.score,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiseaseCount {
    pub disease: String,
    pub record_count: usize,
}

pub fn disease_list(ds: &crate::ingest::DiseaseDataset) -> Vec<DiseaseCount> {
    ds.disease_counts()
        .into_iter()
        .map(|(disease, record_count)| DiseaseCount {
            disease,
            record_count,
        })
        .collect()
}

pub fn to_json<T: Serialize>(payload: &T) -> Vec<u8> {
    serde_json::to_vec(payload).expect("payload serializes")
}
