//! WebAssembly bindings. Each export takes dataset text straight from the page
//! and returns a JSON string; errors come back as `{error_code, message, location?}`.
//! The `*_json` functions hold the logic so they can be tested natively.

use geneweave_core::enrichment::{build_disease_gene_map, cluster_overlay};
use geneweave_core::highlight::HighlightMode;
use geneweave_core::ingest::{parse_cluster_table, parse_disease_table, parse_interaction_table, ClusterId, GeneId};
use geneweave_core::views::{self, round_significant, ViewConfig};
use geneweave_core::Error;
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub fn error_json(e: &Error) -> String {
    let mut body = serde_json::json!({ "error_code": e.code(), "message": e.to_string() });
    if let Some(loc) = e.location() {
        body["location"] = serde_json::to_value(loc).expect("location serializes");
    }
    body.to_string()
}

fn cluster_ref(ds: &geneweave_core::ingest::ClusterDataset, reference: &str) -> Result<ClusterId, Error> {
    ds.resolve_cluster(reference)
        .ok_or_else(|| geneweave_core::genemodel::ModelError::UnknownCluster(reference.to_string()).into())
}

/// Cluster view with layout, palette and layout both seeded by `seed`.
pub fn cluster_view_json(clusters: &str, seed: u64, min_overlap: usize) -> Result<String, Error> {
    let ds = parse_cluster_table(clusters)?;
    let view = views::cluster_view(&ds, &ViewConfig::default(), seed, min_overlap, seed)?;
    Ok(String::from_utf8(views::to_json(&view)).expect("utf-8"))
}

#[derive(Serialize)]
struct EnrichmentRow<'a> {
    cluster: usize,
    name: &'a str,
    n: u64,
    k: u64,
    #[serde(serialize_with = "significant")]
    ease_p: f64,
    color_class: String,
    color: String,
    opacity: f64,
}

fn significant<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_significant(*x))
}

/// Per-cluster EASE table for one disease, most significant first.
pub fn enrichment_json(clusters: &str, diseases: &str, disease: &str) -> Result<String, Error> {
    let ds = parse_cluster_table(clusters)?;
    let dd = parse_disease_table(diseases)?;
    let dmap = build_disease_gene_map(&dd, disease)?;
    let config = ViewConfig::default();
    let mut rows: Vec<EnrichmentRow> = cluster_overlay(&ds, &dmap, config.model.membership_threshold, &config.overlay)
        .into_iter()
        .map(|r| EnrichmentRow {
            cluster: r.cluster.0,
            name: ds.cluster_name(r.cluster).unwrap_or_default(),
            n: r.cluster_size,
            k: r.cluster_hits,
            ease_p: r.ease_p,
            color_class: r.color_class.to_string(),
            color: r.color_class.rgb().hex(),
            opacity: r.opacity,
        })
        .collect();
    rows.sort_by(|a, b| a.ease_p.total_cmp(&b.ease_p).then_with(|| a.name.cmp(b.name)));
    Ok(serde_json::to_string(&rows).expect("rows serialize"))
}

/// Gene view for one cluster plus a highlight query from `gene`.
pub fn highlight_json(
    clusters: &str,
    interactions: &str,
    cluster: &str,
    gene: u64,
    mode: &str,
    param: f64,
    seed: u64,
) -> Result<String, Error> {
    let ds = parse_cluster_table(clusters)?;
    let ia = parse_interaction_table(interactions)?;
    let cluster = cluster_ref(&ds, cluster)?;
    let mode = HighlightMode::parse(mode, param)?;
    let config = ViewConfig::default();
    let view = views::gene_view(&ds, &ia, cluster, &config, seed)?;
    let highlight = views::highlight_view(&ds, &ia, cluster, GeneId(gene), mode, &config)?;
    Ok(serde_json::json!({ "view": view, "highlight": highlight }).to_string())
}

fn js(result: Result<String, Error>) -> Result<String, JsValue> {
    result.map_err(|e| JsValue::from_str(&error_json(&e)))
}

// Seeds cross the boundary as f64 so plain JS numbers work.
fn seed_of(seed: f64) -> u64 {
    if seed.is_finite() && seed >= 0.0 {
        seed as u64
    } else {
        0
    }
}

#[wasm_bindgen(js_name = clusterView)]
pub fn cluster_view(clusters: &str, seed: f64, min_overlap: u32) -> Result<String, JsValue> {
    js(cluster_view_json(clusters, seed_of(seed), min_overlap as usize))
}

#[wasm_bindgen]
pub fn enrichment(clusters: &str, diseases: &str, disease: &str) -> Result<String, JsValue> {
    js(enrichment_json(clusters, diseases, disease))
}

#[wasm_bindgen]
pub fn highlight(
    clusters: &str,
    interactions: &str,
    cluster: &str,
    gene: f64,
    mode: &str,
    param: f64,
    seed: f64,
) -> Result<String, JsValue> {
    js(highlight_json(clusters, interactions, cluster, seed_of(gene), mode, param, seed_of(seed)))
}
