//! Cluster View and Gene View graph construction, with node geometry and edge styling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{ClusterDataset, ClusterId, GeneId, InteractionDataset};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("cluster dataset has no clusters with members")]
    EmptyDataset,
    #[error("unknown cluster {0}")]
    UnknownCluster(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

/// Ellipse sizing for cluster nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryParams {
    /// Minor radius of a one-gene cluster.
    pub r0: f64,
    /// minor = r0 * gene_count^exponent
    pub exponent: f64,
    /// Upper bound on major / minor.
    pub max_eccentricity: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams {
            r0: 4.0,
            exponent: 0.5,
            max_eccentricity: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EdgeStyle {
    pub w_min: f64,
    pub w_max: f64,
}

impl Default for EdgeStyle {
    fn default() -> Self {
        EdgeStyle {
            w_min: 1.0,
            w_max: 8.0,
        }
    }
}

impl EdgeStyle {
    /// Width and intensity for a value normalized to [0, 1].
    pub fn style(&self, normalized: f64) -> (f64, f64) {
        (self.w_min + (self.w_max - self.w_min) * normalized, normalized)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    pub geometry: GeometryParams,
    pub edge_style: EdgeStyle,
    /// A gene counts as a cluster member when its association exceeds this.
    pub membership_threshold: f64,
    /// Gene node radius at association 1.
    pub node_scale: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            geometry: GeometryParams::default(),
            edge_style: EdgeStyle::default(),
            membership_threshold: 0.0,
            node_scale: 12.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseGeometry {
    pub minor_radius: f64,
    pub major_radius: f64,
    pub base_color: Rgb,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> Rgb {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to_byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    Rgb(to_byte(r), to_byte(g), to_byte(b))
}

/// Pseudo-random but reproducible node color for a cluster.
pub fn palette_color(seed: u64, cluster: ClusterId) -> Rgb {
    let bits = splitmix64(seed ^ splitmix64(cluster.0 as u64));
    let hue = (bits % 360) as f64;
    let saturation = 0.55 + ((bits >> 16) % 1000) as f64 / 1000.0 * 0.3;
    let lightness = 0.5 + ((bits >> 32) % 1000) as f64 / 1000.0 * 0.2;
    hsl_to_rgb(hue, saturation, lightness)
}

/// Ellipse radii for a cluster. Higher mean association means a rounder node;
/// mean association 1 gives a circle.
pub fn node_geometry(
    gene_count: usize,
    mean_association: f64,
    params: &GeometryParams,
    color: Rgb,
) -> Result<EllipseGeometry, ModelError> {
    if gene_count == 0 {
        return Err(ModelError::BadParameter("gene_count must be at least 1".into()));
    }
    if !(mean_association > 0.0 && mean_association <= 1.0) {
        return Err(ModelError::BadParameter(format!(
            "mean_association must be in (0, 1], got {mean_association}"
        )));
    }
    if !(params.r0 > 0.0 && params.r0.is_finite()) || params.max_eccentricity < 1.0 {
        return Err(ModelError::BadParameter("non-positive geometry scale".into()));
    }
    let minor = params.r0 * (gene_count as f64).powf(params.exponent);
    let major = (minor / mean_association).clamp(minor, params.max_eccentricity * minor);
    Ok(EllipseGeometry {
        minor_radius: minor,
        major_radius: major,
        base_color: color,
    })
}

/// Gene positions of the members of `cluster` above the membership threshold.
pub fn members(ds: &ClusterDataset, cluster: ClusterId, threshold: f64) -> Vec<usize> {
    ds.cluster_members(cluster)
        .iter()
        .copied()
        .filter(|&g| ds.association(g, cluster).is_some_and(|a| a > threshold))
        .collect()
}

pub fn mean_association(ds: &ClusterDataset, cluster: ClusterId) -> Result<f64, ModelError> {
    if cluster.0 >= ds.cluster_count() {
        return Err(ModelError::UnknownCluster(cluster.to_string()));
    }
    let genes = ds.cluster_members(cluster);
    if genes.is_empty() {
        return Err(ModelError::BadParameter(format!("cluster {cluster} has no members")));
    }
    let sum: f64 = genes
        .iter()
        .map(|&g| ds.association(g, cluster).unwrap_or(0.0))
        .sum();
    Ok(sum / genes.len() as f64)
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterNode {
    pub cluster: ClusterId,
    pub name: String,
    pub gene_count: usize,
    pub mean_association: f64,
    pub geometry: EllipseGeometry,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterEdge {
    pub a: ClusterId,
    pub b: ClusterId,
    pub overlap: usize,
    pub width: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterGraph {
    pub nodes: Vec<ClusterNode>,
    pub edges: Vec<ClusterEdge>,
}

impl ClusterGraph {
    pub fn node_position(&self, cluster: ClusterId) -> Option<usize> {
        self.nodes.iter().position(|n| n.cluster == cluster)
    }

    /// Edges as (node index, node index, weight) with weight = intensity.
    pub fn weighted_edges(&self) -> Vec<(usize, usize, f64)> {
        self.edges
            .iter()
            .map(|e| {
                (
                    self.node_position(e.a).expect("edge endpoint is a node"),
                    self.node_position(e.b).expect("edge endpoint is a node"),
                    e.intensity,
                )
            })
            .collect()
    }
}

pub fn build_cluster_graph(
    ds: &ClusterDataset,
    min_overlap: usize,
    params: &ModelParams,
    palette_seed: u64,
) -> Result<ClusterGraph, ModelError> {
    if min_overlap == 0 {
        return Err(ModelError::BadParameter("min_overlap must be at least 1".into()));
    }
    let member_sets: Vec<(ClusterId, Vec<usize>)> = ds
        .cluster_ids()
        .map(|c| (c, members(ds, c, params.membership_threshold)))
        .filter(|(_, m)| !m.is_empty())
        .collect();
    if member_sets.is_empty() {
        return Err(ModelError::EmptyDataset);
    }

    let mut nodes = Vec::with_capacity(member_sets.len());
    for (cluster, genes) in &member_sets {
        let mean = genes
            .iter()
            .map(|&g| ds.association(g, *cluster).unwrap_or(0.0))
            .sum::<f64>()
            / genes.len() as f64;
        let geometry = node_geometry(
            genes.len(),
            mean,
            &params.geometry,
            palette_color(palette_seed, *cluster),
        )?;
        nodes.push(ClusterNode {
            cluster: *cluster,
            name: ds.cluster_name(*cluster).unwrap_or_default().to_string(),
            gene_count: genes.len(),
            mean_association: mean,
            geometry,
        });
    }

    let mut raw = Vec::new();
    for (i, (ca, ga)) in member_sets.iter().enumerate() {
        for (cb, gb) in &member_sets[i + 1..] {
            let overlap = sorted_intersection_len(ga, gb);
            if overlap >= min_overlap {
                raw.push((*ca, *cb, overlap));
            }
        }
    }
    let overlap_max = raw.iter().map(|&(_, _, o)| o).max().unwrap_or(1) as f64;
    let edges = raw
        .into_iter()
        .map(|(a, b, overlap)| {
            let (width, intensity) = params.edge_style.style(overlap as f64 / overlap_max);
            ClusterEdge {
                a,
                b,
                overlap,
                width,
                intensity,
            }
        })
        .collect();
    Ok(ClusterGraph { nodes, edges })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieSlice {
    pub cluster: ClusterId,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneNode {
    pub gene: GeneId,
    pub name: String,
    pub association: f64,
    pub radius: f64,
    pub pie: Vec<PieSlice>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneEdge {
    pub a: GeneId,
    pub b: GeneId,
    pub score: f64,
    pub width: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneGraph {
    pub cluster: ClusterId,
    pub nodes: Vec<GeneNode>,
    pub edges: Vec<GeneEdge>,
}

impl GeneGraph {
    pub fn node_position(&self, gene: GeneId) -> Option<usize> {
        self.nodes.iter().position(|n| n.gene == gene)
    }

    pub fn weighted_edges(&self) -> Vec<(usize, usize, f64)> {
        let index: std::collections::HashMap<GeneId, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.gene, i))
            .collect();
        self.edges
            .iter()
            .map(|e| (index[&e.a], index[&e.b], e.score))
            .collect()
    }
}

/// Fraction of the gene's total association mass held by each of its clusters.
pub fn pie_fractions(ds: &ClusterDataset, gene_position: usize) -> Vec<PieSlice> {
    let memberships = ds.gene_memberships(gene_position);
    let total: f64 = memberships.iter().map(|m| m.association).sum();
    memberships
        .iter()
        .map(|m| PieSlice {
            cluster: m.cluster,
            fraction: m.association / total,
        })
        .collect()
}

pub fn build_gene_graph(
    ds: &ClusterDataset,
    ia: &InteractionDataset,
    cluster: ClusterId,
    params: &ModelParams,
) -> Result<GeneGraph, ModelError> {
    if cluster.0 >= ds.cluster_count() {
        return Err(ModelError::UnknownCluster(cluster.to_string()));
    }
    let positions = members(ds, cluster, params.membership_threshold);
    if positions.is_empty() {
        return Err(ModelError::UnknownCluster(format!("{cluster} (no members)")));
    }
    let nodes: Vec<GeneNode> = positions
        .iter()
        .map(|&g| {
            let gene = &ds.genes()[g];
            let association = ds.association(g, cluster).unwrap_or(0.0);
            GeneNode {
                gene: gene.id,
                name: gene.name.clone(),
                association,
                radius: params.node_scale * association.sqrt(),
                pie: pie_fractions(ds, g),
            }
        })
        .collect();
    let in_cluster: std::collections::HashSet<GeneId> = nodes.iter().map(|n| n.gene).collect();
    let edges = ia
        .edges()
        .iter()
        .filter(|e| in_cluster.contains(&e.source) && in_cluster.contains(&e.target))
        .map(|e| {
            let (a, b) = e.key();
            let (width, intensity) = params.edge_style.style(e.score);
            GeneEdge {
                a,
                b,
                score: e.score,
                width,
                intensity,
            }
        })
        .collect();
    Ok(GeneGraph {
        cluster,
        nodes,
        edges,
    })
}
