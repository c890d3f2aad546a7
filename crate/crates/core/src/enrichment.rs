//! Disease Mode: EASE enrichment per cluster and p-value coloring per gene.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genemodel::{members, GeneGraph, Rgb};
use crate::ingest::{ClusterDataset, ClusterId, DiseaseDataset, GeneId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnrichmentError {
    #[error("unknown disease {0:?}")]
    UnknownDisease(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

pub const RED: Rgb = Rgb(255, 0, 0);
pub const ORANGE: Rgb = Rgb(255, 165, 0);
pub const WHITE: Rgb = Rgb(255, 255, 255);
pub const NEUTRAL: Rgb = Rgb(189, 189, 189);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorClass {
    Red,
    Orange,
    White,
}

impl ColorClass {
    pub fn rgb(self) -> Rgb {
        match self {
            ColorClass::Red => RED,
            ColorClass::Orange => ORANGE,
            ColorClass::White => WHITE,
        }
    }
}

impl fmt::Display for ColorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColorClass::Red => "red",
            ColorClass::Orange => "orange",
            ColorClass::White => "white",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OverlayParams {
    /// Opacity of clusters without any disease gene.
    pub dim_value: f64,
    /// −log10(p) at which the gene color ramp reaches red.
    pub log_p_saturation: f64,
}

impl Default for OverlayParams {
    fn default() -> Self {
        OverlayParams {
            dim_value: 0.25,
            log_p_saturation: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiseaseGeneMap {
    pub disease: String,
    pub gene_p: HashMap<String, f64>,
}

impl DiseaseGeneMap {
    pub fn p_value(&self, gene_name: &str) -> Option<f64> {
        self.gene_p.get(gene_name).copied()
    }
}

/// Collects one disease's genes, keeping the smallest p-value per gene name.
pub fn build_disease_gene_map(ds: &DiseaseDataset, disease: &str) -> Result<DiseaseGeneMap, EnrichmentError> {
    let mut label = None;
    let mut gene_p: HashMap<String, f64> = HashMap::new();
    for r in ds.records_for(disease) {
        label.get_or_insert_with(|| r.disease.clone());
        gene_p
            .entry(r.gene_name.clone())
            .and_modify(|p| *p = p.min(r.p_value))
            .or_insert(r.p_value);
    }
    match label {
        Some(disease) => Ok(DiseaseGeneMap { disease, gene_p }),
        None => Err(EnrichmentError::UnknownDisease(disease.trim().to_string())),
    }
}

const EXACT_FACTORIALS: usize = 171;

fn factorial_table() -> &'static [f64; EXACT_FACTORIALS] {
    static TABLE: OnceLock<[f64; EXACT_FACTORIALS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0f64; EXACT_FACTORIALS];
        for i in 1..EXACT_FACTORIALS {
            t[i] = t[i - 1] * i as f64;
        }
        t
    })
}

/// ln(n!). Below 171 this is the log of the (correctly rounded) f64 factorial;
/// above, a Stirling series whose truncation error is far below one ulp.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < EXACT_FACTORIALS {
        return factorial_table()[n as usize].ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (std::f64::consts::TAU * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn check_bounds(population: u64, successes: u64, draws: u64, observed: u64) -> Result<(), EnrichmentError> {
    if successes > population || draws > population || observed > draws.min(successes) {
        return Err(EnrichmentError::BadParameter(format!(
            "need K <= N, n <= N, k <= min(n, K); got N={population} K={successes} n={draws} k={observed}"
        )));
    }
    Ok(())
}

/// P(X ≥ k) for X ~ Hypergeometric(N, K, n).
pub fn hypergeom_upper_tail(population: u64, successes: u64, draws: u64, observed: u64) -> Result<f64, EnrichmentError> {
    check_bounds(population, successes, draws, observed)?;
    let support_min = (draws + successes).saturating_sub(population);
    if observed <= support_min {
        return Ok(1.0);
    }
    let support_max = draws.min(successes);
    let ln_total = ln_choose(population, draws);
    // Sum from the far end of the tail so small terms accumulate first.
    let mut sum = 0.0;
    for i in (observed..=support_max).rev() {
        let ln_p = ln_choose(successes, i) + ln_choose(population - successes, draws - i) - ln_total;
        sum += ln_p.exp();
    }
    Ok(sum.min(1.0))
}

/// One-tailed Fisher p-value with the observed overlap reduced by one.
pub fn ease_score(population: u64, successes: u64, draws: u64, observed: u64) -> Result<f64, EnrichmentError> {
    check_bounds(population, successes, draws, observed)?;
    hypergeom_upper_tail(population, successes, draws, observed.saturating_sub(1))
}

pub fn classify_color(p: f64) -> Result<ColorClass, EnrichmentError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EnrichmentError::BadParameter(format!("p-value {p} outside [0, 1]")));
    }
    Ok(if p < 0.05 {
        ColorClass::Red
    } else if p < 0.1 {
        ColorClass::Orange
    } else {
        ColorClass::White
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnrichmentResult {
    pub cluster: ClusterId,
    pub population: u64,
    pub pop_hits: u64,
    pub cluster_size: u64,
    pub cluster_hits: u64,
    pub ease_p: f64,
    pub color_class: ColorClass,
    pub opacity: f64,
}

impl EnrichmentResult {
    pub fn dimmed(&self) -> bool {
        self.cluster_hits == 0
    }
}

pub fn cluster_overlay(
    ds: &ClusterDataset,
    dmap: &DiseaseGeneMap,
    membership_threshold: f64,
    params: &OverlayParams,
) -> Vec<EnrichmentResult> {
    let is_hit: Vec<bool> = ds
        .genes()
        .iter()
        .map(|g| dmap.gene_p.contains_key(&g.name))
        .collect();
    let population = ds.genes().len() as u64;
    let pop_hits = is_hit.iter().filter(|&&h| h).count() as u64;
    ds.cluster_ids()
        .map(|cluster| {
            let genes = members(ds, cluster, membership_threshold);
            let cluster_size = genes.len() as u64;
            let cluster_hits = genes.iter().filter(|&&g| is_hit[g]).count() as u64;
            let ease_p = ease_score(population, pop_hits, cluster_size, cluster_hits)
                .expect("counts drawn from one dataset are consistent");
            EnrichmentResult {
                cluster,
                population,
                pop_hits,
                cluster_size,
                cluster_hits,
                ease_p,
                color_class: classify_color(ease_p).expect("tail probability is in [0, 1]"),
                opacity: if cluster_hits == 0 { params.dim_value } else { 1.0 },
            }
        })
        .collect()
}

/// White → orange → red ramp over t in [0, 1].
pub fn ramp_color(t: f64) -> Rgb {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: u8, b: u8, s: f64| (a as f64 + (b as f64 - a as f64) * s).round() as u8;
    let (from, to, s) = if t <= 0.5 {
        (WHITE, ORANGE, t / 0.5)
    } else {
        (ORANGE, RED, (t - 0.5) / 0.5)
    };
    Rgb(lerp(from.0, to.0, s), lerp(from.1, to.1, s), lerp(from.2, to.2, s))
}

pub fn gene_p_color(p: f64, params: &OverlayParams) -> Rgb {
    ramp_color(-p.log10() / params.log_p_saturation)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneOverlayEntry {
    pub gene: GeneId,
    pub p: Option<f64>,
    pub color: Rgb,
}

pub fn gene_overlay(gg: &GeneGraph, dmap: &DiseaseGeneMap, params: &OverlayParams) -> Vec<GeneOverlayEntry> {
    gg.nodes
        .iter()
        .map(|n| {
            let p = dmap.p_value(&n.name);
            GeneOverlayEntry {
                gene: n.gene,
                p,
                color: p.map_or(NEUTRAL, |p| gene_p_color(p, params)),
            }
        })
        .collect()
}
