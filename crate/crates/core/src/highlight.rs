//! Gene View highlight queries: connectedness levels, link threshold, top-n links.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::genemodel::GeneGraph;
use crate::ingest::GeneId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HighlightError {
    #[error("gene {0} is not in the gene view")]
    UnknownGene(GeneId),
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", content = "parameter", rename_all = "snake_case")]
pub enum HighlightMode {
    Levels(usize),
    Threshold(f64),
    TopN(usize),
}

impl HighlightMode {
    /// Builds a mode from its wire name and numeric parameter.
    pub fn parse(mode: &str, parameter: f64) -> Result<Self, HighlightError> {
        let count = |what: &str| {
            if parameter >= 1.0 && parameter.fract() == 0.0 && parameter <= usize::MAX as f64 {
                Ok(parameter as usize)
            } else {
                Err(HighlightError::BadParameter(format!(
                    "{what} must be a positive integer, got {parameter}"
                )))
            }
        };
        let mode = match mode {
            "levels" => HighlightMode::Levels(count("level count")?),
            "threshold" => HighlightMode::Threshold(parameter),
            "top_n" | "top-n" => HighlightMode::TopN(count("n")?),
            other => {
                return Err(HighlightError::BadParameter(format!(
                    "unknown highlight mode {other:?}"
                )))
            }
        };
        mode.validate()?;
        Ok(mode)
    }

    fn validate(&self) -> Result<(), HighlightError> {
        match *self {
            HighlightMode::Levels(0) | HighlightMode::TopN(0) => Err(HighlightError::BadParameter(
                "parameter must be at least 1".into(),
            )),
            HighlightMode::Threshold(t) if !(0.0..=1.0).contains(&t) => Err(
                HighlightError::BadParameter(format!("threshold {t} outside [0, 1]")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeveledGene {
    pub gene: GeneId,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighlightEdge {
    pub a: GeneId,
    pub b: GeneId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighlightResult {
    pub origin: GeneId,
    #[serde(flatten)]
    pub mode: HighlightMode,
    pub nodes: Vec<LeveledGene>,
    pub edges: Vec<HighlightEdge>,
}

impl HighlightResult {
    pub fn level_of(&self, gene: GeneId) -> Option<usize> {
        self.nodes.iter().find(|n| n.gene == gene).map(|n| n.level)
    }

    pub fn genes(&self) -> BTreeSet<GeneId> {
        self.nodes.iter().map(|n| n.gene).collect()
    }
}

/// Undirected adjacency with neighbors in ascending id order; self-loops dropped.
struct Adjacency {
    neighbors: HashMap<GeneId, Vec<(GeneId, f64)>>,
}

impl Adjacency {
    fn new(gg: &GeneGraph) -> Self {
        let mut neighbors: HashMap<GeneId, Vec<(GeneId, f64)>> =
            gg.nodes.iter().map(|n| (n.gene, Vec::new())).collect();
        for e in &gg.edges {
            if e.a == e.b {
                continue;
            }
            neighbors.entry(e.a).or_default().push((e.b, e.score));
            neighbors.entry(e.b).or_default().push((e.a, e.score));
        }
        for list in neighbors.values_mut() {
            list.sort_by_key(|x| x.0);
        }
        Adjacency { neighbors }
    }

    /// BFS hop distances from `origin`, following edges with score ≥ `min_score`,
    /// stopping at `max_depth`.
    fn bfs(&self, origin: GeneId, min_score: f64, max_depth: usize) -> HashMap<GeneId, usize> {
        let mut depth = HashMap::from([(origin, 0usize)]);
        let mut queue = VecDeque::from([origin]);
        while let Some(g) = queue.pop_front() {
            let d = depth[&g];
            if d == max_depth {
                continue;
            }
            for &(next, score) in &self.neighbors[&g] {
                if score >= min_score && !depth.contains_key(&next) {
                    depth.insert(next, d + 1);
                    queue.push_back(next);
                }
            }
        }
        depth
    }
}

fn ensure_origin(gg: &GeneGraph, origin: GeneId) -> Result<(), HighlightError> {
    if gg.node_position(origin).is_none() {
        return Err(HighlightError::UnknownGene(origin));
    }
    Ok(())
}

fn leveled(depth: &HashMap<GeneId, usize>) -> Vec<LeveledGene> {
    let mut nodes: Vec<LeveledGene> = depth
        .iter()
        .map(|(&gene, &level)| LeveledGene { gene, level })
        .collect();
    nodes.sort_by_key(|n| (n.level, n.gene));
    nodes
}

/// Edges of `gg` (graph order) with both endpoints selected and score ≥ `min_score`.
fn induced_edges(gg: &GeneGraph, depth: &HashMap<GeneId, usize>, min_score: f64) -> Vec<HighlightEdge> {
    gg.edges
        .iter()
        .filter(|e| e.score >= min_score && depth.contains_key(&e.a) && depth.contains_key(&e.b))
        .map(|e| HighlightEdge {
            a: e.a,
            b: e.b,
            score: e.score,
        })
        .collect()
}

/// Genes within `max_level` hops of the origin, labeled by hop distance.
pub fn highlight_levels(gg: &GeneGraph, origin: GeneId, max_level: usize) -> Result<HighlightResult, HighlightError> {
    let mode = HighlightMode::Levels(max_level);
    mode.validate()?;
    ensure_origin(gg, origin)?;
    let depth = Adjacency::new(gg).bfs(origin, f64::NEG_INFINITY, max_level);
    Ok(HighlightResult {
        origin,
        mode,
        edges: induced_edges(gg, &depth, f64::NEG_INFINITY),
        nodes: leveled(&depth),
    })
}

/// Component of the origin after dropping edges scored below `theta`.
pub fn highlight_threshold(gg: &GeneGraph, origin: GeneId, theta: f64) -> Result<HighlightResult, HighlightError> {
    let mode = HighlightMode::Threshold(theta);
    mode.validate()?;
    ensure_origin(gg, origin)?;
    let depth = Adjacency::new(gg).bfs(origin, theta, usize::MAX);
    Ok(HighlightResult {
        origin,
        mode,
        edges: induced_edges(gg, &depth, theta),
        nodes: leveled(&depth),
    })
}

/// Greedy expansion: `n` times, take the best-scored edge leaving the selected set.
/// Ties go to the smaller (min id, max id) pair.
pub fn highlight_top_n(gg: &GeneGraph, origin: GeneId, n: usize) -> Result<HighlightResult, HighlightError> {
    let mode = HighlightMode::TopN(n);
    mode.validate()?;
    ensure_origin(gg, origin)?;
    let adjacency = Adjacency::new(gg);
    let mut depth = HashMap::from([(origin, 0usize)]);
    let mut edges = Vec::new();
    for _ in 0..n {
        let mut best: Option<(f64, (GeneId, GeneId), GeneId, GeneId)> = None;
        for &inside in depth.keys() {
            for &(outside, score) in &adjacency.neighbors[&inside] {
                if depth.contains_key(&outside) {
                    continue;
                }
                let key = (inside.min(outside), inside.max(outside));
                let better = match best {
                    None => true,
                    Some((s, k, _, _)) => score > s || (score == s && key < k),
                };
                if better {
                    best = Some((score, key, inside, outside));
                }
            }
        }
        let Some((score, (a, b), inside, outside)) = best else {
            break;
        };
        depth.insert(outside, depth[&inside] + 1);
        edges.push(HighlightEdge { a, b, score });
    }
    Ok(HighlightResult {
        origin,
        mode,
        nodes: leveled(&depth),
        edges,
    })
}

pub fn highlight(gg: &GeneGraph, origin: GeneId, mode: HighlightMode) -> Result<HighlightResult, HighlightError> {
    match mode {
        HighlightMode::Levels(l) => highlight_levels(gg, origin, l),
        HighlightMode::Threshold(t) => highlight_threshold(gg, origin, t),
        HighlightMode::TopN(n) => highlight_top_n(gg, origin, n),
    }
}
