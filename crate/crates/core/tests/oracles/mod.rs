//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the code paths it is used to check.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pascal's triangle in u128, exact for n ≤ 120.
pub struct Binomials {
    rows: Vec<Vec<u128>>,
}

impl Binomials {
    pub fn new(max_n: usize) -> Self {
        let mut rows: Vec<Vec<u128>> = Vec::with_capacity(max_n + 1);
        for n in 0..=max_n {
            let mut row = vec![1u128; n + 1];
            for k in 1..n {
                row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
            }
            rows.push(row);
        }
        Binomials { rows }
    }

    pub fn choose(&self, n: u64, k: u64) -> u128 {
        if k > n {
            0
        } else {
            self.rows[n as usize][k as usize]
        }
    }

    /// P(X ≥ k) as an exact fraction, converted to f64 once at the end.
    pub fn upper_tail(&self, population: u64, successes: u64, draws: u64, observed: u64) -> f64 {
        let mut numerator = 0u128;
        for i in observed..=draws.min(successes) {
            numerator += self.choose(successes, i) * self.choose(population - successes, draws - i);
        }
        let denominator = self.choose(population, draws);
        ratio_to_f64(numerator, denominator)
    }
}

/// Correctly rounded num/den for den < 2^120.
fn ratio_to_f64(num: u128, den: u128) -> f64 {
    if num == 0 {
        return 0.0;
    }
    if num < (1u128 << 53) && den < (1u128 << 53) {
        return num as f64 / den as f64;
    }
    // Long division to 64 significant bits, then one rounding to f64.
    let mut exp: i32 = 0;
    let (mut n, mut d) = (num, den);
    while n >= d {
        d <<= 1;
        exp += 1;
    }
    while 2 * n < d {
        n <<= 1;
        exp -= 1;
    }
    let mut bits: u64 = 0;
    for _ in 0..64 {
        bits <<= 1;
        n <<= 1;
        if n >= d {
            n -= d;
            bits |= 1;
        }
    }
    if n > 0 {
        bits |= 1;
    }
    (bits as f64) * 2f64.powi(exp - 64)
}

pub fn relative_error(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

// ---------------------------------------------------------------------------
// Graph oracles over plain edge lists of (a, b, score), ids as u64.

pub type Edge = (u64, u64, f64);

/// All-pairs hop distances (Floyd–Warshall) restricted to edges with score ≥ min_score.
pub fn hop_distances(nodes: &[u64], edges: &[Edge], min_score: f64) -> BTreeMap<(u64, u64), usize> {
    let n = nodes.len();
    let idx: BTreeMap<u64, usize> = nodes.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    const INF: usize = usize::MAX / 4;
    let mut dist = vec![vec![INF; n]; n];
    for i in 0..n {
        dist[i][i] = 0;
    }
    for &(a, b, s) in edges {
        if s >= min_score && a != b {
            let (i, j) = (idx[&a], idx[&b]);
            dist[i][j] = 1;
            dist[j][i] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if dist[i][k] + dist[k][j] < dist[i][j] {
                    dist[i][j] = dist[i][k] + dist[k][j];
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if dist[i][j] < INF {
                out.insert((nodes[i], nodes[j]), dist[i][j]);
            }
        }
    }
    out
}

/// Expected levels-mode result: gene → level, and the induced edge set.
pub fn levels_oracle(nodes: &[u64], edges: &[Edge], origin: u64, max_level: usize) -> (BTreeMap<u64, usize>, BTreeSet<(u64, u64)>) {
    let dist = hop_distances(nodes, edges, f64::NEG_INFINITY);
    let levels: BTreeMap<u64, usize> = nodes
        .iter()
        .filter_map(|&g| dist.get(&(origin, g)).filter(|&&d| d <= max_level).map(|&d| (g, d)))
        .collect();
    let induced = edges
        .iter()
        .filter(|e| levels.contains_key(&e.0) && levels.contains_key(&e.1))
        .map(|e| (e.0.min(e.1), e.0.max(e.1)))
        .collect();
    (levels, induced)
}

/// Component of `origin` via union-find over the θ-filtered edges.
pub fn threshold_oracle(nodes: &[u64], edges: &[Edge], origin: u64, theta: f64) -> (BTreeMap<u64, usize>, BTreeSet<(u64, u64)>) {
    let mut parent: BTreeMap<u64, u64> = nodes.iter().map(|&g| (g, g)).collect();
    fn find(parent: &mut BTreeMap<u64, u64>, x: u64) -> u64 {
        let p = parent[&x];
        if p == x {
            return x;
        }
        let root = find(parent, p);
        parent.insert(x, root);
        root
    }
    let kept: Vec<&Edge> = edges.iter().filter(|e| e.2 >= theta).collect();
    for e in &kept {
        let (ra, rb) = (find(&mut parent, e.0), find(&mut parent, e.1));
        if ra != rb {
            parent.insert(ra, rb);
        }
    }
    let root = find(&mut parent, origin);
    let component: BTreeSet<u64> = nodes
        .iter()
        .copied()
        .filter(|&g| find(&mut parent, g) == root)
        .collect();
    let dist = hop_distances(nodes, edges, theta);
    let levels = component.iter().map(|&g| (g, dist[&(origin, g)])).collect();
    let induced = kept
        .iter()
        .filter(|e| component.contains(&e.0) && component.contains(&e.1))
        .map(|e| (e.0.min(e.1), e.0.max(e.1)))
        .collect();
    (levels, induced)
}

/// Greedy trace: each round sorts every frontier edge and takes the first.
pub fn top_n_oracle(edges: &[Edge], origin: u64, n: usize) -> (BTreeSet<u64>, Vec<(u64, u64, f64)>) {
    let mut selected = BTreeSet::from([origin]);
    let mut chosen = Vec::new();
    for _ in 0..n {
        let mut frontier: Vec<(u64, u64, f64)> = edges
            .iter()
            .filter(|e| selected.contains(&e.0) != selected.contains(&e.1))
            .map(|e| (e.0.min(e.1), e.0.max(e.1), e.2))
            .collect();
        if frontier.is_empty() {
            break;
        }
        frontier.sort_by(|x, y| y.2.partial_cmp(&x.2).unwrap().then((x.0, x.1).cmp(&(y.0, y.1))));
        let (a, b, s) = frontier[0];
        selected.insert(a);
        selected.insert(b);
        chosen.push((a, b, s));
    }
    (selected, chosen)
}

/// Random simple graph on ids drawn from 1..=200 with distinct endpoints pairs.
pub fn random_gene_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> (Vec<u64>, Vec<Edge>) {
    let n = rng.random_range(1..=max_nodes);
    let mut ids = BTreeSet::new();
    while ids.len() < n {
        ids.insert(rng.random_range(1..=200u64));
    }
    let nodes: Vec<u64> = ids.into_iter().collect();
    let p = rng.random_range(0.02..0.3);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                // Coarse scores so ties actually occur.
                let score = rng.random_range(0..=10) as f64 / 10.0;
                edges.push((nodes[i], nodes[j], score));
            }
        }
    }
    (nodes, edges)
}

// ---------------------------------------------------------------------------
// Dataset generators

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hard-clustered table text plus the 0/1 matrix it was written from.
pub fn random_hard_table(rng: &mut ChaCha8Rng, max_genes: usize, max_clusters: usize) -> (String, Vec<Vec<bool>>) {
    let genes = rng.random_range(1..=max_genes);
    let clusters = rng.random_range(1..=max_clusters);
    let delimiter = if rng.random_bool(0.5) { "\t" } else { "," };
    let mut text = format!("geneEntrezId{delimiter}geneName");
    for c in 0..clusters {
        text.push_str(&format!("{delimiter}C{c}"));
    }
    text.push('\n');
    let mut matrix = Vec::new();
    for g in 0..genes {
        let row: Vec<bool> = (0..clusters).map(|_| rng.random_bool(0.4)).collect();
        text.push_str(&format!("{}{delimiter}G{g}", g + 1));
        for &cell in &row {
            text.push_str(delimiter);
            text.push_str(if cell { "1" } else { "0" });
        }
        text.push('\n');
        matrix.push(row);
    }
    (text, matrix)
}

/// Soft-clustered table with values on a 0.05 grid (zeros included).
pub fn random_soft_table(rng: &mut ChaCha8Rng, max_genes: usize, max_clusters: usize) -> String {
    let genes = rng.random_range(1..=max_genes);
    let clusters = rng.random_range(1..=max_clusters);
    let mut text = String::from("geneEntrezId,geneName");
    for c in 0..clusters {
        text.push_str(&format!(",C{c}"));
    }
    text.push('\n');
    for g in 0..genes {
        text.push_str(&format!("{},G{g}", g + 1));
        for _ in 0..clusters {
            let v = if rng.random_bool(0.5) {
                0.0
            } else {
                rng.random_range(1..=20) as f64 / 20.0
            };
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    text
}

pub const JUNK: &[&str] = &["", "NaN", "inf", "-1", "1e999", "abc", "\"", "\t", ",", "0x10", " ", "1.5.2", "\u{00e9}"];

/// Randomly damages a table: appended junk, truncation, duplicated or
/// dropped lines, replaced fields, swapped delimiters.
pub fn mutate(rng: &mut impl Rng, text: &str) -> String {
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    for _ in 0..rng.random_range(1..=4) {
        if lines.is_empty() {
            lines.push(String::new());
        }
        let i = rng.random_range(0..lines.len());
        match rng.random_range(0..6) {
            0 => lines[i].push_str(JUNK[rng.random_range(0..JUNK.len())]),
            1 => {
                let cut = rng.random_range(0..=lines[i].len());
                if lines[i].is_char_boundary(cut) {
                    lines[i].truncate(cut);
                }
            }
            2 => {
                let line = lines[i].clone();
                lines.insert(i, line);
            }
            3 => {
                lines.remove(i);
            }
            4 => {
                let sep = if lines[i].contains('\t') { '\t' } else { ',' };
                let mut fields: Vec<String> = lines[i].split(sep).map(str::to_string).collect();
                let f = rng.random_range(0..fields.len());
                fields[f] = JUNK[rng.random_range(0..JUNK.len())].to_string();
                lines[i] = fields.join(&sep.to_string());
            }
            _ => lines[i] = lines[i].replace([',', '\t'], ";"),
        }
    }
    lines.join("\n")
}

/// Two-node spring-electrical equilibrium: root of
/// k_a (d - L0) + g d / 2 - k_r / d^2, by bisection.
pub fn two_node_equilibrium(stiffness: f64, rest_length: f64, gravity: f64, repulsion: f64) -> f64 {
    // with gravity each node sits d/2 from the center and feels g·d/2
    let residual = |d: f64| stiffness * (d - rest_length) + gravity * d / 2.0 - repulsion / (d * d);
    let (mut lo, mut hi) = (1e-3, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
