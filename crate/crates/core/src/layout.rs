//! Spring-electrical force-directed layout with velocity damping.
//!
//! Every pair of nodes repels with `k_r / d²`, every edge of weight `w`
//! pulls with `k_a · w · (d − L0)`, and a linear gravity term pulls each node
//! toward the canvas center. Iteration order is fixed so a run is a pure
//! function of (node count, edges, params).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const DISTANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("bad layout parameter: {0}")]
pub struct LayoutError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub repulsion: f64,
    pub stiffness: f64,
    pub rest_length: f64,
    pub damping: f64,
    pub gravity: f64,
    pub max_step: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    pub canvas: [f64; 2],
    pub seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            repulsion: 5000.0,
            stiffness: 0.05,
            rest_length: 60.0,
            damping: 0.85,
            gravity: 0.02,
            max_step: 20.0,
            epsilon: 0.5,
            max_iters: 2000,
            canvas: [1000.0, 1000.0],
            seed: 0,
        }
    }
}

impl LayoutParams {
    pub fn with_seed(self, seed: u64) -> Self {
        LayoutParams { seed, ..self }
    }

    pub fn center(&self) -> [f64; 2] {
        [self.canvas[0] / 2.0, self.canvas[1] / 2.0]
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.repulsion) {
            return Err(LayoutError("repulsion must be > 0".into()));
        }
        if !positive(self.stiffness) {
            return Err(LayoutError("stiffness must be > 0".into()));
        }
        if !positive(self.rest_length) {
            return Err(LayoutError("rest length must be > 0".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(LayoutError("damping must be in (0, 1)".into()));
        }
        if !(self.gravity >= 0.0 && self.gravity.is_finite()) {
            return Err(LayoutError("gravity must be >= 0".into()));
        }
        if !positive(self.max_step) {
            return Err(LayoutError("max_step must be > 0".into()));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(LayoutError("epsilon must be >= 0".into()));
        }
        if self.max_iters == 0 {
            return Err(LayoutError("max_iters must be >= 1".into()));
        }
        if !(self.canvas[0].is_finite() && self.canvas[1].is_finite()) {
            return Err(LayoutError("canvas must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutState {
    pub positions: Vec<[f64; 2]>,
    pub velocities: Vec<[f64; 2]>,
    pub iteration: usize,
    pub converged: bool,
    /// Sum of node displacements in the last step.
    pub last_displacement: f64,
}

impl LayoutState {
    pub fn from_positions(positions: Vec<[f64; 2]>) -> Self {
        let n = positions.len();
        LayoutState {
            positions,
            velocities: vec![[0.0, 0.0]; n],
            iteration: 0,
            converged: false,
            last_displacement: 0.0,
        }
    }
}

/// Random start positions in the unit box around the canvas center.
pub fn init_layout(node_count: usize, params: &LayoutParams) -> Result<LayoutState, LayoutError> {
    if node_count == 0 {
        return Err(LayoutError("node_count must be >= 1".into()));
    }
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let [cx, cy] = params.center();
    let positions = (0..node_count)
        .map(|_| {
            let x: f64 = rng.random_range(-0.5..0.5);
            let y: f64 = rng.random_range(-0.5..0.5);
            [cx + x, cy + y]
        })
        .collect();
    Ok(LayoutState::from_positions(positions))
}

/// Net force on every node at the current positions.
pub fn forces(positions: &[[f64; 2]], edges: &[(usize, usize, f64)], params: &LayoutParams) -> Vec<[f64; 2]> {
    let n = positions.len();
    let mut force = vec![[0.0f64; 2]; n];
    for i in 0..n {
        for j in i + 1..n {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            let raw = (dx * dx + dy * dy).sqrt();
            let d = raw.max(DISTANCE_FLOOR);
            // Coincident points have no direction; push them apart along x.
            let (ux, uy) = if raw > 0.0 { (dx / raw, dy / raw) } else { (1.0, 0.0) };
            let f = params.repulsion / (d * d);
            force[i][0] += f * ux;
            force[i][1] += f * uy;
            force[j][0] -= f * ux;
            force[j][1] -= f * uy;
        }
    }
    for &(a, b, w) in edges {
        if a == b {
            continue;
        }
        let dx = positions[b][0] - positions[a][0];
        let dy = positions[b][1] - positions[a][1];
        let raw = (dx * dx + dy * dy).sqrt();
        if raw == 0.0 {
            continue;
        }
        let d = raw.max(DISTANCE_FLOOR);
        let f = params.stiffness * w * (d - params.rest_length);
        let (fx, fy) = (f * dx / raw, f * dy / raw);
        force[a][0] += fx;
        force[a][1] += fy;
        force[b][0] -= fx;
        force[b][1] -= fy;
    }
    if params.gravity > 0.0 {
        let [cx, cy] = params.center();
        for (p, f) in positions.iter().zip(force.iter_mut()) {
            f[0] += params.gravity * (cx - p[0]);
            f[1] += params.gravity * (cy - p[1]);
        }
    }
    force
}

/// Spring-electrical potential whose negative gradient is [`forces`].
pub fn energy(positions: &[[f64; 2]], edges: &[(usize, usize, f64)], params: &LayoutParams) -> f64 {
    let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let mut e = 0.0;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            e += params.repulsion / dist(positions[i], positions[j]).max(DISTANCE_FLOOR);
        }
    }
    for &(a, b, w) in edges {
        if a != b {
            let stretch = dist(positions[a], positions[b]) - params.rest_length;
            e += 0.5 * params.stiffness * w * stretch * stretch;
        }
    }
    let c = params.center();
    for &p in positions {
        e += 0.5 * params.gravity * ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2));
    }
    e
}

pub fn step(state: &LayoutState, edges: &[(usize, usize, f64)], params: &LayoutParams) -> LayoutState {
    let force = forces(&state.positions, edges, params);
    let mut positions = state.positions.clone();
    let mut velocities = state.velocities.clone();
    let mut total = 0.0;
    for ((p, v), f) in positions.iter_mut().zip(velocities.iter_mut()).zip(&force) {
        let mut vx = (v[0] + f[0]) * params.damping;
        let mut vy = (v[1] + f[1]) * params.damping;
        let len = (vx * vx + vy * vy).sqrt();
        if len > params.max_step {
            let scale = params.max_step / len;
            vx *= scale;
            vy *= scale;
        }
        *v = [vx, vy];
        p[0] += vx;
        p[1] += vy;
        total += (vx * vx + vy * vy).sqrt();
    }
    LayoutState {
        positions,
        velocities,
        iteration: state.iteration + 1,
        converged: total < params.epsilon,
        last_displacement: total,
    }
}

pub fn run_until_converged(
    mut state: LayoutState,
    edges: &[(usize, usize, f64)],
    params: &LayoutParams,
) -> LayoutState {
    while state.iteration < params.max_iters {
        state = step(&state, edges, params);
        if state.converged {
            break;
        }
    }
    state
}

/// Initializes and runs a layout to convergence in one call.
pub fn compute_layout(
    node_count: usize,
    edges: &[(usize, usize, f64)],
    params: &LayoutParams,
) -> Result<LayoutState, LayoutError> {
    let state = init_layout(node_count, params)?;
    Ok(run_until_converged(state, edges, params))
}
