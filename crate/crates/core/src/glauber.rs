//! Glauber dynamics for the hard-core model.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::hardcore::{tree_threshold, Graph};
use crate::rng::{self, StreamRng};

/// Independent set with per-vertex counts of occupied neighbors.
#[derive(Clone, Debug)]
pub struct ChainState {
    occupied: Vec<u64>,
    blocked: Vec<u32>,
    rng: StreamRng,
}

impl ChainState {
    /// The empty set.
    pub fn empty(num_vertices: usize, rng: StreamRng) -> Self {
        ChainState { occupied: vec![0; num_vertices.div_ceil(64)], blocked: vec![0; num_vertices], rng }
    }

    pub fn is_occupied(&self, v: usize) -> bool {
        self.occupied[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn occupied_vertices(&self) -> Vec<usize> {
        (0..self.blocked.len()).filter(|&v| self.is_occupied(v)).collect()
    }

    pub fn size(&self) -> usize {
        self.occupied.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn bitmask(&self) -> u64 {
        self.occupied.first().copied().unwrap_or(0)
    }

    fn set(&mut self, v: usize, graph: &Graph) {
        self.occupied[v / 64] |= 1 << (v % 64);
        for &u in graph.neighbors(v) {
            self.blocked[u as usize] += 1;
        }
    }

    fn clear(&mut self, v: usize, graph: &Graph) {
        self.occupied[v / 64] &= !(1 << (v % 64));
        for &u in graph.neighbors(v) {
            self.blocked[u as usize] -= 1;
        }
    }

    /// Recomputes the neighbor counts and checks independence.
    pub fn is_consistent(&self, graph: &Graph) -> bool {
        (0..graph.num_vertices()).all(|v| {
            let count = graph.neighbors(v).iter().filter(|&&u| self.is_occupied(u as usize)).count() as u32;
            count == self.blocked[v] && !(self.is_occupied(v) && count > 0)
        })
    }
}

/// One update: pick `v` uniformly; with probability `1/(1+w(v))` remove it,
/// otherwise add it if none of its neighbors is occupied.
pub fn glauber_step(state: &mut ChainState, graph: &Graph) {
    let n = graph.num_vertices();
    if n == 0 {
        return;
    }
    let v = state.rng.random_range(0..n);
    let w = graph.weight(v);
    let u: f64 = state.rng.random();
    if u * (1.0 + w) < 1.0 {
        if state.is_occupied(v) {
            state.clear(v, graph);
        }
    } else if !state.is_occupied(v) && state.blocked[v] == 0 {
        state.set(v, graph);
    }
}

/// `⌈C · n · (n ln max(Δ, 2) + ln(1/ε_S))⌉`.
pub fn schedule(num_vertices: usize, max_degree: usize, eps_s: f64, constant: f64) -> u64 {
    let n = num_vertices as f64;
    let delta = max_degree.max(2) as f64;
    (constant * n * (n * delta.ln() + (1.0 / eps_s).ln())).ceil().max(0.0) as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Maximum weight below the tree threshold of the maximum degree.
    BelowTreeThreshold,
    /// A clique-condition witness was supplied by the caller.
    CliqueWitness,
    /// Neither holds; the output carries no total variation guarantee.
    Unverified,
}

pub fn regime(graph: &Graph, clique_witness: bool) -> Regime {
    let threshold = tree_threshold(graph.max_degree().max(2)).expect("Δ ≥ 2");
    if graph.max_weight() < threshold {
        Regime::BelowTreeThreshold
    } else if clique_witness {
        Regime::CliqueWitness
    } else {
        Regime::Unverified
    }
}

#[derive(Clone, Debug)]
pub struct SampleOptions {
    pub constant: f64,
    /// Overrides the schedule when set.
    pub steps: Option<u64>,
    pub clique_witness: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { constant: 1.0, steps: None, clique_witness: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Sample {
    pub vertices: Vec<usize>,
    pub steps: u64,
    pub regime: Regime,
}

impl Sample {
    pub fn is_guaranteed(&self) -> bool {
        self.regime != Regime::Unverified
    }
}

fn run_chain(graph: &Graph, steps: u64, rng: StreamRng) -> ChainState {
    let mut state = ChainState::empty(graph.num_vertices(), rng);
    for _ in 0..steps {
        glauber_step(&mut state, graph);
    }
    state
}

fn steps_for(graph: &Graph, eps_s: f64, options: &SampleOptions) -> u64 {
    options
        .steps
        .unwrap_or_else(|| schedule(graph.num_vertices(), graph.max_degree(), eps_s, options.constant))
}

/// Runs the chain from the empty set for the scheduled number of steps.
pub fn sample(graph: &Graph, eps_s: f64, seed: u64, options: &SampleOptions) -> Sample {
    sample_indexed(graph, eps_s, seed, 0, options)
}

/// Like [`sample`] but on stream `index`, so many samples can share a seed.
pub fn sample_indexed(graph: &Graph, eps_s: f64, seed: u64, index: u64, options: &SampleOptions) -> Sample {
    let steps = steps_for(graph, eps_s, options);
    let state = run_chain(graph, steps, rng::stream(seed, rng::domain::GLAUBER, index));
    Sample { vertices: state.occupied_vertices(), steps, regime: regime(graph, options.clique_witness) }
}

/// `count` independent samples as bitmasks (graphs with at most 64 vertices).
pub fn sample_masks(graph: &Graph, eps_s: f64, seed: u64, count: usize, options: &SampleOptions) -> Vec<u64> {
    assert!(graph.num_vertices() <= 64, "bitmask output needs at most 64 vertices");
    let steps = steps_for(graph, eps_s, options);
    (0..count as u64)
        .into_par_iter()
        .map(|i| run_chain(graph, steps, rng::stream(seed, rng::domain::GLAUBER, i)).bitmask())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnoccupiedEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Fraction of independent restarts whose final state leaves `v` unoccupied.
pub fn estimate_unoccupied(graph: &Graph, v: usize, samples: usize, eps_s: f64, seed: u64) -> UnoccupiedEstimate {
    let hits = unoccupied_indicators(graph, v, samples, eps_s, seed, &SampleOptions::default());
    let mean = hits.iter().filter(|&&h| h).count() as f64 / samples as f64;
    let var = if samples > 1 { mean * (1.0 - mean) * samples as f64 / (samples - 1) as f64 } else { 0.0 };
    UnoccupiedEstimate { mean, std_error: (var / samples as f64).sqrt(), samples }
}

/// Per-restart indicators of `v ∉ I`, in restart order.
pub fn unoccupied_indicators(
    graph: &Graph,
    v: usize,
    samples: usize,
    eps_s: f64,
    seed: u64,
    options: &SampleOptions,
) -> Vec<bool> {
    if graph.weight(v) == 0.0 {
        return vec![true; samples];
    }
    let steps = steps_for(graph, eps_s, options);
    (0..samples as u64)
        .into_par_iter()
        .map(|i| !run_chain(graph, steps, rng::stream(seed, rng::domain::UNOCCUPIED, i)).is_occupied(v))
        .collect()
}
