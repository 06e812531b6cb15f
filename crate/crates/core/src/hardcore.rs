//! Weighted hard-core models: graphs, exact partition functions and marginals.

use rand::Rng;

use crate::error::{Error, Result};
use crate::logweight::{log_add_exp, LogWeight};

pub const EXACT_LOG_Z_CAP: usize = 30;
pub const EXACT_MARGINALS_CAP: usize = 25;
pub const EXACT_DISTRIBUTION_CAP: usize = 20;

/// Vertex-weighted simple graph in compressed sparse row form.
///
/// Neighbor lists are sorted and symmetric, without self loops.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
}

impl Graph {
    /// Builds from an undirected edge list. Duplicate edges are merged.
    pub fn from_edges(weights: Vec<f64>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = weights.len();
        let mut lists = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid("edges", format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::invalid("edges", format!("self loop at {u}")));
            }
            lists[u].push(v as u32);
            lists[v].push(u as u32);
        }
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        Self::from_lists(weights, lists)
    }

    /// Builds from per-vertex neighbor lists (must already be symmetric).
    pub fn from_lists(weights: Vec<f64>, lists: Vec<Vec<u32>>) -> Result<Self> {
        for (v, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::invalid(format!("weights[{v}]"), format!("must be non-negative, got {w}")));
            }
        }
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in lists {
            neighbors.extend_from_slice(&l);
            offsets.push(neighbors.len());
        }
        Ok(Graph { offsets, neighbors, weights })
    }

    pub(crate) fn from_csr(offsets: Vec<usize>, neighbors: Vec<u32>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(offsets.len(), weights.len() + 1);
        Graph { offsets, neighbors, weights }
    }

    pub fn num_vertices(&self) -> usize {
        self.weights.len()
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_vertices()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn raw_neighbors(&self) -> &[u32] {
        &self.neighbors
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_vertices())
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v as usize)))
            .filter(|&(u, v)| u < v)
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.num_vertices() {
            return Err(Error::invalid("weights", "length differs from the vertex count"));
        }
        Graph::from_lists(weights, (0..self.num_vertices()).map(|v| self.neighbors(v).to_vec()).collect())
    }

    /// Subgraph induced by `vertices`; vertex `k` of the result is `vertices[k]`.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut index = std::collections::HashMap::with_capacity(vertices.len());
        for (k, &v) in vertices.iter().enumerate() {
            index.insert(v as u32, k as u32);
        }
        let lists = vertices
            .iter()
            .map(|&v| {
                let mut l: Vec<u32> = self.neighbors(v).iter().filter_map(|u| index.get(u).copied()).collect();
                l.sort_unstable();
                l
            })
            .collect();
        let weights = vertices.iter().map(|&v| self.weights[v]).collect();
        Graph::from_lists(weights, lists).expect("weights already validated")
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        let mut member = vec![false; self.num_vertices()];
        for &v in set {
            member[v] = true;
        }
        set.iter().all(|&v| self.neighbors(v).iter().all(|&u| !member[u as usize]))
    }

    /// Checks sortedness, symmetry and the absence of self loops.
    pub fn validate(&self) -> Result<()> {
        for v in 0..self.num_vertices() {
            let nb = self.neighbors(v);
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("graph", format!("neighbors of {v} are not strictly sorted")));
            }
            for &u in nb {
                let u = u as usize;
                if u == v || u >= self.num_vertices() || !self.has_edge(u, v) {
                    return Err(Error::invalid("graph", format!("edge ({v}, {u}) is invalid or asymmetric")));
                }
            }
        }
        Ok(())
    }
}

struct Masks {
    adjacency: Vec<u64>,
    log_weights: Vec<f64>,
    log1p_weights: Vec<f64>,
}

impl Masks {
    fn new(graph: &Graph) -> Self {
        let adjacency = (0..graph.num_vertices())
            .map(|v| graph.neighbors(v).iter().fold(0u64, |m, &u| m | (1 << u)))
            .collect();
        Masks {
            adjacency,
            log_weights: graph.weights.iter().map(|w| w.ln()).collect(),
            log1p_weights: graph.weights.iter().map(|w| w.ln_1p()).collect(),
        }
    }

    /// `ln Z` of the subgraph induced by `active`.
    fn log_z(&self, active: u64) -> f64 {
        if active == 0 {
            return 0.0;
        }
        let mut best = usize::MAX;
        let mut best_degree = 0;
        let mut rest = active;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let deg = (self.adjacency[v] & active).count_ones();
            if best == usize::MAX || deg > best_degree {
                best = v;
                best_degree = deg;
            }
        }
        if best_degree == 0 {
            let mut sum = 0.0;
            let mut rest = active;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                sum += self.log1p_weights[v];
            }
            return sum;
        }
        let v = best;
        let without = self.log_z(active & !(1 << v));
        if self.log_weights[v] == f64::NEG_INFINITY {
            return without;
        }
        let with = self.log_weights[v] + self.log_z(active & !(1 << v) & !self.adjacency[v]);
        log_add_exp(without, with)
    }
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_cap(graph: &Graph, cap: usize, operation: &'static str) -> Result<()> {
    if graph.num_vertices() > cap {
        Err(Error::TooManyVertices { operation, vertices: graph.num_vertices(), cap })
    } else {
        Ok(())
    }
}

/// `ln Z(G, w)` by branching on a maximum-degree vertex.
pub fn exact_log_z(graph: &Graph) -> Result<LogWeight> {
    check_cap(graph, EXACT_LOG_Z_CAP, "exact_log_z")?;
    let masks = Masks::new(graph);
    Ok(LogWeight::from_ln(masks.log_z(full_mask(graph.num_vertices()))))
}

/// Occupation probability of every vertex under the hard-core distribution.
pub fn exact_marginals(graph: &Graph) -> Result<Vec<f64>> {
    check_cap(graph, EXACT_MARGINALS_CAP, "exact_marginals")?;
    let masks = Masks::new(graph);
    let all = full_mask(graph.num_vertices());
    let log_z = masks.log_z(all);
    Ok((0..graph.num_vertices())
        .map(|v| {
            if graph.weights[v] == 0.0 {
                return 0.0;
            }
            let rest = all & !(1 << v) & !masks.adjacency[v];
            (masks.log_weights[v] + masks.log_z(rest) - log_z).exp()
        })
        .collect())
}

/// Every independent set (as a bitmask) with its probability.
pub fn exact_distribution(graph: &Graph) -> Result<Vec<(u64, f64)>> {
    check_cap(graph, EXACT_DISTRIBUTION_CAP, "exact_distribution")?;
    let masks = Masks::new(graph);
    let mut sets = Vec::new();
    enumerate_independent(&masks, graph.num_vertices(), 0, 0, 0.0, &mut sets);
    let ln_values: Vec<f64> = sets.iter().map(|&(_, l)| l).collect();
    let log_z = crate::logweight::log_sum_exp(&ln_values);
    Ok(sets.into_iter().map(|(s, l)| (s, (l - log_z).exp())).collect())
}

fn enumerate_independent(masks: &Masks, n: usize, v: usize, set: u64, ln_w: f64, out: &mut Vec<(u64, f64)>) {
    if v == n {
        out.push((set, ln_w));
        return;
    }
    enumerate_independent(masks, n, v + 1, set, ln_w, out);
    if masks.adjacency[v] & set == 0 && masks.log_weights[v] > f64::NEG_INFINITY {
        enumerate_independent(masks, n, v + 1, set | (1 << v), ln_w + masks.log_weights[v], out);
    }
}

/// `ln Ξ(G, w)`, the partition function over multisets of vertices whose
/// support is independent, via `Ξ(G, w) = Z(G, w / (1 - w))`.
pub fn multiset_log_z(graph: &Graph) -> Result<LogWeight> {
    let mut weights = Vec::with_capacity(graph.num_vertices());
    for (v, &w) in graph.weights.iter().enumerate() {
        if w >= 1.0 {
            return Err(Error::WeightTooLarge { vertex: v, weight: w });
        }
        weights.push(w / (1.0 - w));
    }
    exact_log_z(&graph.with_weights(weights)?)
}

/// `λ_c(Δ) = (Δ-1)^(Δ-1) / (Δ-2)^Δ`; infinite for `Δ = 2`.
pub fn tree_threshold(max_degree: usize) -> Result<f64> {
    if max_degree < 2 {
        return Err(Error::invalid("max_degree", format!("tree threshold needs Δ ≥ 2, got {max_degree}")));
    }
    if max_degree == 2 {
        return Ok(f64::INFINITY);
    }
    let d = max_degree as f64;
    Ok(((d - 1.0) * (d - 1.0).ln() - d * (d - 2.0).ln()).exp())
}

/// Partition function table of a single-type interval graph.
///
/// Positions are sorted; `k` and `j < k` are adjacent iff
/// `(x_k - x_j)^2 < σ^2`, the same predicate the graph builder uses.
#[derive(Clone, Debug)]
pub struct IntervalDp {
    /// `prefix[k]` = ln Z of the first `k` positions.
    prefix: Vec<f64>,
    /// `jump[k]` = number of positions compatible with position `k`
    /// (all earlier positions at distance at least σ).
    jump: Vec<usize>,
    log_weight: f64,
}

impl IntervalDp {
    pub fn new(positions: &[f64], sigma: f64, weight: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::invalid("weight", format!("must be non-negative, got {weight}")));
        }
        if let Some(index) = positions.windows(2).position(|w| !(w[0] <= w[1])) {
            return Err(Error::Unsorted { index: index + 1 });
        }
        let n = positions.len();
        let log_weight = weight.ln();
        let s2 = sigma * sigma;
        let mut prefix = Vec::with_capacity(n + 1);
        let mut jump = Vec::with_capacity(n);
        prefix.push(0.0);
        let mut j = 0;
        for k in 0..n {
            while j < k && {
                let gap = positions[k] - positions[j];
                gap * gap >= s2
            } {
                j += 1;
            }
            jump.push(j);
            let with = log_weight + prefix[j];
            let next = if log_weight == f64::NEG_INFINITY { prefix[k] } else { log_add_exp(prefix[k], with) };
            prefix.push(next);
        }
        Ok(IntervalDp { prefix, jump, log_weight })
    }

    pub fn log_z(&self) -> LogWeight {
        LogWeight::from_ln(*self.prefix.last().expect("prefix is never empty"))
    }

    pub fn len(&self) -> usize {
        self.jump.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jump.is_empty()
    }

    /// Draws an independent set exactly from the hard-core distribution.
    /// Returns occupied indices in increasing order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut occupied = Vec::new();
        if self.log_weight == f64::NEG_INFINITY {
            return occupied;
        }
        let mut k = self.len();
        while k > 0 {
            // Z_k = 1 + Σ_{m ≤ k} w Z_{jump(m)}: the largest occupied index is
            // m with probability w Z_{jump(m)} / Z_k, none with 1 / Z_k.
            let u: f64 = rng.random();
            let target = self.prefix[k] + u.ln();
            if target < 0.0 {
                break;
            }
            let m = self.prefix[1..=k].partition_point(|&p| p <= target);
            let m = m.min(k - 1);
            occupied.push(m);
            k = self.jump[m];
        }
        occupied.reverse();
        occupied
    }
}

/// `ln Z` of the single-type interval graph on sorted `positions`.
pub fn exact_log_z_1d(positions: &[f64], sigma: f64, weight: f64) -> Result<LogWeight> {
    Ok(IntervalDp::new(positions, sigma, weight)?.log_z())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn path(n: usize, w: f64) -> Graph {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::from_edges(vec![w; n], &edges).unwrap()
    }

    #[test]
    fn exact_log_z_examples() {
        let iso = Graph::from_edges(vec![0.5; 3], &[]).unwrap();
        assert!((exact_log_z(&iso).unwrap().ln() - 3.375f64.ln()).abs() < 1e-14);
        assert!((exact_log_z(&path(2, 1.0)).unwrap().ln() - 3f64.ln()).abs() < 1e-14);
        let tri = Graph::from_edges(vec![1.0; 3], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!((exact_log_z(&tri).unwrap().ln() - 4f64.ln()).abs() < 1e-14);
        let big = Graph::from_edges(vec![1.0; 31], &[]).unwrap();
        assert!(matches!(exact_log_z(&big), Err(Error::TooManyVertices { .. })));
    }

    #[test]
    fn marginals_examples() {
        let iso = Graph::from_edges(vec![1.0], &[]).unwrap();
        assert!((exact_marginals(&iso).unwrap()[0] - 0.5).abs() < 1e-15);
        let p = exact_marginals(&path(2, 1.0)).unwrap();
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);
        // Star K_{1,3}: Z = 1 + 1 + (2^3 - 1) = 9, the center is alone in one set.
        let star = Graph::from_edges(vec![1.0; 4], &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let p = exact_marginals(&star).unwrap();
        assert!((p[0] - 1.0 / 9.0).abs() < 1e-15);
        assert!((p[1] - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn distribution_sums_to_one() {
        let d = exact_distribution(&path(3, 1.0)).unwrap();
        assert_eq!(d.len(), 5);
        let total: f64 = d.iter().map(|&(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(d.iter().all(|&(_, p)| (p - 0.2).abs() < 1e-15));
    }

    #[test]
    fn multiset_examples() {
        let one = Graph::from_edges(vec![0.5], &[]).unwrap();
        assert!((multiset_log_z(&one).unwrap().ln() - 2f64.ln()).abs() < 1e-15);
        let edge = Graph::from_edges(vec![1.0 / 3.0; 2], &[(0, 1)]).unwrap();
        assert!((multiset_log_z(&edge).unwrap().ln() - 2f64.ln()).abs() < 1e-15);
        let zero = Graph::from_edges(vec![0.0], &[]).unwrap();
        assert_eq!(multiset_log_z(&zero).unwrap().ln(), 0.0);
        let heavy = Graph::from_edges(vec![1.0], &[]).unwrap();
        assert!(matches!(multiset_log_z(&heavy), Err(Error::WeightTooLarge { .. })));
    }

    #[test]
    fn tree_thresholds() {
        assert_eq!(tree_threshold(3).unwrap(), 4.0);
        assert!((tree_threshold(4).unwrap() - 1.6875).abs() < 1e-15);
        assert_eq!(tree_threshold(2).unwrap(), f64::INFINITY);
        assert!(tree_threshold(1).is_err());
        let ratio = tree_threshold(1000).unwrap() * 1000.0 / std::f64::consts::E;
        assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn interval_dp_examples() {
        let xs: Vec<f64> = (0..10).map(|k| k as f64 / 10.0).collect();
        let many = exact_log_z_1d(&xs, 5.0, 0.1).unwrap();
        assert!((many.ln() - 2f64.ln()).abs() < 1e-15);
        let none = exact_log_z_1d(&xs, 0.01, 0.1).unwrap();
        assert!((none.ln() - 10.0 * 1.1f64.ln()).abs() < 1e-13);
        assert!(matches!(exact_log_z_1d(&[0.2, 0.1], 1.0, 1.0), Err(Error::Unsorted { index: 1 })));
    }

    #[test]
    fn interval_sampler_matches_distribution() {
        // Path on 4 points (consecutive points conflict).
        let xs = [0.0, 1.0, 2.0, 3.0];
        let dp = IntervalDp::new(&xs, 1.5, 0.7).unwrap();
        let graph = path(4, 0.7);
        let exact = exact_distribution(&graph).unwrap();
        let mut r = rng::stream(3, rng::domain::CONTINUOUS, 0);
        let draws = 200_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            let set = dp.sample(&mut r);
            assert!(graph.is_independent(&set));
            *counts.entry(set.iter().fold(0u64, |m, &v| m | 1 << v)).or_insert(0usize) += 1;
        }
        for (mask, p) in exact {
            let f = *counts.get(&mask).unwrap_or(&0) as f64 / draws as f64;
            let sd = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((f - p).abs() < 5.0 * sd, "{mask:b}: {f} vs {p}");
        }
    }
}
