use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hardcore::Graph;
use crate::model::ModelSpec;

use super::points::PointSet;

/// Upper limit on point pairs examined while building a graph.
pub const MAX_SCANNED_PAIRS: u64 = 100_000_000;

const NO_EDGE: u8 = u8::MAX;

/// Hard-core representation `(G_X, w_X)` of a model on a point set.
///
/// Vertex `(x, i)` has id `x·q + i`. Adjacency is stored per point pair,
/// tagged with a distance class; the type pairs joined by an edge are derived
/// from the class and the interaction matrix.
#[derive(Clone, Debug)]
pub struct HardCoreGraph {
    dimension: usize,
    q: usize,
    num_points: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    classes: Vec<u8>,
    /// Rank of `Λ(i,j)` among the distinct positive entries, or `NO_EDGE`.
    type_rank: Vec<u8>,
    type_weights: Vec<f64>,
    resolution: Option<f64>,
    seed: Option<u64>,
}

impl HardCoreGraph {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_vertices(&self) -> usize {
        self.num_points * self.q
    }

    pub fn resolution(&self) -> Option<f64> {
        self.resolution
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn vertex(&self, point: usize, ty: usize) -> usize {
        point * self.q + ty
    }

    pub fn type_weights(&self) -> &[f64] {
        &self.type_weights
    }

    pub fn weight(&self, vertex: usize) -> f64 {
        self.type_weights[vertex % self.q]
    }

    /// Number of stored point pairs (each unordered pair counted twice).
    pub fn num_point_pairs(&self) -> usize {
        self.neighbors.len()
    }

    fn joins(&self, i: usize, j: usize, class: u8) -> bool {
        let rank = self.type_rank[i * self.q + j];
        rank != NO_EDGE && rank >= class
    }

    /// Neighbors of a vertex in increasing id order.
    pub fn neighbors(&self, vertex: usize) -> Vec<u32> {
        let (x, i) = (vertex / self.q, vertex % self.q);
        let q = self.q;
        let mut out = Vec::new();
        let range = self.offsets[x]..self.offsets[x + 1];
        let mut own_done = false;
        let push_own = |out: &mut Vec<u32>| {
            for j in 0..q {
                if j != i && self.joins(i, j, 0) {
                    out.push((x * q + j) as u32);
                }
            }
        };
        for k in range {
            let y = self.neighbors[k] as usize;
            if !own_done && y > x {
                push_own(&mut out);
                own_done = true;
            }
            let c = self.classes[k];
            for j in 0..q {
                if self.joins(i, j, c) {
                    out.push((y * q + j) as u32);
                }
            }
        }
        if !own_done {
            push_own(&mut out);
        }
        out
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.neighbors(vertex).len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let q = self.q;
        let (x, i, y, j) = (u / q, u % q, v / q, v % q);
        if x == y {
            return i != j && self.joins(i, j, 0);
        }
        let list = &self.neighbors[self.offsets[x]..self.offsets[x + 1]];
        match list.binary_search(&(y as u32)) {
            Ok(k) => self.joins(i, j, self.classes[self.offsets[x] + k]),
            Err(_) => false,
        }
    }

    /// Number of type-`j` neighbors of vertex `(x, i)`.
    pub fn type_degree(&self, point: usize, i: usize, j: usize) -> usize {
        let own = usize::from(i != j && self.joins(i, j, 0));
        own + self.classes[self.offsets[point]..self.offsets[point + 1]]
            .iter()
            .filter(|&&c| self.joins(i, j, c))
            .count()
    }

    /// Explicit vertex-level adjacency, as used by the samplers and estimators.
    pub fn to_graph(&self) -> Graph {
        let n = self.num_vertices();
        if self.q == 1 {
            let weights = vec![self.type_weights[0]; n];
            return Graph::from_csr(self.offsets.clone(), self.neighbors.clone(), weights);
        }
        let lists: Vec<Vec<u32>> = (0..n).into_par_iter().map(|v| self.neighbors(v)).collect();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in lists {
            neighbors.extend_from_slice(&l);
            offsets.push(neighbors.len());
        }
        let weights = (0..n).map(|v| self.weight(v)).collect();
        Graph::from_csr(offsets, neighbors, weights)
    }
}

/// Distinct positive entries of the interaction matrix in increasing order,
/// and the rank of each entry among them.
fn threshold_ranks(model: &ModelSpec) -> (Vec<f64>, Vec<u8>) {
    let lambda = model.interaction();
    let mut distinct: Vec<f64> = lambda.entries().iter().copied().filter(|&v| v > 0.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let ranks = lambda
        .entries()
        .iter()
        .map(|&v| {
            if v > 0.0 {
                distinct.iter().position(|&t| t == v).expect("present") as u8
            } else {
                NO_EDGE
            }
        })
        .collect();
    (distinct, ranks)
}

struct SpatialHash {
    cells_per_axis: usize,
    dimension: usize,
    cell_side: f64,
    cell_start: Vec<usize>,
    members: Vec<u32>,
    point_cell: Vec<usize>,
}

impl SpatialHash {
    fn new(points: &PointSet, reach: f64) -> Self {
        let d = points.region().dimension();
        let n = points.len();
        let side = points.scaled_side();
        let mut k = ((side / reach).floor() as usize).max(1);
        // keep the number of cells in proportion to the number of points
        let limit = (2 * n).max(1) as f64;
        while (k as f64).powi(d as i32) > limit && k > 1 {
            k = ((limit.powf(1.0 / d as f64)).floor() as usize).clamp(1, k - 1);
        }
        let cell_side = side / k as f64;
        let point_cell: Vec<usize> = (0..n)
            .into_par_iter()
            .map(|p| {
                (0..d).rev().fold(0usize, |acc, a| {
                    let c = ((points.scaled(p, a) / cell_side).floor() as usize).min(k - 1);
                    acc * k + c
                })
            })
            .collect();
        let num_cells = k.pow(d as u32);
        let mut cell_start = vec![0usize; num_cells + 1];
        for &c in &point_cell {
            cell_start[c + 1] += 1;
        }
        for c in 0..num_cells {
            cell_start[c + 1] += cell_start[c];
        }
        let mut fill = cell_start.clone();
        let mut members = vec![0u32; n];
        for (p, &c) in point_cell.iter().enumerate() {
            members[fill[c]] = p as u32;
            fill[c] += 1;
        }
        SpatialHash { cells_per_axis: k, dimension: d, cell_side, cell_start, members, point_cell }
    }

    fn cell_coords(&self, cell: usize) -> Vec<usize> {
        let k = self.cells_per_axis;
        (0..self.dimension).map(|a| (cell / k.pow(a as u32)) % k).collect()
    }

    /// Cells whose coordinates differ by at most one on every axis.
    fn neighborhood(&self, cell: usize) -> Vec<usize> {
        let k = self.cells_per_axis as isize;
        let base = self.cell_coords(cell);
        let mut out = vec![0usize];
        for a in (0..self.dimension).rev() {
            let mut next = Vec::with_capacity(out.len() * 3);
            for &prefix in &out {
                for delta in -1isize..=1 {
                    let c = base[a] as isize + delta;
                    if (0..k).contains(&c) {
                        next.push(prefix * k as usize + c as usize);
                    }
                }
            }
            out = next;
        }
        out
    }

    fn cell_members(&self, cell: usize) -> &[u32] {
        &self.members[self.cell_start[cell]..self.cell_start[cell + 1]]
    }

    fn scanned_pairs(&self) -> u64 {
        let cells = self.cell_start.len() - 1;
        (0..cells)
            .into_par_iter()
            .map(|c| {
                let own = self.cell_members(c).len() as u64;
                if own == 0 {
                    return 0;
                }
                own * self.neighborhood(c).iter().map(|&o| self.cell_members(o).len() as u64).sum::<u64>()
            })
            .sum()
    }
}

/// Builds the hard-core representation of `model` on `points`.
pub fn build_graph(model: &ModelSpec, points: &PointSet) -> Result<HardCoreGraph> {
    build_graph_with_cap(model, points, MAX_SCANNED_PAIRS)
}

pub fn build_graph_with_cap(model: &ModelSpec, points: &PointSet, max_pairs: u64) -> Result<HardCoreGraph> {
    let n = points.len();
    if n == 0 {
        return Err(Error::invalid("points", "the point set is empty"));
    }
    if points.region() != model.region() {
        return Err(Error::invalid("points", "point set region differs from the model region"));
    }
    let q = model.q();
    if (n as u64) * (q as u64) > u32::MAX as u64 {
        return Err(Error::invalid("points", format!("{n} points × {q} types exceed 32-bit vertex ids")));
    }
    let d = model.dimension();
    let (distinct, type_rank) = threshold_ranks(model);
    let type_weights = model.fugacities().values().iter().map(|l| l * model.volume() / n as f64).collect();
    let empty = |offsets: Vec<usize>| HardCoreGraph {
        dimension: d,
        q,
        num_points: n,
        offsets,
        neighbors: Vec::new(),
        classes: Vec::new(),
        type_rank: type_rank.clone(),
        type_weights: Vec::clone(&type_weights),
        resolution: points.resolution(),
        seed: points.seed(),
    };
    if distinct.is_empty() {
        return Ok(empty(vec![0; n + 1]));
    }
    let squared: Vec<f64> = distinct.iter().map(|&t| points.scaled_threshold(t).powi(2)).collect();
    let reach = points.scaled_threshold(*distinct.last().expect("non-empty"));

    let hash = SpatialHash::new(points, reach);
    let pairs = hash.scanned_pairs();
    if pairs > max_pairs {
        return Err(Error::GraphTooLarge {
            pairs,
            cap: max_pairs,
            resolution: points.resolution().unwrap_or(0.0),
            estimated_bytes: pairs * 5,
        });
    }
    debug_assert!(hash.cell_side >= reach);

    let classes_count = squared.len() as u8;
    // class of a squared distance: number of thresholds t with t² ≤ dist²
    let classify = |x: usize, y: usize| -> u8 {
        let mut dist2 = 0.0;
        for a in 0..d {
            let diff = points.scaled(x, a) - points.scaled(y, a);
            dist2 += diff * diff;
        }
        squared.partition_point(|&t2| t2 <= dist2) as u8
    };
    let scan = |x: usize, mut emit: Box<dyn FnMut(u32, u8) + '_>| {
        for cell in hash.neighborhood(hash.point_cell[x]) {
            for &y in hash.cell_members(cell) {
                if y as usize != x {
                    let c = classify(x, y as usize);
                    if c < classes_count {
                        emit(y, c);
                    }
                }
            }
        }
    };

    let counts: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut count = 0;
            scan(x, Box::new(|_, _| count += 1));
            count
        })
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for c in &counts {
        offsets.push(offsets.last().unwrap() + c);
    }
    let total = *offsets.last().unwrap();
    let mut neighbors = vec![0u32; total];
    let mut classes = vec![0u8; total];
    {
        let mut slices = Vec::with_capacity(n);
        let (mut rest_n, mut rest_c) = (neighbors.as_mut_slice(), classes.as_mut_slice());
        for &c in &counts {
            let (a, b) = rest_n.split_at_mut(c);
            let (e, f) = rest_c.split_at_mut(c);
            slices.push((a, e));
            rest_n = b;
            rest_c = f;
        }
        slices.into_par_iter().enumerate().for_each(|(x, (nb, cl))| {
            let mut entries = Vec::with_capacity(nb.len());
            scan(x, Box::new(|y, c| entries.push((y, c))));
            entries.sort_unstable();
            for (k, (y, c)) in entries.into_iter().enumerate() {
                nb[k] = y;
                cl[k] = c;
            }
        });
    }

    let mut graph = empty(offsets);
    graph.neighbors = neighbors;
    graph.classes = classes;
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::points::{CanonicalPointSet, ExplicitPointSet};
    use crate::model::Region;

    fn grid_1d(model: &ModelSpec, rho: f64) -> PointSet {
        PointSet::Canonical(CanonicalPointSet::new(model.region().clone(), rho).unwrap())
    }

    #[test]
    fn canonical_line() {
        let model = ModelSpec::hard_sphere(1, 1.0, 0.25, 1.0).unwrap();
        let g = build_graph(&model, &grid_1d(&model, 10.0)).unwrap();
        assert_eq!(g.num_vertices(), 10);
        assert_eq!(g.neighbors(3), vec![0, 1, 2, 4, 5, 6, 7]);
        assert_eq!(g.degree(5), 8);
        assert!(!g.has_edge(0, 5));
        assert!((g.weight(0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn exact_distance_is_not_an_edge() {
        let region = Region::new(2, 1.0).unwrap();
        let model = ModelSpec::hard_sphere(2, 1.0, 0.15, 1.0).unwrap();
        let pts = ExplicitPointSet::from_points(region, &[vec![0.1, 0.2], vec![0.4, 0.2], vec![0.1, 0.49]]).unwrap();
        let g = build_graph(&model, &PointSet::Explicit(pts)).unwrap();
        assert!(!g.has_edge(0, 1));
        assert!(g.has_edge(0, 2));
    }

    #[test]
    fn ties_on_grid_are_resolved_exactly() {
        // 0.1 · 30 is not exactly 3 in floating point
        let model = ModelSpec::hard_sphere(1, 1.0, 0.05, 1.0).unwrap();
        let g = build_graph(&model, &grid_1d(&model, 30.0)).unwrap();
        assert!(g.has_edge(0, 2));
        assert!(!g.has_edge(0, 3));
    }

    #[test]
    fn unconstrained_types_share_a_point() {
        let model = ModelSpec::widom_rowlinson(1, 1.0, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let g = build_graph(&model, &grid_1d(&model, 4.0)).unwrap();
        assert_eq!(g.num_vertices(), 8);
        assert!(!g.has_edge(0, 1));
        assert_eq!(g.to_graph().num_edges(), 0);
    }

    #[test]
    fn widom_rowlinson_types() {
        let model = ModelSpec::widom_rowlinson(1, 1.0, &[0.1, 0.2], &[1.0, 2.0]).unwrap();
        let g = build_graph(&model, &grid_1d(&model, 10.0)).unwrap();
        // same point, different types
        assert!(g.has_edge(0, 1));
        // same type never
        assert!(!g.has_edge(0, 2));
        // types 0 and 1 at distance 0.2 < 0.3
        assert!(g.has_edge(0, 5));
        assert!(!g.has_edge(0, 7));
        assert_eq!(g.type_weights(), &[0.1, 0.2]);
        let explicit = g.to_graph();
        explicit.validate().unwrap();
        for v in 0..g.num_vertices() {
            assert_eq!(explicit.neighbors(v), g.neighbors(v).as_slice());
        }
    }

    #[test]
    fn refuses_huge_graphs() {
        let model = ModelSpec::hard_sphere(1, 1.0, 0.25, 1.0).unwrap();
        let err = build_graph_with_cap(&model, &grid_1d(&model, 1000.0), 1000).unwrap_err();
        assert!(matches!(err, Error::GraphTooLarge { resolution, .. } if resolution == 1000.0));
    }
}
