use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Region;

use super::points::{snap_to_integer, CanonicalPointSet, ExplicitPointSet};

/// `y ↦ ⌊ρ y⌋ / ρ`, componentwise.
pub fn canonical_allocate(y: &[f64], resolution: f64) -> Vec<f64> {
    y.iter().map(|&c| (resolution * c).floor() / resolution).collect()
}

/// Axis-aligned partition of the cube into `k^d` equal boxes of side `ℓ/k`,
/// with `k = ⌈ℓ / a⌉` and `a = ε/√d`, so every box has diameter at most `ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypercubePartitioning {
    region: Region,
    cells_per_axis: u64,
}

impl HypercubePartitioning {
    pub fn new(region: Region, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        let d = region.dimension() as f64;
        let x = d.sqrt() * region.side_length() / epsilon;
        let k = snap_to_integer(x).unwrap_or_else(|| x.ceil()).max(1.0);
        if k > u32::MAX as f64 {
            return Err(Error::invalid("epsilon", "too small for an explicit partitioning"));
        }
        Self::with_cells_per_axis(region, k as u64)
    }

    pub fn with_cells_per_axis(region: Region, cells_per_axis: u64) -> Result<Self> {
        cells_per_axis
            .max(1)
            .checked_pow(region.dimension() as u32)
            .ok_or_else(|| Error::invalid("epsilon", "partitioning has too many cells"))?;
        Ok(HypercubePartitioning { region, cells_per_axis: cells_per_axis.max(1) })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn cells_per_axis(&self) -> u64 {
        self.cells_per_axis
    }

    /// Number of cells `m`.
    pub fn size(&self) -> u64 {
        self.cells_per_axis.pow(self.region.dimension() as u32)
    }

    pub fn cell_side(&self) -> f64 {
        self.region.side_length() / self.cells_per_axis as f64
    }

    pub fn cell_diameter(&self) -> f64 {
        (self.region.dimension() as f64).sqrt() * self.cell_side()
    }

    /// Every cell has exactly the average volume.
    pub fn volume_ratio(&self) -> f64 {
        1.0
    }

    pub fn cell_of(&self, y: &[f64]) -> usize {
        let k = self.cells_per_axis;
        let side = self.cell_side();
        y.iter()
            .rev()
            .fold(0u64, |acc, &c| acc * k + ((c / side).floor() as u64).min(k - 1)) as usize
    }

    pub fn cell_lower_corner(&self, cell: usize) -> Vec<f64> {
        let k = self.cells_per_axis as usize;
        let side = self.cell_side();
        (0..self.region.dimension())
            .map(|a| ((cell / k.pow(a as u32)) % k) as f64 * side)
            .collect()
    }
}

/// Allocation built by splitting each partition cell fairly among the points
/// it contains: the cell is cut into `Y` equal slabs along the first axis and
/// the `r`-th point of the cell (by index) receives slab `r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionAllocation {
    partitioning: HypercubePartitioning,
    cell_start: Vec<usize>,
    cell_points: Vec<u32>,
    point_cell: Vec<u32>,
    point_rank: Vec<u32>,
    delta: f64,
    epsilon: f64,
}

impl PartitionAllocation {
    pub fn partitioning(&self) -> &HypercubePartitioning {
        &self.partitioning
    }

    pub fn count(&self, cell: usize) -> usize {
        self.cell_start[cell + 1] - self.cell_start[cell]
    }

    /// `α^{-1}(x)` as a box: lower corner and side lengths.
    pub fn preimage(&self, point: usize) -> (Vec<f64>, Vec<f64>) {
        let cell = self.point_cell[point] as usize;
        let mut lower = self.partitioning.cell_lower_corner(cell);
        let side = self.partitioning.cell_side();
        let mut sides = vec![side; lower.len()];
        let slab = side / self.count(cell) as f64;
        lower[0] += slab * self.point_rank[point] as f64;
        sides[0] = slab;
        (lower, sides)
    }

    pub fn allocate(&self, y: &[f64]) -> usize {
        let cell = self.partitioning.cell_of(y);
        let count = self.count(cell);
        let lower = self.partitioning.cell_lower_corner(cell)[0];
        let slab = self.partitioning.cell_side() / count as f64;
        let r = (((y[0] - lower) / slab).floor() as usize).min(count - 1);
        self.cell_points[self.cell_start[cell] + r] as usize
    }
}

/// Fair allocation of the cells of `partitioning` to the points in them.
/// Fails with the index of the first empty cell.
pub fn partition_allocation_from_random(
    points: &ExplicitPointSet,
    partitioning: &HypercubePartitioning,
) -> Result<PartitionAllocation> {
    if points.region() != partitioning.region() {
        return Err(Error::invalid("partitioning", "region differs from the point set"));
    }
    let m = partitioning.size() as usize;
    let n = points.len();
    let point_cell: Vec<u32> = (0..n).map(|p| partitioning.cell_of(points.point(p)) as u32).collect();
    let mut cell_start = vec![0usize; m + 1];
    for &c in &point_cell {
        cell_start[c as usize + 1] += 1;
    }
    if let Some(cell) = (0..m).find(|&c| cell_start[c + 1] == 0) {
        return Err(Error::EmptyCell { cell });
    }
    for c in 0..m {
        cell_start[c + 1] += cell_start[c];
    }
    let mut fill = cell_start.clone();
    let mut cell_points = vec![0u32; n];
    let mut point_rank = vec![0u32; n];
    for (p, &c) in point_cell.iter().enumerate() {
        let c = c as usize;
        point_rank[p] = (fill[c] - cell_start[c]) as u32;
        cell_points[fill[c]] = p as u32;
        fill[c] += 1;
    }
    // vol(α^{-1}(x)) = vol(cell)/Y = vol(V)/(m Y), compared to vol(V)/n
    let delta = (0..m)
        .map(|c| (n as f64 / (m as f64 * (cell_start[c + 1] - cell_start[c]) as f64) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(PartitionAllocation {
        partitioning: partitioning.clone(),
        cell_start,
        cell_points,
        point_cell,
        point_rank,
        delta,
        epsilon: partitioning.cell_diameter(),
    })
}

/// A δ-ε-allocation for a point set.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Allocation {
    /// `y ↦ ⌊ρy⌋/ρ` on a canonical grid.
    CanonicalFloor { points: CanonicalPointSet },
    Partition(PartitionAllocation),
    /// Only the guarantees are known; there is no explicit map.
    Abstract { delta: f64, epsilon: f64 },
}

impl Allocation {
    pub fn canonical(points: CanonicalPointSet) -> Self {
        Allocation::CanonicalFloor { points }
    }

    pub fn delta(&self) -> f64 {
        match self {
            Allocation::CanonicalFloor { .. } => 0.0,
            Allocation::Partition(p) => p.delta,
            Allocation::Abstract { delta, .. } => *delta,
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            Allocation::CanonicalFloor { points } => {
                (points.region().dimension() as f64).sqrt() / points.resolution()
            }
            Allocation::Partition(p) => p.epsilon,
            Allocation::Abstract { epsilon, .. } => *epsilon,
        }
    }

    /// Index of the point `α(y)`.
    pub fn allocate(&self, y: &[f64]) -> Result<usize> {
        match self {
            Allocation::CanonicalFloor { points } => {
                let m = points.cells_per_axis();
                let rho = points.resolution();
                let coords: Vec<u64> = y.iter().map(|&c| ((rho * c).floor() as u64).min(m - 1)).collect();
                Ok(points.grid_index(&coords))
            }
            Allocation::Partition(p) => Ok(p.allocate(y)),
            Allocation::Abstract { .. } => Err(Error::NoCellGeometry),
        }
    }

    /// Uniform point of `α^{-1}(x)` for the point with index `point`.
    pub fn sample_preimage<R: Rng + ?Sized>(&self, point: usize, rng: &mut R) -> Result<Vec<f64>> {
        let (lower, sides) = match self {
            Allocation::CanonicalFloor { points } => {
                let step = points.region().side_length() / points.cells_per_axis() as f64;
                (points.point(point), vec![step; points.region().dimension()])
            }
            Allocation::Partition(p) => p.preimage(point),
            Allocation::Abstract { .. } => return Err(Error::NoCellGeometry),
        };
        Ok(lower
            .iter()
            .zip(&sides)
            .map(|(&lo, &s)| {
                let c = lo + s * rng.random::<f64>();
                // stay inside the half-open box despite rounding
                if c < lo + s { c } else { lo }
            })
            .collect())
    }
}
