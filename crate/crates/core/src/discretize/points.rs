use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Region;
use crate::rng;

/// Relative slack used when snapping products like `ℓρ` to integers.
pub(crate) const SNAP: f64 = 1e-9;

pub fn snap_to_integer(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= SNAP * r.abs().max(1.0)).then_some(r)
}

/// Number of grid cells per axis for the smallest feasible resolution `≥ ρ_min`.
pub fn feasible_cells_per_axis(side_length: f64, rho_min: f64) -> u64 {
    let x = side_length * rho_min;
    let m = snap_to_integer(x).unwrap_or_else(|| x.ceil());
    (m as u64).max(1)
}

/// Smallest `ρ = m / ℓ ≥ ρ_min` with `m` a positive integer.
pub fn smallest_feasible_resolution(side_length: f64, rho_min: f64) -> f64 {
    feasible_cells_per_axis(side_length, rho_min) as f64 / side_length
}

/// The grid `{ z / ρ : z ∈ ℕ^d } ∩ [0, ℓ)^d`, enumerated without storing coordinates.
///
/// Point `k` has grid coordinates given by the base-`m` digits of `k`, axis 0
/// least significant, so in one dimension points are sorted by index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalPointSet {
    region: Region,
    cells_per_axis: u64,
}

impl CanonicalPointSet {
    /// Fails unless `ℓρ` is a positive integer.
    pub fn new(region: Region, resolution: f64) -> Result<Self> {
        let m = snap_to_integer(region.side_length() * resolution)
            .filter(|&m| m >= 1.0)
            .ok_or_else(|| {
                Error::invalid(
                    "resolution",
                    format!("ℓρ = {} is not a positive integer", region.side_length() * resolution),
                )
            })?;
        Self::with_cells_per_axis(region, m as u64)
    }

    pub fn with_cells_per_axis(region: Region, cells_per_axis: u64) -> Result<Self> {
        if cells_per_axis == 0 {
            return Err(Error::invalid("resolution", "needs at least one grid point per axis"));
        }
        let d = region.dimension() as u32;
        cells_per_axis
            .checked_pow(d)
            .filter(|&n| n <= u32::MAX as u64)
            .ok_or_else(|| Error::invalid("resolution", format!("{cells_per_axis}^{d} grid points do not fit in 32-bit ids")))?;
        Ok(CanonicalPointSet { region, cells_per_axis })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn cells_per_axis(&self) -> u64 {
        self.cells_per_axis
    }

    pub fn resolution(&self) -> f64 {
        self.cells_per_axis as f64 / self.region.side_length()
    }

    /// `(ρℓ)^d`.
    pub fn len(&self) -> usize {
        self.cells_per_axis.pow(self.region.dimension() as u32) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn grid_coordinate(&self, index: usize, axis: usize) -> u64 {
        (index as u64 / self.cells_per_axis.pow(axis as u32)) % self.cells_per_axis
    }

    pub fn grid_index(&self, coords: &[u64]) -> usize {
        coords.iter().rev().fold(0u64, |acc, &c| acc * self.cells_per_axis + c) as usize
    }

    pub fn coordinate(&self, index: usize, axis: usize) -> f64 {
        self.grid_coordinate(index, axis) as f64 * self.region.side_length() / self.cells_per_axis as f64
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        (0..self.region.dimension()).map(|a| self.coordinate(index, a)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |k| self.point(k))
    }
}

/// A finite point set with stored coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExplicitPointSet {
    region: Region,
    coords: Vec<f64>,
    seed: Option<u64>,
}

impl ExplicitPointSet {
    pub fn from_points(region: Region, points: &[Vec<f64>]) -> Result<Self> {
        let d = region.dimension();
        let mut coords = Vec::with_capacity(points.len() * d);
        for (k, p) in points.iter().enumerate() {
            if !region.contains(p) {
                return Err(Error::invalid(format!("points[{k}]"), "lies outside the region"));
            }
            coords.extend_from_slice(p);
        }
        Ok(ExplicitPointSet { region, coords, seed: None })
    }

    /// `n` points drawn independently and uniformly from the region.
    pub fn random(region: Region, n: usize, seed: u64) -> Self {
        let mut r = rng::stream(seed, rng::domain::POINTS, 0);
        let ell = region.side_length();
        let coords = (0..n * region.dimension())
            .map(|_| {
                let c = r.random::<f64>() * ell;
                // guard against rounding up to ℓ
                if c < ell { c } else { ell * (1.0 - f64::EPSILON) }
            })
            .collect();
        ExplicitPointSet { region, coords, seed: Some(seed) }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.region.dimension()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, index: usize) -> &[f64] {
        let d = self.region.dimension();
        &self.coords[index * d..(index + 1) * d]
    }

    pub fn coordinate(&self, index: usize, axis: usize) -> f64 {
        self.coords[index * self.region.dimension() + axis]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// One-dimensional coordinates in increasing order.
    pub fn sorted_1d(&self) -> Result<Vec<f64>> {
        if self.region.dimension() != 1 {
            return Err(Error::invalid("dimension", "sorted positions need d = 1"));
        }
        let mut xs = self.coords.clone();
        xs.sort_by(f64::total_cmp);
        Ok(xs)
    }
}

/// Point sets accepted by the graph builder.
#[derive(Clone, Debug, PartialEq)]
pub enum PointSet {
    Canonical(CanonicalPointSet),
    Explicit(ExplicitPointSet),
}

impl PointSet {
    pub fn region(&self) -> &Region {
        match self {
            PointSet::Canonical(p) => p.region(),
            PointSet::Explicit(p) => p.region(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PointSet::Canonical(p) => p.len(),
            PointSet::Explicit(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Resolution of a canonical grid, `None` otherwise.
    pub fn resolution(&self) -> Option<f64> {
        match self {
            PointSet::Canonical(p) => Some(p.resolution()),
            PointSet::Explicit(_) => None,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            PointSet::Canonical(_) => None,
            PointSet::Explicit(p) => p.seed(),
        }
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        match self {
            PointSet::Canonical(p) => p.point(index),
            PointSet::Explicit(p) => p.point(index).to_vec(),
        }
    }

    /// Coordinate in the builder's internal units: grid steps for canonical
    /// sets (exact integers) and plain coordinates otherwise.
    pub(crate) fn scaled(&self, index: usize, axis: usize) -> f64 {
        match self {
            PointSet::Canonical(p) => p.grid_coordinate(index, axis) as f64,
            PointSet::Explicit(p) => p.coordinate(index, axis),
        }
    }

    /// Side length of the region in internal units.
    pub(crate) fn scaled_side(&self) -> f64 {
        match self {
            PointSet::Canonical(p) => p.cells_per_axis() as f64,
            PointSet::Explicit(p) => p.region().side_length(),
        }
    }

    /// A distance threshold in internal units. On canonical grids values
    /// within rounding of a whole number of grid steps are snapped so that
    /// exact ties stay non-edges.
    pub(crate) fn scaled_threshold(&self, distance: f64) -> f64 {
        match self {
            PointSet::Canonical(p) => {
                let t = distance * p.cells_per_axis() as f64 / p.region().side_length();
                snap_to_integer(t).unwrap_or(t)
            }
            PointSet::Explicit(_) => distance,
        }
    }
}
