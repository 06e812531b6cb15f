//! Point sets, allocations and the hard-core representation of a model.

mod allocation;
mod bounds;
pub mod export;
mod graph;
mod points;

pub use allocation::{
    canonical_allocate, partition_allocation_from_random, Allocation, HypercubePartitioning, PartitionAllocation,
};
pub use bounds::{
    degree_bound, discretization_error_factor, lattice_bound, lattice_points_in_ball, resolution_for_error,
    resolution_for_error_adaptive, sampling_resolution, DegreeBound, ResolutionChoice,
};
pub use graph::{build_graph, build_graph_with_cap, HardCoreGraph, MAX_SCANNED_PAIRS};
pub use points::{
    feasible_cells_per_axis, smallest_feasible_resolution, snap_to_integer, CanonicalPointSet, ExplicitPointSet, PointSet,
};

use crate::error::{Error, Result};
use crate::hardcore::IntervalDp;
use crate::logweight::LogWeight;
use crate::model::ModelSpec;

/// Interval-graph table for a one-dimensional single-type model on a point set.
///
/// Uses the same distance predicate as [`build_graph`], so the partition
/// function equals that of the built graph without materializing it.
pub fn interval_dp(model: &ModelSpec, points: &PointSet) -> Result<IntervalDp> {
    if model.dimension() != 1 || model.q() != 1 {
        return Err(Error::invalid("model", "the interval recursion needs d = 1 and a single type"));
    }
    let sigma = model.interaction().get(0, 0);
    if sigma == 0.0 {
        return Err(Error::Unconstrained);
    }
    let n = points.len();
    if n == 0 {
        return Err(Error::invalid("points", "the point set is empty"));
    }
    let weight = model.fugacities().get(0) * model.volume() / n as f64;
    let positions: Vec<f64> = match points {
        PointSet::Canonical(_) => (0..n).map(|k| points.scaled(k, 0)).collect(),
        PointSet::Explicit(p) => p.sorted_1d()?,
    };
    IntervalDp::new(&positions, points.scaled_threshold(sigma), weight)
}

/// `ln Z(G_X, w_X)` for one-dimensional hard rods via the interval recursion.
pub fn log_z_1d(model: &ModelSpec, points: &PointSet) -> Result<LogWeight> {
    Ok(interval_dp(model, points)?.log_z())
}
