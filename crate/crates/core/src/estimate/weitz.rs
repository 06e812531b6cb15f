use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hardcore::{tree_threshold, Graph};
use crate::logweight::LogWeight;

use super::telescoping_order;

/// Depths tried by [`estimate_log_z_weitz`].
pub const WEITZ_DEPTHS: [usize; 5] = [4, 8, 16, 32, 64];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeitzRatio {
    /// `R_v = Pr[v ∈ I] / Pr[v ∉ I]` on the truncated tree.
    pub ratio: f64,
    /// Whether the depth limit cut off part of the tree. If not, the
    /// ratio is exact.
    pub truncated: bool,
}

struct Walk<'a> {
    graph: &'a Graph,
    allowed: &'a dyn Fn(usize) -> bool,
    /// Position of each vertex on the current walk, or `usize::MAX`.
    position: Vec<usize>,
    path: Vec<usize>,
}

impl Walk<'_> {
    /// Ratio at the end of the current walk with `depth` levels still allowed.
    fn ratio(&mut self, depth: usize) -> (f64, bool) {
        let u = *self.path.last().expect("walk is never empty");
        let parent = if self.path.len() >= 2 { Some(self.path[self.path.len() - 2]) } else { None };
        let w = self.graph.weight(u);
        let mut product = 1.0;
        let mut truncated = false;
        for &x in self.graph.neighbors(u) {
            let x = x as usize;
            if Some(x) == parent || !(self.allowed)(x) {
                continue;
            }
            let at = self.position[x];
            if at != usize::MAX {
                // Closing a cycle at x. The walk left x towards `first`; the
                // leaf is occupied iff the closing edge precedes that one in
                // x's neighbor order, which forces u to be unoccupied.
                let first = self.path[at + 1];
                if rank(self.graph, x, u) < rank(self.graph, x, first) {
                    if depth == 0 {
                        truncated = true;
                        continue;
                    }
                    return (0.0, truncated);
                }
                continue;
            }
            if depth == 0 {
                truncated = true;
                continue;
            }
            self.position[x] = self.path.len();
            self.path.push(x);
            let (r, t) = self.ratio(depth - 1);
            self.path.pop();
            self.position[x] = usize::MAX;
            truncated |= t;
            product /= 1.0 + r;
        }
        (w * product, truncated)
    }
}

fn rank(graph: &Graph, x: usize, y: usize) -> usize {
    graph.neighbors(x).binary_search(&(y as u32)).expect("adjacent")
}

fn ratio_within(graph: &Graph, v: usize, depth: usize, allowed: &dyn Fn(usize) -> bool) -> WeitzRatio {
    let mut walk = Walk { graph, allowed, position: vec![usize::MAX; graph.num_vertices()], path: vec![v] };
    walk.position[v] = 0;
    let (ratio, truncated) = walk.ratio(depth);
    WeitzRatio { ratio, truncated }
}

/// Occupation ratio of `v` from the self-avoiding walk tree cut at `depth`,
/// treating every vertex below the cut as unoccupied.
pub fn weitz_occupation_ratio(graph: &Graph, v: usize, depth: usize) -> WeitzRatio {
    ratio_within(graph, v, depth, &|_| true)
}

#[derive(Clone, Debug, Serialize)]
pub struct WeitzEstimate {
    pub ln_z: LogWeight,
    pub depth: usize,
    /// No vertex hit the depth limit, so the value is exact.
    pub exact: bool,
    /// Successive depths agreed within `ε_A/2`, or the value is exact.
    pub converged: bool,
    /// `max w < λ_c(Δ)`.
    pub below_tree_threshold: bool,
}

/// `ln Z` from the telescoping product with every ratio computed at `depth`.
pub fn estimate_log_z_weitz_at_depth(graph: &Graph, depth: usize) -> (f64, bool) {
    let order = telescoping_order(graph);
    let mut position = vec![0usize; graph.num_vertices()];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    let terms: Vec<(f64, bool)> = (0..order.len())
        .into_par_iter()
        .map(|k| {
            let allowed = |u: usize| position[u] <= k;
            let r = ratio_within(graph, order[k], depth, &allowed);
            (r.ratio.ln_1p(), r.truncated)
        })
        .collect();
    let ln_z = terms.iter().map(|t| t.0).sum();
    (ln_z, terms.iter().any(|t| t.1))
}

/// Deterministic approximation of `ln Z` by correlation decay.
///
/// Depth doubles from 4 up to 64 until two successive values differ by less
/// than `ε_A/2` or no ratio was truncated.
pub fn estimate_log_z_weitz(graph: &Graph, eps_a: f64) -> Result<WeitzEstimate> {
    if !(eps_a > 0.0 && eps_a <= 1.0) {
        return Err(Error::invalid("eps_a", format!("must lie in (0, 1], got {eps_a}")));
    }
    let below = graph.max_weight() < tree_threshold(graph.max_degree().max(2))?;
    let mut previous: Option<f64> = None;
    let mut result = None;
    for depth in WEITZ_DEPTHS {
        let (ln_z, truncated) = estimate_log_z_weitz_at_depth(graph, depth);
        let converged = !truncated || previous.is_some_and(|p| (ln_z - p).abs() < eps_a / 2.0);
        result = Some(WeitzEstimate {
            ln_z: LogWeight::from_ln(ln_z),
            depth,
            exact: !truncated,
            converged,
            below_tree_threshold: below,
        });
        if converged {
            break;
        }
        previous = Some(ln_z);
    }
    Ok(result.expect("at least one depth"))
}
