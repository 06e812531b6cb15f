//! Approximations of `ln Z(G, w)`.
//!
//! Both estimators telescope over a vertex order `v_1, …, v_n` (descending
//! degree): with `G_k` the subgraph induced by the first `k` vertices,
//! `Z(G_{k-1}) / Z(G_k) = Pr_{G_k}[v_k ∉ I]`, so
//! `ln Z(G) = -Σ_k ln Pr_{G_k}[v_k ∉ I]`.

mod mcmc;
mod weitz;

pub use mcmc::{estimate_log_z_mcmc, McmcEstimate, McmcOptions, RatioDiagnostics};
pub use weitz::{
    estimate_log_z_weitz, estimate_log_z_weitz_at_depth, weitz_occupation_ratio, WeitzEstimate, WeitzRatio,
    WEITZ_DEPTHS,
};

use crate::hardcore::Graph;

/// Vertices by descending degree, ties by index.
pub fn telescoping_order(graph: &Graph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..graph.num_vertices()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    order
}

/// `ln Z` from exact unoccupation probabilities along the telescoping order.
/// Used to check the decomposition itself.
pub fn telescoping_log_z_exact(graph: &Graph) -> crate::Result<f64> {
    let order = telescoping_order(graph);
    let mut total = 0.0;
    for k in 0..order.len() {
        let sub = graph.induced(&order[..=k]);
        let p = crate::hardcore::exact_marginals(&sub)?[k];
        total -= (1.0 - p).ln();
    }
    Ok(total)
}
