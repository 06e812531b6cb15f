use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::glauber::{regime, unoccupied_indicators, Regime, SampleOptions};
use crate::hardcore::Graph;
use crate::logweight::LogWeight;
use crate::rng;

use super::telescoping_order;

#[derive(Clone, Debug)]
pub struct McmcOptions {
    /// Restarts per ratio; defaults to `⌈64 n / ε_A²⌉`.
    pub restarts: Option<usize>,
    pub groups: usize,
    pub chain: SampleOptions,
}

impl Default for McmcOptions {
    fn default() -> Self {
        McmcOptions { restarts: None, groups: 8, chain: SampleOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioDiagnostics {
    pub step: usize,
    pub vertex: usize,
    /// Estimated `Pr_{G_k}[v_k ∉ I]`.
    pub probability: f64,
    pub std_error: f64,
    /// Size of the connected component of `v_k` in `G_k` the chain ran on.
    pub component_size: usize,
    /// Zero when the ratio is known in closed form.
    pub restarts: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct McmcEstimate {
    pub ln_z: LogWeight,
    pub eps_a: f64,
    pub regime: Regime,
    pub ratios: Vec<RatioDiagnostics>,
}

/// Randomized `ε_A`-approximation of `ln Z` by self-reducibility.
///
/// Each ratio is estimated from independent Glauber restarts with total
/// variation budget `ε_A/(8n)`, combined by median of means. Only the
/// connected component of `v_k` in `G_k` affects the ratio, so the chain runs
/// on that component; isolated vertices use `1/(1+w)` directly.
pub fn estimate_log_z_mcmc(graph: &Graph, eps_a: f64, seed: u64, options: &McmcOptions) -> Result<McmcEstimate> {
    let n = graph.num_vertices();
    if n == 0 {
        return Err(Error::invalid("graph", "the graph has no vertices"));
    }
    if !(eps_a > 0.0 && eps_a <= 1.0) {
        return Err(Error::invalid("eps_a", format!("must lie in (0, 1], got {eps_a}")));
    }
    let restarts = options.restarts.unwrap_or_else(|| (64.0 * n as f64 / (eps_a * eps_a)).ceil() as usize);
    let groups = options.groups.clamp(1, restarts.max(1));
    let tv = eps_a / (8.0 * n as f64);
    let order = telescoping_order(graph);
    let mut position = vec![usize::MAX; n];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }

    let ratios: Vec<RatioDiagnostics> = (0..n)
        .into_par_iter()
        .map(|k| {
            let v = order[k];
            let w = graph.weight(v);
            let component = component_within(graph, v, |u| position[u] <= k);
            if w == 0.0 || component.len() == 1 {
                return RatioDiagnostics {
                    step: k,
                    vertex: v,
                    probability: 1.0 / (1.0 + w),
                    std_error: 0.0,
                    component_size: component.len(),
                    restarts: 0,
                };
            }
            let sub = graph.induced(&component);
            let hits = unoccupied_indicators(&sub, 0, restarts, tv, rng::derive(seed, k as u64), &options.chain);
            let (probability, std_error) = median_of_means(&hits, groups);
            RatioDiagnostics { step: k, vertex: v, probability, std_error, component_size: component.len(), restarts }
        })
        .collect();

    let mut ln_z = 0.0;
    for r in &ratios {
        if r.probability <= 0.0 {
            return Err(Error::ZeroRatio { step: r.step, vertex: r.vertex, samples: r.restarts });
        }
        ln_z -= r.probability.ln();
    }
    Ok(McmcEstimate { ln_z: LogWeight::from_ln(ln_z), eps_a, regime: regime(graph, options.chain.clique_witness), ratios })
}

/// Vertices reachable from `start` through vertices accepted by `keep`;
/// `start` comes first.
fn component_within(graph: &Graph, start: usize, keep: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut seen = std::collections::HashSet::from([start]);
    let mut out = vec![start];
    let mut next = 0;
    while next < out.len() {
        let u = out[next];
        next += 1;
        for &x in graph.neighbors(u) {
            let x = x as usize;
            if keep(x) && seen.insert(x) {
                out.push(x);
            }
        }
    }
    out
}

/// Median of the means of `groups` contiguous blocks, and the standard error
/// of the overall mean.
fn median_of_means(hits: &[bool], groups: usize) -> (f64, f64) {
    let s = hits.len();
    let mut means: Vec<f64> = (0..groups)
        .map(|g| {
            let block = &hits[g * s / groups..(g + 1) * s / groups];
            block.iter().filter(|&&h| h).count() as f64 / block.len().max(1) as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let median = if groups % 2 == 1 {
        means[groups / 2]
    } else {
        0.5 * (means[groups / 2 - 1] + means[groups / 2])
    };
    let p = hits.iter().filter(|&&h| h).count() as f64 / s as f64;
    (median, (p * (1.0 - p) / s as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edgeless_graph_is_exact() {
        let g = Graph::from_edges(vec![1.0; 5], &[]).unwrap();
        let e = estimate_log_z_mcmc(&g, 0.1, 1, &McmcOptions::default()).unwrap();
        assert!((e.ln_z.ln() - 32f64.ln()).abs() < 1e-12);
        assert!(e.ratios.iter().all(|r| r.restarts == 0));
    }

    #[test]
    fn triangle_within_tolerance() {
        let g = Graph::from_edges(vec![1.0; 3], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let e = estimate_log_z_mcmc(&g, 0.2, 3, &McmcOptions::default()).unwrap();
        assert!((e.ln_z.ln() - 4f64.ln()).abs() < 0.2, "{}", e.ln_z.ln());
    }

    #[test]
    fn median_of_means_even_groups() {
        let hits = [true, true, false, false, true, false, true, true];
        let (m, _) = median_of_means(&hits, 4);
        assert_eq!(m, 0.75);
    }

    #[test]
    fn rejects_bad_input() {
        let g = Graph::from_edges(vec![], &[]).unwrap();
        assert!(estimate_log_z_mcmc(&g, 0.1, 0, &McmcOptions::default()).is_err());
        let g = Graph::from_edges(vec![1.0], &[]).unwrap();
        assert!(estimate_log_z_mcmc(&g, 0.0, 0, &McmcOptions::default()).is_err());
    }
}
