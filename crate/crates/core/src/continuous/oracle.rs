use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::rng;

pub const ORACLE_MAX_ORDER: usize = 20;
pub const ORACLE_MAX_SAMPLES: usize = 10_000_000;
const CHUNK: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub ln_z: f64,
    /// Standard error of `ln_z` from the Monte Carlo terms (delta method).
    pub std_error: f64,
    /// Largest particle number included.
    pub truncation: usize,
    pub samples_per_term: usize,
    /// Upper bound on `ln Z - ln Z_K` from the omitted terms.
    pub tail_bound: f64,
}

impl OracleEstimate {
    /// Whether `reference` is within `sigmas` standard errors plus the tail bound.
    pub fn agrees_with(&self, reference: f64, sigmas: f64) -> bool {
        let diff = reference - self.ln_z;
        let slack = sigmas * self.std_error;
        diff >= -slack - 1e-12 && diff <= slack + self.tail_bound + 1e-12
    }
}

/// Smallest `K` with `Pr[Poisson(s) > K] ≤ tail`, and that probability.
fn poisson_truncation(s: f64, tail: f64) -> (usize, f64) {
    if s == 0.0 {
        return (0, 0.0);
    }
    let mut k = 0usize;
    let mut ln_pmf = -s;
    let mut cdf = ln_pmf.exp();
    while 1.0 - cdf > tail && k <= 10 * ORACLE_MAX_ORDER {
        k += 1;
        ln_pmf += s.ln() - (k as f64).ln();
        cdf += ln_pmf.exp();
    }
    (k, (1.0 - cdf).max(0.0))
}

/// All vectors of `q` non-negative integers summing to `k`.
fn compositions(k: usize, q: usize) -> Vec<Vec<usize>> {
    if q == 1 {
        return vec![vec![k]];
    }
    (0..=k)
        .rev()
        .flat_map(|first| {
            compositions(k - first, q - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Monte Carlo estimate of `ln Z(V, Λ, λ)` from the truncated series
/// `Σ_k (vol^k / k!) Σ_τ Π λ(τ(i)) Pr[uniform k-tuple is valid under τ]`.
///
/// Type assignments are grouped by their count vector, whose multinomial
/// multiplicity cancels the `k!`.
pub fn oracle_log_z_mc(model: &ModelSpec, tol: f64, seed: u64) -> Result<OracleEstimate> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::invalid("tol", format!("must lie in (0, 1), got {tol}")));
    }
    let vol = model.volume();
    let lambda = model.fugacities().values();
    let s = model.fugacities().sum() * vol;
    let (truncation, tail_probability) = poisson_truncation(s, tol / 2.0);
    if truncation > ORACLE_MAX_ORDER {
        return Err(Error::OracleTooLarge { required: truncation, cap: ORACLE_MAX_ORDER });
    }
    let samples = ((4.0 / tol).powi(2).ceil() as usize).min(ORACLE_MAX_SAMPLES);
    let q = model.q();
    let d = model.dimension();
    let ell = model.region().side_length();
    let interaction = model.interaction();

    let mut terms = Vec::new();
    for k in 0..=truncation {
        for counts in compositions(k, q) {
            let mut ln_coef = k as f64 * vol.ln();
            let mut zero = false;
            for (i, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                if lambda[i] == 0.0 {
                    zero = true;
                }
                ln_coef += c as f64 * lambda[i].ln() - ln_factorial(c);
            }
            if !zero {
                terms.push((counts, ln_coef));
            }
        }
    }

    let estimates: Vec<(f64, f64)> = terms
        .par_iter()
        .enumerate()
        .map(|(index, (counts, _))| {
            let types: Vec<usize> = counts.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat(i).take(c)).collect();
            let k = types.len();
            let constrained = (0..k).any(|a| (a + 1..k).any(|b| interaction.get(types[a], types[b]) > 0.0));
            if !constrained {
                return (1.0, 0.0);
            }
            let chunks = samples.div_ceil(CHUNK);
            let valid: usize = (0..chunks)
                .into_par_iter()
                .map(|chunk| {
                    let mut r = rng::stream(seed, rng::domain::ORACLE, ((index as u64) << 32) | chunk as u64);
                    let size = CHUNK.min(samples - chunk * CHUNK);
                    let mut pts = vec![0.0; k * d];
                    (0..size)
                        .filter(|_| {
                            for c in pts.iter_mut() {
                                *c = r.random::<f64>() * ell;
                            }
                            tuple_is_valid(&pts, &types, d, |i, j| interaction.get(i, j))
                        })
                        .count()
                })
                .sum();
            let p = valid as f64 / samples as f64;
            (p, p * (1.0 - p) / samples as f64)
        })
        .collect();

    // combine relative to the largest coefficient to stay in range
    let shift = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut var = 0.0;
    for ((_, ln_coef), (p, v)) in terms.iter().zip(&estimates) {
        let c = (ln_coef - shift).exp();
        z += c * p;
        var += c * c * v;
    }
    let ln_z = z.ln() + shift;
    let tail_abs = tail_probability * s.exp();
    Ok(OracleEstimate {
        ln_z,
        std_error: var.sqrt() / z,
        truncation,
        samples_per_term: samples,
        tail_bound: (tail_abs / ln_z.exp()).ln_1p(),
    })
}

fn ln_factorial(c: usize) -> f64 {
    (2..=c).map(|i| (i as f64).ln()).sum()
}

fn tuple_is_valid(pts: &[f64], types: &[usize], d: usize, lambda: impl Fn(usize, usize) -> f64) -> bool {
    let k = types.len();
    for a in 0..k {
        for b in a + 1..k {
            let t = lambda(types[a], types[b]);
            if t == 0.0 {
                continue;
            }
            let dist2: f64 = (0..d).map(|x| (pts[a * d + x] - pts[b * d + x]).powi(2)).sum();
            if dist2 < t * t {
                return false;
            }
        }
    }
    true
}
