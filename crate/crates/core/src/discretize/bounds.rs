use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ball_volume, ModelSpec};

use super::points::{feasible_cells_per_axis, snap_to_integer};

fn lambda_min_finite(model: &ModelSpec) -> Result<f64> {
    let lmin = model.interaction().lambda_min();
    if lmin.is_finite() {
        Ok(lmin)
    } else {
        Err(Error::Unconstrained)
    }
}

/// `√d · (c q max{λ, λ²} vol(V) / ε)^{1/d} · max{1, 4/Λ_min}`.
fn resolution_formula(model: &ModelSpec, constant: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid("epsilon", format!("must lie in (0, 1], got {eps}")));
    }
    let lmin = lambda_min_finite(model)?;
    Ok(resolution_formula_unchecked(model, constant, eps, lmin))
}

fn resolution_formula_unchecked(model: &ModelSpec, constant: f64, eps: f64, lmin: f64) -> f64 {
    let d = model.dimension() as f64;
    let lam = model.fugacities().lambda_max();
    let inner = constant * model.q() as f64 * lam.max(lam * lam) * model.volume() / eps;
    d.sqrt() * inner.powf(1.0 / d) * (4.0 / lmin).max(1.0)
}

/// Resolution that makes the canonical discretization an `ε_D`-approximation:
/// the smallest feasible `ρ` not below the closed-form threshold.
pub fn resolution_for_error(model: &ModelSpec, eps_d: f64) -> Result<f64> {
    let rho = resolution_formula(model, 48.0, eps_d)?;
    Ok(feasible_cells_per_axis(model.region().side_length(), rho) as f64 / model.region().side_length())
}

/// Resolution used by the continuous sampler for a total variation budget `ε_S`.
/// Unconstrained models are allowed (the `4/Λ_min` factor drops out).
pub fn sampling_resolution(model: &ModelSpec, eps_s: f64) -> Result<f64> {
    if !(eps_s > 0.0 && eps_s <= 1.0) {
        return Err(Error::invalid("eps_s", format!("must lie in (0, 1], got {eps_s}")));
    }
    let rho = resolution_formula_unchecked(model, 32.0, eps_s, model.interaction().lambda_min());
    Ok(feasible_cells_per_axis(model.region().side_length(), rho) as f64 / model.region().side_length())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolutionChoice {
    pub resolution: f64,
    pub cells_per_axis: u64,
    /// Error factor at this resolution, when the error bound applies.
    pub error_factor: Option<f64>,
    /// The closed-form resolution, an upper bound for the adaptive one.
    pub closed_form: f64,
}

/// Smallest feasible canonical resolution whose error factor (with `δ = 0`,
/// `ε = √d/ρ`) is at most `1 - e^{-ε_D}`, which gives both
/// `Z_hc ≤ e^{ε_D} Z` and `Z_hc ≥ e^{-ε_D} Z`. Never exceeds the closed form.
pub fn resolution_for_error_adaptive(model: &ModelSpec, eps_d: f64) -> Result<ResolutionChoice> {
    let closed_form = resolution_for_error(model, eps_d)?;
    let ell = model.region().side_length();
    let d = model.dimension();
    let target = -(-eps_d).exp_m1();
    let m_max = snap_to_integer(closed_form * ell).expect("feasible") as u64;
    let factor_at = |m: u64| -> Option<f64> {
        let n = (m as f64).powi(d as i32);
        let eps = (d as f64).sqrt() * ell / m as f64;
        discretization_error_factor(model, n, 0.0, eps).ok()
    };
    let ok = |m: u64| factor_at(m).is_some_and(|f| f <= target);
    if !ok(m_max) {
        return Ok(ResolutionChoice {
            resolution: closed_form,
            cells_per_axis: m_max,
            error_factor: factor_at(m_max),
            closed_form,
        });
    }
    let (mut lo, mut hi) = (0u64, m_max);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ResolutionChoice {
        resolution: hi as f64 / ell,
        cells_per_axis: hi,
        error_factor: factor_at(hi),
        closed_form,
    })
}

/// Multiplicative error factor of the discretization bound:
/// `exp((8/n) Σ λ_i² vol²) · exp((2δ + (4ε/Λ_min)^d) Σ λ_i vol) - 1`.
pub fn discretization_error_factor(model: &ModelSpec, n: f64, delta: f64, epsilon: f64) -> Result<f64> {
    let lmin = lambda_min_finite(model)?;
    let vol = model.volume();
    let lambda = model.fugacities();
    if !(n >= 4.0 * lambda.lambda_max() * vol && n > 0.0) {
        return Err(Error::Precondition(format!(
            "error bound needs |X| ≥ 4 λ_max vol(V) = {}, got {n}",
            4.0 * lambda.lambda_max() * vol
        )));
    }
    if !(0.0..=0.5).contains(&delta) {
        return Err(Error::Precondition(format!("error bound needs δ ∈ [0, 1/2], got {delta}")));
    }
    if !(0.0..=lmin / 2.0).contains(&epsilon) {
        return Err(Error::Precondition(format!("error bound needs ε ∈ [0, Λ_min/2 = {}], got {epsilon}", lmin / 2.0)));
    }
    let sum_sq: f64 = lambda.values().iter().map(|l| l * l).sum();
    let exponent = 8.0 / n * sum_sq * vol * vol
        + (2.0 * delta + (4.0 * epsilon / lmin).powi(model.dimension() as i32)) * lambda.sum() * vol;
    Ok(exponent.exp_m1())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeBound {
    /// `bounds[i·q + j] = (1+γ) ρ^d Θ(i,j)`.
    pub bounds: Vec<f64>,
    /// Whether `ρ ≥ 2 d^{3/2} / (γ Λ_min)`.
    pub valid: bool,
    pub required_resolution: f64,
}

/// Per-type-pair degree bounds for the canonical discretization.
pub fn degree_bound(model: &ModelSpec, resolution: f64, gamma: f64) -> DegreeBound {
    let d = model.dimension();
    let theta = model.volume_exclusion_matrix();
    let scale = (1.0 + gamma) * resolution.powi(d as i32);
    let lmin = model.interaction().lambda_min();
    let required = 2.0 * (d as f64).powf(1.5) / (gamma * lmin);
    DegreeBound {
        bounds: theta.entries().iter().map(|t| scale * t).collect(),
        valid: lmin.is_finite() && resolution >= required,
        required_resolution: required,
    }
}

pub const LATTICE_MAX_DIMENSION: usize = 3;
pub const LATTICE_MAX_RADIUS: f64 = 1000.0;

/// `|{z ∈ ℤ^d : ‖z‖ < s}|` by enumeration.
pub fn lattice_points_in_ball(d: usize, s: f64) -> Result<u64> {
    if d == 0 || d > LATTICE_MAX_DIMENSION {
        return Err(Error::invalid("dimension", format!("lattice counting supports 1 ≤ d ≤ 3, got {d}")));
    }
    if !(s > 0.0 && s <= LATTICE_MAX_RADIUS) {
        return Err(Error::invalid("radius", format!("lattice counting needs 0 < s ≤ 1000, got {s}")));
    }
    let s2 = s * s;
    let r = s.ceil() as i64;
    // count points with a given squared norm prefix, one axis at a time
    fn count(axes: usize, budget: f64, r: i64) -> u64 {
        if axes == 1 {
            // integers z with z² < budget
            let mut t = budget.sqrt().floor() as i64;
            while t >= 0 && (t * t) as f64 >= budget {
                t -= 1;
            }
            while (((t + 1) * (t + 1)) as f64) < budget {
                t += 1;
            }
            return if t < 0 { 0 } else { 2 * t as u64 + 1 };
        }
        let mut total = 0;
        for z in -r..=r {
            let rest = budget - (z * z) as f64;
            if rest > 0.0 {
                total += count(axes - 1, rest, r);
            }
        }
        total
    }
    Ok(count(d, s2, r))
}

/// `(1+γ) vol(B_s)`, valid once `s ≥ 2 d^{3/2} / γ`.
pub fn lattice_bound(d: usize, s: f64, gamma: f64) -> (f64, bool) {
    ((1.0 + gamma) * ball_volume(d, s), s >= 2.0 * (d as f64).powf(1.5) / gamma)
}
