//! Tightness and concentration experiments for random discretizations.

use rayon::prelude::*;
use serde::Serialize;

use crate::continuous::{oracle_log_z_mc, tonks_log_z};
use crate::discretize::{
    build_graph, log_z_1d, partition_allocation_from_random, snap_to_integer, ExplicitPointSet, HypercubePartitioning,
    PointSet,
};
use crate::error::{Error, Result};
use crate::estimate::estimate_log_z_weitz;
use crate::model::{ball_volume, ModelSpec};
use crate::rng;
use crate::stats;

fn ceil_snapped(x: f64) -> u64 {
    snap_to_integer(x).unwrap_or_else(|| x.ceil()) as u64
}

/// Number of cells `⌈√d ℓ / ε⌉^d` of the hypercube partitioning with diameter `ε`.
pub fn hypercube_partitioning_size(d: usize, side_length: f64, epsilon: f64) -> Result<u64> {
    let region = crate::model::Region::new(d, side_length)?;
    Ok(HypercubePartitioning::new(region, epsilon)?.size())
}

fn unit_interval(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in (0, 1], got {x}")))
    }
}

/// Points needed so that a random set has a `δ₂`-`ε`-allocation with
/// probability `1 - p`: `⌈48 δ₂^{-2} γ₁^{-1} m ln(2m/p)⌉`.
pub fn required_points(m: u64, gamma1: f64, delta2: f64, p: f64) -> Result<u64> {
    unit_interval("gamma1", gamma1)?;
    unit_interval("delta2", delta2)?;
    unit_interval("p", p)?;
    let m = m as f64;
    Ok(ceil_snapped(48.0 / (delta2 * delta2) / gamma1 * m * (2.0 * m / p).ln()))
}

/// `(1/(c+1)) (1 + δ(1-ε)/ε)`.
pub fn modified_markov_bound(epsilon: f64, delta: f64, c: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::invalid("delta", "must lie in [0, 1]"));
    }
    if !(c >= 0.0) {
        return Err(Error::invalid("c", "must be non-negative"));
    }
    Ok((1.0 + delta * (1.0 - epsilon) / epsilon) / (c + 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TightnessReport {
    /// `n ln(1 + λ vol / n)`
    pub lhs: f64,
    /// `λ vol - ε_D`
    pub rhs: f64,
    pub gap: bool,
}

/// For the unconstrained model, whether `(1 + λ vol/n)^n < e^{-ε_D} e^{λ vol}`,
/// i.e. whether `n` points are too few for an `ε_D`-approximation.
pub fn tightness_report(lambda: f64, vol: f64, n: u64, eps_d: f64) -> Result<TightnessReport> {
    if !(lambda * vol > 6.0) {
        return Err(Error::Precondition(format!("tightness needs λ vol > 6, got {}", lambda * vol)));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let x = lambda * vol;
    let lhs = n as f64 * (x / n as f64).ln_1p();
    let rhs = x - eps_d;
    Ok(TightnessReport { lhs, rhs, gap: lhs < rhs })
}

pub fn tightness_check(lambda: f64, vol: f64, n: u64, eps_d: f64) -> Result<bool> {
    Ok(tightness_report(lambda, vol, n, eps_d)?.gap)
}

/// `(y ln(1 + x/y), x - x²/(6y))`; the first never exceeds the second for `y ≥ x > 0`.
pub fn quadratic_gap(x: f64, y: f64) -> Result<(f64, f64)> {
    if !(x > 0.0 && y >= x) {
        return Err(Error::Precondition(format!("needs y ≥ x > 0, got x = {x}, y = {y}")));
    }
    Ok((y * (x / y).ln_1p(), x - x * x / (6.0 * y)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundParameters {
    pub epsilon: f64,
    pub delta: f64,
    pub min_points: f64,
}

fn lower_bound_constants(model: &ModelSpec) -> (f64, f64, f64) {
    let q = model.q() as f64;
    let lam = model.fugacities().lambda_max();
    let vol = model.volume();
    let reach = ball_volume(model.dimension(), model.interaction().lambda_max() + 1.0);
    // ε_D = a ε = b δ = c / n at the thresholds
    (2.0 * q * lam * lam * reach * vol, 16.0 * q * lam * vol, 64.0 * q * lam * lam * vol * vol)
}

/// Allocation quality and point count that guarantee `Z_hc ≥ (1 - ε_D) Z`.
pub fn lower_bound_parameters(model: &ModelSpec, eps_d: f64) -> Result<LowerBoundParameters> {
    unit_interval("eps_d", eps_d)?;
    let (a, b, c) = lower_bound_constants(model);
    Ok(LowerBoundParameters { epsilon: eps_d / a, delta: eps_d / b, min_points: c / eps_d })
}

/// Smallest `ε_D ≤ 1` whose parameters are met by `n` points with a
/// `δ`-`ε`-allocation, if any.
pub fn implied_lower_bound_eps(model: &ModelSpec, n: usize, delta: f64, epsilon: f64) -> Option<f64> {
    if epsilon > 0.5 {
        return None;
    }
    let (a, b, c) = lower_bound_constants(model);
    let eps_d = (a * epsilon).max(b * delta).max(c / n as f64);
    (eps_d > 0.0 && eps_d <= 1.0).then_some(eps_d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationSizing {
    pub n: u64,
    pub markov_points: u64,
    pub allocation_points: u64,
    pub cells: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub failure_probability: f64,
}

/// Number of random points after which `Z_hc` is an `ε_D`-approximation with
/// probability `1 - p`, following the hypercube partitioning argument.
pub fn concentration_sizing(model: &ModelSpec, eps_d: f64, p: f64) -> Result<ConcentrationSizing> {
    unit_interval("eps_d", eps_d)?;
    unit_interval("p", p)?;
    let q = model.q() as f64;
    let lam = model.fugacities().lambda_max();
    let vol = model.volume();
    let eps_inner = p / 2.0 * eps_d;
    let p_inner = eps_d / 4.0 * p;
    let params = lower_bound_parameters(model, eps_inner)?;
    let partitioning = HypercubePartitioning::new(model.region().clone(), params.epsilon)?;
    let cells = partitioning.size();
    let allocation_points = required_points(cells, partitioning.volume_ratio(), params.delta.min(1.0), p_inner)?;
    let markov_points = ceil_snapped(128.0 * q * lam * lam * vol * vol / (eps_d * p));
    Ok(ConcentrationSizing {
        n: markov_points.max(allocation_points),
        markov_points,
        allocation_points,
        cells,
        epsilon: params.epsilon,
        delta: params.delta,
        failure_probability: p_inner,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub n: usize,
    pub ln_z_hc: f64,
    pub ln_z_ref: f64,
    pub deviation: f64,
}

pub const MAX_TRIAL_POINTS: usize = 1_000_000;

/// Reference `ln Z` and an evaluator for `ln Z(G_X, w_X)`.
struct Evaluator<'a> {
    model: &'a ModelSpec,
    reference: f64,
    /// Extra tolerance from approximate evaluation.
    slack: f64,
}

const WEITZ_EPS: f64 = 0.05;

impl<'a> Evaluator<'a> {
    fn new(model: &'a ModelSpec, seed: u64) -> Result<Self> {
        let vol = model.volume();
        if model.interaction().is_unconstrained() {
            return Ok(Evaluator { model, reference: model.fugacities().sum() * vol, slack: 0.0 });
        }
        if model.dimension() == 1 && model.q() == 1 {
            let r = model.interaction().get(0, 0) / 2.0;
            let reference = tonks_log_z(model.region().side_length(), r, model.fugacities().get(0))?.ln();
            return Ok(Evaluator { model, reference, slack: 0.0 });
        }
        let oracle = oracle_log_z_mc(model, 0.05, rng::derive(seed, u64::MAX))?;
        Ok(Evaluator { model, reference: oracle.ln_z, slack: WEITZ_EPS + 3.0 * oracle.std_error + oracle.tail_bound })
    }

    fn log_z(&self, points: &ExplicitPointSet) -> Result<f64> {
        let n = points.len() as f64;
        let vol = self.model.volume();
        if self.model.interaction().is_unconstrained() {
            return Ok(self.model.fugacities().values().iter().map(|l| n * (l * vol / n).ln_1p()).sum());
        }
        let set = PointSet::Explicit(points.clone());
        if self.model.dimension() == 1 && self.model.q() == 1 {
            return Ok(log_z_1d(self.model, &set)?.ln());
        }
        let graph = build_graph(self.model, &set)?.to_graph();
        Ok(estimate_log_z_weitz(&graph, WEITZ_EPS)?.ln_z.ln())
    }
}

fn trial_points(model: &ModelSpec, n: usize, seed: u64, trial: usize) -> ExplicitPointSet {
    ExplicitPointSet::random(model.region().clone(), n, rng::derive(seed, trial as u64))
}

fn run_trials(model: &ModelSpec, n: usize, trials: usize, seed: u64) -> Result<(Vec<TrialRow>, f64, f64)> {
    if n == 0 || n > MAX_TRIAL_POINTS {
        return Err(Error::invalid("n", format!("must lie in [1, {MAX_TRIAL_POINTS}], got {n}")));
    }
    let eval = Evaluator::new(model, seed)?;
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ln_z_hc = eval.log_z(&trial_points(model, n, seed, t))?;
            Ok(TrialRow { trial: t, n, ln_z_hc, ln_z_ref: eval.reference, deviation: ln_z_hc - eval.reference })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, eval.reference, eval.slack))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub eps_d: f64,
    pub reference_ln_z: f64,
    pub fraction_within: Option<f64>,
    pub min_deviation: Option<f64>,
    pub median_deviation: Option<f64>,
    pub max_deviation: Option<f64>,
    pub rows: Vec<TrialRow>,
}

/// Draws `trials` random point sets of size `n` and records how often
/// `|ln Z_hc - ln Z| ≤ ε_D`.
pub fn concentration_trial(model: &ModelSpec, n: usize, trials: usize, eps_d: f64, seed: u64) -> Result<ConcentrationReport> {
    let (rows, reference, slack) = run_trials(model, n, trials, seed)?;
    let devs: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
    let abs: Vec<f64> = devs.iter().map(|d| d.abs()).collect();
    let some = |x: f64| (!rows.is_empty()).then_some(x);
    Ok(ConcentrationReport {
        n,
        eps_d,
        reference_ln_z: reference,
        fraction_within: some(abs.iter().filter(|&&d| d <= eps_d + slack).count() as f64 / rows.len() as f64),
        min_deviation: some(devs.iter().copied().fold(f64::INFINITY, f64::min)),
        median_deviation: some(stats::median(&devs)),
        max_deviation: some(devs.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationReport {
    pub n: usize,
    /// `ln` of the sample mean of `Z_hc`.
    pub mean_ln_z: f64,
    /// Standard error of the mean, relative to the mean.
    pub relative_std_error: f64,
    pub ln_z_ref: f64,
    /// `ln(mean - 2 SE)`, `-∞` if that is not positive.
    pub ci_low: f64,
    pub ci_high: f64,
    pub pass: bool,
    pub rows: Vec<TrialRow>,
}

/// Checks `E[Z_hc] ≤ Z` one-sidedly: passes iff `mean - 2 SE ≤ Z_ref`.
pub fn expectation_check(model: &ModelSpec, n: usize, trials: usize, seed: u64) -> Result<ExpectationReport> {
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one trial"));
    }
    let (rows, reference, _) = run_trials(model, n, trials, seed)?;
    let shift = rows.iter().map(|r| r.ln_z_hc).fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = rows.iter().map(|r| (r.ln_z_hc - shift).exp()).collect();
    let m = stats::mean(&scaled);
    let se = (stats::variance(&scaled) / scaled.len() as f64).sqrt();
    let low = m - 2.0 * se;
    let ci_low = if low > 0.0 { low.ln() + shift } else { f64::NEG_INFINITY };
    Ok(ExpectationReport {
        n,
        mean_ln_z: m.ln() + shift,
        relative_std_error: se / m,
        ln_z_ref: reference,
        ci_low,
        ci_high: (m + 2.0 * se).ln() + shift,
        pass: ci_low <= reference,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundTrial {
    pub trial: usize,
    pub delta: f64,
    pub epsilon: f64,
    /// `None` when the achieved allocation implies no `ε_D ≤ 1`.
    pub implied_eps_d: Option<f64>,
    pub ln_z_hc: f64,
    pub ln_z_ref: f64,
    /// `ln Z_hc ≥ ln(1 - ε_D) + ln Z`, when an `ε_D` is implied.
    pub holds: Option<bool>,
}

/// Random point sets with a fair partition allocation; each trial reports the
/// allocation it achieved and whether the implied lower bound holds.
/// Trials whose partitioning leaves a cell empty are skipped.
pub fn lower_bound_trials(
    model: &ModelSpec,
    n: usize,
    partition_epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<LowerBoundTrial>> {
    let eval = Evaluator::new(model, seed)?;
    let partitioning = HypercubePartitioning::new(model.region().clone(), partition_epsilon)?;
    let out = (0..trials)
        .into_par_iter()
        .map(|t| {
            let points = trial_points(model, n, seed, t);
            let allocation = match partition_allocation_from_random(&points, &partitioning) {
                Ok(a) => crate::discretize::Allocation::Partition(a),
                Err(Error::EmptyCell { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let (delta, epsilon) = (allocation.delta(), allocation.epsilon());
            let implied = implied_lower_bound_eps(model, n, delta, epsilon);
            let ln_z_hc = eval.log_z(&points)?;
            let holds = implied.map(|e| ln_z_hc >= (-e).ln_1p() + eval.reference - eval.slack);
            Ok(Some(LowerBoundTrial {
                trial: t,
                delta,
                epsilon,
                implied_eps_d: implied,
                ln_z_hc,
                ln_z_ref: eval.reference,
                holds,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(out.into_iter().flatten().collect())
}

/// Writes one CSV row per trial.
pub fn write_trials_csv<W: std::io::Write>(rows: &[TrialRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitioning_sizes() {
        assert_eq!(hypercube_partitioning_size(2, 1.0, 0.5).unwrap(), 9);
        assert_eq!(hypercube_partitioning_size(1, 1.0, 1.0).unwrap(), 1);
        assert_eq!(hypercube_partitioning_size(1, 10.0, 0.1).unwrap(), 100);
    }

    #[test]
    fn required_points_examples() {
        assert_eq!(required_points(16, 1.0, 0.5, 0.5).unwrap(), 12777);
        let p = 2.0 / std::f64::consts::E.powi(2);
        assert_eq!(required_points(1, 1.0, 1.0, p).unwrap(), 96);
        let a = required_points(100, 1.0, 0.5, 0.1).unwrap();
        let b = required_points(200, 1.0, 0.5, 0.1).unwrap();
        assert!(b > 2 * a);
    }

    #[test]
    fn markov_examples() {
        assert!((modified_markov_bound(0.1, 0.01, 1.0).unwrap() - 0.545).abs() < 1e-15);
        assert_eq!(modified_markov_bound(0.3, 0.0, 3.0).unwrap(), 0.25);
        assert!((modified_markov_bound(0.5, 0.2, 0.0).unwrap() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn tightness_examples() {
        let r = tightness_report(1.0, 12.0, 20, 1.0).unwrap();
        assert!(r.gap);
        assert!((r.lhs - 20.0 * 1.6f64.ln()).abs() < 1e-12);
        assert!(!tightness_check(1.0, 12.0, 1_000_000, 1.0).unwrap());
        let (lhs, rhs) = quadratic_gap(12.0, 24.0).unwrap();
        assert!((lhs - 9.7312).abs() < 1e-3 && rhs == 11.0 && lhs <= rhs);
        assert!(tightness_check(1.0, 5.0, 3, 1.0).is_err());
    }

    #[test]
    fn empty_and_unconstrained_reports() {
        let m = ModelSpec::hard_sphere(1, 10.0, 0.25, 1.0).unwrap();
        let r = concentration_trial(&m, 100, 0, 0.2, 1).unwrap();
        assert!(r.rows.is_empty() && r.fraction_within.is_none());

        let free = ModelSpec::hard_sphere(1, 10.0, 0.0, 1.0).unwrap();
        let e = expectation_check(&free, 1000, 3, 2).unwrap();
        let closed = 1000.0 * (10.0f64 / 1000.0).ln_1p();
        assert!((e.mean_ln_z - closed).abs() < 1e-12);
        assert!(closed < 10.0 && e.pass);

        let zero = ModelSpec::hard_sphere(1, 10.0, 0.25, 0.0).unwrap();
        let e = expectation_check(&zero, 50, 4, 3).unwrap();
        assert_eq!((e.mean_ln_z, e.ln_z_ref), (0.0, 0.0));
    }

    #[test]
    fn sizing_is_consistent() {
        let m = ModelSpec::hard_sphere(1, 10.0, 0.25, 1.0).unwrap();
        let s = concentration_sizing(&m, 0.2, 0.25).unwrap();
        assert_eq!(s.markov_points, 256_000);
        assert!(s.n >= s.allocation_points && s.n >= s.markov_points);
    }

    #[test]
    fn csv_columns() {
        let rows = vec![TrialRow { trial: 0, n: 10, ln_z_hc: 1.5, ln_z_ref: 1.25, deviation: 0.25 }];
        let mut buf = Vec::new();
        write_trials_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "trial,n,ln_z_hc,ln_z_ref,deviation");
    }
}
