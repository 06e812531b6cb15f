use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::discretize::{build_graph, interval_dp, sampling_resolution, Allocation, CanonicalPointSet, PointSet};
use crate::error::Result;
use crate::glauber::{self, Regime, SampleOptions};
use crate::hardcore::{Graph, IntervalDp};
use crate::model::ModelSpec;
use crate::rng;

use super::{is_valid, ContinuousConfiguration};

pub const DEFAULT_MAX_RETRIES: usize = 16;

/// Places the particles of an independent set: the vertices are put in
/// uniformly random order and vertex `(y, i)` becomes a type-`i` particle at a
/// uniform point of `α^{-1}(y)`.
pub fn perturb<R: Rng + ?Sized>(
    allocation: &Allocation,
    q: usize,
    vertices: &[usize],
    rng: &mut R,
) -> Result<ContinuousConfiguration> {
    let mut order = vertices.to_vec();
    order.shuffle(rng);
    let mut config = ContinuousConfiguration::default();
    for v in order {
        config.points.push(allocation.sample_preimage(v / q, rng)?);
        config.types.push(v % q);
    }
    Ok(config)
}

/// How the discrete hard-core configuration is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscreteSampler {
    /// Exact interval recursion for one-dimensional single-type models,
    /// Glauber dynamics otherwise.
    #[default]
    Auto,
    Glauber,
    /// Exact sampling on the interval graph (d = 1, q = 1 only).
    IntervalExact,
}

#[derive(Clone, Debug)]
pub struct SamplerOptions {
    pub max_retries: usize,
    pub discrete: DiscreteSampler,
    pub glauber: SampleOptions,
    /// Overrides the resolution derived from `ε_S`; must be feasible.
    pub resolution: Option<f64>,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            max_retries: DEFAULT_MAX_RETRIES,
            discrete: DiscreteSampler::Auto,
            glauber: SampleOptions::default(),
            resolution: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuousSample {
    pub configuration: ContinuousConfiguration,
    pub valid: bool,
    /// Rejected attempts before the returned one.
    pub retries: usize,
    pub seed: u64,
    pub resolution: f64,
    /// `None` when the discrete draw was exact.
    pub regime: Option<Regime>,
}

enum Backend {
    Interval(IntervalDp),
    Glauber(Graph),
}

/// A prepared sampler; the discretization is built once and reused.
pub struct ContinuousSampler {
    model: ModelSpec,
    allocation: Allocation,
    backend: Backend,
    eps_s: f64,
    options: SamplerOptions,
    resolution: f64,
}

impl ContinuousSampler {
    pub fn new(model: &ModelSpec, eps_s: f64, options: SamplerOptions) -> Result<Self> {
        let resolution = match options.resolution {
            Some(r) => r,
            None => sampling_resolution(model, eps_s)?,
        };
        let grid = CanonicalPointSet::new(model.region().clone(), resolution)?;
        let points = PointSet::Canonical(grid.clone());
        let interval_ok = model.dimension() == 1 && model.q() == 1 && !model.interaction().is_unconstrained();
        let use_interval = match options.discrete {
            DiscreteSampler::Auto => interval_ok,
            DiscreteSampler::IntervalExact => {
                if !interval_ok {
                    return Err(crate::Error::invalid(
                        "sampler",
                        "exact interval sampling needs a constrained one-dimensional single-type model",
                    ));
                }
                true
            }
            DiscreteSampler::Glauber => false,
        };
        let backend = if use_interval {
            Backend::Interval(interval_dp(model, &points)?)
        } else {
            Backend::Glauber(build_graph(model, &points)?.to_graph())
        };
        Ok(ContinuousSampler {
            model: model.clone(),
            allocation: Allocation::canonical(grid),
            backend,
            eps_s,
            options,
            resolution,
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn num_vertices(&self) -> usize {
        match &self.backend {
            Backend::Interval(dp) => dp.len(),
            Backend::Glauber(g) => g.num_vertices(),
        }
    }

    /// One configuration; attempt `a` uses its own random stream.
    pub fn sample(&self, seed: u64) -> Result<ContinuousSample> {
        let q = self.model.q();
        let mut last = None;
        for attempt in 0..=self.options.max_retries {
            let mut r = rng::stream(seed, rng::domain::CONTINUOUS, attempt as u64);
            let (vertices, regime) = match &self.backend {
                Backend::Interval(dp) => (dp.sample(&mut r), None),
                Backend::Glauber(g) => {
                    let s = glauber::sample_indexed(
                        g,
                        self.eps_s / 2.0,
                        rng::derive(seed, attempt as u64),
                        0,
                        &self.options.glauber,
                    );
                    (s.vertices, Some(s.regime))
                }
            };
            let configuration = perturb(&self.allocation, q, &vertices, &mut r)?;
            let valid = is_valid(&self.model, &configuration);
            let sample = ContinuousSample {
                configuration,
                valid,
                retries: attempt,
                seed,
                resolution: self.resolution,
                regime,
            };
            if valid {
                return Ok(sample);
            }
            last = Some(sample);
        }
        Ok(last.expect("at least one attempt"))
    }
}

/// `ε_S`-approximate sample of the continuous Gibbs distribution, by
/// discretizing, sampling the hard-core model and perturbing. Invalid
/// configurations are redrawn up to `max_retries` times; if all fail the last
/// one is returned with `valid = false`.
pub fn sample_continuous(model: &ModelSpec, eps_s: f64, seed: u64, options: SamplerOptions) -> Result<ContinuousSample> {
    ContinuousSampler::new(model, eps_s, options)?.sample(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturb_examples() {
        let grid = CanonicalPointSet::new(crate::model::Region::new(1, 1.0).unwrap(), 10.0).unwrap();
        let alloc = Allocation::canonical(grid);
        let mut r = rng::stream(1, rng::domain::PERTURB, 0);
        assert!(perturb(&alloc, 1, &[], &mut r).unwrap().is_empty());
        for _ in 0..1000 {
            let c = perturb(&alloc, 1, &[2], &mut r).unwrap();
            assert!((0.2..0.3).contains(&c.points[0][0]), "{:?}", c.points);
        }
    }

    #[test]
    fn small_model_runs_both_backends() {
        let model = ModelSpec::hard_sphere(1, 1.0, 0.1, 0.5).unwrap();
        for discrete in [DiscreteSampler::IntervalExact, DiscreteSampler::Glauber] {
            let options = SamplerOptions { discrete, ..Default::default() };
            let s = sample_continuous(&model, 1.0, 4, options).unwrap();
            assert!(s.valid);
            assert_eq!(s.resolution, 320.0);
        }
    }

    #[test]
    fn unconstrained_model_uses_glauber() {
        let model = ModelSpec::hard_sphere(1, 1.0, 0.0, 1.0).unwrap();
        let s = sample_continuous(&model, 1.0, 5, SamplerOptions::default()).unwrap();
        assert!(s.valid);
        assert_eq!(s.regime, Some(Regime::BelowTreeThreshold));
    }
}
