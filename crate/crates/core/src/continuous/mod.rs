//! Continuous configurations, reference partition functions and the
//! perturbation sampler.

mod oracle;
mod sampler;
mod tonks;

pub use oracle::{oracle_log_z_mc, OracleEstimate, ORACLE_MAX_ORDER, ORACLE_MAX_SAMPLES};
pub use sampler::{
    perturb, sample_continuous, ContinuousSample, ContinuousSampler, DiscreteSampler, SamplerOptions,
    DEFAULT_MAX_RETRIES,
};
pub use tonks::{tonks_log_z, tonks_mean_count};

use serde::Serialize;

use crate::model::ModelSpec;

/// Particle positions with their types.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ContinuousConfiguration {
    pub points: Vec<Vec<f64>>,
    pub types: Vec<usize>,
}

impl ContinuousConfiguration {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count_of_type(&self, ty: usize) -> usize {
        self.types.iter().filter(|&&t| t == ty).count()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Whether every pair keeps its minimum distance `Λ(τ(i), τ(j))`.
pub fn is_valid(model: &ModelSpec, config: &ContinuousConfiguration) -> bool {
    let lambda = model.interaction();
    let n = config.len();
    (0..n).all(|i| {
        (i + 1..n).all(|j| {
            let t = lambda.get(config.types[i], config.types[j]);
            squared_distance(&config.points[i], &config.points[j]) >= t * t
        })
    })
}
