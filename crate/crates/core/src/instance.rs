//! Random heterogeneous instances for budget sweeps.

use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::channel::SubchannelSet;
use crate::error::{Error, Result};
use crate::rng::{substream, Stream};

/// Distribution of the per-point signal power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PowerDistribution {
    /// `max(N(mean, sd^2), 0)`.
    TruncatedGaussian { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl PowerDistribution {
    /// Draws `m` powers. Draw `instance` of a seed is reproducible on its own.
    pub fn sample(&self, m: usize, seed: u64, instance: u64) -> Result<Vec<f64>> {
        let mut rng = substream(seed, Stream::Instance, instance);
        match *self {
            PowerDistribution::TruncatedGaussian { mean, sd } => {
                if !(sd >= 0.0) {
                    return Err(Error::invalid("truncated Gaussian power distribution needs sd >= 0"));
                }
                let normal = Normal::new(mean, sd).map_err(|e| Error::invalid(format!("power distribution: {e}")))?;
                Ok((0..m).map(|_| normal.sample(&mut rng).max(0.0)).collect())
            }
            PowerDistribution::Uniform { lo, hi } => {
                if !(lo >= 0.0) {
                    return Err(Error::invalid("uniform power distribution needs lo >= 0"));
                }
                let uniform = Uniform::new_inclusive(lo, hi).map_err(|e| Error::invalid(format!("power distribution: {e}")))?;
                Ok((0..m).map(|_| uniform.sample(&mut rng)).collect())
            }
        }
    }

    /// `m` points with powers from this distribution and physical noise `z`.
    pub fn instance(&self, m: usize, z: f64, seed: u64, instance: u64) -> Result<SubchannelSet> {
        SubchannelSet::with_constant_noise(self.sample(m, seed, instance)?, z)
    }
}
