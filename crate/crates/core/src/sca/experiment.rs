use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocators::{SolveOptions, Solver};
use crate::channel::{NoiseAllocation, SubchannelSet};
use crate::error::{Error, Result};
use crate::instance::PowerDistribution;
use crate::mmse::InputModel;
use crate::rng::{derive_seed, substream, Stream};
use crate::sca::mia::{mia_attack, DEFAULT_BINS};
use crate::sca::traces::{generate_traces, inject_noise};

/// Synthetic attack scenario: a few leaking points with power `leak_power`
/// among `m` points of background activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    pub m: usize,
    pub n_traces: usize,
    pub leak_points: Vec<usize>,
    pub leak_power: f64,
    pub background: PowerDistribution,
    pub physical_noise: f64,
    pub n_bins: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            m: 1000,
            n_traces: 512,
            leak_points: vec![100, 300, 500, 700, 900],
            leak_power: 0.04,
            background: PowerDistribution::Uniform { lo: 0.005, hi: 0.015 },
            physical_noise: 0.001,
            n_bins: DEFAULT_BINS,
        }
    }
}

impl AttackConfig {
    /// Point powers and physical noise. Background powers are drawn from the
    /// instance stream of `seed`.
    pub fn channels(&self, seed: u64) -> Result<SubchannelSet> {
        if self.leak_points.is_empty() {
            return Err(Error::invalid("attack needs at least one leak point"));
        }
        let mut power = self.background.sample(self.m, seed, 0)?;
        for &i in &self.leak_points {
            let slot = power
                .get_mut(i)
                .ok_or_else(|| Error::invalid(format!("leak point {i} outside [0, {})", self.m)))?;
            *slot = self.leak_power;
        }
        SubchannelSet::with_constant_noise(power, self.physical_noise)
    }
}

/// Outcome of repeated attacks, one per trial seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessRate {
    pub outcomes: Vec<bool>,
}

impl SuccessRate {
    pub fn successes(&self) -> usize {
        self.outcomes.iter().filter(|&&s| s).count()
    }

    pub fn rate(&self) -> f64 {
        self.successes() as f64 / self.outcomes.len() as f64
    }

    /// Standard error of the rate over the trials.
    pub fn std_error(&self) -> f64 {
        let n = self.outcomes.len() as f64;
        let p = self.rate();
        (p * (1.0 - p) / n).sqrt()
    }
}

/// Runs `n_seeds` independent attacks against traces protected by `alloc`.
/// Trial `s` draws its key, plaintexts and noise from `derive_seed(seed, s)`.
pub fn success_rate_with(
    config: &AttackConfig,
    channels: &SubchannelSet,
    alloc: &NoiseAllocation,
    n_seeds: usize,
    seed: u64,
) -> Result<SuccessRate> {
    if n_seeds == 0 {
        return Err(Error::invalid("at least one seed is required"));
    }
    let outcomes = (0..n_seeds as u64)
        .into_par_iter()
        .map(|s| {
            let trial = derive_seed(seed, s);
            let key: u8 = substream(trial, Stream::Key, 0).random();
            let traces = generate_traces(channels, &config.leak_points, key, config.n_traces, trial)?;
            let traces = inject_noise(&traces, alloc, trial)?;
            Ok(mia_attack(&traces, config.n_bins)?.success)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuccessRate { outcomes })
}

/// Key-recovery rate when `solver` spends `budget` on the scenario. The
/// arbitrary-input solver is run with the Gaussian model.
pub fn success_rate(config: &AttackConfig, solver: Solver, budget: f64, n_seeds: usize, seed: u64) -> Result<SuccessRate> {
    let channels = config.channels(seed)?;
    let alloc = solver.solve(&channels, &InputModel::Gaussian, &SolveOptions::new(budget)?)?;
    success_rate_with(config, &channels, &alloc, n_seeds, seed)
}
