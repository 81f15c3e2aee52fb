use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{NoiseAllocation, SubchannelSet};
use crate::error::{Error, Result};
use crate::rng::{substream, Stream};
use crate::sca::sbox::leakage_bit;

/// How a trace set was produced. Not part of the file formats.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub seed: u64,
    pub power: Vec<f64>,
    pub physical: Vec<f64>,
    /// Artificial noise variances, once injected.
    pub artificial: Option<Vec<f64>>,
}

/// `n_traces x m` samples (row-major), one targeted plaintext byte per trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    samples: Vec<f64>,
    n_traces: usize,
    m: usize,
    plaintexts: Vec<u8>,
    pub true_key: Option<u8>,
    leak_points: Vec<usize>,
    pub meta: Option<TraceMeta>,
}

impl TraceSet {
    pub fn new(
        samples: Vec<f64>,
        m: usize,
        plaintexts: Vec<u8>,
        true_key: Option<u8>,
        leak_points: Vec<usize>,
    ) -> Result<Self> {
        let n_traces = plaintexts.len();
        if samples.len() != n_traces * m {
            return Err(Error::DimensionMismatch {
                what: "trace samples",
                expected: n_traces * m,
                found: samples.len(),
            });
        }
        if let Some(&bad) = leak_points.iter().find(|&&i| i >= m) {
            return Err(Error::invalid(format!("leak point {bad} outside [0, {m})")));
        }
        Ok(Self {
            samples,
            n_traces,
            m,
            plaintexts,
            true_key,
            leak_points,
            meta: None,
        })
    }

    pub fn n_traces(&self) -> usize {
        self.n_traces
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn plaintexts(&self) -> &[u8] {
        &self.plaintexts
    }

    pub fn leak_points(&self) -> &[usize] {
        &self.leak_points
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.samples[t * self.m..(t + 1) * self.m]
    }

    /// Samples of point `i` across all traces.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.n_traces).map(|t| self.samples[t * self.m + i]).collect()
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Synthetic traces: at a leak point the sample is `+-sqrt(P)` by the
/// leakage bit, elsewhere `N(0, P)` background; `N(0, Z)` is added everywhere.
pub fn generate_traces(
    channels: &SubchannelSet,
    leak_points: &[usize],
    key: u8,
    n_traces: usize,
    seed: u64,
) -> Result<TraceSet> {
    if leak_points.is_empty() {
        return Err(Error::invalid("at least one leak point is required"));
    }
    let m = channels.len();
    let mut is_leak = vec![false; m];
    for &i in leak_points {
        if i >= m {
            return Err(Error::invalid(format!("leak point {i} outside [0, {m})")));
        }
        is_leak[i] = true;
    }
    let mut pt_rng = substream(seed, Stream::Plaintext, 0);
    let plaintexts: Vec<u8> = (0..n_traces).map(|_| pt_rng.random()).collect();
    let amplitude: Vec<f64> = channels.power().iter().map(|p| p.sqrt()).collect();
    let noise_sd: Vec<f64> = channels.noise().iter().map(|z| z.sqrt()).collect();
    let mut samples = vec![0.0; n_traces * m];
    samples
        .par_chunks_mut(m.max(1))
        .zip(plaintexts.par_iter())
        .enumerate()
        .for_each(|(t, (row, &p))| {
            let mut signal = substream(seed, Stream::Signal, t as u64);
            let mut physical = substream(seed, Stream::Physical, t as u64);
            let sign = 2.0 * f64::from(leakage_bit(p, key)) - 1.0;
            for i in 0..m {
                let x = if is_leak[i] {
                    sign * amplitude[i]
                } else {
                    amplitude[i] * gaussian(&mut signal)
                };
                row[i] = x + noise_sd[i] * gaussian(&mut physical);
            }
        });
    let mut set = TraceSet::new(samples, m, plaintexts, Some(key), leak_points.to_vec())?;
    set.meta = Some(TraceMeta {
        seed,
        power: channels.power().to_vec(),
        physical: channels.noise().to_vec(),
        artificial: None,
    });
    Ok(set)
}

/// Adds independent `N(0, N_i)` to every sample of point `i`.
pub fn inject_noise(traces: &TraceSet, alloc: &NoiseAllocation, seed: u64) -> Result<TraceSet> {
    let m = traces.m;
    if alloc.len() != m {
        return Err(Error::DimensionMismatch {
            what: "allocation length",
            expected: m,
            found: alloc.len(),
        });
    }
    let sd: Vec<f64> = alloc.noise().iter().map(|n| n.sqrt()).collect();
    let mut out = traces.clone();
    out.samples.par_chunks_mut(m.max(1)).enumerate().for_each(|(t, row)| {
        let mut rng = substream(seed, Stream::Artificial, t as u64);
        for (x, &s) in row.iter_mut().zip(&sd) {
            let w = gaussian(&mut rng);
            *x += s * w;
        }
    });
    let meta = out.meta.get_or_insert_with(|| TraceMeta {
        seed,
        power: Vec::new(),
        physical: Vec::new(),
        artificial: None,
    });
    meta.artificial = Some(alloc.noise().to_vec());
    Ok(out)
}
