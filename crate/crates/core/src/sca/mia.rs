use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sca::sbox::leakage_bit;
use crate::sca::traces::TraceSet;

pub const DEFAULT_BINS: usize = 9;
/// Below this many traces the histogram estimates are dominated by noise.
pub const MIN_TRACES: usize = 100;

/// Per-hypothesis MI scores and the distinguisher's verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    /// `256 x m`, row-major by key hypothesis.
    pub scores: Vec<f64>,
    pub m: usize,
    pub best_key: u8,
    pub best_point: usize,
    /// `best_key == true_key`; false when the true key is unknown.
    pub success: bool,
}

impl AttackResult {
    pub fn score(&self, key: u8, point: usize) -> f64 {
        self.scores[key as usize * self.m + point]
    }
}

/// Equal-width bin index of every sample, or `None` for a constant column.
fn bin_column(column: &[f64], n_bins: usize) -> Option<Vec<u8>> {
    let (lo, hi) = column
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !(hi > lo) {
        return None;
    }
    let scale = n_bins as f64 / (hi - lo);
    Some(
        column
            .iter()
            .map(|&x| (((x - lo) * scale) as usize).min(n_bins - 1) as u8)
            .collect(),
    )
}

/// Plug-in MI `sum c_ob/n ln(c_ob n / (c_o c_b))` of a 2 x bins table.
fn plug_in_mi(counts: &[[u32; 2]], n: usize) -> f64 {
    let n = n as f64;
    let ones: u32 = counts.iter().map(|c| c[1]).sum();
    let by_bit = [n - f64::from(ones), f64::from(ones)];
    let mut mi = 0.0;
    for c in counts {
        let col = f64::from(c[0] + c[1]);
        for (o, &cnt) in c.iter().enumerate() {
            if cnt > 0 {
                let c = f64::from(cnt);
                mi += c / n * (c * n / (by_bit[o] * col)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Mutual-information analysis of the first-round S-box MSB: every key
/// hypothesis is scored at every point by the histogram MI between its
/// predicted bit and the samples; the best (key, point) pair wins, with ties
/// going to the lowest key and then the lowest point.
pub fn mia_attack(traces: &TraceSet, n_bins: usize) -> Result<AttackResult> {
    let n = traces.n_traces();
    let m = traces.m();
    if n == 0 || m == 0 {
        return Err(Error::invalid("trace set is empty"));
    }
    if n < MIN_TRACES {
        return Err(Error::invalid(format!("MIA needs at least {MIN_TRACES} traces, got {n}")));
    }
    if !(2..=255).contains(&n_bins) {
        return Err(Error::invalid(format!("bin count {n_bins} must lie in [2, 255]")));
    }
    // predicted bit of trace t under hypothesis k
    let predictions: Vec<Vec<u8>> = (0..=255u8)
        .map(|k| traces.plaintexts().iter().map(|&p| leakage_bit(p, k)).collect())
        .collect();
    let per_point: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let Some(bins) = bin_column(&traces.column(i), n_bins) else {
                return vec![0.0; 256];
            };
            let mut counts = vec![[0u32; 2]; n_bins];
            predictions
                .iter()
                .map(|pred| {
                    counts.iter_mut().for_each(|c| *c = [0, 0]);
                    for (&b, &o) in bins.iter().zip(pred) {
                        counts[b as usize][o as usize] += 1;
                    }
                    plug_in_mi(&counts, n)
                })
                .collect()
        })
        .collect();
    let mut scores = vec![0.0; 256 * m];
    let (mut best_key, mut best_point, mut best) = (0u8, 0usize, f64::NEG_INFINITY);
    for k in 0..256 {
        for (i, point) in per_point.iter().enumerate() {
            let s = point[k];
            scores[k * m + i] = s;
            if s > best {
                (best_key, best_point, best) = (k as u8, i, s);
            }
        }
    }
    Ok(AttackResult {
        scores,
        m,
        best_key,
        best_point,
        success: traces.true_key == Some(best_key),
    })
}
