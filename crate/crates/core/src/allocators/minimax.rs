use crate::allocators::SolveOptions;
use crate::channel::{NoiseAllocation, Objective, SubchannelSet};
use crate::error::{Error, Result};

/// Noise demand `T(kappa) = sum max(P/kappa - Z, 0)` of a common SNR
/// ceiling `kappa`.
fn demand(power: &[f64], noise: &[f64], kappa: f64) -> f64 {
    power.iter().zip(noise).map(|(&p, &z)| (p / kappa - z).max(0.0)).sum()
}

/// Minimizes the largest per-channel leakage by pushing every loud channel
/// down to a common SNR `kappa` (the dual of the result). The solution does
/// not depend on the input distribution, so no model is taken.
pub fn allocate_minimax(channels: &SubchannelSet, opts: &SolveOptions) -> Result<NoiseAllocation> {
    opts.validate()?;
    let (power, noise) = (channels.power(), channels.noise());
    let kappa_top = power.iter().zip(noise).map(|(&p, &z)| p / z).fold(0.0, f64::max);
    let budget = opts.budget;
    if budget == 0.0 {
        return NoiseAllocation::new(vec![0.0; power.len()], kappa_top, Objective::Max);
    }
    if kappa_top == 0.0 {
        return Err(Error::invalid("minimax allocation needs at least one channel with P > 0"));
    }

    // T(kappa_top) = 0; the lower end is found by halving
    let mut hi = kappa_top;
    let mut lo = 0.5 * kappa_top;
    while demand(power, noise, lo) < budget {
        hi = lo;
        lo *= 0.5;
        if lo == 0.0 {
            return Err(Error::BisectionFailed {
                lo,
                hi,
                residual: budget,
            });
        }
    }
    for _ in 0..opts.max_iter {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if demand(power, noise, mid) >= budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }

    // On the active set T is exactly `sum P_A / kappa - sum Z_A`, so the level
    // can be solved in closed form once the set is known.
    let mut kappa = lo;
    for _ in 0..power.len() + 1 {
        let (mut p_sum, mut z_sum) = (0.0, 0.0);
        for (&p, &z) in power.iter().zip(noise) {
            if p / z > kappa {
                p_sum += p;
                z_sum += z;
            }
        }
        let next = p_sum / (budget + z_sum);
        if next == kappa {
            break;
        }
        kappa = next;
    }
    let alloc: Vec<f64> = power.iter().zip(noise).map(|(&p, &z)| (p / kappa - z).max(0.0)).collect();
    let spent: f64 = alloc.iter().sum();
    if (spent - budget).abs() > opts.dual_tol * budget.max(1.0) {
        return Err(Error::BisectionFailed {
            lo,
            hi,
            residual: spent - budget,
        });
    }
    NoiseAllocation::new(alloc, kappa, Objective::Max)
}
