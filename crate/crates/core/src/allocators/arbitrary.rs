use rayon::prelude::*;

use crate::allocators::{fit_budget, solve_dual, SolveOptions};
use crate::channel::{NoiseAllocation, Objective, SubchannelSet};
use crate::convexity::min_margin_over;
use crate::error::{Error, Result};
use crate::mmse::InputModel;

/// Marginal leakage `P/(N+Z)^2 * mmse(P/(N+Z))`, twice `-dI/dN`.
fn marginal(model: &InputModel, power: f64, physical: f64, artificial: f64) -> Result<f64> {
    let t = artificial + physical;
    let rho = power / t;
    Ok(power / (t * t) * model.mmse(rho)?)
}

/// Stationarity residual `P/(N+Z)^2 * mmse(P/(N+Z)) - nu` of one channel.
pub fn arbitrary_kkt_residual(model: &InputModel, power: f64, physical: f64, artificial: f64, nu: f64) -> Result<f64> {
    Ok(marginal(model, power, physical, artificial)? - nu)
}

/// Per-channel noise at dual level `nu`: zero when `nu` reaches the
/// threshold `marginal(0)`, otherwise the root of `marginal(N) = nu`.
fn channel_noise(model: &InputModel, power: f64, physical: f64, nu: f64, opts: &SolveOptions) -> Result<f64> {
    if power == 0.0 || nu >= marginal(model, power, physical, 0.0)? {
        return Ok(0.0);
    }
    let mut hi = physical.max(power);
    let mut doublings = 0;
    while marginal(model, power, physical, hi)? > nu {
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 {
            return Err(Error::BisectionFailed {
                lo: 0.0,
                hi,
                residual: marginal(model, power, physical, hi)? - nu,
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..opts.max_iter {
        if hi - lo <= opts.inner_tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if marginal(model, power, physical, mid)? > nu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn fill(channels: &SubchannelSet, model: &InputModel, nu: f64, opts: &SolveOptions) -> Result<Vec<f64>> {
    let pairs: Vec<(f64, f64)> = channels.power().iter().copied().zip(channels.noise().iter().copied()).collect();
    pairs
        .par_iter()
        .map(|&(p, z)| channel_noise(model, p, z, nu, opts))
        .collect()
}

/// A channel whose marginal rises before it falls switches on with a jump, so
/// the demand can step over the budget. The budget is then split along the
/// segment between the two fills either side of the step.
fn gap_allocation(
    channels: &SubchannelSet,
    model: &InputModel,
    lo: f64,
    hi: f64,
    opts: &SolveOptions,
) -> Result<NoiseAllocation> {
    let (over, under) = (fill(channels, model, lo, opts)?, fill(channels, model, hi, opts)?);
    let (s_over, s_under): (f64, f64) = (over.iter().sum(), under.iter().sum());
    if !(s_over >= opts.budget && s_under <= opts.budget && s_over > s_under) {
        return Err(Error::BisectionFailed {
            lo,
            hi,
            residual: s_under - opts.budget,
        });
    }
    let theta = (opts.budget - s_under) / (s_over - s_under);
    let noise = under.iter().zip(&over).map(|(u, o)| u + theta * (o - u)).collect();
    let mut alloc = NoiseAllocation::new(noise, hi, Objective::Total)?;
    alloc.stationary_only = true;
    Ok(alloc)
}

/// Minimizes the total leakage `sum I(P/(N+Z))` for any input model by
/// bisection on the KKT dual. When the model is not certified convex over the
/// reachable SNR range the result is flagged `stationary_only`.
pub fn allocate_arbitrary_total(
    channels: &SubchannelSet,
    model: &InputModel,
    opts: &SolveOptions,
) -> Result<NoiseAllocation> {
    opts.validate()?;
    let (power, noise) = (channels.power(), channels.noise());
    let mut nu_top = 0.0_f64;
    let (mut rho_lo, mut rho_hi) = (f64::INFINITY, 0.0_f64);
    for (&p, &z) in power.iter().zip(noise) {
        if p > 0.0 {
            nu_top = nu_top.max(marginal(model, p, z, 0.0)?);
            rho_lo = rho_lo.min(p / (z + opts.budget));
            rho_hi = rho_hi.max(p / z);
        }
    }
    let stationary_only = match rho_hi > 0.0 {
        true => min_margin_over(model, rho_lo, rho_hi)?.is_some_and(|m| m < 0.0),
        false => false,
    };
    let mut alloc = if opts.budget == 0.0 || nu_top == 0.0 {
        NoiseAllocation::new(vec![0.0; channels.len()], nu_top, Objective::Total)?
    } else {
        let demand = |nu| Ok(fill(channels, model, nu, opts)?.iter().sum());
        match solve_dual(demand, nu_top, opts) {
            Ok(nu) => NoiseAllocation::new(fit_budget(fill(channels, model, nu, opts)?, opts.budget), nu, Objective::Total)?,
            Err(Error::BisectionFailed { lo, hi, .. }) if hi - lo <= 1e-12 * hi => {
                gap_allocation(channels, model, lo, hi, opts)?
            }
            Err(e) => return Err(e),
        }
    };
    alloc.stationary_only |= stationary_only;
    Ok(alloc)
}
