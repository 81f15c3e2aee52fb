//! Artificial-noise allocators: the uniform baseline, the dual water-filling
//! solvers for total and maximum leakage, the KKT solver for arbitrary
//! inputs, and a brute-force grid oracle for small instances.

mod arbitrary;
mod minimax;
mod oracle;
mod total;

use std::fmt::Write as _;

pub use arbitrary::{allocate_arbitrary_total, arbitrary_kkt_residual};
pub use minimax::allocate_minimax;
pub use oracle::{oracle_solve, MAX_ORACLE_CHANNELS, MAX_ORACLE_POINTS};
pub use total::{allocate_gaussian_total, allocate_sibson_total, gaussian_kkt_residual};

use crate::channel::{snr, NoiseAllocation, Objective, SubchannelSet};
use crate::error::{Error, Result};
use crate::mmse::InputModel;

/// Budget and numerical tolerances shared by the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub budget: f64,
    /// Relative tolerance on the spent budget, scaled by `max(1, budget)`.
    pub dual_tol: f64,
    pub max_iter: usize,
    /// Relative tolerance of the per-channel root finds.
    pub inner_tol: f64,
}

impl SolveOptions {
    pub fn new(budget: f64) -> Result<Self> {
        let opts = Self {
            budget,
            dual_tol: 1e-10,
            max_iter: 200,
            inner_tol: 1e-12,
        };
        opts.validate()?;
        Ok(opts)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget >= 0.0) || !self.budget.is_finite() {
            return Err(Error::invalid(format!("budget {} must be finite and >= 0", self.budget)));
        }
        if !(self.dual_tol > 0.0) || !(self.inner_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::invalid("tolerances and the iteration cap must be positive"));
        }
        Ok(())
    }

    fn budget_slack(&self) -> f64 {
        self.dual_tol * self.budget.max(1.0)
    }
}

/// Spreads the budget evenly. There is no dual variable; it is reported as 0.
pub fn allocate_uniform(channels: &SubchannelSet, budget: f64) -> Result<NoiseAllocation> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::invalid(format!("budget {budget} must be finite and >= 0")));
    }
    let share = budget / channels.len() as f64;
    NoiseAllocation::new(vec![share; channels.len()], 0.0, Objective::Total)
}

/// A named allocator, as selected from configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solver {
    Uniform,
    GaussianTotal,
    Sibson { alpha: f64 },
    Minimax,
    Arbitrary,
}

impl Solver {
    pub const NAMES: [&'static str; 5] = ["uniform", "gaussian_total", "sibson", "minimax", "arbitrary"];

    /// Parses a solver name. `Some(Err(..))` means the name is known but its
    /// parameters are missing or invalid; `None` means the name is unknown.
    pub fn from_name(name: &str, alpha: Option<f64>) -> Option<Result<Self>> {
        let solver = match name {
            "uniform" => Solver::Uniform,
            "gaussian_total" => Solver::GaussianTotal,
            "minimax" => Solver::Minimax,
            "arbitrary" => Solver::Arbitrary,
            "sibson" => {
                return Some(match alpha {
                    Some(a) if a > 0.0 && a.is_finite() => Ok(Solver::Sibson { alpha: a }),
                    Some(a) => Err(Error::invalid(format!("sibson order alpha = {a} must be > 0"))),
                    None => Err(Error::invalid("solver sibson requires the field `alpha`")),
                })
            }
            _ => return None,
        };
        Some(Ok(solver))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Solver::Uniform => "uniform",
            Solver::GaussianTotal => "gaussian_total",
            Solver::Sibson { .. } => "sibson",
            Solver::Minimax => "minimax",
            Solver::Arbitrary => "arbitrary",
        }
    }

    /// Runs the solver. Only the arbitrary-input solver reads `model`.
    pub fn solve(&self, channels: &SubchannelSet, model: &InputModel, opts: &SolveOptions) -> Result<NoiseAllocation> {
        match *self {
            Solver::Uniform => allocate_uniform(channels, opts.budget),
            Solver::GaussianTotal => allocate_gaussian_total(channels, opts),
            Solver::Sibson { alpha } => allocate_sibson_total(channels, alpha, opts),
            Solver::Minimax => allocate_minimax(channels, opts),
            Solver::Arbitrary => allocate_arbitrary_total(channels, model, opts),
        }
    }
}

/// Allocation table `index,P,Z,N,snr_before,snr_after,mi_after` with a
/// trailing `# dual=..` line.
pub fn allocation_csv(channels: &SubchannelSet, alloc: &NoiseAllocation, model: &InputModel) -> Result<String> {
    if alloc.len() != channels.len() {
        return Err(Error::DimensionMismatch {
            what: "allocation length",
            expected: channels.len(),
            found: alloc.len(),
        });
    }
    let mut out = String::from("index,P,Z,N,snr_before,snr_after,mi_after\n");
    let rows = channels.power().iter().zip(channels.noise()).zip(alloc.noise());
    for (i, ((&p, &z), &n)) in rows.enumerate() {
        let after = snr(p, z, n)?;
        let mi = model.mutual_info(after)?;
        let _ = writeln!(out, "{i},{p},{z},{n},{},{after},{mi}", snr(p, z, 0.0)?);
    }
    let _ = writeln!(
        out,
        "# dual={} objective={} stationary_only={}",
        alloc.dual,
        alloc.objective.as_str(),
        alloc.stationary_only
    );
    Ok(out)
}

/// Scales a dual fill down onto the budget when bisection stopped on the
/// overspent side of its tolerance.
pub(crate) fn fit_budget(mut noise: Vec<f64>, budget: f64) -> Vec<f64> {
    let used: f64 = noise.iter().sum();
    if used > budget {
        let scale = budget / used;
        noise.iter_mut().for_each(|n| *n *= scale);
    }
    noise
}

/// Finds the dual level `nu` in `(0, nu_top]` at which the nonincreasing
/// `demand(nu)` meets the budget. The lower end is found by halving.
pub(crate) fn solve_dual<D>(demand: D, nu_top: f64, opts: &SolveOptions) -> Result<f64>
where
    D: Fn(f64) -> Result<f64>,
{
    let target = opts.budget;
    let slack = opts.budget_slack();
    let (mut hi, mut d_hi) = (nu_top, demand(nu_top)?);
    if (d_hi - target).abs() <= slack {
        return Ok(hi);
    }
    let (mut lo, mut d_lo) = (0.5 * nu_top, 0.0);
    for _ in 0..4096 {
        d_lo = demand(lo)?;
        if d_lo >= target {
            break;
        }
        if d_lo < d_hi - slack {
            return Err(nonmonotone(lo, hi, d_lo, d_hi));
        }
        hi = lo;
        d_hi = d_lo;
        lo *= 0.5;
    }
    if !(d_lo >= target) {
        return Err(Error::BisectionFailed {
            lo,
            hi,
            residual: d_lo - target,
        });
    }
    for _ in 0..opts.max_iter {
        if (d_lo - target).abs() <= slack {
            return Ok(lo);
        }
        if (d_hi - target).abs() <= slack {
            return Ok(hi);
        }
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        let d_mid = demand(mid)?;
        if d_mid > d_lo + slack || d_mid < d_hi - slack {
            return Err(nonmonotone(lo, hi, d_lo, d_hi));
        }
        if d_mid >= target {
            lo = mid;
            d_lo = d_mid;
        } else {
            hi = mid;
            d_hi = d_mid;
        }
    }
    let residual = if (d_lo - target).abs() < (d_hi - target).abs() {
        d_lo - target
    } else {
        d_hi - target
    };
    Err(Error::BisectionFailed { lo, hi, residual })
}

fn nonmonotone(lo: f64, hi: f64, d_lo: f64, d_hi: f64) -> Error {
    Error::NonConvex(format!(
        "noise demand is not monotone in the dual: demand({lo:e}) = {d_lo:e}, demand({hi:e}) = {d_hi:e}"
    ))
}
