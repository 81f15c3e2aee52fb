//! Scoring of allocations: per-point leakage, aggregates, budget comparisons
//! between solvers and budget sweeps.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::allocators::{allocate_minimax, allocate_uniform, SolveOptions, Solver};
use crate::channel::{snr, LeakageReport, NoiseAllocation, Objective, SubchannelSet};
use crate::error::{Error, Result};
use crate::mmse::InputModel;

/// Alphabet of one key byte, used for the Fano bound by default.
pub const DEFAULT_ALPHABET: usize = 256;

/// Leakage of `alloc` on `channels` under `model`.
pub fn evaluate(channels: &SubchannelSet, alloc: &NoiseAllocation, model: &InputModel) -> Result<LeakageReport> {
    evaluate_noise(channels, alloc.noise(), model, DEFAULT_ALPHABET)
}

pub fn evaluate_with_alphabet(
    channels: &SubchannelSet,
    alloc: &NoiseAllocation,
    model: &InputModel,
    alphabet_size: usize,
) -> Result<LeakageReport> {
    evaluate_noise(channels, alloc.noise(), model, alphabet_size)
}

/// Leakage for a raw noise vector.
pub fn evaluate_noise(
    channels: &SubchannelSet,
    noise: &[f64],
    model: &InputModel,
    alphabet_size: usize,
) -> Result<LeakageReport> {
    if noise.len() != channels.len() {
        return Err(Error::DimensionMismatch {
            what: "allocation length",
            expected: channels.len(),
            found: noise.len(),
        });
    }
    let rhos = channels
        .power()
        .iter()
        .zip(channels.noise())
        .zip(noise)
        .map(|((&p, &z), &n)| snr(p, z, n))
        .collect::<Result<Vec<_>>>()?;
    LeakageReport::from_per_channel(model.mutual_info_many(&rhos)?, alphabet_size)
}

fn objective_value(report: &LeakageReport, objective: Objective) -> f64 {
    match objective {
        Objective::Total => report.total_mi,
        Objective::Max => report.max_mi,
    }
}

/// Smallest budget (relative tolerance 1e-6) at which `solver` brings the
/// objective down to `target`.
pub fn budget_for_target(
    channels: &SubchannelSet,
    model: &InputModel,
    objective: Objective,
    target: f64,
    solver: Solver,
) -> Result<f64> {
    let value = |budget: f64| -> Result<f64> {
        let alloc = solver.solve(channels, model, &SolveOptions::new(budget)?)?;
        Ok(objective_value(&evaluate(channels, &alloc, model)?, objective))
    };
    if value(0.0)? <= target {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = channels.noise().iter().sum::<f64>().max(1e-12);
    let mut doublings = 0;
    while value(hi)? > target {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 || !hi.is_finite() {
            return Err(Error::TargetUnreachable { cap: hi });
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if value(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Budgets two solvers need to cut the objective to `(1 - reduction)` of its
/// noiseless value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Savings {
    pub budget_a: f64,
    pub budget_b: f64,
}

impl Savings {
    /// `(budget_b - budget_a) / budget_b`: the fraction of noise that solver A
    /// saves relative to solver B.
    pub fn fraction(&self) -> f64 {
        (self.budget_b - self.budget_a) / self.budget_b
    }
}

pub fn noise_savings(
    channels: &SubchannelSet,
    model: &InputModel,
    objective: Objective,
    reduction: f64,
    solver_a: Solver,
    solver_b: Solver,
) -> Result<Savings> {
    if !(reduction > 0.0 && reduction < 1.0) {
        return Err(Error::invalid(format!("reduction target {reduction} must lie in (0, 1)")));
    }
    let base = evaluate_noise(channels, &vec![0.0; channels.len()], model, DEFAULT_ALPHABET)?;
    let target = (1.0 - reduction) * objective_value(&base, objective);
    Ok(Savings {
        budget_a: budget_for_target(channels, model, objective, target, solver_a)?,
        budget_b: budget_for_target(channels, model, objective, target, solver_b)?,
    })
}

/// One budget of a sweep. The optimal total comes from the configured total
/// solver, the optimal max from the minimax solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub budget: f64,
    pub total_mi_uniform: f64,
    pub total_mi_opt: f64,
    pub max_mi_uniform: f64,
    pub max_mi_opt: f64,
    /// Fano bound from the optimal total.
    pub fano_pe: f64,
    pub avg_mi_uniform: f64,
    pub avg_mi_opt: f64,
}

pub fn sweep(channels: &SubchannelSet, model: &InputModel, budgets: &[f64], total_solver: Solver) -> Result<Vec<SweepRow>> {
    if budgets.is_empty() {
        return Err(Error::invalid("budget grid is empty"));
    }
    budgets
        .par_iter()
        .map(|&budget| {
            let opts = SolveOptions::new(budget)?;
            let uniform = evaluate(channels, &allocate_uniform(channels, budget)?, model)?;
            let total = evaluate(channels, &total_solver.solve(channels, model, &opts)?, model)?;
            let minimax = evaluate(channels, &allocate_minimax(channels, &opts)?, model)?;
            Ok(SweepRow {
                budget,
                total_mi_uniform: uniform.total_mi,
                total_mi_opt: total.total_mi,
                max_mi_uniform: uniform.max_mi,
                max_mi_opt: minimax.max_mi,
                fano_pe: total.fano_pe_lower,
                avg_mi_uniform: uniform.average_mi(),
                avg_mi_opt: total.average_mi(),
            })
        })
        .collect()
}

pub const SWEEP_HEADER: &str =
    "N0,total_mi_uniform,total_mi_opt,max_mi_uniform,max_mi_opt,fano_pe,avg_mi_uniform,avg_mi_opt";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.budget,
            r.total_mi_uniform,
            r.total_mi_opt,
            r.max_mi_uniform,
            r.max_mi_opt,
            r.fano_pe,
            r.avg_mi_uniform,
            r.avg_mi_opt
        );
    }
    out
}
