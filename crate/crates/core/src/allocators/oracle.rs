use crate::channel::{NoiseAllocation, Objective, SubchannelSet};
use crate::error::{Error, Result};
use crate::mmse::InputModel;

pub const MAX_ORACLE_CHANNELS: usize = 4;
/// Largest number of simplex grid points the oracle will visit.
pub const MAX_ORACLE_POINTS: f64 = 1e8;

struct Search<'a> {
    tables: &'a [Vec<f64>],
    objective: Objective,
    current: Vec<usize>,
    best: Vec<usize>,
    best_value: f64,
}

impl Search<'_> {
    fn visit(&mut self, depth: usize, remaining: usize, acc: f64) {
        let last = depth + 1 == self.tables.len();
        let lo = if last { remaining } else { 0 };
        for j in lo..=remaining {
            let v = self.tables[depth][j];
            let acc = match self.objective {
                Objective::Total => acc + v,
                Objective::Max => acc.max(v),
            };
            self.current[depth] = j;
            if last {
                if acc < self.best_value {
                    self.best_value = acc;
                    self.best.copy_from_slice(&self.current);
                }
            } else {
                self.visit(depth + 1, remaining - j, acc);
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exhaustive minimization of the total or maximum leakage over the budget
/// simplex, discretized so the budget splits into whole `grid_step`-sized
/// units (the step is adjusted to divide the budget exactly). Intended as a
/// reference for small instances; there is no dual, reported as 0.
pub fn oracle_solve(
    channels: &SubchannelSet,
    model: &InputModel,
    budget: f64,
    objective: Objective,
    grid_step: f64,
) -> Result<NoiseAllocation> {
    let m = channels.len();
    if m > MAX_ORACLE_CHANNELS {
        return Err(Error::invalid(format!("oracle supports at most {MAX_ORACLE_CHANNELS} channels, got {m}")));
    }
    if !(budget >= 0.0) || !budget.is_finite() || !(grid_step > 0.0) {
        return Err(Error::invalid("oracle needs budget >= 0 and grid_step > 0"));
    }
    if budget == 0.0 {
        return NoiseAllocation::new(vec![0.0; m], 0.0, objective);
    }
    let units = ((budget / grid_step).round() as usize).max(1);
    let points = binomial(units + m - 1, m - 1);
    if points > MAX_ORACLE_POINTS {
        return Err(Error::invalid(format!(
            "oracle grid has {points:e} points, more than {MAX_ORACLE_POINTS:e}"
        )));
    }
    let unit = budget / units as f64;
    let tables = channels
        .power()
        .iter()
        .zip(channels.noise())
        .map(|(&p, &z)| {
            let rhos: Vec<f64> = (0..=units).map(|j| p / (j as f64 * unit + z)).collect();
            model.mutual_info_many(&rhos)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut search = Search {
        tables: &tables,
        objective,
        current: vec![0; m],
        best: vec![0; m],
        best_value: f64::INFINITY,
    };
    search.visit(0, units, 0.0);
    let noise = search.best.iter().map(|&j| j as f64 * unit).collect();
    NoiseAllocation::new(noise, 0.0, objective)
}
