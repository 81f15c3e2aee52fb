//! Configuration-driven commands behind the `sca-noise` binary.
//!
//! Each command reads a JSON config, runs deterministically from one master
//! seed and returns its CSV (or trace file) bytes plus an optional summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::allocators::{allocation_csv, SolveOptions, Solver};
use crate::channel::{NoiseAllocation, SubchannelSet};
use crate::convexity::{convexity_boundary, log_grid, scan};
use crate::error::Error;
use crate::instance::PowerDistribution;
use crate::leakage::{evaluate, sweep, sweep_csv};
use crate::mmse::{InputModel, TabulatedMmse};
use crate::rng::{derive_seed, substream, Stream};
use crate::sca::{self, generate_traces, inject_noise, io, mia_attack, success_rate_with, AttackConfig};

/// Failure of a command, each kind with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown solver `{0}` (expected one of uniform, gaussian_total, sibson, minimax, arbitrary)")]
    UnknownSolver(String),
    #[error("unknown input model `{0}` (expected gaussian, binary, exponential or tabulated)")]
    UnknownModel(String),
    #[error("{0}")]
    Input(Error),
    #[error("numerical failure: {0}")]
    Numeric(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 3,
            RunError::UnknownSolver(_) => 4,
            RunError::UnknownModel(_) => 5,
            RunError::Input(_) => 6,
            RunError::Numeric(_) => 7,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::Parse { .. } => RunError::Input(e),
            Error::InvalidArgument(msg) => RunError::Config(msg),
            e => RunError::Numeric(e),
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Flags shared by every command.
#[derive(Debug, Clone, Default)]
pub struct GlobalOptions {
    /// Overrides the config's seed.
    pub seed: Option<u64>,
    /// Where the artifact goes; its extension picks the trace file format.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub artifact: Vec<u8>,
    /// One line for standard output, if the command reports one.
    pub summary: Option<String>,
}

fn read_config<T: DeserializeOwned>(path: &Path) -> RunResult<T> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Input(Error::Io {
        path: path.to_path_buf(),
        source: e,
    }))?;
    serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
}

/// Resolves `file` against the directory holding the config.
fn relative_to(config: &Path, file: &Path) -> PathBuf {
    if file.is_absolute() {
        return file.to_path_buf();
    }
    config.parent().map(|d| d.join(file)).unwrap_or_else(|| file.to_path_buf())
}

fn model_from(config_path: &Path, name: &str, table: Option<&Path>) -> RunResult<InputModel> {
    if name == "tabulated" {
        let table = table.ok_or_else(|| RunError::Config("model tabulated requires the field `mmse_table`".into()))?;
        return Ok(InputModel::Tabulated(TabulatedMmse::load(relative_to(config_path, table))?));
    }
    InputModel::from_name(name).ok_or_else(|| RunError::UnknownModel(name.to_string()))
}

fn solver_from(name: &str, alpha: Option<f64>) -> RunResult<Solver> {
    match Solver::from_name(name, alpha) {
        None => Err(RunError::UnknownSolver(name.to_string())),
        Some(Err(e)) => Err(RunError::Config(match e {
            Error::InvalidArgument(msg) => msg,
            e => e.to_string(),
        })),
        Some(Ok(s)) => Ok(s),
    }
}

fn default_model() -> String {
    "gaussian".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocateConfig {
    channels: PathBuf,
    solver: String,
    #[serde(default = "default_model")]
    model: String,
    #[serde(default)]
    mmse_table: Option<PathBuf>,
    budget: f64,
    #[serde(default)]
    alpha: Option<f64>,
}

pub fn cmd_allocate(config_path: &Path, _opts: &GlobalOptions) -> RunResult<CommandOutput> {
    let cfg: AllocateConfig = read_config(config_path)?;
    let solver = solver_from(&cfg.solver, cfg.alpha)?;
    let model = model_from(config_path, &cfg.model, cfg.mmse_table.as_deref())?;
    let channels = SubchannelSet::load(relative_to(config_path, &cfg.channels))?;
    let alloc = solver.solve(&channels, &model, &SolveOptions::new(cfg.budget)?)?;
    let report = evaluate(&channels, &alloc, &model)?;
    let csv = allocation_csv(&channels, &alloc, &model)?;
    let summary = format!(
        "total_mi={} max_mi={} dual={}{}",
        report.total_mi,
        report.max_mi,
        alloc.dual,
        if alloc.stationary_only { " stationary_only" } else { "" }
    );
    Ok(CommandOutput {
        artifact: csv.into_bytes(),
        summary: Some(summary),
    })
}

/// A budget list, or `points` evenly spaced budgets from `start` to `stop`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum BudgetGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl BudgetGrid {
    fn values(&self) -> RunResult<Vec<f64>> {
        let values = match *self {
            BudgetGrid::List(ref v) => v.clone(),
            BudgetGrid::Range { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![start],
                n => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        };
        if values.is_empty() {
            return Err(RunError::Config("budget grid is empty".into()));
        }
        Ok(values)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    m: usize,
    power: PowerDistribution,
    z: f64,
    budgets: BudgetGrid,
    #[serde(default = "default_total_solver")]
    solver: String,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default = "default_model")]
    model: String,
    #[serde(default)]
    mmse_table: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
}

fn default_total_solver() -> String {
    "gaussian_total".into()
}

pub fn cmd_sweep(config_path: &Path, opts: &GlobalOptions) -> RunResult<CommandOutput> {
    let cfg: SweepConfig = read_config(config_path)?;
    let budgets = cfg.budgets.values()?;
    let solver = solver_from(&cfg.solver, cfg.alpha)?;
    let model = model_from(config_path, &cfg.model, cfg.mmse_table.as_deref())?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let channels = cfg.power.instance(cfg.m, cfg.z, seed, 0)?;
    let rows = sweep(&channels, &model, &budgets, solver)?;
    Ok(CommandOutput {
        artifact: sweep_csv(&rows).into_bytes(),
        summary: None,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvexityConfig {
    model: String,
    #[serde(default)]
    mmse_table: Option<PathBuf>,
    rho_min: f64,
    rho_max: f64,
    #[serde(default = "default_scan_points")]
    points: usize,
}

fn default_scan_points() -> usize {
    50
}

pub fn cmd_convexity(config_path: &Path, _opts: &GlobalOptions) -> RunResult<CommandOutput> {
    let cfg: ConvexityConfig = read_config(config_path)?;
    let model = model_from(config_path, &cfg.model, cfg.mmse_table.as_deref())?;
    if !(cfg.rho_min > 0.0 && cfg.rho_max > cfg.rho_min) || cfg.points < 2 {
        return Err(RunError::Config("need 0 < rho_min < rho_max and points >= 2".into()));
    }
    let rows = scan(&model, &log_grid(cfg.rho_min, cfg.rho_max, cfg.points))?;
    let mut out = String::from("kind,rho,c1_margin,c3_value\n");
    for r in &rows {
        let c3 = r.c3_value.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "scan,{},{},{c3}", r.rho, r.c1_margin);
    }
    let boundary = convexity_boundary(&model, cfg.rho_min, cfg.rho_max)?;
    if let Some(b) = boundary {
        let _ = writeln!(out, "boundary,{b},0,");
    }
    Ok(CommandOutput {
        artifact: out.into_bytes(),
        summary: Some(match boundary {
            Some(b) => format!("boundary={b}"),
            None => "boundary=none".into(),
        }),
    })
}

/// Recorded traces to attack instead of simulating, with the defender's
/// channel estimates for them.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Replay {
    traces: PathBuf,
    channels: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttackCommandConfig {
    #[serde(default)]
    scenario: AttackConfig,
    #[serde(default = "default_attack_solvers")]
    solvers: Vec<String>,
    #[serde(default)]
    alpha: Option<f64>,
    budgets: BudgetGrid,
    #[serde(default = "default_attack_seeds")]
    n_seeds: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    replay: Option<Replay>,
}

fn default_attack_solvers() -> Vec<String> {
    vec!["uniform".into(), "gaussian_total".into(), "minimax".into()]
}

fn default_attack_seeds() -> usize {
    20
}

pub fn cmd_attack(config_path: &Path, opts: &GlobalOptions) -> RunResult<CommandOutput> {
    let cfg: AttackCommandConfig = read_config(config_path)?;
    let budgets = cfg.budgets.values()?;
    if cfg.solvers.is_empty() {
        return Err(RunError::Config("attack needs at least one solver".into()));
    }
    let solvers = cfg
        .solvers
        .iter()
        .map(|s| solver_from(s, cfg.alpha))
        .collect::<RunResult<Vec<_>>>()?;
    if cfg.n_seeds == 0 {
        return Err(RunError::Config("n_seeds must be >= 1".into()));
    }
    let seed = opts.seed.unwrap_or(cfg.seed);
    let replay = match &cfg.replay {
        Some(r) => Some((
            io::load(relative_to(config_path, &r.traces))?,
            SubchannelSet::load(relative_to(config_path, &r.channels))?,
        )),
        None => None,
    };
    let channels = match &replay {
        Some((_, ch)) => ch.clone(),
        None => cfg.scenario.channels(seed)?,
    };

    let mut out = String::from("N0");
    for s in &cfg.solvers {
        let _ = write!(out, ",{s}");
    }
    out.push('\n');
    for &budget in &budgets {
        let _ = write!(out, "{budget}");
        for solver in &solvers {
            let alloc = solver.solve(&channels, &InputModel::Gaussian, &SolveOptions::new(budget)?)?;
            let rate = match &replay {
                Some((traces, _)) => replay_rate(traces, &alloc, cfg.scenario.n_bins, cfg.n_seeds, seed)?,
                None => success_rate_with(&cfg.scenario, &channels, &alloc, cfg.n_seeds, seed)?.rate(),
            };
            let _ = write!(out, ",{rate}");
        }
        out.push('\n');
    }
    Ok(CommandOutput {
        artifact: out.into_bytes(),
        summary: None,
    })
}

/// Attacks fresh noise injections into one recorded trace set.
fn replay_rate(traces: &sca::TraceSet, alloc: &NoiseAllocation, n_bins: usize, n_seeds: usize, seed: u64) -> RunResult<f64> {
    if traces.true_key.is_none() {
        return Err(RunError::Config("replayed traces must record the true key".into()));
    }
    let mut hits = 0;
    for s in 0..n_seeds as u64 {
        let noisy = inject_noise(traces, alloc, derive_seed(seed, s))?;
        hits += usize::from(mia_attack(&noisy, n_bins)?.success);
    }
    Ok(hits as f64 / n_seeds as f64)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceGenConfig {
    #[serde(default)]
    scenario: AttackConfig,
    /// Hex key byte; drawn from the seed when absent.
    #[serde(default)]
    key: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    solver: Option<String>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    budget: f64,
}

pub fn cmd_trace_gen(config_path: &Path, opts: &GlobalOptions) -> RunResult<CommandOutput> {
    use rand::Rng;
    let cfg: TraceGenConfig = read_config(config_path)?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let key = match &cfg.key {
        Some(k) => u8::from_str_radix(k.trim_start_matches("0x"), 16)
            .map_err(|_| RunError::Config(format!("key `{k}` is not a hex byte")))?,
        None => substream(seed, Stream::Key, 0).random(),
    };
    let channels = cfg.scenario.channels(seed)?;
    let mut traces = generate_traces(&channels, &cfg.scenario.leak_points, key, cfg.scenario.n_traces, seed)?;
    if let Some(name) = &cfg.solver {
        let solver = solver_from(name, cfg.alpha)?;
        let alloc = solver.solve(&channels, &InputModel::Gaussian, &SolveOptions::new(cfg.budget)?)?;
        traces = inject_noise(&traces, &alloc, seed)?;
    }
    let binary = opts
        .out
        .as_ref()
        .is_some_and(|p| p.extension().is_some_and(|e| e == "bin"));
    let artifact = if binary {
        io::write_binary(&traces)
    } else {
        io::write_text(&traces).into_bytes()
    };
    Ok(CommandOutput {
        artifact,
        summary: Some(format!("key={key:02x} traces={} points={}", traces.n_traces(), traces.m())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn allocate_errors_are_distinct() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "ch.csv", "index,P,Z\n0,4,1\n1,1,1\n");
        let opts = GlobalOptions::default();
        let cfg = write(dir.path(), "a.json", r#"{"channels":"ch.csv","solver":"sibson","budget":1}"#);
        let err = cmd_allocate(&cfg, &opts).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("alpha"));
        let cfg = write(dir.path(), "b.json", r#"{"channels":"ch.csv","solver":"newton","budget":1}"#);
        assert_eq!(cmd_allocate(&cfg, &opts).unwrap_err().exit_code(), 4);
        let cfg = write(dir.path(), "c.json", r#"{"channels":"ch.csv","solver":"minimax","model":"laplace","budget":1}"#);
        assert_eq!(cmd_allocate(&cfg, &opts).unwrap_err().exit_code(), 5);
        let cfg = write(dir.path(), "d.json", r#"{"channels":"nope.csv","solver":"minimax","budget":1}"#);
        let err = cmd_allocate(&cfg, &opts).unwrap_err();
        assert_eq!(err.exit_code(), 6);
        assert!(err.to_string().contains("nope.csv"));
        assert_eq!(cmd_allocate(&dir.path().join("missing.json"), &opts).unwrap_err().exit_code(), 6);
    }

    #[test]
    fn budget_grids() {
        let g: BudgetGrid = serde_json::from_str(r#"{"start":0,"stop":10,"points":3}"#).unwrap();
        assert_eq!(g.values().unwrap(), vec![0.0, 5.0, 10.0]);
        let g: BudgetGrid = serde_json::from_str("[1, 2]").unwrap();
        assert_eq!(g.values().unwrap(), vec![1.0, 2.0]);
        let g: BudgetGrid = serde_json::from_str("[]").unwrap();
        assert!(matches!(g.values(), Err(RunError::Config(_))));
    }
}
