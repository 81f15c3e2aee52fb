//! Parallel-channel data model and the closed-form Gaussian leakage quantities.
//!
//! Every leakage point `i` of a trace is treated as an independent additive
//! channel `Y_i = X_i + Z_i + N_i` where `X_i` has power `P_i`, `Z_i` is the
//! physical noise with variance `Z_i` and `N_i` the injected noise. All mutual
//! information values are in nats and keep the `1/2` prefactor of the Gaussian
//! capacity formula. The solvers optimize the same objective without the
//! prefactor; it is a positive constant, so the minimizer is unchanged.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// The parallel-channel instance: input powers and physical-noise variances.
#[derive(Debug, Clone, PartialEq)]
pub struct SubchannelSet {
    power: Vec<f64>,
    noise: Vec<f64>,
}

impl SubchannelSet {
    pub fn new(power: Vec<f64>, noise: Vec<f64>) -> Result<Self> {
        if power.is_empty() {
            return Err(Error::invalid("a channel set needs at least one leakage point"));
        }
        if power.len() != noise.len() {
            return Err(Error::DimensionMismatch {
                what: "physical-noise vector length",
                expected: power.len(),
                found: noise.len(),
            });
        }
        if let Some((i, p)) = power.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::invalid(format!("P[{i}] = {p} must be finite and >= 0")));
        }
        if let Some((i, z)) = noise.iter().enumerate().find(|(_, z)| !(**z > 0.0 && z.is_finite())) {
            return Err(Error::invalid(format!("Z[{i}] = {z} must be finite and > 0")));
        }
        Ok(Self { power, noise })
    }

    /// Same physical-noise variance on every point.
    pub fn with_constant_noise(power: Vec<f64>, z: f64) -> Result<Self> {
        let noise = vec![z; power.len()];
        Self::new(power, noise)
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    /// SNR of every channel under the given artificial noise.
    pub fn snrs(&self, artificial: &[f64]) -> Result<Vec<f64>> {
        if artificial.len() != self.len() {
            return Err(Error::DimensionMismatch {
                what: "allocation length",
                expected: self.len(),
                found: artificial.len(),
            });
        }
        self.power
            .iter()
            .zip(&self.noise)
            .zip(artificial)
            .map(|((&p, &z), &n)| snr(p, z, n))
            .collect()
    }

    /// Reads the `index,P,Z` CSV format.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::parse(1, e.to_string()))?.clone();
        let expected = ["index", "P", "Z"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::parse(1, format!("expected header `index,P,Z`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut power = Vec::new();
        let mut noise = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let line = row + 2;
            let record = record.map_err(|e| Error::parse(line, e.to_string()))?;
            if record.len() != 3 {
                return Err(Error::parse(line, format!("expected 3 fields, found {}", record.len())));
            }
            let index: usize = record[0]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad index `{}`", &record[0])))?;
            if index != row {
                return Err(Error::parse(line, format!("index {index} out of order (expected {row})")));
            }
            power.push(parse_f64(&record[1], line)?);
            noise.push(parse_f64(&record[2], line)?);
        }
        Self::new(power, noise)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,P,Z\n");
        for (i, (p, z)) in self.power.iter().zip(&self.noise).enumerate() {
            let _ = writeln!(out, "{i},{p},{z}");
        }
        out
    }
}

pub(crate) fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::parse(line, format!("bad number `{field}`")))
}

/// Which objective a solver minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Total,
    Max,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Total => "total",
            Objective::Max => "max",
        }
    }
}

/// Artificial-noise variances plus the dual variable that certifies them
/// (`nu` for the total-leakage solvers, the water level `kappa` for minimax).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseAllocation {
    noise: Vec<f64>,
    budget_used: f64,
    pub dual: f64,
    pub objective: Objective,
    /// Set when the input model is not certified convex over the induced SNR
    /// range; the allocation is then a KKT stationary point only.
    pub stationary_only: bool,
}

impl NoiseAllocation {
    pub fn new(noise: Vec<f64>, dual: f64, objective: Objective) -> Result<Self> {
        if let Some((i, n)) = noise.iter().enumerate().find(|(_, n)| !(**n >= 0.0 && n.is_finite())) {
            return Err(Error::invalid(format!("N[{i}] = {n} must be finite and >= 0")));
        }
        let budget_used = noise.iter().sum();
        Ok(Self {
            noise,
            budget_used,
            dual,
            objective,
            stationary_only: false,
        })
    }

    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    pub fn len(&self) -> usize {
        self.noise.len()
    }

    pub fn is_empty(&self) -> bool {
        self.noise.is_empty()
    }

    pub fn budget_used(&self) -> f64 {
        self.budget_used
    }

    pub fn into_noise(self) -> Vec<f64> {
        self.noise
    }
}

/// Per-channel and aggregate leakage of one allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageReport {
    pub per_channel_mi: Vec<f64>,
    pub total_mi: f64,
    pub max_mi: f64,
    pub fano_pe_lower: f64,
}

impl LeakageReport {
    pub fn from_per_channel(per_channel_mi: Vec<f64>, alphabet_size: usize) -> Result<Self> {
        let total_mi: f64 = per_channel_mi.iter().sum();
        let max_mi = per_channel_mi.iter().copied().fold(0.0, f64::max);
        let fano_pe_lower = fano_pe_lower(total_mi, alphabet_size)?;
        Ok(Self {
            per_channel_mi,
            total_mi,
            max_mi,
            fano_pe_lower,
        })
    }

    /// Total leakage divided by the number of points.
    pub fn average_mi(&self) -> f64 {
        self.total_mi / self.per_channel_mi.len() as f64
    }
}

/// `P / (N + Z)`.
pub fn snr(power: f64, physical: f64, artificial: f64) -> Result<f64> {
    if !(physical > 0.0) {
        return Err(Error::invalid(format!("physical noise variance {physical} must be > 0")));
    }
    if !(power >= 0.0) || !(artificial >= 0.0) {
        return Err(Error::invalid(format!(
            "power {power} and artificial noise {artificial} must be >= 0"
        )));
    }
    if power == 0.0 {
        return Ok(0.0);
    }
    Ok(power / (artificial + physical))
}

/// Gaussian-input capacity `0.5 ln(1 + rho)` in nats.
pub fn gaussian_mi(rho: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::invalid(format!("snr {rho} must be >= 0")));
    }
    Ok(0.5 * rho.ln_1p())
}

/// Sibson mutual information of order `alpha` for Gaussian input and noise.
pub fn sibson_mi(rho: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("Sibson order {alpha} must be > 0")));
    }
    if !(rho >= 0.0) {
        return Err(Error::invalid(format!("snr {rho} must be >= 0")));
    }
    Ok(0.5 * (alpha * rho).ln_1p())
}

/// Fano lower bound on the attacker's error probability, assuming a uniform
/// secret over `alphabet_size` values. The bound is evaluated in bits and
/// clamped to `[0, 1]`.
pub fn fano_pe_lower(total_mi_nats: f64, alphabet_size: usize) -> Result<f64> {
    if alphabet_size < 2 {
        return Err(Error::invalid(format!("alphabet size {alphabet_size} must be >= 2")));
    }
    if !(total_mi_nats >= 0.0) {
        return Err(Error::invalid(format!("mutual information {total_mi_nats} must be >= 0")));
    }
    let log_alphabet = (alphabet_size as f64).log2();
    let leaked_bits = total_mi_nats / std::f64::consts::LN_2;
    Ok(((log_alphabet - leaked_bits - 1.0) / log_alphabet).clamp(0.0, 1.0))
}
