//! Input-distribution catalog for the normalized channel `Y = sqrt(rho) S + W`.
//!
//! Each model provides `mmse(rho)`, the mutual information through the I-MMSE
//! integral `I(rho) = 1/2 * int_0^rho mmse(t) dt`, and the second-order low-SNR
//! expansion where the model has the moments it needs.
//!
//! The exponential model follows the unit-power convention `S ~ Exp(sqrt 2)`:
//! `E[S^2] = 1` but `E[S] = 1/sqrt 2`, so its MMSE starts at `Var(S) = 1/2`
//! rather than 1. The Gaussian, binary and tabulated models are zero-mean with
//! unit power and start at 1.

use std::cell::RefCell;
use std::f64::consts::SQRT_2;
use std::io::Read;
use std::path::Path;

use crate::channel::parse_f64;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::special::{inverse_mills, ln_q_function, std_normal_pdf};

const MMSE_TOL: Tolerance = Tolerance::new(1e-300, 1e-12);
const MI_TOL: Tolerance = Tolerance::new(1e-10, 1e-12);
/// Default clamp policy for tabulated models: evaluation is allowed up to this
/// multiple of the largest tabulated SNR.
pub const DEFAULT_CLAMP_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub enum InputModel {
    Gaussian,
    /// Equiprobable `S = +-1`.
    Binary,
    /// `S ~ Exp(sqrt 2)`, unit second moment.
    Exponential,
    Tabulated(TabulatedMmse),
}

/// An MMSE value, with a flag for tabulated lookups clamped past the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmseValue {
    pub value: f64,
    pub extrapolated: bool,
}

impl InputModel {
    pub fn name(&self) -> &'static str {
        match self {
            InputModel::Gaussian => "gaussian",
            InputModel::Binary => "binary",
            InputModel::Exponential => "exponential",
            InputModel::Tabulated(_) => "tabulated",
        }
    }

    /// Parses one of the built-in model names.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "gaussian" => Some(InputModel::Gaussian),
            "binary" => Some(InputModel::Binary),
            "exponential" => Some(InputModel::Exponential),
            _ => None,
        }
    }

    pub fn mmse(&self, rho: f64) -> Result<f64> {
        self.mmse_value(rho).map(|m| m.value)
    }

    pub fn mmse_value(&self, rho: f64) -> Result<MmseValue> {
        check_rho(rho)?;
        let exact = |value| MmseValue {
            value,
            extrapolated: false,
        };
        match self {
            InputModel::Gaussian => Ok(exact(1.0 / (1.0 + rho))),
            InputModel::Binary => binary_mmse(rho).map(exact),
            InputModel::Exponential => exponential_mmse(rho).map(exact),
            InputModel::Tabulated(table) => table.lookup(rho),
        }
    }

    /// Mutual information in nats. The Gaussian model uses the closed form;
    /// the others go through [`InputModel::mutual_info_quadrature`].
    pub fn mutual_info(&self, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        match self {
            InputModel::Gaussian => Ok(0.5 * rho.ln_1p()),
            InputModel::Tabulated(table) => table.mutual_info(rho),
            _ => self.mutual_info_quadrature(rho),
        }
    }

    /// `1/2 * int_0^rho mmse(t) dt` by adaptive quadrature, for every model.
    pub fn mutual_info_quadrature(&self, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        if rho == 0.0 {
            return Ok(0.0);
        }
        let mut breaks = vec![0.0];
        let mut b = 1.0;
        while b < rho {
            breaks.push(b);
            b *= 10.0;
        }
        breaks.push(rho);
        let integral = integrate_fallible(|t| self.mmse(t), &breaks, MI_TOL)?;
        Ok(0.5 * integral)
    }

    /// Mutual information at many SNRs. For the quadrature models the I-MMSE
    /// integral is accumulated over the sorted points, so each piece of the
    /// SNR axis is integrated once.
    pub fn mutual_info_many(&self, rhos: &[f64]) -> Result<Vec<f64>> {
        if !matches!(self, InputModel::Binary | InputModel::Exponential) {
            return rhos.iter().map(|&r| self.mutual_info(r)).collect();
        }
        for &r in rhos {
            check_rho(r)?;
        }
        let mut order: Vec<usize> = (0..rhos.len()).collect();
        order.sort_by(|&a, &b| rhos[a].total_cmp(&rhos[b]));
        let mut out = vec![0.0; rhos.len()];
        let (mut prev, mut acc) = (0.0, 0.0);
        for i in order {
            let r = rhos[i];
            if r > prev {
                acc += 0.5 * integrate_fallible(|t| self.mmse(t), &[prev, r], MI_TOL)?;
                prev = r;
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// `E[S^3]`, needed by the low-SNR expansion.
    pub fn third_moment(&self) -> Result<f64> {
        match self {
            InputModel::Gaussian | InputModel::Binary => Ok(0.0),
            // 3! / lambda^3 with lambda = sqrt 2
            InputModel::Exponential => Ok(6.0 / (2.0 * SQRT_2)),
            InputModel::Tabulated(_) => Err(Error::Unsupported {
                op: "low-SNR expansion",
                model: "tabulated",
            }),
        }
    }

    /// Second-order expansion `1 - rho + (2 - E[S^3]^2) rho^2 / 2` around
    /// `rho = 0`. It is derived for zero-mean inputs; for the exponential
    /// model it uses that model's raw third moment and does not track its MMSE.
    pub fn low_snr_mmse(&self, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        let m3 = self.third_moment()?;
        Ok(1.0 - rho + (2.0 - m3 * m3) * rho * rho / 2.0)
    }

    /// Fisher information of the output density. Supported where the output
    /// density has a closed form (Gaussian, exponential).
    pub fn output_fisher_information(&self, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        match self {
            InputModel::Gaussian => Ok(1.0 / (1.0 + rho)),
            InputModel::Exponential => {
                if rho == 0.0 {
                    return Ok(1.0);
                }
                let a = exp_rate(rho);
                exponential_output_expectation(rho, |v| {
                    let score = inverse_mills(v) - a;
                    score * score
                })
            }
            other => Err(Error::Unsupported {
                op: "output Fisher information",
                model: other.name(),
            }),
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho >= 0.0) || rho.is_infinite() {
        return Err(Error::invalid(format!("snr {rho} must be finite and >= 0")));
    }
    Ok(())
}

/// Integrates a fallible integrand, surfacing the first integrand error.
fn integrate_fallible<F: Fn(f64) -> Result<f64>>(f: F, breaks: &[f64], tol: Tolerance) -> Result<f64> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let estimate = integrate_with_breaks(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        breaks,
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(estimate?.value)
}

/// `1 - tanh(u)` without cancellation for large positive `u`.
fn one_minus_tanh(u: f64) -> f64 {
    if u >= 0.0 {
        let e = (-2.0 * u).exp();
        2.0 * e / (1.0 + e)
    } else {
        2.0 / (1.0 + (2.0 * u).exp())
    }
}

/// `1 - int phi(y) tanh(rho - sqrt(rho) y) dy`, written as the integral of the
/// nonnegative `phi(y) (1 - tanh(..))`. The integrand is bounded by
/// `2 phi(|y - sqrt(rho)|)`, so twelve units either side of `sqrt(rho)` carry
/// all of the mass.
fn binary_mmse(rho: f64) -> Result<f64> {
    if rho == 0.0 {
        return Ok(1.0);
    }
    let s = rho.sqrt();
    let integrand = |y: f64| std_normal_pdf(y) * one_minus_tanh(rho - s * y);
    let est = integrate_with_breaks(integrand, &[s - 12.0, s - 2.0, s, s + 2.0, s + 12.0], MMSE_TOL)?;
    Ok(est.value.clamp(0.0, 1.0))
}

/// Rate of the exponential part of the output in the `sqrt(rho) S` scale.
fn exp_rate(rho: f64) -> f64 {
    (2.0 / rho).sqrt()
}

/// Log density of `V = sqrt(2/rho) - Y` for the exponential input:
/// `ln a - a^2/2 + a v + ln Q(v)` with `a = sqrt(2/rho)`.
fn exponential_ln_density_v(v: f64, a: f64) -> f64 {
    a.ln() - 0.5 * a * a + a * v + ln_q_function(v)
}

/// `E[g(V)]` over the exponential-input output, in the substituted variable
/// `v = -y + sqrt(2/rho)`.
pub(crate) fn exponential_output_expectation<G: Fn(f64) -> f64>(rho: f64, g: G) -> Result<f64> {
    let a = exp_rate(rho);
    // Gaussian tail above `a`, exponential tail with rate `a` below zero
    let lo = -12.0 - 50.0 / a;
    let hi = a + 12.0;
    let est = integrate_with_breaks(
        |v| exponential_ln_density_v(v, a).exp() * g(v),
        &[lo, -2.0, 0.0, a, a + 2.0, hi],
        MMSE_TOL,
    )?;
    Ok(est.value)
}

/// Second derivative of the log output density of the exponential-input
/// channel, `h(v) = -(Q'/Q) (v + Q'/Q)`, at `v = -y + sqrt(2/rho)`. Always in
/// `[-1, 0]`.
pub fn emg_logpdf_d2(v: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::invalid(format!("snr {rho} must be > 0")));
    }
    if !v.is_finite() {
        return Err(Error::invalid("v must be finite"));
    }
    let r = inverse_mills(v);
    Ok(r * (v - r))
}

/// `E[S | V = v]` for the exponential input: the posterior is a normal with
/// mean `-v/sqrt(rho)` and variance `1/rho` truncated to `S >= 0`.
fn exponential_conditional_mean(v: f64, rho: f64) -> f64 {
    (inverse_mills(v) - v) / rho.sqrt()
}

/// Below `rho = 1` use `E[S^2] - E[E[S|Y]^2]`; above it the equivalent
/// `E[Var(S|Y)] = E[1 + h(V)] / rho`, which keeps relative accuracy when the
/// MMSE is small.
fn exponential_mmse(rho: f64) -> Result<f64> {
    if rho == 0.0 {
        return Ok(0.5);
    }
    let value = if rho < 1.0 {
        let second = exponential_output_expectation(rho, |v| {
            let m = exponential_conditional_mean(v, rho);
            m * m
        })?;
        1.0 - second
    } else {
        let mean_h = exponential_output_expectation(rho, |v| {
            let r = inverse_mills(v);
            r * (v - r)
        })?;
        (1.0 + mean_h) / rho
    };
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
pub(crate) fn exponential_mean_of_posterior_mean(rho: f64) -> f64 {
    exponential_output_expectation(rho, |v| exponential_conditional_mean(v, rho)).unwrap()
}

/// Tabulated MMSE curve with piecewise-linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedMmse {
    rho: Vec<f64>,
    mmse: Vec<f64>,
    clamp_factor: f64,
}

impl TabulatedMmse {
    /// Builds a table from a strictly increasing SNR grid. A grid that does not
    /// start at zero gets the point `(0, 1)` prepended.
    pub fn new(rho: Vec<f64>, mmse: Vec<f64>) -> Result<Self> {
        if rho.len() != mmse.len() {
            return Err(Error::DimensionMismatch {
                what: "mmse column length",
                expected: rho.len(),
                found: mmse.len(),
            });
        }
        if rho.len() < 2 {
            return Err(Error::invalid("a tabulated mmse needs at least two points"));
        }
        if !(rho[0] >= 0.0) || rho.windows(2).any(|w| !(w[1] > w[0])) || rho.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("tabulated snr grid must be finite, >= 0 and strictly increasing"));
        }
        if mmse.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::invalid("tabulated mmse values must lie in [0, 1]"));
        }
        if mmse.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("tabulated mmse must be nonincreasing in snr"));
        }
        let (mut rho, mut mmse) = (rho, mmse);
        if rho[0] == 0.0 {
            if (mmse[0] - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("mmse(0) must be 1, found {}", mmse[0])));
            }
        } else {
            rho.insert(0, 0.0);
            mmse.insert(0, 1.0);
        }
        Ok(Self {
            rho,
            mmse,
            clamp_factor: DEFAULT_CLAMP_FACTOR,
        })
    }

    /// Allow lookups up to `factor` times the largest grid SNR (returning the
    /// last grid value); beyond that lookups fail.
    pub fn with_clamp_factor(mut self, factor: f64) -> Result<Self> {
        if !(factor >= 1.0) {
            return Err(Error::invalid("clamp factor must be >= 1"));
        }
        self.clamp_factor = factor;
        Ok(self)
    }

    pub fn rho_max(&self) -> f64 {
        *self.rho.last().expect("table has at least two points")
    }

    /// Reads the `rho,mmse` CSV format.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::parse(1, e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "rho" || &headers[1] != "mmse" {
            return Err(Error::parse(1, "expected header `rho,mmse`"));
        }
        let mut rho = Vec::new();
        let mut mmse = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let line = row + 2;
            let record = record.map_err(|e| Error::parse(line, e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::parse(line, format!("expected 2 fields, found {}", record.len())));
            }
            rho.push(parse_f64(&record[0], line)?);
            mmse.push(parse_f64(&record[1], line)?);
        }
        Self::new(rho, mmse)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }

    fn lookup(&self, rho: f64) -> Result<MmseValue> {
        let max = self.rho_max();
        if rho > max {
            let limit = max * self.clamp_factor;
            if rho > limit {
                return Err(Error::Extrapolation { rho, max, limit });
            }
            return Ok(MmseValue {
                value: *self.mmse.last().unwrap(),
                extrapolated: true,
            });
        }
        // first grid index with rho_k >= rho
        let k = self.rho.partition_point(|&r| r < rho);
        let value = if k == 0 {
            self.mmse[0]
        } else {
            let (r0, r1) = (self.rho[k - 1], self.rho[k]);
            let (m0, m1) = (self.mmse[k - 1], self.mmse[k]);
            m0 + (m1 - m0) * (rho - r0) / (r1 - r0)
        };
        Ok(MmseValue {
            value,
            extrapolated: false,
        })
    }

    /// Exact integral of the interpolant (trapezoids), continued flat past the grid.
    fn mutual_info(&self, rho: f64) -> Result<f64> {
        self.lookup(rho)?;
        let mut area = 0.0;
        for k in 1..self.rho.len() {
            let (r0, r1) = (self.rho[k - 1], self.rho[k]);
            if rho <= r0 {
                break;
            }
            let hi = rho.min(r1);
            let m_hi = self.lookup(hi)?.value;
            area += 0.5 * (self.mmse[k - 1] + m_hi) * (hi - r0);
        }
        let max = self.rho_max();
        if rho > max {
            area += self.mmse.last().unwrap() * (rho - max);
        }
        Ok(0.5 * area)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn batched_mutual_info_matches_pointwise() {
        let rhos = [3.0, 0.0, 0.2, 12.0, 0.2, 1.5];
        for model in [InputModel::Gaussian, InputModel::Binary, InputModel::Exponential] {
            let batch = model.mutual_info_many(&rhos).unwrap();
            for (&r, &b) in rhos.iter().zip(&batch) {
                assert!((b - model.mutual_info(r).unwrap()).abs() < 1e-10, "{} rho={r}", model.name());
            }
        }
        assert!(InputModel::Binary.mutual_info_many(&[1.0, -1.0]).is_err());
    }

    /// Trapezoid rule on the binary MMSE integrand over [-40, 40].
    fn binary_mmse_trapezoid(rho: f64, points: usize) -> f64 {
        let (lo, hi) = (-40.0, 40.0);
        let h = (hi - lo) / (points - 1) as f64;
        let f = |y: f64| std_normal_pdf(y) * (rho - rho.sqrt() * y).tanh();
        let mut s = 0.5 * (f(lo) + f(hi));
        for k in 1..points - 1 {
            s += f(lo + k as f64 * h);
        }
        1.0 - s * h
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn gaussian_examples() {
        assert_eq!(InputModel::Gaussian.mmse(1.0).unwrap(), 0.5);
        assert_abs_diff_eq!(InputModel::Gaussian.mutual_info(3.0).unwrap(), 0.693147, epsilon = 1e-6);
    }

    #[test]
    fn zero_snr() {
        for m in [InputModel::Gaussian, InputModel::Binary] {
            assert_eq!(m.mmse(0.0).unwrap(), 1.0);
            assert_eq!(m.mutual_info(0.0).unwrap(), 0.0);
        }
        // unit power, mean 1/sqrt 2
        assert_eq!(InputModel::Exponential.mmse(0.0).unwrap(), 0.5);
        assert_eq!(InputModel::Exponential.mutual_info(0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_negative_snr() {
        assert!(InputModel::Binary.mmse(-1e-3).is_err());
        assert!(InputModel::Gaussian.mutual_info(-1.0).is_err());
        assert!(InputModel::Gaussian.mmse(f64::NAN).is_err());
    }

    #[test]
    fn binary_matches_trapezoid_oracle() {
        let oracle = binary_mmse_trapezoid(4.0, 2000);
        let v = InputModel::Binary.mmse(4.0).unwrap();
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
        for &rho in &[0.05, 0.5, 1.0, 3.35, 10.0, 25.0, 60.0, 100.0] {
            let oracle = binary_mmse_trapezoid(rho, 40_001);
            let v = InputModel::Binary.mmse(rho).unwrap();
            assert!((v - oracle).abs() < 1e-10, "rho={rho}: {v} vs {oracle}");
        }
    }

    #[test]
    fn binary_mutual_info_saturates_at_one_bit() {
        let i = InputModel::Binary.mutual_info(50.0).unwrap();
        assert!((i - std::f64::consts::LN_2).abs() < 1e-3, "{i}");
        assert!(i < std::f64::consts::LN_2);
    }

    #[test]
    fn binary_mutual_info_matches_entropy_route() {
        // I = rho - E[ln cosh(rho - sqrt(rho) W)], by trapezoid
        for &rho in &[0.3, 2.0, 8.0] {
            let s: f64 = rho;
            let n = 40_001;
            let h = 80.0 / (n - 1) as f64;
            let lncosh = |u: f64| u.abs() + (-2.0 * u.abs()).exp().ln_1p() - std::f64::consts::LN_2;
            let mut acc = 0.0;
            for k in 0..n {
                let y = -40.0 + k as f64 * h;
                let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                acc += w * std_normal_pdf(y) * lncosh(s - s.sqrt() * y);
            }
            let oracle = rho - acc * h;
            let got = InputModel::Binary.mutual_info(rho).unwrap();
            assert!((got - oracle).abs() < 1e-8, "rho={rho}: {got} vs {oracle}");
        }
    }

    #[test]
    fn low_snr_examples() {
        assert_abs_diff_eq!(InputModel::Gaussian.low_snr_mmse(0.01).unwrap(), 0.9901, epsilon = 1e-12);
        assert_abs_diff_eq!(InputModel::Gaussian.mmse(0.01).unwrap(), 0.9901, epsilon = 1.01e-6);
        assert_eq!(InputModel::Binary.low_snr_mmse(0.0).unwrap(), 1.0);
        let d = InputModel::Binary.mmse(1e-3).unwrap() - InputModel::Binary.low_snr_mmse(1e-3).unwrap();
        assert!(d.abs() < 5e-9, "{d}");
        let table = TabulatedMmse::new(vec![0.0, 1.0], vec![1.0, 0.5]).unwrap();
        assert!(matches!(
            InputModel::Tabulated(table).low_snr_mmse(0.1),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn exponential_posterior_mean_is_unbiased() {
        for &rho in &[0.1, 1.0, 10.0, 100.0] {
            let m = exponential_mean_of_posterior_mean(rho);
            assert!((m - FRAC_1_SQRT_2).abs() < 1e-10, "rho={rho}: {m}");
        }
    }

    #[test]
    fn exponential_mmse_branches_agree() {
        for &rho in &[0.5, 1.0, 3.0] {
            let second = exponential_output_expectation(rho, |v| {
                let m = exponential_conditional_mean(v, rho);
                m * m
            })
            .unwrap();
            let mean_h = exponential_output_expectation(rho, |v| emg_logpdf_d2(v, rho).unwrap()).unwrap();
            assert!(((1.0 - second) - (1.0 + mean_h) / rho).abs() < 1e-12);
        }
    }

    #[test]
    fn exponential_mutual_info_matches_entropy_route() {
        // I = h(Y) - h(W) with the density known in closed form
        for &rho in &[0.2, 1.0, 5.0] {
            let a = exp_rate(rho);
            let neg_entropy = exponential_output_expectation(rho, |v| exponential_ln_density_v(v, a)).unwrap();
            let oracle = -neg_entropy - 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
            let got = InputModel::Exponential.mutual_info(rho).unwrap();
            assert!((got - oracle).abs() < 1e-8, "rho={rho}: {got} vs {oracle}");
        }
    }

    #[test]
    fn fisher_information_matches_mmse_identity() {
        for model in [InputModel::Gaussian, InputModel::Exponential] {
            for &rho in &[0.1, 0.5, 2.0, 10.0, 50.0] {
                let j = model.output_fisher_information(rho).unwrap();
                let via_mmse = 1.0 - rho * model.mmse(rho).unwrap();
                assert!((j - via_mmse).abs() < 1e-9, "{} rho={rho}: {j} vs {via_mmse}", model.name());
            }
        }
        assert!(InputModel::Binary.output_fisher_information(1.0).is_err());
    }

    #[test]
    fn emg_d2_limits() {
        let left = emg_logpdf_d2(-8.0, 1.0).unwrap();
        assert!(left <= 0.0 && left > -1e-12, "{left}");
        let right = emg_logpdf_d2(8.0, 1.0).unwrap();
        assert!(right < -0.98 && right > -1.0, "{right}");
        assert!(emg_logpdf_d2(10.0, 1.0).unwrap() < right);
        assert!(emg_logpdf_d2(0.0, 0.0).is_err());
    }

    #[test]
    fn emg_d2_matches_finite_difference_of_log_density() {
        // h is the second derivative in y, equivalently in v
        let a = exp_rate(2.0);
        let step = 1e-4;
        for &v in &[-3.0, -0.5, 0.0, 1.0, 2.5, 5.0] {
            let fd = (exponential_ln_density_v(v + step, a) - 2.0 * exponential_ln_density_v(v, a)
                + exponential_ln_density_v(v - step, a))
                / (step * step);
            let h = emg_logpdf_d2(v, 2.0).unwrap();
            assert!((fd - h).abs() < 1e-5, "v={v}: {fd} vs {h}");
        }
    }

    #[test]
    fn tabulated_interpolation_and_clamp() {
        let table = TabulatedMmse::new(vec![0.0, 1.0, 3.0], vec![1.0, 0.6, 0.2]).unwrap();
        let model = InputModel::Tabulated(table);
        assert_abs_diff_eq!(model.mmse(0.5).unwrap(), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(model.mmse(2.0).unwrap(), 0.4, epsilon = 1e-15);
        let clamped = model.mmse_value(4.0).unwrap();
        assert!(clamped.extrapolated);
        assert_eq!(clamped.value, 0.2);
        assert!(matches!(model.mmse(6.5), Err(Error::Extrapolation { .. })));
        // exact trapezoid area: 0.8 + 0.8 = 1.6, halved
        assert_abs_diff_eq!(model.mutual_info(3.0).unwrap(), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(model.mutual_info(3.0).unwrap(), model.mutual_info_quadrature(3.0).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn tabulated_validation() {
        assert!(TabulatedMmse::new(vec![0.0], vec![1.0]).is_err());
        assert!(TabulatedMmse::new(vec![0.0, 1.0], vec![1.0, 1.2]).is_err());
        assert!(TabulatedMmse::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.4, 0.5]).is_err());
        assert!(TabulatedMmse::new(vec![1.0, 1.0], vec![0.5, 0.4]).is_err());
        assert!(TabulatedMmse::new(vec![0.0, 1.0], vec![0.9, 0.4]).is_err());
        let t = TabulatedMmse::new(vec![1.0, 2.0], vec![0.5, 0.3]).unwrap();
        assert_eq!(InputModel::Tabulated(t).mmse(0.0).unwrap(), 1.0);
    }

    #[test]
    fn tabulated_csv() {
        let t = TabulatedMmse::read_csv("rho,mmse\n0,1\n2,0.5\n".as_bytes()).unwrap();
        assert_abs_diff_eq!(InputModel::Tabulated(t).mmse(1.0).unwrap(), 0.75, epsilon = 1e-15);
        assert!(TabulatedMmse::read_csv("snr,mmse\n0,1\n".as_bytes()).is_err());
    }
}
