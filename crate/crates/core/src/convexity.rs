//! Numerical convexity certificates for the leakage `I(P / (N + Z))` as a
//! function of the injected noise `N`.
//!
//! Two of the three equivalent conditions are evaluated directly:
//! the MMSE condition `mmse + d/drho (rho mmse) >= 0` and the output-density
//! condition `E[(d^2/dy^2 ln f(Y))^2] <= 1`. They are tied by
//! `rho * c1 = 1 - c3`. The Fisher-information form is checked only as an
//! identity in the tests.

use crate::error::{Error, Result};
use crate::mmse::{emg_logpdf_d2, exponential_output_expectation, InputModel};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::special::std_normal_pdf;

const SCAN_POINTS: usize = 64;

fn check_positive_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::invalid(format!("snr {rho} must be finite and > 0")));
    }
    Ok(())
}

/// `mmse(rho) + d/drho [rho mmse(rho)]` by central difference with step
/// `max(1e-6, 1e-6 rho)` (shrunk to `rho/2` for tiny `rho`). Nonnegative
/// means the leakage is locally convex in the noise.
pub fn check_c1(model: &InputModel, rho: f64) -> Result<f64> {
    check_positive_rho(rho)?;
    let h = (1e-6 * rho).max(1e-6).min(0.5 * rho);
    let up = (rho + h) * model.mmse(rho + h)?;
    let down = (rho - h) * model.mmse(rho - h)?;
    Ok(model.mmse(rho)? + (up - down) / (2.0 * h))
}

/// `E[(d^2/dy^2 ln f(Y))^2]` over the output density; at most 1 certifies
/// convexity. Shipped for the Gaussian and exponential inputs.
pub fn check_c3(model: &InputModel, rho: f64) -> Result<f64> {
    check_positive_rho(rho)?;
    match model {
        InputModel::Gaussian => {
            // Y ~ N(0, 1 + rho), so the curvature is the constant -1/(1+rho)
            let var = 1.0 + rho;
            let sd = var.sqrt();
            let curvature = -1.0 / var;
            let est = integrate_with_breaks(
                |y| std_normal_pdf(y / sd) / sd * curvature * curvature,
                &[-14.0 * sd, 0.0, 14.0 * sd],
                Tolerance::new(1e-15, 1e-13),
            )?;
            Ok(est.value)
        }
        InputModel::Exponential => exponential_output_expectation(rho, |v| {
            let h = emg_logpdf_d2(v, rho).unwrap_or(f64::NAN);
            h * h
        }),
        other => Err(Error::Unsupported {
            op: "output-density convexity check",
            model: other.name(),
        }),
    }
}

/// Curvature `d^2 I / dN^2 = P / (2 (N+Z)^3) * c1(P / (N+Z))`.
pub fn second_derivative_mi(model: &InputModel, power: f64, physical: f64, artificial: f64) -> Result<f64> {
    if !(power >= 0.0) || !(physical > 0.0) || !(artificial >= 0.0) {
        return Err(Error::invalid("need P >= 0, Z > 0 and N >= 0"));
    }
    if power == 0.0 {
        return Ok(0.0);
    }
    let total = artificial + physical;
    let rho = power / total;
    Ok(power / (2.0 * total.powi(3)) * check_c1(model, rho)?)
}

/// One row of a convexity scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityPoint {
    pub rho: f64,
    pub c1_margin: f64,
    /// `None` where the model has no output-density check.
    pub c3_value: Option<f64>,
}

pub fn scan(model: &InputModel, grid: &[f64]) -> Result<Vec<ConvexityPoint>> {
    grid.iter()
        .map(|&rho| {
            let c3_value = match check_c3(model, rho) {
                Ok(v) => Some(v),
                Err(Error::Unsupported { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(ConvexityPoint {
                rho,
                c1_margin: check_c1(model, rho)?,
                c3_value,
            })
        })
        .collect()
}

/// `n` log-spaced points from `lo` to `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| match k {
            0 => lo,
            k if k == n - 1 => hi,
            k => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Locates the first sign change of the C1 margin in `[rho_lo, rho_hi]`.
/// Returns `Ok(None)` when the margin keeps one sign over the scan.
pub fn convexity_boundary(model: &InputModel, rho_lo: f64, rho_hi: f64) -> Result<Option<f64>> {
    check_positive_rho(rho_lo)?;
    if !(rho_hi > rho_lo) || !rho_hi.is_finite() {
        return Err(Error::invalid(format!("empty bracket [{rho_lo}, {rho_hi}]")));
    }
    let grid = log_grid(rho_lo, rho_hi, SCAN_POINTS);
    let margin = |rho: f64| -> Result<f64> {
        let c = check_c1(model, rho)?;
        if c.is_nan() {
            return Err(Error::QuadratureFailed {
                estimate: c,
                error: f64::NAN,
            });
        }
        Ok(c)
    };
    let mut prev = (grid[0], margin(grid[0])?);
    for &rho in &grid[1..] {
        let cur = (rho, margin(rho)?);
        if (prev.1 >= 0.0) != (cur.1 >= 0.0) {
            let (mut a, mut b) = (prev.0, cur.0);
            let sign_a = prev.1 >= 0.0;
            for _ in 0..200 {
                if b - a <= 1e-12 * b {
                    break;
                }
                let mid = (a * b).sqrt();
                if (margin(mid)? >= 0.0) == sign_a {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
        prev = cur;
    }
    Ok(None)
}

/// Smallest C1 margin over the SNR range `[rho_lo, rho_hi]`. The Gaussian and
/// exponential inputs are convex everywhere and return `None`.
pub(crate) fn min_margin_over(model: &InputModel, rho_lo: f64, rho_hi: f64) -> Result<Option<f64>> {
    match model {
        InputModel::Gaussian | InputModel::Exponential => Ok(None),
        _ => {
            let lo = rho_lo.max(1e-9);
            if !(rho_hi > lo) {
                return Ok(Some(check_c1(model, lo)?));
            }
            let mut min = f64::INFINITY;
            for rho in log_grid(lo, rho_hi, 33) {
                min = min.min(check_c1(model, rho)?);
            }
            Ok(Some(min))
        }
    }
}
