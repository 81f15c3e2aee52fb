use crate::allocators::{fit_budget, solve_dual, SolveOptions};
use crate::channel::{NoiseAllocation, Objective, SubchannelSet};
use crate::error::{Error, Result};

/// Activation threshold `1/Z - 1/(Z + P)`: the channel takes noise iff the
/// dual level is strictly below it.
fn threshold(power: f64, physical: f64) -> f64 {
    power / (physical * (physical + power))
}

/// Root of `1/(N+Z) - 1/(N+Z+P) = nu` in the rationalized form
/// `2 (P/nu - Z(Z+P)) / (sqrt(P^2 + 4P/nu) + 2Z + P)`.
fn water_fill(power: f64, physical: f64, nu: f64) -> f64 {
    if power == 0.0 || nu >= threshold(power, physical) {
        return 0.0;
    }
    let num = 2.0 * (power / nu - physical * (physical + power));
    let den = (power * power + 4.0 * power / nu).sqrt() + 2.0 * physical + power;
    (num / den).max(0.0)
}

/// Stationarity residual `1/(N+Z) - 1/(N+Z+P) - nu` of one channel.
pub fn gaussian_kkt_residual(power: f64, physical: f64, artificial: f64, nu: f64) -> f64 {
    let t = artificial + physical;
    1.0 / t - 1.0 / (t + power) - nu
}

fn scaled_total(channels: &SubchannelSet, scale: f64, opts: &SolveOptions) -> Result<NoiseAllocation> {
    opts.validate()?;
    let power: Vec<f64> = channels.power().iter().map(|p| scale * p).collect();
    let noise = channels.noise();
    let nu_top = power
        .iter()
        .zip(noise)
        .map(|(&p, &z)| threshold(p, z))
        .fold(0.0, f64::max);
    let fill = |nu: f64| -> Vec<f64> { power.iter().zip(noise).map(|(&p, &z)| water_fill(p, z, nu)).collect() };
    if opts.budget == 0.0 || nu_top == 0.0 {
        // nothing to spend, or nothing to protect
        return NoiseAllocation::new(vec![0.0; channels.len()], nu_top, Objective::Total);
    }
    let nu = solve_dual(|nu| Ok(fill(nu).iter().sum()), nu_top, opts)?;
    NoiseAllocation::new(fit_budget(fill(nu), opts.budget), nu, Objective::Total)
}

/// Minimizes the total Gaussian leakage `sum 1/2 ln(1 + P/(N+Z))` subject to
/// `sum N = budget`.
pub fn allocate_gaussian_total(channels: &SubchannelSet, opts: &SolveOptions) -> Result<NoiseAllocation> {
    scaled_total(channels, 1.0, opts)
}

/// Minimizes the total Sibson leakage of order `alpha`, which is the Gaussian
/// problem with every power scaled by `alpha`.
pub fn allocate_sibson_total(channels: &SubchannelSet, alpha: f64, opts: &SolveOptions) -> Result<NoiseAllocation> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("Sibson order {alpha} must be finite and > 0")));
    }
    scaled_total(channels, alpha, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(budget: f64) -> SolveOptions {
        SolveOptions::new(budget).unwrap()
    }

    #[test]
    fn symmetric_split() {
        let ch = SubchannelSet::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let a = allocate_gaussian_total(&ch, &opts(2.0)).unwrap();
        for &n in a.noise() {
            assert!((n - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_channel_dual() {
        let ch = SubchannelSet::new(vec![1.0], vec![1.0]).unwrap();
        let a = allocate_gaussian_total(&ch, &opts(1.0)).unwrap();
        assert!((a.noise()[0] - 1.0).abs() < 1e-9);
        assert!((a.dual - 1.0 / 6.0).abs() < 1e-9);
        // closed form at exactly nu = 1/6 gives (-3 + 5)/2
        assert!((water_fill(1.0, 1.0, 1.0 / 6.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quiet_channel_stays_inactive() {
        let ch = SubchannelSet::new(vec![1.0, 1.0], vec![1.0, 10.0]).unwrap();
        let a = allocate_gaussian_total(&ch, &opts(0.5)).unwrap();
        assert!((a.noise()[0] - 0.5).abs() < 1e-9);
        assert_eq!(a.noise()[1], 0.0);
        assert!(a.dual >= 0.1 - 1.0 / 11.0);
    }

    #[test]
    fn threshold_tie_is_inactive() {
        let nu = threshold(1.0, 2.0);
        assert_eq!(water_fill(1.0, 2.0, nu), 0.0);
        assert!(water_fill(1.0, 2.0, nu * (1.0 - 1e-9)) > 0.0);
    }

    #[test]
    fn sibson_examples() {
        let ch = SubchannelSet::new(vec![1.0], vec![1.0]).unwrap();
        let a = allocate_sibson_total(&ch, 2.0, &opts(1.0)).unwrap();
        assert!((a.dual - 0.25).abs() < 1e-9);
        let ch = SubchannelSet::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let a = allocate_sibson_total(&ch, 3.0, &opts(1.0)).unwrap();
        assert_eq!(a.noise()[0], 0.0);
        assert!((a.noise()[1] - 1.0).abs() < 1e-9);
        let ch = SubchannelSet::new(vec![2.0, 0.4, 1.3], vec![0.5, 1.0, 2.0]).unwrap();
        assert_eq!(
            allocate_sibson_total(&ch, 1.0, &opts(1.7)).unwrap(),
            allocate_gaussian_total(&ch, &opts(1.7)).unwrap()
        );
        assert!(allocate_sibson_total(&ch, 0.0, &opts(1.0)).is_err());
    }

    #[test]
    fn zero_budget_and_zero_power() {
        let ch = SubchannelSet::new(vec![1.0, 3.0], vec![1.0, 1.0]).unwrap();
        let a = allocate_gaussian_total(&ch, &opts(0.0)).unwrap();
        assert_eq!(a.noise(), &[0.0, 0.0]);
        assert!((a.dual - 0.75).abs() < 1e-15);
        let dark = SubchannelSet::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(allocate_gaussian_total(&dark, &opts(5.0)).unwrap().noise(), &[0.0, 0.0]);
    }

    #[test]
    fn huge_budget_spends_everything() {
        let ch = SubchannelSet::new(vec![1.0, 0.2, 5.0], vec![1e-3, 1.0, 10.0]).unwrap();
        let a = allocate_gaussian_total(&ch, &opts(1e6)).unwrap();
        assert!((a.budget_used() - 1e6).abs() <= 1e-10 * 1e6);
        for i in 0..3 {
            let (p, z, n) = (ch.power()[i], ch.noise()[i], a.noise()[i]);
            assert!(gaussian_kkt_residual(p, z, n, a.dual).abs() <= 1e-9);
        }
    }
}
