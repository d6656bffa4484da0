//! Estimator and goodness-of-fit helpers shared by the simulator and the
//! validation suites.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 95% standard-normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Standard error of a binomial proportion estimate.
pub fn binomial_standard_error(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials.max(1) as f64).sqrt()
}

/// One-sample Kolmogorov–Smirnov statistic. `samples` must be sorted.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Pearson chi-square statistic. Cells with zero expectation must have zero
/// observations; they are skipped.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Upper-tail critical value of the chi-square distribution.
pub fn chi_square_critical(degrees_of_freedom: usize, alpha: f64) -> f64 {
    ChiSquared::new(degrees_of_freedom as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha)
}

/// Upper-tail probability of a chi-square statistic.
pub fn chi_square_p_value(statistic: f64, degrees_of_freedom: usize) -> f64 {
    ChiSquared::new(degrees_of_freedom as f64)
        .expect("positive degrees of freedom")
        .sf(statistic)
}

/// Sample mean and unbiased variance.
pub fn mean_variance(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for x in values {
        n += 1.0;
        let delta = x - mean;
        mean += delta / n;
        m2 += delta * (x - mean);
    }
    let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_single_success() {
        // Closed form with p = 1, n = 1: lower = 1 / (1 + z^2).
        let (lo, hi) = wilson_interval(1, 1, Z_95);
        assert!((lo - 1.0 / (1.0 + Z_95 * Z_95)).abs() < 1e-12);
        assert!((lo - 0.2065).abs() < 1e-4);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn wilson_brackets_estimate() {
        for (k, n) in [(0, 10), (3, 10), (50, 100), (999, 1000)] {
            let (lo, hi) = wilson_interval(k, n, Z_95);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi);
        }
    }

    #[test]
    fn ks_of_exact_quantiles_is_half_step() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn chi_square_reference_values() {
        assert!((chi_square_critical(7, 0.001) - 24.321_886).abs() < 1e-4);
        assert!((chi_square_critical(49, 0.01) - 74.919_5).abs() < 1e-3);
        assert_eq!(chi_square(&[10, 10], &[10.0, 10.0]), 0.0);
    }

    #[test]
    fn mean_variance_matches_definition() {
        let (m, v) = mean_variance([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((v - 5.0 / 3.0).abs() < 1e-12);
    }
}
