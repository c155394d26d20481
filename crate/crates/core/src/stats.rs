//! Small statistical helpers shared by the estimators and the test suite.

/// Two-sided 99% normal quantile: Phi^-1(0.995).
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Wilson score interval for a binomial proportion at 99% confidence.
///
/// Returns `(lo, hi)` clamped to [0, 1].  For `n = 0` the interval is the
/// uninformative [0, 1].
pub fn wilson99(successes: u64, n: u64) -> (f64, f64) {
    wilson(successes, n, Z_99)
}

/// Wilson score interval for an arbitrary z.
pub fn wilson(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let scale = 1.0 / (1.0 + z2 / n);
    let center = p + z2 / (2.0 * n);
    let margin = (z / (2.0 * n)) * (4.0 * n * p * (1.0 - p) + z2).sqrt();
    (
        (scale * (center - margin)).max(0.0),
        (scale * (center + margin)).min(1.0),
    )
}

/// Plain binomial standard error of an observed proportion.
pub fn binomial_se(successes: u64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let p = successes as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Mean and sample standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// 99% normal confidence interval for the mean of `xs`.
pub fn mean_ci99(xs: &[f64]) -> (f64, f64, f64) {
    let (mean, sd) = mean_sd(xs);
    let half = Z_99 * sd / (xs.len() as f64).sqrt();
    (mean, mean - half, mean + half)
}

/// One-sample Kolmogorov-Smirnov statistic against the uniform distribution
/// on [0, hi).  `samples` need not be sorted.
pub fn ks_uniform(samples: &[f64], hi: f64) -> f64 {
    let mut xs: Vec<f64> = samples.iter().map(|&x| x / hi).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((x - lo).abs()).max((hi - x).abs());
    }
    d
}

/// Asymptotic critical value for the one-sample KS statistic at significance
/// `alpha`: reject uniformity when the statistic exceeds this.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Chi-squared statistic for independence in a 2x2 contingency table
/// [[a, b], [c, d]].  Returns 0 when a margin is empty.
pub fn chi2_independence_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let n = a + b + c + d;
    let r1 = a + b;
    let r2 = c + d;
    let c1 = a + c;
    let c2 = b + d;
    if r1 == 0.0 || r2 == 0.0 || c1 == 0.0 || c2 == 0.0 {
        return 0.0;
    }
    let num = a * d - b * c;
    n * num * num / (r1 * r2 * c1 * c2)
}

/// Chi-squared upper quantile for one degree of freedom at significance 1e-3.
pub const CHI2_DF1_P999: f64 = 10.827_566_170_662_733;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_matches_hand_computation() {
        // 8 successes in 10 trials at z = 1.96: the classic textbook case.
        let (lo, hi) = wilson(8, 10, 1.96);
        assert!((lo - 0.4901625).abs() < 1e-4, "lo = {lo}");
        assert!((hi - 0.9433178).abs() < 1e-4, "hi = {hi}");
    }

    #[test]
    fn wilson_is_clamped_and_ordered() {
        for &(s, n) in &[(0u64, 10u64), (10, 10), (1, 1), (0, 1), (5, 10)] {
            let (lo, hi) = wilson99(s, n);
            assert!((0.0..=1.0).contains(&lo));
            assert!((0.0..=1.0).contains(&hi));
            assert!(lo <= hi);
            let p = s as f64 / n as f64;
            assert!(lo <= p && p <= hi);
        }
    }

    #[test]
    fn ks_detects_gross_nonuniformity() {
        let clumped: Vec<f64> = (0..1000).map(|i| 0.1 + 1e-4 * i as f64).collect();
        assert!(ks_uniform(&clumped, 1.0) > ks_critical(1000, 1e-3));
    }

    #[test]
    fn ks_accepts_a_uniform_grid() {
        let grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_uniform(&grid, 1.0) < ks_critical(1000, 1e-3));
    }

    #[test]
    fn chi2_zero_for_perfectly_independent_table() {
        assert_eq!(chi2_independence_2x2(10.0, 20.0, 30.0, 60.0), 0.0);
    }

    #[test]
    fn chi2_large_for_dependent_table() {
        assert!(chi2_independence_2x2(50.0, 0.0, 0.0, 50.0) > CHI2_DF1_P999);
    }
}
