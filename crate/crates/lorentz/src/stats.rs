//! Small statistics helpers shared by the estimators and the verification
//! harness: Wilson score intervals for binomial proportions and one-sample
//! Kolmogorov–Smirnov tests.

/// Wilson score interval for `k` successes out of `n` at normal quantile `z`.
/// Returns `(center, half_width)`.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    assert!(n > 0);
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    (center, half)
}

/// One standard error of a binomial proportion estimate.
pub fn binomial_sigma(k: u64, n: u64) -> f64 {
    let p = k as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

/// One-sample Kolmogorov–Smirnov statistic of `data` against the CDF `cdf`.
/// Sorts in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(data: &mut [f64], cdf: F) -> f64 {
    assert!(!data.is_empty());
    data.sort_by(|a, b| a.total_cmp(b));
    let n = data.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in data.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Asymptotic critical value of the one-sample KS statistic: reject at level
/// `alpha` when `D > c(alpha)/√n`. Only 0.01 and 0.05 are tabulated.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    let c = if alpha <= 0.01 {
        1.62762
    } else {
        1.35810
    };
    c / (n as f64).sqrt()
}

/// Two-sided z critical value used for the 95% Wilson intervals.
pub const Z95: f64 = 1.959963984540054;
