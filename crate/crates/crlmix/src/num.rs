//! Stable scalar numerics shared across the crate.

/// Standard logistic function, `exp(t) / (1 + exp(t))`.
///
/// Evaluated branch-wise so that |t| up to ~700 neither overflows nor loses
/// the small-probability branch to cancellation.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(u))` without overflow for large |u|.
#[inline]
pub fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// `log φ(t)`, the log of the logistic function.
#[inline]
pub fn log_sigmoid(t: f64) -> f64 {
    -softplus(-t)
}

/// `log(1 - φ(t)) = log φ(-t)`.
#[inline]
pub fn log_one_minus_sigmoid(t: f64) -> f64 {
    -softplus(t)
}

/// `log Σ exp(x_k)` guarded against overflow; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// Standard normal distribution function via `erfc` for tail accuracy.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `log Φ(x)`, switching to the asymptotic expansion deep in the lower tail
/// where `erfc` underflows.
pub fn log_normal_cdf(x: f64) -> f64 {
    if x > -10.0 {
        normal_cdf(x).ln()
    } else {
        // Φ(x) ≈ φ(x)/|x| · (1 - 1/x² + 3/x⁴) for x → -∞
        let x2 = x * x;
        -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
    }
}

/// Mean and standard error of the mean of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance together with the standard error of the variance estimate
/// (moment-based, `SE² = (m4 - m2²)/n`).
pub fn var_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    (var, ((m4 - m2 * m2) / n).sqrt())
}

/// Empirical quantile with linear interpolation between order statistics.
///
/// `sorted` must be ascending; `q` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}
