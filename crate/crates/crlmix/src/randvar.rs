//! Seeded random variates: Pólya-Gamma, multivariate normal, inverse-Wishart,
//! Beta/Gamma wrappers and logit-normal expectation utilities.
//!
//! The Pólya-Gamma sampler is the exact alternating-series rejection sampler
//! (Devroye-style) for `PG(1, c)`, with integer `b > 1` handled by additivity.
//! All multivariate draws go through a Cholesky factorization guarded by an
//! escalating diagonal jitter ladder, since the posterior precision matrices
//! formed by the Gibbs steps can be near singular with collinear covariates.

use crate::error::{Error, Result};
use crate::num::{log_normal_cdf, log_sum_exp, sigmoid};
use crate::rng::RngStream;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, Exp1, Gamma as GammaDist, StandardNormal};

/// Truncation point of the piecewise proposal for the Pólya-Gamma sampler.
const PG_T: f64 = 0.64;

/// Draws from `PG(b, c)` for integer `b ≥ 1` as a sum of `b` independent
/// `PG(1, c)` variates. `b = 0` is rejected: degenerate latents (`m_ij = 0`)
/// must be skipped by the caller, not sampled.
pub fn sample_pg(b: u32, c: f64, rng: &mut RngStream) -> Result<f64> {
    if b == 0 {
        return Err(Error::invalid("PG(0, c) is degenerate at zero; skip the latent instead"));
    }
    Ok((0..b).map(|_| sample_pg1(c, rng)).sum())
}

/// Exact `PG(1, c)` draw.
///
/// Samples the tilted Jacobi variable `J*(1, |c|/2)` by rejection from a
/// two-piece envelope (truncated inverse-Gaussian left of `t = 0.64`,
/// exponential right of it), accepting through the alternating partial sums
/// of the series expansion of the density; the result is `J*/4`.
pub fn sample_pg1(c: f64, rng: &mut RngStream) -> f64 {
    let z = 0.5 * c.abs();
    let k = std::f64::consts::PI.powi(2) / 8.0 + 0.5 * z * z;

    // Envelope piece masses, kept in logs so extreme tilts do not underflow:
    // right tail p = π/(2K) e^{-Kt}, left q = 2 e^{-z} F_IG(t; 1/z, 1).
    let log_p = (std::f64::consts::PI / (2.0 * k)).ln() - k * PG_T;
    let log_q = std::f64::consts::LN_2 - z + log_inv_gauss_cdf_at_t(z);
    let prob_right = 1.0 / (1.0 + (log_q - log_p).exp());

    loop {
        let x = if rng.random::<f64>() < prob_right {
            let e: f64 = Exp1.sample(rng);
            PG_T + e / k
        } else {
            sample_trunc_inv_gauss(z, rng)
        };

        // Alternating series: odd partial sums bound the density from below
        // (accept), even ones from above (reject and propose again).
        let mut s = pg_series_coef(0, x);
        let y = rng.random::<f64>() * s;
        let mut n = 0usize;
        loop {
            n += 1;
            if n % 2 == 1 {
                s -= pg_series_coef(n, x);
                if y <= s {
                    return 0.25 * x;
                }
            } else {
                s += pg_series_coef(n, x);
                if y > s {
                    break;
                }
            }
        }
    }
}

/// `log F_IG(t; μ = 1/z, λ = 1)` evaluated at the envelope cut `t`.
///
/// `F_IG(t) = Φ((tz-1)/√t) + e^{2z} Φ(-(tz+1)/√t)`; the `z = 0` limit is the
/// Lévy distribution value `2Φ(-1/√t)`.
fn log_inv_gauss_cdf_at_t(z: f64) -> f64 {
    let rt = PG_T.sqrt();
    let a = log_normal_cdf((PG_T * z - 1.0) / rt);
    let b = 2.0 * z + log_normal_cdf(-(PG_T * z + 1.0) / rt);
    log_sum_exp(&[a, b])
}

/// Coefficient `a_n(x)` of the series expansion, piecewise in `x` around `t`.
fn pg_series_coef(n: usize, x: f64) -> f64 {
    let half = n as f64 + 0.5;
    let k = half * std::f64::consts::PI;
    if x > PG_T {
        k * (-0.5 * k * k * x).exp()
    } else {
        k * (2.0 / (std::f64::consts::PI * x)).powf(1.5) * (-2.0 * half * half / x).exp()
    }
}

/// Inverse-Gaussian `IG(1/z, 1)` truncated to `(0, t]`.
fn sample_trunc_inv_gauss(z: f64, rng: &mut RngStream) -> f64 {
    if z * PG_T < 1.0 {
        // μ = 1/z > t (or z = 0): propose from the truncated Lévy and thin
        // by the exponential tilt.
        loop {
            let e1: f64 = loop {
                let e1: f64 = Exp1.sample(rng);
                let e2: f64 = Exp1.sample(rng);
                if e1 * e1 <= 2.0 * e2 / PG_T {
                    break e1;
                }
            };
            let x = PG_T / ((1.0 + PG_T * e1) * (1.0 + PG_T * e1));
            if rng.random::<f64>() <= (-0.5 * z * z * x).exp() {
                return x;
            }
        }
    } else {
        // μ ≤ t: plain inverse-Gaussian draws until one lands inside.
        let mu = 1.0 / z;
        loop {
            let w: f64 = StandardNormal.sample(rng);
            let y = w * w;
            let muy = mu * y;
            let mut x = mu + 0.5 * mu * muy - 0.5 * mu * (4.0 * muy + muy * muy).sqrt();
            if rng.random::<f64>() * (mu + x) > mu {
                x = mu * mu / x;
            }
            if x <= PG_T {
                return x;
            }
        }
    }
}

/// Cholesky factorization with an escalating jitter ladder.
///
/// Starts from the matrix as given (symmetrized), then adds
/// `10^{-10} · trace/p` to the diagonal, escalating tenfold up to
/// `10^{-4} · trace/p` before failing with condition diagnostics.
pub fn cholesky_with_jitter(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let p = m.nrows();
    if p == 0 || m.ncols() != p {
        return Err(Error::dim(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    let sym = (m + m.transpose()) * 0.5;
    if let Some(chol) = Cholesky::new(sym.clone()) {
        return Ok(chol);
    }
    let base = sym.trace().abs().max(f64::MIN_POSITIVE) / p as f64;
    let mut level = 1e-10;
    while level <= 1e-4 {
        let jittered = &sym + DMatrix::identity(p, p) * (level * base);
        if let Some(chol) = Cholesky::new(jittered) {
            return Ok(chol);
        }
        level *= 10.0;
    }
    let diag_min = sym.diagonal().min();
    let diag_max = sym.diagonal().max();
    Err(Error::numeric(format!(
        "Cholesky failed after jitter ladder up to 1e-4*trace/p (p={p}, trace={:.3e}, diag range [{:.3e}, {:.3e}])",
        sym.trace(),
        diag_min,
        diag_max
    )))
}

/// Multivariate normal draw `N(mean, cov)`.
pub fn sample_mvn(mean: &DVector<f64>, cov: &DMatrix<f64>, rng: &mut RngStream) -> Result<DVector<f64>> {
    if cov.nrows() != mean.len() {
        return Err(Error::dim(format!(
            "mean has length {} but covariance is {}x{}",
            mean.len(),
            cov.nrows(),
            cov.ncols()
        )));
    }
    let chol = cholesky_with_jitter(cov)?;
    let z = DVector::from_fn(mean.len(), |_, _| StandardNormal.sample(rng));
    Ok(mean + chol.l() * z)
}

/// Multivariate normal draw parameterized by the natural parameters of a
/// Gaussian full conditional: precision matrix `P` and linear term `b`, i.e.
/// `N(P^{-1} b, P^{-1})`, factorizing `P` only once.
pub fn sample_mvn_from_precision(
    lin: &DVector<f64>,
    precision: &DMatrix<f64>,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let chol = cholesky_with_jitter(precision)?;
    let mean = chol.solve(lin);
    let z = DVector::from_fn(lin.len(), |_, _| StandardNormal.sample(rng));
    // solve Lᵀ w = z so that w ~ N(0, P^{-1})
    let w = chol
        .l()
        .tr_solve_lower_triangular(&z)
        .ok_or_else(|| Error::numeric("triangular solve failed in precision sampler"))?;
    Ok(mean + w)
}

/// Inverse-Wishart draw with mean `scale / (nu - p - 1)` (for `nu > p + 1`).
///
/// Uses the Bartlett decomposition of the Wishart `W(nu, scale^{-1})` and
/// inverts the draw; the returned matrix is exactly symmetric.
pub fn sample_inverse_wishart(
    nu: f64,
    scale: &DMatrix<f64>,
    rng: &mut RngStream,
) -> Result<DMatrix<f64>> {
    let p = scale.nrows();
    if scale.ncols() != p || p == 0 {
        return Err(Error::dim("scale matrix must be square".to_string()));
    }
    if nu <= p as f64 - 1.0 {
        return Err(Error::invalid(format!(
            "inverse-Wishart needs nu > p - 1 (got nu = {nu}, p = {p})"
        )));
    }
    // V = scale^{-1} via the Cholesky of scale
    let scale_chol = cholesky_with_jitter(scale)?;
    let v = scale_chol.inverse();
    let v_chol = cholesky_with_jitter(&v)?;

    // Bartlett: lower-triangular A with chi-squared diagonal
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        let df = nu - i as f64;
        let chi2 = GammaDist::new(df / 2.0, 2.0)
            .map_err(|e| Error::invalid(format!("chi-square dof invalid: {e}")))?;
        a[(i, i)] = chi2.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let b = v_chol.l() * a;
    let w = &b * b.transpose();
    let w_chol = cholesky_with_jitter(&w)?;
    let mut sigma = w_chol.inverse();
    // mirror the lower triangle so the result is symmetric to the bit
    for i in 0..p {
        for j in 0..i {
            sigma[(j, i)] = sigma[(i, j)];
        }
    }
    Ok(sigma)
}

/// Gamma draw parameterized by shape and **rate**.
pub fn sample_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    let g = GammaDist::new(shape, 1.0 / rate)
        .map_err(|e| Error::invalid(format!("gamma({shape}, rate {rate}): {e}")))?;
    Ok(g.sample(rng))
}

pub fn sample_beta(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    let d = BetaDist::new(a, b).map_err(|e| Error::invalid(format!("beta({a}, {b}): {e}")))?;
    Ok(d.sample(rng))
}

pub fn sample_normal(mean: f64, sd: f64, rng: &mut RngStream) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + sd * z
}

/// Logistic draw with the given mean and unit scale.
pub fn sample_logistic(mean: f64, rng: &mut RngStream) -> f64 {
    let u: f64 = rand_distr::Open01.sample(rng);
    mean + (u / (1.0 - u)).ln()
}

/// Parameters of a logit-normal law: `φ(Z)` with `Z ~ N(mu, sigma2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogitNormalParams {
    pub mu: f64,
    pub sigma2: f64,
}

impl LogitNormalParams {
    pub fn new(mu: f64, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !mu.is_finite() || !sigma2.is_finite() {
            return Err(Error::invalid(format!(
                "logit-normal needs finite mu and sigma2 > 0 (got mu={mu}, sigma2={sigma2})"
            )));
        }
        Ok(LogitNormalParams { mu, sigma2 })
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
}

/// Default Monte-Carlo size for logit-normal expectations (SE ≈ 0.0016).
pub const LOGIT_NORMAL_MC_DEFAULT: usize = 100_000;

/// Monte-Carlo estimate of `E(φ(Z))`, `Z ~ N(mu, sigma2)`. The expectation
/// has no closed form; it is simulated and reported with its standard error.
pub fn logit_normal_mean_mc(
    params: LogitNormalParams,
    n_mc: usize,
    rng: &mut RngStream,
) -> Result<McEstimate> {
    if n_mc < 1 {
        return Err(Error::invalid("need at least one Monte Carlo draw"));
    }
    let sd = params.sigma2.sqrt();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_mc {
        let z: f64 = StandardNormal.sample(rng);
        let v = sigmoid(params.mu + sd * z);
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / n_mc as f64;
    let var = (sum_sq / n_mc as f64 - mean * mean).max(0.0);
    Ok(McEstimate { mean, se: (var / n_mc as f64).sqrt() })
}

/// Sharp bracket for the logit-normal mean:
/// `φ(μ - σ²/2) ≤ E(φ(Z)) ≤ φ(μ + σ²/2)`.
pub fn logit_normal_mean_bounds(params: LogitNormalParams) -> (f64, f64) {
    (
        sigmoid(params.mu - 0.5 * params.sigma2),
        sigmoid(params.mu + 0.5 * params.sigma2),
    )
}
