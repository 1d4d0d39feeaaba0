//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)]

use crlmix::num::{log_sigmoid, log_one_minus_sigmoid, sigmoid};
use crlmix::randvar::{sample_logistic, sample_pg};
use crlmix::rng::RngStream;
use crlmix::OrdinalDataset;
use nalgebra::{DMatrix, DVector};

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|u, v| u.partial_cmp(v).unwrap());
    b.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (n, m) = (a.len(), b.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let f1 = i as f64 / n as f64;
        let f2 = j as f64 / m as f64;
        d = d.max((f1 - f2).abs());
    }
    let ne = (n as f64 * m as f64) / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * lambda * lambda).exp();
        p += if k % 2 == 1 { term } else { -term };
    }
    (d, p.clamp(0.0, 1.0))
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    crlmix::num::mean_se(xs)
}

/// Sample variance and the standard error of the variance estimate.
pub fn var_se(xs: &[f64]) -> (f64, f64) {
    crlmix::num::var_se(xs)
}

/// Standard error of an autocorrelated chain mean by batch means.
pub fn batch_means_se(xs: &[f64], n_batches: usize) -> f64 {
    let b = xs.len() / n_batches;
    assert!(b >= 2, "chain too short for {n_batches} batches");
    let means: Vec<f64> = (0..n_batches)
        .map(|k| xs[k * b..(k + 1) * b].iter().sum::<f64>() / b as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / n_batches as f64;
    let var_b = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (n_batches as f64 - 1.0);
    (var_b / n_batches as f64).sqrt()
}

/// Total-variation distance between two pmfs.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Empirical pmf of the sequential latent-logistic route: draw independent
/// logistic coordinates around each stage logit and report the first
/// positive one (the last category when none is positive).
pub fn latent_logistic_pmf(theta: &[f64], n_draws: usize, rng: &mut RngStream) -> Vec<f64> {
    let c = theta.len() + 1;
    let mut counts = vec![0u64; c];
    for _ in 0..n_draws {
        let mut y = c;
        for (j, &t) in theta.iter().enumerate() {
            if sample_logistic(t, rng) > 0.0 {
                y = j + 1;
                break;
            }
        }
        counts[y - 1] += 1;
    }
    counts.iter().map(|&k| k as f64 / n_draws as f64).collect()
}

/// Chi-squared upper critical values at level 0.01 for df = 1..=9.
pub const CHI2_CRIT_01: [f64; 9] = [
    6.634896601021213,
    9.21034037197618,
    11.344866730144371,
    13.276704135987622,
    15.08627246938899,
    16.811893829770927,
    18.475306906582357,
    20.090235029663233,
    21.665994333461924,
];

/// A deliberately simple, independently coded Gibbs sampler for the
/// parametric continuation-ratio logits regression with NIW centering:
/// `Y_i | β ~ Π_j Bin(Y_ij | m_ij, φ(x_iᵀβ_j))`, `β_j ~ N(μ_j, Σ_j)`,
/// `(μ_j, Σ_j) ~ NIW(μ0, κ0, ν0, Λ0)`. Written with plain loops and direct
/// matrix inversion so it shares nothing with the mixture sampler's update
/// machinery beyond the scalar PG draw.
pub struct ParametricCrlOracle {
    pub mu0: DVector<f64>,
    pub lambda0: DMatrix<f64>,
    pub kappa0: f64,
    pub nu0: f64,
}

pub struct OracleRun {
    /// `beta[draw][stage]` retained coefficient vectors.
    pub beta: Vec<Vec<DVector<f64>>>,
}

impl ParametricCrlOracle {
    pub fn run(
        &self,
        data: &OrdinalDataset,
        n_iter: usize,
        burn_in: usize,
        rng: &mut RngStream,
    ) -> OracleRun {
        let p = data.p();
        let c = data.n_categories();
        let n = data.n();
        let n_stages = c - 1;

        let mut mu: Vec<DVector<f64>> = vec![self.mu0.clone(); n_stages];
        let mut sigma: Vec<DMatrix<f64>> = vec![self.lambda0.clone() / (self.nu0 - p as f64 - 1.0); n_stages];
        let mut beta: Vec<DVector<f64>> = vec![self.mu0.clone(); n_stages];
        let mut zeta = vec![vec![0.25f64; n_stages]; n];
        let mut kept = Vec::new();

        for it in 0..n_iter {
            // ζ | β
            for i in 0..n {
                let x = data.row(i);
                for j in 0..data.active_stages(i) {
                    let tilt: f64 = x.iter().zip(beta[j].iter()).map(|(a, b)| a * b).sum();
                    zeta[i][j] = sample_pg(1, tilt, rng).unwrap();
                }
            }
            // β_j | ζ, μ, Σ
            for j in 0..n_stages {
                let sig_inv = sigma[j].clone().try_inverse().unwrap();
                let mut prec = sig_inv.clone();
                let mut lin = &sig_inv * &mu[j];
                for i in 0..n {
                    if data.active_stages(i) > j {
                        let x = data.row(i);
                        let ups = if data.indicator(i, j + 1) { 0.5 } else { -0.5 };
                        for a in 0..p {
                            lin[a] += ups * x[a];
                            for b in 0..p {
                                prec[(a, b)] += zeta[i][j] * x[a] * x[b];
                            }
                        }
                    }
                }
                let cov = prec.try_inverse().unwrap();
                let mean = &cov * &lin;
                beta[j] = mvn_draw(&mean, &cov, rng);
            }
            // (μ_j, Σ_j) | β_j  — NIW update with a single "observation"
            for j in 0..n_stages {
                let kappa_star = self.kappa0 + 1.0;
                let nu_star = self.nu0 + 1.0;
                let mu_star = (&self.mu0 * self.kappa0 + &beta[j]) / kappa_star;
                let dev = &beta[j] - &self.mu0;
                let lambda_star = &self.lambda0 + (&dev * dev.transpose()) * (self.kappa0 / kappa_star);
                let s = crlmix::randvar::sample_inverse_wishart(nu_star, &lambda_star, rng).unwrap();
                let m = mvn_draw(&mu_star, &(s.clone() / kappa_star), rng);
                sigma[j] = s;
                mu[j] = m;
            }
            if it >= burn_in {
                kept.push(beta.clone());
            }
        }
        OracleRun { beta: kept }
    }
}

fn mvn_draw(mean: &DVector<f64>, cov: &DMatrix<f64>, rng: &mut RngStream) -> DVector<f64> {
    crlmix::randvar::sample_mvn(mean, cov, rng).unwrap()
}

/// Log pmf of the continuation-ratio kernel computed the pedestrian way,
/// for use as an independent check.
pub fn crl_log_pmf_direct(theta: &[f64], y: usize) -> f64 {
    let c = theta.len() + 1;
    let mut acc = 0.0;
    for j in 1..=c.min(y) {
        if j == y && j <= c - 1 {
            acc += log_sigmoid(theta[j - 1]);
        } else if j < y {
            acc += log_one_minus_sigmoid(theta[j - 1]);
        }
    }
    acc
}

/// Direct mixture category probabilities, `Σ_l w_l K(· | θ_l)`.
pub fn mixture_pmf(weights: &[f64], thetas: &[Vec<f64>]) -> Vec<f64> {
    let c = thetas[0].len() + 1;
    let mut out = vec![0.0; c];
    for (w, th) in weights.iter().zip(thetas) {
        let mut survivor = 1.0;
        for (j, &t) in th.iter().enumerate() {
            let phi = sigmoid(t);
            out[j] += w * phi * survivor;
            survivor *= 1.0 - phi;
        }
        out[c - 1] += w * survivor;
    }
    out
}

/// Quantile of a sample (sorted copy; linear interpolation).
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    crlmix::num::quantile_sorted(&s, q)
}
