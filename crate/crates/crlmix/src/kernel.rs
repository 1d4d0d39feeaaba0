//! Continuation-ratio logits mathematics.
//!
//! An ordinal response with `C` categories is described either by its
//! category probabilities `π = (π_1, …, π_C)` or by `C-1` continuation-ratio
//! logits `θ_j = logit Pr(Y = j | Y ≥ j)`. The two parameterizations are
//! linked by
//!
//! ```text
//! π_1 = φ(θ_1),   π_j = φ(θ_j) Π_{k<j} (1 - φ(θ_k)),   π_C = Π_{k≤C-1} (1 - φ(θ_k))
//! ```
//!
//! with `φ` the standard logistic function. The multinomial pmf then
//! factorizes into a product of Binomials `Bin(Y_j | m_j, φ(θ_j))` where
//! `m_1 = 1` and `m_j = 1 - Σ_{k<j} Y_k`, so categories can be handled one
//! Bernoulli stage at a time. A cumulative-logit model without covariates is
//! an equivalent reparameterization; [`CrLogits::to_cumulative`] maps onto it.

use crate::error::{Error, Result};
use crate::num::{log_one_minus_sigmoid, log_sigmoid, log_sum_exp, sigmoid};
use serde::{Deserialize, Serialize};

/// Continuation-ratio logits `θ_1 … θ_{C-1}` for a `C`-category response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrLogits(Vec<f64>);

/// A strict probability vector over the `C` ordered categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryProbs(Vec<f64>);

/// Cumulative-logit parameters `(ϑ, κ_2 … κ_{C-1})` with the convention
/// `κ_1 = 0`; the model is `Pr(Y ≤ j) = φ(κ_j - ϑ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeLogit {
    pub location: f64,
    /// Cut-off points `κ_2 … κ_{C-1}`, strictly increasing with `κ_2 > 0`.
    pub cutoffs: Vec<f64>,
}

impl CrLogits {
    /// Wraps a logit vector; every entry must be finite and `C ≥ 2`.
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::invalid("need at least one continuation-ratio logit (C >= 2)"));
        }
        if let Some(bad) = theta.iter().position(|t| !t.is_finite()) {
            return Err(Error::invalid(format!("non-finite logit at index {bad}")));
        }
        Ok(CrLogits(theta))
    }

    pub fn n_categories(&self) -> usize {
        self.0.len() + 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Maps the logits to the category probability vector.
    pub fn category_probs(&self) -> CategoryProbs {
        CategoryProbs(category_probs_raw(&self.0))
    }

    /// Log pmf of category `y` (1-based) under the continuation-ratio kernel.
    ///
    /// Accumulated from stable log-sigmoid stage terms, so it stays finite in
    /// log space for |θ| far beyond where the probabilities underflow.
    pub fn log_pmf(&self, y: usize) -> Result<f64> {
        let c = self.n_categories();
        if y < 1 || y > c {
            return Err(Error::invalid(format!("category {y} outside 1..={c}")));
        }
        Ok(log_pmf_raw(&self.0, y))
    }

    /// Reparameterizes into the equivalent cumulative-logit model.
    ///
    /// `ϑ = -θ_1` and the cut-offs follow the recursion
    /// `κ_j = log(e^{κ_{j-1}} + e^{κ_{j-1}+θ_j} + e^{θ_j-θ_1})`, which keeps
    /// them strictly increasing without any explicit order constraint.
    pub fn to_cumulative(&self) -> CumulativeLogit {
        let theta = &self.0;
        let location = -theta[0];
        let mut cutoffs = Vec::with_capacity(theta.len().saturating_sub(1));
        let mut prev = 0.0; // κ_1
        for j in 1..theta.len() {
            let kappa = log_sum_exp(&[prev, prev + theta[j], theta[j] - theta[0]]);
            cutoffs.push(kappa);
            prev = kappa;
        }
        CumulativeLogit { location, cutoffs }
    }
}

/// `π` from raw logits; internal building block shared with the samplers,
/// which carry plain slices instead of validated wrappers.
pub(crate) fn category_probs_raw(theta: &[f64]) -> Vec<f64> {
    let c = theta.len() + 1;
    let mut pi = Vec::with_capacity(c);
    let mut survivor = 1.0; // Π_{k<j} (1 - φ(θ_k)), accumulated as φ(-θ_k)
    for &t in theta {
        pi.push(sigmoid(t) * survivor);
        survivor *= sigmoid(-t);
    }
    pi.push(survivor);
    pi
}

pub(crate) fn log_pmf_raw(theta: &[f64], y: usize) -> f64 {
    let c = theta.len() + 1;
    let mut acc = 0.0;
    for (k, &t) in theta.iter().enumerate().take(y.min(c - 1)) {
        // stage k+1: failure term below y, success term at y
        if k + 1 == y {
            acc += log_sigmoid(t);
        } else {
            acc += log_one_minus_sigmoid(t);
        }
    }
    acc
}

impl CategoryProbs {
    /// Validates a probability vector: `C ≥ 2`, entries strictly in (0, 1),
    /// summing to one within 1e-12.
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.len() < 2 {
            return Err(Error::invalid("need at least two categories"));
        }
        if let Some(bad) = pi.iter().position(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::invalid(format!(
                "probability at index {bad} not strictly inside (0,1): {}",
                pi[bad]
            )));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(CategoryProbs(pi))
    }

    pub fn n_categories(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Inverts the probability map: `θ_j = logit(π_j / (1 - Σ_{k<j} π_k))`.
    ///
    /// The conditioning denominator is accumulated as the tail sum
    /// `Σ_{k≥j} π_k` (all positive terms, no cancellation), so the logit is
    /// `ln(π_j / Σ_{k>j} π_k)`. Fails with a domain error if a conditional
    /// probability collapses onto 0 or 1 (the logit singularities).
    pub fn to_logits(&self) -> Result<CrLogits> {
        let pi = &self.0;
        let c = pi.len();
        // tails[j] = Σ_{k>j} π_k
        let mut tails = vec![0.0; c];
        for j in (0..c - 1).rev() {
            tails[j] = tails[j + 1] + pi[j + 1];
        }
        let mut theta = Vec::with_capacity(c - 1);
        for (j, &p) in pi[..c - 1].iter().enumerate() {
            if tails[j] <= 0.0 {
                return Err(Error::domain("partial probability sums reach 1".to_string()));
            }
            let logit = (p / tails[j]).ln();
            if !logit.is_finite() {
                return Err(Error::domain(format!(
                    "conditional probability of category {} is degenerate; logit undefined",
                    j + 1
                )));
            }
            theta.push(logit);
        }
        CrLogits::new(theta)
    }
}

impl CumulativeLogit {
    /// Category probabilities implied by `Pr(Y ≤ j) = φ(κ_j - ϑ)`, `κ_1 = 0`.
    pub fn category_probs(&self) -> Vec<f64> {
        let c = self.cutoffs.len() + 2;
        let mut cum = Vec::with_capacity(c);
        cum.push(sigmoid(-self.location));
        for &k in &self.cutoffs {
            cum.push(sigmoid(k - self.location));
        }
        let mut pi = Vec::with_capacity(c);
        let mut prev = 0.0;
        for &q in &cum {
            pi.push(q - prev);
            prev = q;
        }
        pi.push(1.0 - prev);
        pi
    }
}
