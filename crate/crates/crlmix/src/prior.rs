//! Model specification and prior elicitation.
//!
//! A [`ModelSpec`] carries the variant tag, the dimensions and every
//! hyperparameter of the hierarchical prior. Three construction routes are
//! provided: the non-informative [`baseline_prior`], the monotonicity-informed
//! solver [`monotone_prior_solve`] for a single covariate, and explicit
//! assembly. [`choose_truncation`] picks the stick-breaking truncation level
//! from the prior expected partial sum of weights.

use crate::error::{Error, Result};
use crate::kernel::category_probs_raw;
use crate::num::sigmoid;
use crate::randvar::{
    logit_normal_mean_mc, sample_inverse_wishart, sample_mvn, sample_normal, LogitNormalParams,
};
use crate::rng::RngStream;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Model variant: where the covariates enter the mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Covariate-dependent atoms and covariate-dependent stick-breaking weights.
    General,
    /// Covariate-dependent atoms, Dirichlet-process (covariate-free) weights.
    CommonWeights,
    /// Covariate-free scalar atoms, covariate-dependent weights.
    CommonAtoms,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::General => write!(f, "general"),
            Variant::CommonWeights => write!(f, "common-weights"),
            Variant::CommonAtoms => write!(f, "common-atoms"),
        }
    }
}

/// Normal–inverse-Wishart hyperparameters for one category's regression atoms:
/// `Σ ~ IW(nu0, lambda0^{-1})` (mean `lambda0/(nu0-p-1)`), `μ | Σ ~ N(mu0, Σ/kappa0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NiwParams {
    pub mu0: DVector<f64>,
    pub lambda0: DMatrix<f64>,
    pub kappa0: f64,
    pub nu0: f64,
}

/// Normal–inverse-gamma hyperparameters for one category's scalar atoms:
/// `σ² ~ IG(a0, b0)`, `μ | σ² ~ N(mu0, σ²/nu0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigParams {
    pub mu0: f64,
    pub nu0: f64,
    pub a0: f64,
    pub b0: f64,
}

/// Per-category atom hyperparameters (length `C-1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AtomsPrior {
    /// Regression atoms `β_{jl} ~ N(μ_j, Σ_j)` with NIW centering.
    Regression(Vec<NiwParams>),
    /// Scalar atoms `θ_{jl} ~ N(μ_j, σ_j²)` with NIG centering.
    Scalar(Vec<NigParams>),
}

/// Weight-process hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightsPrior {
    /// Logit stick-breaking: `γ_l i.i.d. ~ N(gamma0, gamma_cov0)`.
    Lsbp {
        gamma0: DVector<f64>,
        gamma_cov0: DMatrix<f64>,
    },
    /// Dirichlet process sticks `V_l ~ Beta(1, α)`, `α ~ Gamma(a_alpha, b_alpha)`.
    Dp { a_alpha: f64, b_alpha: f64 },
}

/// Complete specification of one of the three mixture models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: Variant,
    pub c: usize,
    pub p: usize,
    pub atoms: AtomsPrior,
    pub weights: WeightsPrior,
    /// Stick-breaking truncation level; `L ≥ 2` for mixture inference, while
    /// `L = 1` collapses the model onto its parametric backbone (no weight
    /// parameters, a single shared component).
    pub truncation: usize,
}

impl ModelSpec {
    /// Checks internal consistency: variant/block pairing, dimensions,
    /// positive definiteness and moment-existence constraints.
    pub fn validate(&self) -> Result<()> {
        if self.c < 2 {
            return Err(Error::invalid(format!("C must be >= 2, got {}", self.c)));
        }
        if self.p < 1 {
            return Err(Error::invalid("p must be >= 1 (the intercept)"));
        }
        if self.truncation < 1 {
            return Err(Error::invalid("truncation level must be >= 1"));
        }
        match (self.variant, &self.atoms, &self.weights) {
            (Variant::General, AtomsPrior::Regression(_), WeightsPrior::Lsbp { .. }) => {}
            (Variant::CommonWeights, AtomsPrior::Regression(_), WeightsPrior::Dp { .. }) => {}
            (Variant::CommonAtoms, AtomsPrior::Scalar(_), WeightsPrior::Lsbp { .. }) => {}
            _ => {
                return Err(Error::invalid(format!(
                    "hyperparameter blocks inconsistent with the {} variant",
                    self.variant
                )))
            }
        }
        match &self.atoms {
            AtomsPrior::Regression(per_j) => {
                if per_j.len() != self.c - 1 {
                    return Err(Error::dim(format!(
                        "need {} atom blocks, got {}",
                        self.c - 1,
                        per_j.len()
                    )));
                }
                for (j, niw) in per_j.iter().enumerate() {
                    if niw.mu0.len() != self.p
                        || niw.lambda0.nrows() != self.p
                        || niw.lambda0.ncols() != self.p
                    {
                        return Err(Error::dim(format!("atom block {j} dimensions differ from p={}", self.p)));
                    }
                    if !(niw.kappa0 > 0.0) {
                        return Err(Error::invalid(format!("kappa0 must be positive in block {j}")));
                    }
                    if !(niw.nu0 > self.p as f64 + 1.0) {
                        return Err(Error::invalid(format!(
                            "nu0 must exceed p+1 so the inverse-Wishart mean exists (block {j})"
                        )));
                    }
                    if nalgebra::Cholesky::new(niw.lambda0.clone()).is_none() {
                        return Err(Error::invalid(format!("lambda0 not positive definite in block {j}")));
                    }
                }
            }
            AtomsPrior::Scalar(per_j) => {
                if per_j.len() != self.c - 1 {
                    return Err(Error::dim(format!(
                        "need {} atom blocks, got {}",
                        self.c - 1,
                        per_j.len()
                    )));
                }
                for (j, nig) in per_j.iter().enumerate() {
                    if !(nig.nu0 > 0.0 && nig.b0 > 0.0) {
                        return Err(Error::invalid(format!("nu0 and b0 must be positive in block {j}")));
                    }
                    if !(nig.a0 > 1.0) {
                        return Err(Error::invalid(format!(
                            "a0 must exceed 1 so the inverse-gamma mean exists (block {j})"
                        )));
                    }
                }
            }
        }
        match &self.weights {
            WeightsPrior::Lsbp { gamma0, gamma_cov0 } => {
                if gamma0.len() != self.p || gamma_cov0.nrows() != self.p || gamma_cov0.ncols() != self.p {
                    return Err(Error::dim("weight block dimensions differ from p".to_string()));
                }
                if nalgebra::Cholesky::new(gamma_cov0.clone()).is_none() {
                    return Err(Error::invalid("gamma_cov0 not positive definite"));
                }
            }
            WeightsPrior::Dp { a_alpha, b_alpha } => {
                if !(*a_alpha > 0.0 && *b_alpha > 0.0) {
                    return Err(Error::invalid("DP mass hyperparameters must be positive"));
                }
            }
        }
        Ok(())
    }

    /// 64-bit FNV-1a hash of the canonical JSON encoding, used to stamp draws
    /// files so downstream consumers can detect spec mismatches.
    pub fn hash(&self) -> u64 {
        let json = serde_json::to_string(self).expect("ModelSpec serializes");
        let mut h: u64 = 0xcbf29ce484222325;
        for b in json.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

/// Default DP total-mass hyperparameters for the common-weights model:
/// prior mean 2 gives a prior number of distinct components comparable to the
/// stick-breaking baseline at sample sizes in the hundreds.
pub const DP_MASS_DEFAULT: (f64, f64) = (2.0, 1.0);

/// Default scalar-atom hyperparameters for the common-atoms model; the
/// implied logit-normal variance is large enough that prior response-curve
/// bands span most of the unit interval.
pub const SCALAR_ATOMS_DEFAULT: NigParams = NigParams { mu0: 0.0, nu0: 2.0, a0: 2.0, b0: 5.0 };

/// Conservative default truncation level.
pub const TRUNCATION_DEFAULT: usize = 50;

/// The baseline (non-informative) prior.
///
/// Sets `kappa0_j = nu0_j = p + 2`, `mu0_j = gamma0 = 0`, and
/// `lambda0_j = gamma_cov0 = 10² I`. Because a logit-normal with zero mean
/// has expectation 1/2 for any variance, the implied prior expected response
/// probabilities are `2^{-j}` (`j < C`) and `2^{-(C-1)}` for the last
/// category, at every covariate value; the prior expected weight of mixture
/// component `l` is `2^{-l}`.
pub fn baseline_prior(c: usize, p: usize, variant: Variant) -> Result<ModelSpec> {
    if c < 2 || p < 1 {
        return Err(Error::invalid(format!("baseline prior needs C >= 2 and p >= 1 (got C={c}, p={p})")));
    }
    let atoms = match variant {
        Variant::General | Variant::CommonWeights => {
            let niw = NiwParams {
                mu0: DVector::zeros(p),
                lambda0: DMatrix::identity(p, p) * 100.0,
                kappa0: (p + 2) as f64,
                nu0: (p + 2) as f64,
            };
            AtomsPrior::Regression(vec![niw; c - 1])
        }
        Variant::CommonAtoms => AtomsPrior::Scalar(vec![SCALAR_ATOMS_DEFAULT; c - 1]),
    };
    let weights = match variant {
        Variant::General | Variant::CommonAtoms => WeightsPrior::Lsbp {
            gamma0: DVector::zeros(p),
            gamma_cov0: DMatrix::identity(p, p) * 100.0,
        },
        Variant::CommonWeights => WeightsPrior::Dp {
            a_alpha: DP_MASS_DEFAULT.0,
            b_alpha: DP_MASS_DEFAULT.1,
        },
    };
    let spec = ModelSpec { variant, c, p, atoms, weights, truncation: TRUNCATION_DEFAULT };
    spec.validate()?;
    Ok(spec)
}

/// Requested monotone trend for the prior expected first response curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Solves for `(mu0, Lambda0)` of one atom block so that the logit-normal
/// bracket of the prior expected response curve is squeezed into a monotone
/// band over `(-a1, a1)`.
///
/// The two bracket parabolas are `± λ1 x² + μ1 x + μ0 ± λ0` (in the variance
/// scale `λ_s = (κ0+1)/(2κ0(ν0-p-1)) Λ0_s`). The four calibration numbers
/// are: `a1` — half-width of the covariate range (the parabola symmetry axes
/// sit at ±a1); `a2` — the bracket gap at the axes; `a3`, `a4` — minus the
/// lower vertex and the upper vertex ordinate. Positivity of `λ0` imposes
/// the constraint `a2 > a3 + a4`. Only `p = 2` (intercept plus one covariate)
/// is supported; with more covariates apply the solver per covariate,
/// holding the others fixed.
#[allow(clippy::too_many_arguments)]
pub fn monotone_prior_solve(
    a1: f64,
    a2: f64,
    a3: f64,
    a4: f64,
    direction: Direction,
    kappa0: f64,
    nu0: f64,
    p: usize,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if p != 2 {
        return Err(Error::invalid(format!(
            "the monotone solver is defined for p = 2 (intercept + one covariate), got p = {p}"
        )));
    }
    for (name, v) in [("a1", a1), ("a2", a2), ("a3", a3), ("a4", a4)] {
        if !(v > 0.0) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    if !(a2 > a3 + a4) {
        return Err(Error::invalid(format!(
            "constraint a2 > a3 + a4 violated ({a2} <= {a3} + {a4}); lambda0 would not be positive"
        )));
    }
    if !(nu0 > p as f64 + 1.0) || !(kappa0 > 0.0) {
        return Err(Error::invalid("need kappa0 > 0 and nu0 > p + 1"));
    }
    let mu0 = (a4 - a3) / 2.0;
    let slope_mag = (a2 + a3 + a4) / (2.0 * a1);
    let mu1 = match direction {
        Direction::Decreasing => -slope_mag,
        Direction::Increasing => slope_mag,
    };
    let lambda0 = (a2 - a3 - a4) / 4.0;
    let lambda1 = (a2 + a3 + a4) / (4.0 * a1 * a1);
    // strip the logit-normal variance factor to recover the Lambda0 entries
    let factor = (kappa0 + 1.0) / (2.0 * kappa0 * (nu0 - p as f64 - 1.0));
    let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![lambda0 / factor, lambda1 / factor]));
    Ok((DVector::from_vec(vec![mu0, mu1]), diag))
}

/// How to pick the truncation level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationRule {
    /// Smallest `L` whose prior expected partial weight sum reaches the mass.
    TargetMass(f64),
    /// The conservative default, `L = 50`.
    Conservative,
}

/// Chooses the truncation level from the prior expected partial sum of
/// weights, `E(Σ_{l≤L} ω_l(x)) = 1 - (1 - E(φ(xᵀγ)))^L`, evaluated at a set
/// of representative covariate vectors and taking the worst case.
///
/// `E(φ(xᵀγ))` is exactly 1/2 whenever `xᵀγ0 = 0` (a zero-mean logit-normal
/// has mean 1/2 for any variance); otherwise it is estimated by Monte Carlo
/// with `n_mc` draws. Never returns less than 2.
pub fn choose_truncation(
    gamma0: &DVector<f64>,
    gamma_cov0: &DMatrix<f64>,
    x_reps: &[Vec<f64>],
    rule: TruncationRule,
    n_mc: usize,
    rng: &mut RngStream,
) -> Result<usize> {
    let target = match rule {
        TruncationRule::Conservative => return Ok(TRUNCATION_DEFAULT),
        TruncationRule::TargetMass(t) => t,
    };
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(format!("target mass must lie in (0,1), got {target}")));
    }
    if x_reps.is_empty() {
        return Err(Error::invalid("need at least one representative covariate vector"));
    }
    let p = gamma0.len();
    let mut min_mean = f64::INFINITY;
    for (idx, x) in x_reps.iter().enumerate() {
        if x.len() != p {
            return Err(Error::dim(format!("representative vector {idx} has wrong dimension")));
        }
        let xv = DVector::from_column_slice(x);
        let mu = gamma0.dot(&xv);
        let sigma2 = (gamma_cov0 * &xv).dot(&xv);
        let mean = if mu == 0.0 {
            0.5
        } else {
            logit_normal_mean_mc(LogitNormalParams::new(mu, sigma2)?, n_mc, rng)?.mean
        };
        min_mean = min_mean.min(mean);
    }
    // 1 - (1 - e)^L >= target  <=>  L >= log(1-target)/log(1-e)
    let needed = ((1.0 - target).ln() / (1.0 - min_mean).ln()).ceil() as usize;
    Ok(needed.max(2))
}

/// Monte-Carlo estimate of the prior expected marginal response curve at one
/// covariate vector, by integrating the parametric-backbone expression over
/// the full hierarchical prior (centering parameters drawn from NIW/NIG,
/// atoms from the centering distributions).
///
/// Returns per-category means and standard errors.
pub fn prior_curve_expectation_mc(
    spec: &ModelSpec,
    x: &[f64],
    n_mc: usize,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != spec.p {
        return Err(Error::dim(format!("x has dimension {}, expected {}", x.len(), spec.p)));
    }
    let c = spec.c;
    let xv = DVector::from_column_slice(x);
    let mut sums = vec![0.0; c];
    let mut sums_sq = vec![0.0; c];
    let mut theta = vec![0.0; c - 1];
    for _ in 0..n_mc {
        match &spec.atoms {
            AtomsPrior::Regression(per_j) => {
                for (j, niw) in per_j.iter().enumerate() {
                    let sigma = sample_inverse_wishart(niw.nu0, &niw.lambda0, rng)?;
                    let mu = sample_mvn(&niw.mu0, &(sigma.clone() / niw.kappa0), rng)?;
                    let beta = sample_mvn(&mu, &sigma, rng)?;
                    theta[j] = beta.dot(&xv);
                }
            }
            AtomsPrior::Scalar(per_j) => {
                for (j, nig) in per_j.iter().enumerate() {
                    let sigma2 = 1.0 / sample_gamma_shape_rate(nig.a0, nig.b0, rng)?;
                    let mu = sample_normal(nig.mu0, (sigma2 / nig.nu0).sqrt(), rng);
                    theta[j] = sample_normal(mu, sigma2.sqrt(), rng);
                }
            }
        }
        let pi = category_probs_raw(&theta);
        for (j, v) in pi.iter().enumerate() {
            sums[j] += v;
            sums_sq[j] += v * v;
        }
    }
    let mut means = Vec::with_capacity(c);
    let mut ses = Vec::with_capacity(c);
    for j in 0..c {
        let m = sums[j] / n_mc as f64;
        let var = (sums_sq[j] / n_mc as f64 - m * m).max(0.0);
        means.push(m);
        ses.push((var / n_mc as f64).sqrt());
    }
    Ok((means, ses))
}

fn sample_gamma_shape_rate(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    crate::randvar::sample_gamma(shape, rate, rng)
}

/// Prior expected weight of mixture component `l` (1-based) under a
/// symmetric stick-breaking prior: `2^{-l}` for `l < L`.
pub fn baseline_expected_weight(l: usize) -> f64 {
    0.5f64.powi(l as i32)
}

/// Sigmoid re-export for elicitation callers that report bracket curves.
pub fn bracket_curves(mu0: &DVector<f64>, lambda0: &DMatrix<f64>, kappa0: f64, nu0: f64, p: usize, x: f64) -> (f64, f64) {
    let factor = (kappa0 + 1.0) / (2.0 * kappa0 * (nu0 - p as f64 - 1.0));
    let m = mu0[0] + mu0[1] * x;
    let v_half = factor * (lambda0[(0, 0)] + lambda0[(1, 1)] * x * x);
    (sigmoid(m - v_half), sigmoid(m + v_half))
}
