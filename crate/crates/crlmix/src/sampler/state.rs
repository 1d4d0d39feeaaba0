//! Gibbs chain state and its initialization.

use crate::data::OrdinalDataset;
use crate::error::{Error, Result};
use crate::prior::{AtomsPrior, ModelSpec, WeightsPrior};
use crate::randvar::{
    sample_beta, sample_gamma, sample_inverse_wishart, sample_mvn, sample_normal, sample_pg,
};
use crate::rng::{block_tag, RngStream};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

// Substream kinds; one per independently updated block family.
pub(crate) const K_ATOMS: u8 = 1;
pub(crate) const K_ZETA: u8 = 2;
pub(crate) const K_WEIGHTS: u8 = 3;
pub(crate) const K_XI: u8 = 4;
pub(crate) const K_LABELS: u8 = 5;
pub(crate) const K_HYPER: u8 = 6;
pub(crate) const K_DP_ALPHA: u8 = 7;

/// Kernel atom parameters.
#[derive(Debug, Clone)]
pub enum AtomsState {
    /// `beta[j][l]`: regression coefficients per stage `j`, component `l`.
    Regression(Vec<Vec<DVector<f64>>>),
    /// `theta[j][l]`: scalar atoms.
    Scalar(Vec<Vec<f64>>),
}

/// Weight-process parameters.
#[derive(Debug, Clone)]
pub enum WeightsState {
    /// Stick-breaking regressions `gamma[s]`, `s = 1..L-1`.
    Lsbp { gamma: Vec<DVector<f64>> },
    /// DP sticks, the implied weight simplex, and the total-mass parameter.
    Dp { v: Vec<f64>, omega: Vec<f64>, alpha: f64 },
}

/// Centering hyperparameters.
#[derive(Debug, Clone)]
pub enum CenteringState {
    Niw(Vec<(DVector<f64>, DMatrix<f64>)>),
    Nig(Vec<(f64, f64)>),
}

/// Full parameter set of one Gibbs iteration.
///
/// `zeta[i]` holds the kernel Pólya-Gamma latents for the active stages of
/// observation `i` (`m_ij = 1`, i.e. stages `1..=min(y_i, C-1)`); latents for
/// `m_ij = 0` are never materialized. `xi[i]` (stick-breaking variants only)
/// holds the weight latents for the currently at-risk stages and is resized
/// as labels move.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub atoms: AtomsState,
    pub weights: WeightsState,
    /// 0-based component assignment per observation.
    pub labels: Vec<usize>,
    pub zeta: Vec<Vec<f64>>,
    pub xi: Vec<Vec<f64>>,
    pub centering: CenteringState,
}

impl ChainState {
    /// Weights `p_l(x)` implied by the current weight parameters, length `L`.
    ///
    /// The last entry is the left-over stick `1 - Σ_{l<L} p_l`, clamped at
    /// zero against rounding.
    pub fn implied_weights(&self, x: &[f64], l_total: usize) -> Vec<f64> {
        match &self.weights {
            WeightsState::Dp { omega, .. } => omega.clone(),
            WeightsState::Lsbp { gamma } => {
                let mut w: Vec<f64> = Vec::with_capacity(l_total);
                let mut acc: f64 = 0.0;
                for g in gamma {
                    let eta = crate::num::sigmoid(dot(x, g.as_slice()));
                    w.push(eta * (1.0 - acc).max(0.0));
                    acc += w.last().unwrap();
                }
                w.push((1.0 - acc).max(0.0));
                w
            }
        }
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], b: &[f64]) -> f64 {
    x.iter().zip(b).map(|(a, c)| a * c).sum()
}

/// Checks that a dataset and a model spec agree on `C` and `p`.
pub fn check_dims(data: &OrdinalDataset, spec: &ModelSpec) -> Result<()> {
    if data.n_categories() != spec.c {
        return Err(Error::dim(format!(
            "dataset has C = {}, spec has C = {}",
            data.n_categories(),
            spec.c
        )));
    }
    if data.p() != spec.p {
        return Err(Error::dim(format!("dataset has p = {}, spec has p = {}", data.p(), spec.p)));
    }
    Ok(())
}

/// Draws the initial state: centering hyperparameters from their priors,
/// atoms and weights from the centering distributions, labels uniformly on
/// `{1..L}`, and all Pólya-Gamma latents at tilt `c = 0`.
pub fn init_state(data: &OrdinalDataset, spec: &ModelSpec, base: &RngStream) -> Result<ChainState> {
    spec.validate()?;
    check_dims(data, spec)?;
    let l_total = spec.truncation;
    let n = data.n();
    let n_stages = spec.c - 1;

    let centering = match &spec.atoms {
        AtomsPrior::Regression(per_j) => {
            let mut out = Vec::with_capacity(n_stages);
            for (j, niw) in per_j.iter().enumerate() {
                let mut rng = base.substream(block_tag(K_HYPER, 0, j, 0));
                let sigma = sample_inverse_wishart(niw.nu0, &niw.lambda0, &mut rng)?;
                let mu = sample_mvn(&niw.mu0, &(sigma.clone() / niw.kappa0), &mut rng)?;
                out.push((mu, sigma));
            }
            CenteringState::Niw(out)
        }
        AtomsPrior::Scalar(per_j) => {
            let mut out = Vec::with_capacity(n_stages);
            for (j, nig) in per_j.iter().enumerate() {
                let mut rng = base.substream(block_tag(K_HYPER, 0, j, 0));
                let sigma2 = 1.0 / sample_gamma(nig.a0, nig.b0, &mut rng)?;
                let mu = sample_normal(nig.mu0, (sigma2 / nig.nu0).sqrt(), &mut rng);
                out.push((mu, sigma2));
            }
            CenteringState::Nig(out)
        }
    };

    let atoms = match &centering {
        CenteringState::Niw(per_j) => {
            let mut beta = Vec::with_capacity(n_stages);
            for (j, (mu, sigma)) in per_j.iter().enumerate() {
                let mut row = Vec::with_capacity(l_total);
                for l in 0..l_total {
                    let mut rng = base.substream(block_tag(K_ATOMS, 0, j, l));
                    row.push(sample_mvn(mu, sigma, &mut rng)?);
                }
                beta.push(row);
            }
            AtomsState::Regression(beta)
        }
        CenteringState::Nig(per_j) => {
            let mut theta = Vec::with_capacity(n_stages);
            for (j, &(mu, sigma2)) in per_j.iter().enumerate() {
                let sd = sigma2.sqrt();
                let mut row = Vec::with_capacity(l_total);
                for l in 0..l_total {
                    let mut rng = base.substream(block_tag(K_ATOMS, 0, j, l));
                    row.push(sample_normal(mu, sd, &mut rng));
                }
                theta.push(row);
            }
            AtomsState::Scalar(theta)
        }
    };

    let weights = match &spec.weights {
        WeightsPrior::Lsbp { gamma0, gamma_cov0 } => {
            let mut gamma = Vec::with_capacity(l_total - 1);
            for s in 0..l_total - 1 {
                let mut rng = base.substream(block_tag(K_WEIGHTS, 0, 0, s));
                gamma.push(sample_mvn(gamma0, gamma_cov0, &mut rng)?);
            }
            WeightsState::Lsbp { gamma }
        }
        WeightsPrior::Dp { a_alpha, b_alpha } => {
            let mut rng = base.substream(block_tag(K_DP_ALPHA, 0, 0, 0));
            let alpha = sample_gamma(*a_alpha, *b_alpha, &mut rng)?;
            let mut v = Vec::with_capacity(l_total - 1);
            for s in 0..l_total - 1 {
                let mut rng = base.substream(block_tag(K_WEIGHTS, 0, 0, s));
                v.push(sample_beta(1.0, alpha, &mut rng)?.min(1.0 - 1e-12));
            }
            let omega = stick_weights(&v);
            WeightsState::Dp { v, omega, alpha }
        }
    };

    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = base.substream(block_tag(K_LABELS, 0, 0, i));
        labels.push(rng.random_range(0..l_total));
    }

    let mut zeta = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = base.substream(block_tag(K_ZETA, 0, 0, i));
        let active = data.active_stages(i);
        let mut row = Vec::with_capacity(active);
        for _ in 0..active {
            row.push(sample_pg(1, 0.0, &mut rng)?);
        }
        zeta.push(row);
    }

    let xi = match &weights {
        WeightsState::Lsbp { .. } => {
            let mut xi = Vec::with_capacity(n);
            for (i, &label) in labels.iter().enumerate() {
                let mut rng = base.substream(block_tag(K_XI, 0, 0, i));
                let at_risk = (label + 1).min(l_total - 1);
                let mut row = Vec::with_capacity(at_risk);
                for _ in 0..at_risk {
                    row.push(sample_pg(1, 0.0, &mut rng)?);
                }
                xi.push(row);
            }
            xi
        }
        WeightsState::Dp { .. } => Vec::new(),
    };

    Ok(ChainState { atoms, weights, labels, zeta, xi, centering })
}

/// Stick-breaking map: `ω_s = V_s Π_{h<s}(1-V_h)` with the left-over mass in
/// the last component, `ω_L = 1 - Σ_{s<L} ω_s` (clamped at zero).
pub fn stick_weights(v: &[f64]) -> Vec<f64> {
    let mut omega = Vec::with_capacity(v.len() + 1);
    let mut survivor = 1.0;
    let mut sum = 0.0;
    for &vs in v {
        let w = vs * survivor;
        omega.push(w);
        sum += w;
        survivor *= 1.0 - vs;
    }
    omega.push((1.0 - sum).max(0.0));
    omega
}
