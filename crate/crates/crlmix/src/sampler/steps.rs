//! Full-conditional updates of the blocked Gibbs samplers.
//!
//! One sweep visits, in order: atoms, weights, configuration labels,
//! centering hyperparameters. Pólya-Gamma latents are refreshed inside the
//! step that owns them — kernel latents `ζ` right after the atoms they tilt,
//! weight latents `ξ` right before the stick-breaking coefficients (the
//! at-risk pattern of `ξ` follows the labels, so it is re-materialized at the
//! current label configuration first).
//!
//! Every random block draws from its own substream keyed by
//! `(step kind, sweep, stage, component)`, so the retained-draw stream is
//! bitwise identical no matter how stages or observations are scheduled
//! across threads.

use crate::data::OrdinalDataset;
use crate::error::{Error, Result};
use crate::kernel::log_pmf_raw;
use crate::num::{log_one_minus_sigmoid, log_sigmoid, log_sum_exp};
use crate::prior::{NigParams, NiwParams};
use crate::randvar::{
    cholesky_with_jitter, sample_beta, sample_gamma, sample_inverse_wishart, sample_mvn,
    sample_mvn_from_precision, sample_normal, sample_pg,
};
use crate::rng::{block_tag, RngStream};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use super::state::{
    dot, AtomsState, CenteringState, ChainState, WeightsState, K_ATOMS, K_DP_ALPHA, K_HYPER,
    K_LABELS, K_WEIGHTS, K_XI, K_ZETA,
};

/// Members of each mixture component, ascending observation index.
pub fn occupancy_groups(labels: &[usize], l_total: usize) -> Vec<Vec<u32>> {
    let mut groups = vec![Vec::new(); l_total];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(i as u32);
    }
    groups
}

/// Occupancy count per component.
pub fn occupancy_counts(labels: &[usize], l_total: usize) -> Vec<u32> {
    let mut counts = vec![0u32; l_total];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

#[inline]
fn rank_one_update(prec: &mut DMatrix<f64>, x: &[f64], w: f64) {
    let p = x.len();
    for a in 0..p {
        let wa = w * x[a];
        for b in 0..p {
            prec[(a, b)] += wa * x[b];
        }
    }
}

/// Accumulates the Gaussian full conditional of one regression block:
/// precision `P = prior_prec + Σ w_i x_i x_iᵀ` and linear term
/// `b = prior_lin + Σ s_i x_i`, for rows `(x_i, s_i, w_i)`.
pub fn gaussian_block_conditional(
    prior_prec: &DMatrix<f64>,
    prior_lin: &DVector<f64>,
    rows: &[(&[f64], f64, f64)],
) -> (DMatrix<f64>, DVector<f64>) {
    let mut prec = prior_prec.clone();
    let mut lin = prior_lin.clone();
    for (x, shift, w) in rows {
        rank_one_update(&mut prec, x, *w);
        for (a, &xa) in x.iter().enumerate() {
            lin[a] += shift * xa;
        }
    }
    (prec, lin)
}

/// Gaussian full conditional of one atom block `(j, l)`: prior precision
/// plus `Σ ζ_ij x_i x_iᵀ` and prior linear term plus `Σ υ_ij x_i`, summed
/// over the component members with stage `j` active (`m_ij = 1`), where
/// `υ_ij = Y_ij - 1/2`.
pub fn atom_block_conditional(
    data: &OrdinalDataset,
    zeta: &[Vec<f64>],
    group: &[u32],
    j: usize,
    prior_prec: &DMatrix<f64>,
    prior_lin: &DVector<f64>,
) -> (DMatrix<f64>, DVector<f64>) {
    let mut prec = prior_prec.clone();
    let mut lin = prior_lin.clone();
    for &i in group {
        let i = i as usize;
        if data.active_stages(i) > j {
            let x = data.row(i);
            rank_one_update(&mut prec, x, zeta[i][j]);
            let ups = if data.indicator(i, j + 1) { 0.5 } else { -0.5 };
            for (a, &xa) in x.iter().enumerate() {
                lin[a] += ups * xa;
            }
        }
    }
    (prec, lin)
}

/// Gaussian full conditional of stick-breaking stage `s`: prior precision
/// plus `Σ ξ_is x_i x_iᵀ` and prior linear term plus `Σ ι_is x_i` over the
/// at-risk set `{i : L_i ≥ s}`, where `ι_is = 1(L_i = s) - 1/2`.
pub fn lsbp_stage_conditional(
    data: &OrdinalDataset,
    labels: &[usize],
    xi: &[Vec<f64>],
    s: usize,
    prior_prec: &DMatrix<f64>,
    prior_lin: &DVector<f64>,
) -> (DMatrix<f64>, DVector<f64>) {
    let mut prec = prior_prec.clone();
    let mut lin = prior_lin.clone();
    for (i, &label) in labels.iter().enumerate() {
        if label >= s {
            let x = data.row(i);
            rank_one_update(&mut prec, x, xi[i][s]);
            let iota = if label == s { 0.5 } else { -0.5 };
            for (a, &xa) in x.iter().enumerate() {
                lin[a] += iota * xa;
            }
        }
    }
    (prec, lin)
}

/// Normalized label probabilities from log weights and log kernel terms.
pub fn label_posterior(log_weights: &[f64], log_kernel: &[f64]) -> Result<Vec<f64>> {
    let lp: Vec<f64> = log_weights.iter().zip(log_kernel).map(|(a, b)| a + b).collect();
    let norm = log_sum_exp(&lp);
    if !norm.is_finite() {
        return Err(Error::numeric(
            "all label log-probabilities are -inf; atoms or weights degenerated",
        ));
    }
    Ok(lp.iter().map(|v| (v - norm).exp()).collect())
}

/// Atoms update for the regression-atom variants (Step 1): occupied
/// components get the Pólya-Gamma weighted least-squares conditional,
/// unoccupied ones a fresh draw from the centering distribution (the same
/// formula with empty sums), then the kernel latents are refreshed at the
/// new atom values.
pub fn step_atoms_regression(
    state: &mut ChainState,
    data: &OrdinalDataset,
    sweep: u64,
    base: &RngStream,
    parallel: bool,
) -> Result<()> {
    let ChainState { atoms, labels, zeta, centering, .. } = state;
    let beta = match atoms {
        AtomsState::Regression(beta) => beta,
        _ => return Err(Error::invalid("regression atoms step applied to scalar-atom state")),
    };
    let per_j = match centering {
        CenteringState::Niw(c) => c,
        _ => return Err(Error::invalid("regression atoms need NIW centering")),
    };
    let l_total = beta[0].len();
    let groups = occupancy_groups(labels, l_total);

    let update_stage = |j: usize, row: &mut Vec<DVector<f64>>| -> Result<()> {
        let (mu_j, sigma_j) = &per_j[j];
        let prior_prec = cholesky_with_jitter(sigma_j)?.inverse();
        let prior_lin = &prior_prec * mu_j;
        for (l, group) in groups.iter().enumerate() {
            let (prec, lin) = atom_block_conditional(data, zeta, group, j, &prior_prec, &prior_lin);
            let mut rng = base.substream(block_tag(K_ATOMS, sweep, j, l));
            row[l] = sample_mvn_from_precision(&lin, &prec, &mut rng)?;
        }
        Ok(())
    };

    if parallel {
        beta.par_iter_mut().enumerate().try_for_each(|(j, row)| update_stage(j, row))?;
    } else {
        for (j, row) in beta.iter_mut().enumerate() {
            update_stage(j, row)?;
        }
    }

    // ζ_ij ~ PG(1, x_iᵀ β_{j, L_i}) on the active stages
    let refresh = |i: usize, row: &mut Vec<f64>| -> Result<()> {
        let mut rng = base.substream(block_tag(K_ZETA, sweep, 0, i));
        let x = data.row(i);
        for (s, z) in row.iter_mut().enumerate() {
            *z = sample_pg(1, dot(x, beta[s][labels[i]].as_slice()), &mut rng)?;
        }
        Ok(())
    };
    if parallel {
        zeta.par_iter_mut().enumerate().try_for_each(|(i, row)| refresh(i, row))?;
    } else {
        for (i, row) in zeta.iter_mut().enumerate() {
            refresh(i, row)?;
        }
    }
    Ok(())
}

/// Atoms update for the common-atoms variant (Step 1*): scalar
/// normal–normal conditionals per `(j, l)` with the Pólya-Gamma weights,
/// then the `ζ` refresh at the new atoms.
pub fn step_atoms_scalar(
    state: &mut ChainState,
    data: &OrdinalDataset,
    sweep: u64,
    base: &RngStream,
) -> Result<()> {
    let ChainState { atoms, labels, zeta, centering, .. } = state;
    let theta = match atoms {
        AtomsState::Scalar(theta) => theta,
        _ => return Err(Error::invalid("scalar atoms step applied to regression state")),
    };
    let per_j = match centering {
        CenteringState::Nig(c) => c,
        _ => return Err(Error::invalid("scalar atoms need NIG centering")),
    };
    let l_total = theta[0].len();
    let groups = occupancy_groups(labels, l_total);

    for (j, row) in theta.iter_mut().enumerate() {
        let (mu_j, sigma2_j) = per_j[j];
        for (l, group) in groups.iter().enumerate() {
            let mut zeta_sum = 0.0;
            let mut ups_sum = 0.0;
            for &i in group {
                let i = i as usize;
                if data.active_stages(i) > j {
                    zeta_sum += zeta[i][j];
                    ups_sum += if data.indicator(i, j + 1) { 0.5 } else { -0.5 };
                }
            }
            // σ̃² = σ²/(σ² Σζ + 1);  θ̃ = σ̃² (Σ υ + μ/σ²); empty sums give a
            // plain draw from the centering normal
            let var = sigma2_j / (sigma2_j * zeta_sum + 1.0);
            let mean = var * (ups_sum + mu_j / sigma2_j);
            let mut rng = base.substream(block_tag(K_ATOMS, sweep, j, l));
            row[l] = sample_normal(mean, var.sqrt(), &mut rng);
        }
    }

    for (i, row) in zeta.iter_mut().enumerate() {
        let mut rng = base.substream(block_tag(K_ZETA, sweep, 0, i));
        for (s, z) in row.iter_mut().enumerate() {
            *z = sample_pg(1, theta[s][labels[i]], &mut rng)?;
        }
    }
    Ok(())
}

/// Stick-breaking weights update (Step 2): per stage `s`, refresh the
/// weight latents `ξ_is ~ PG(1, x_iᵀγ_s)` over the at-risk set
/// `{i : L_i ≥ s}`, then draw `γ_s` from its Gaussian full conditional with
/// shifts `ι_is = 1(L_i = s) - 1/2`. Stages with no at-risk observations
/// reduce to prior draws.
pub fn step_weights_lsbp(
    state: &mut ChainState,
    data: &OrdinalDataset,
    gamma0: &DVector<f64>,
    gamma_cov0: &DMatrix<f64>,
    sweep: u64,
    base: &RngStream,
) -> Result<()> {
    let ChainState { weights, labels, xi, .. } = state;
    let gamma = match weights {
        WeightsState::Lsbp { gamma } => gamma,
        _ => return Err(Error::invalid("stick-breaking weights step applied to DP state")),
    };
    let l_total = gamma.len() + 1;
    for (row, &label) in xi.iter_mut().zip(labels.iter()) {
        row.resize((label + 1).min(l_total - 1), 0.0);
    }

    let prior_prec = cholesky_with_jitter(gamma_cov0)?.inverse();
    let prior_lin = &prior_prec * gamma0;

    for s in 0..l_total - 1 {
        let mut xi_rng = base.substream(block_tag(K_XI, sweep, 0, s));
        for (i, &label) in labels.iter().enumerate() {
            if label >= s {
                xi[i][s] = sample_pg(1, dot(data.row(i), gamma[s].as_slice()), &mut xi_rng)?;
            }
        }
        let (prec, lin) = lsbp_stage_conditional(data, labels, xi, s, &prior_prec, &prior_lin);
        let mut rng = base.substream(block_tag(K_WEIGHTS, sweep, 0, s));
        gamma[s] = sample_mvn_from_precision(&lin, &prec, &mut rng)?;
    }
    Ok(())
}

/// DP weights update (Step 2*): conjugate Beta draws for the sticks from the
/// occupancy counts, the stick-breaking map for the weights, then the
/// total-mass update `α ~ Gamma(a + L - 1, b - Σ log(1 - V*))`.
pub fn step_weights_dp(
    state: &mut ChainState,
    a_alpha: f64,
    b_alpha: f64,
    l_total: usize,
    sweep: u64,
    base: &RngStream,
) -> Result<()> {
    let ChainState { weights, labels, .. } = state;
    let (v, omega, alpha) = match weights {
        WeightsState::Dp { v, omega, alpha } => (v, omega, alpha),
        _ => return Err(Error::invalid("DP weights step applied to stick-breaking state")),
    };
    let counts = occupancy_counts(labels, l_total);
    // Σ_{h>s} M_h
    let mut tail = vec![0u64; l_total];
    for s in (0..l_total - 1).rev() {
        tail[s] = tail[s + 1] + counts[s + 1] as u64;
    }
    let mut log_one_minus = 0.0;
    for s in 0..l_total - 1 {
        let mut rng = base.substream(block_tag(K_WEIGHTS, sweep, 0, s));
        let draw = sample_beta(1.0 + counts[s] as f64, *alpha + tail[s] as f64, &mut rng)?;
        // guard the log below against a stick numerically equal to one
        v[s] = draw.min(1.0 - 1e-12);
        log_one_minus += (1.0 - v[s]).ln();
    }
    *omega = super::state::stick_weights(v);
    let mut rng = base.substream(block_tag(K_DP_ALPHA, sweep, 0, 0));
    *alpha = sample_gamma(a_alpha + (l_total - 1) as f64, b_alpha - log_one_minus, &mut rng)?;
    Ok(())
}

/// Configuration update (Step 3): `Pr(L_i = l) ∝ p_il · K(Y_i | θ_l(x_i))`,
/// evaluated in log space and normalized by log-sum-exp.
pub fn step_labels(
    state: &mut ChainState,
    data: &OrdinalDataset,
    sweep: u64,
    base: &RngStream,
    parallel: bool,
    l_total: usize,
) -> Result<()> {
    let ChainState { atoms, weights, labels, .. } = state;
    let atoms: &AtomsState = atoms;
    let weights: &WeightsState = weights;
    let n = data.n();

    // covariate-free pieces are shared across observations
    let log_omega: Option<Vec<f64>> = match weights {
        WeightsState::Dp { omega, .. } => Some(omega.iter().map(|w| w.ln()).collect()),
        WeightsState::Lsbp { .. } => None,
    };
    let kernel_table: Option<Vec<Vec<f64>>> = match atoms {
        AtomsState::Scalar(theta) => {
            let c = theta.len() + 1;
            let mut table = vec![vec![0.0; c]; l_total];
            let mut logits = vec![0.0; theta.len()];
            for (l, row) in table.iter_mut().enumerate() {
                for (s, lg) in logits.iter_mut().enumerate() {
                    *lg = theta[s][l];
                }
                for y in 1..=c {
                    row[y - 1] = log_pmf_raw(&logits, y);
                }
            }
            Some(table)
        }
        AtomsState::Regression(_) => None,
    };

    let draw_label = |i: usize| -> Result<usize> {
        let x = data.row(i);
        let y = data.response(i);
        let mut lp = vec![0.0; l_total];
        match (weights, &log_omega) {
            (_, Some(lo)) => lp.copy_from_slice(lo),
            (WeightsState::Lsbp { gamma }, None) => {
                let mut acc = 0.0;
                for (s, g) in gamma.iter().enumerate() {
                    let t = dot(x, g.as_slice());
                    lp[s] = acc + log_sigmoid(t);
                    acc += log_one_minus_sigmoid(t);
                }
                lp[l_total - 1] = acc;
            }
            _ => unreachable!(),
        }
        match (atoms, &kernel_table) {
            (_, Some(table)) => {
                for (l, term) in lp.iter_mut().enumerate() {
                    *term += table[l][y - 1];
                }
            }
            (AtomsState::Regression(beta), None) => {
                let active = data.active_stages(i);
                for (l, term) in lp.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (s, stage) in beta.iter().enumerate().take(active) {
                        let t = dot(x, stage[l].as_slice());
                        acc += if s + 1 == y { log_sigmoid(t) } else { log_one_minus_sigmoid(t) };
                    }
                    *term += acc;
                }
            }
            _ => unreachable!(),
        }
        let norm = log_sum_exp(&lp);
        if !norm.is_finite() {
            return Err(Error::numeric(format!(
                "label probabilities for observation {i} are all -inf"
            )));
        }
        let mut rng = base.substream(block_tag(K_LABELS, sweep, 0, i));
        let u: f64 = rng.random();
        let mut cum = 0.0;
        for (l, v) in lp.iter().enumerate() {
            cum += (v - norm).exp();
            if u < cum {
                return Ok(l);
            }
        }
        Ok(l_total - 1)
    };

    let new_labels: Result<Vec<usize>> = if parallel {
        (0..n).into_par_iter().map(draw_label).collect()
    } else {
        (0..n).map(draw_label).collect()
    };
    *labels = new_labels?;
    Ok(())
}

/// Centering update for the regression variants (Step 4): NIW conjugate
/// update over the `n*` occupied atoms only; with none occupied it is a pure
/// prior draw.
pub fn step_hyper_niw(
    state: &mut ChainState,
    per_j: &[NiwParams],
    sweep: u64,
    base: &RngStream,
) -> Result<()> {
    let ChainState { atoms, labels, centering, .. } = state;
    let beta = match atoms {
        AtomsState::Regression(beta) => beta,
        _ => return Err(Error::invalid("NIW hyper step needs regression atoms")),
    };
    let target = match centering {
        CenteringState::Niw(c) => c,
        _ => return Err(Error::invalid("NIW hyper step needs NIW centering")),
    };
    let l_total = beta[0].len();
    let counts = occupancy_counts(labels, l_total);
    let occupied: Vec<usize> = (0..l_total).filter(|&l| counts[l] > 0).collect();
    let n_star = occupied.len();
    let p = per_j[0].mu0.len();

    for (j, prior) in per_j.iter().enumerate() {
        let mut rng = base.substream(block_tag(K_HYPER, sweep, j, 0));
        let (mu, sigma) = if n_star == 0 {
            let sigma = sample_inverse_wishart(prior.nu0, &prior.lambda0, &mut rng)?;
            let mu = sample_mvn(&prior.mu0, &(sigma.clone() / prior.kappa0), &mut rng)?;
            (mu, sigma)
        } else {
            let nf = n_star as f64;
            let mut bar = DVector::zeros(p);
            for &l in &occupied {
                bar += &beta[j][l];
            }
            bar /= nf;
            let mut scatter = DMatrix::zeros(p, p);
            for &l in &occupied {
                let d = &beta[j][l] - &bar;
                scatter += &d * d.transpose();
            }
            let kappa_star = prior.kappa0 + nf;
            let nu_star = prior.nu0 + nf;
            let mu_star = (&prior.mu0 * prior.kappa0 + &bar * nf) / kappa_star;
            let dev = &bar - &prior.mu0;
            let lambda_star =
                &prior.lambda0 + scatter + (&dev * dev.transpose()) * (nf * prior.kappa0 / kappa_star);
            let sigma = sample_inverse_wishart(nu_star, &lambda_star, &mut rng)?;
            let mu = sample_mvn(&mu_star, &(sigma.clone() / kappa_star), &mut rng)?;
            (mu, sigma)
        };
        target[j] = (mu, sigma);
    }
    Ok(())
}

/// Centering update for the common-atoms variant (Step 4*): blocked
/// normal–inverse-gamma draw over the occupied atoms.
pub fn step_hyper_nig(
    state: &mut ChainState,
    per_j: &[NigParams],
    sweep: u64,
    base: &RngStream,
) -> Result<()> {
    let ChainState { atoms, labels, centering, .. } = state;
    let theta = match atoms {
        AtomsState::Scalar(theta) => theta,
        _ => return Err(Error::invalid("NIG hyper step needs scalar atoms")),
    };
    let target = match centering {
        CenteringState::Nig(c) => c,
        _ => return Err(Error::invalid("NIG hyper step needs NIG centering")),
    };
    let l_total = theta[0].len();
    let counts = occupancy_counts(labels, l_total);
    let occupied: Vec<usize> = (0..l_total).filter(|&l| counts[l] > 0).collect();
    let n_star = occupied.len();

    for (j, prior) in per_j.iter().enumerate() {
        let mut rng = base.substream(block_tag(K_HYPER, sweep, j, 0));
        let (mu, sigma2) = if n_star == 0 {
            let sigma2 = 1.0 / sample_gamma(prior.a0, prior.b0, &mut rng)?;
            let mu = sample_normal(prior.mu0, (sigma2 / prior.nu0).sqrt(), &mut rng);
            (mu, sigma2)
        } else {
            let nf = n_star as f64;
            let bar: f64 = occupied.iter().map(|&l| theta[j][l]).sum::<f64>() / nf;
            let ss: f64 = occupied.iter().map(|&l| (theta[j][l] - bar).powi(2)).sum();
            let nu_star = prior.nu0 + nf;
            let a_star = prior.a0 + nf / 2.0;
            let mu_star = (prior.nu0 * prior.mu0 + nf * bar) / nu_star;
            let b_star = prior.b0
                + 0.5 * ss
                + (nf * prior.nu0 / (nf + prior.nu0)) * (bar - prior.mu0).powi(2) / 2.0;
            let sigma2 = 1.0 / sample_gamma(a_star, b_star, &mut rng)?;
            let mu = sample_normal(mu_star, (sigma2 / nu_star).sqrt(), &mut rng);
            (mu, sigma2)
        };
        target[j] = (mu, sigma2);
    }
    Ok(())
}
