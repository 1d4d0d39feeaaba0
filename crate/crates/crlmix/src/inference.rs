//! Posterior regression functionals and predictive simulation.

use crate::draws::{AtomsDraw, DrawRecord, PosteriorDraws};
use crate::error::{Error, Result};
use crate::kernel::category_probs_raw;
use crate::num::quantile_sorted;
use crate::rng::RngStream;
use rand::Rng;

/// Pointwise posterior summaries of a probability response functional over a
/// covariate grid, plus the per-draw traces behind them.
#[derive(Debug, Clone)]
pub struct CurveEstimate {
    /// Covariate vectors (dimension `p`, intercept included).
    pub grid: Vec<Vec<f64>>,
    pub n_categories: usize,
    /// Posterior means, `[grid point][category]`.
    pub mean: Vec<Vec<f64>>,
    /// Lower quantile band.
    pub lower: Vec<Vec<f64>>,
    /// Upper quantile band.
    pub upper: Vec<Vec<f64>>,
    /// Quantile levels of the bands, default `(0.025, 0.975)`.
    pub levels: (f64, f64),
    /// Per-draw traces, `[grid point][category][draw]`.
    pub traces: Vec<Vec<Vec<f64>>>,
}

impl CurveEstimate {
    pub fn n_draws(&self) -> usize {
        self.traces.first().map(|t| t[0].len()).unwrap_or(0)
    }
}

/// Default credible band levels (central 95%).
pub const DEFAULT_LEVELS: (f64, f64) = (0.025, 0.975);

fn summarize<F>(draws: &PosteriorDraws, grid: &[Vec<f64>], levels: (f64, f64), eval: F) -> Result<CurveEstimate>
where
    F: Fn(&DrawRecord, &[f64]) -> Vec<f64>,
{
    if draws.is_empty() {
        return Err(Error::invalid("no retained draws"));
    }
    if !(levels.0 > 0.0 && levels.0 < levels.1 && levels.1 < 1.0) {
        return Err(Error::invalid(format!("quantile levels {levels:?} not ordered inside (0,1)")));
    }
    let p = draws.meta.p;
    let c = draws.meta.c;
    let t = draws.len();
    for (g, x) in grid.iter().enumerate() {
        if x.len() != p {
            return Err(Error::dim(format!("grid point {g} has dimension {}, expected {p}", x.len())));
        }
    }
    let mut traces = vec![vec![vec![0.0; t]; c]; grid.len()];
    for (ti, d) in draws.draws.iter().enumerate() {
        for (g, x) in grid.iter().enumerate() {
            let vals = eval(d, x);
            for (j, v) in vals.iter().enumerate() {
                traces[g][j][ti] = *v;
            }
        }
    }
    let mut mean = vec![vec![0.0; c]; grid.len()];
    let mut lower = vec![vec![0.0; c]; grid.len()];
    let mut upper = vec![vec![0.0; c]; grid.len()];
    let mut sorted = vec![0.0; t];
    for g in 0..grid.len() {
        for j in 0..c {
            let tr = &traces[g][j];
            mean[g][j] = tr.iter().sum::<f64>() / t as f64;
            sorted.copy_from_slice(tr);
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            lower[g][j] = quantile_sorted(&sorted, levels.0);
            upper[g][j] = quantile_sorted(&sorted, levels.1);
        }
    }
    Ok(CurveEstimate { grid: grid.to_vec(), n_categories: c, mean, lower, upper, levels, traces })
}

/// Marginal probability response curves `Pr(Y = j | G_x)` over a grid:
/// per draw, the truncated mixture `Σ_l p_l(x) K(j | θ_l(x))`, summarized by
/// posterior mean and quantile bands.
pub fn marginal_curves(
    draws: &PosteriorDraws,
    grid: &[Vec<f64>],
    levels: (f64, f64),
) -> Result<CurveEstimate> {
    summarize(draws, grid, levels, |d, x| d.category_probs_at(x))
}

/// Conditional probability response curves `Pr(Y = j | Y ≥ j, G_x)`,
/// computed per draw as the marginal divided by the survivor sum
/// `Σ_{k≥j} Pr(Y = k | G_x)` — algebraically the weighted-average form with
/// renormalized weights. The last category is identically one.
pub fn conditional_curves(
    draws: &PosteriorDraws,
    grid: &[Vec<f64>],
    levels: (f64, f64),
) -> Result<CurveEstimate> {
    summarize(draws, grid, levels, |d, x| {
        let marg = d.category_probs_at(x);
        let c = marg.len();
        let mut out = vec![0.0; c];
        let mut tail = 0.0;
        for j in (0..c).rev() {
            tail += marg[j];
            out[j] = if j == c - 1 { 1.0 } else { marg[j] / tail };
        }
        out
    })
}

/// One posterior predictive category per retained draw at covariate `x_new`:
/// draw the configuration from the mixture weights, then the response from
/// that component's kernel.
pub fn posterior_predictive(
    draws: &PosteriorDraws,
    x_new: &[f64],
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    if x_new.len() != draws.meta.p {
        return Err(Error::dim(format!(
            "x has dimension {}, expected {}",
            x_new.len(),
            draws.meta.p
        )));
    }
    draws
        .draws
        .iter()
        .map(|d| sample_predictive(d, x_new, rng))
        .collect()
}

/// Samples one response from the mixture of one retained draw.
pub fn sample_predictive(d: &DrawRecord, x: &[f64], rng: &mut RngStream) -> Result<usize> {
    let w = d.weights_at(x);
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut comp = w.len() - 1;
    for (l, &wl) in w.iter().enumerate() {
        cum += wl;
        if u < cum {
            comp = l;
            break;
        }
    }
    let theta = d.component_logits(comp, x);
    let probs = category_probs_raw(&theta);
    let v: f64 = rng.random();
    let mut acc = 0.0;
    for (j, &pj) in probs.iter().enumerate() {
        acc += pj;
        if v < acc {
            return Ok(j + 1);
        }
    }
    Ok(probs.len())
}

/// Posterior summaries of the `k` largest ordered mixture weights per grid
/// point: per draw the weight vector at `x` is sorted descending and the top
/// `k` recorded; box-plot-ready quantiles are returned per rank.
#[derive(Debug, Clone)]
pub struct WeightProfile {
    pub grid: Vec<Vec<f64>>,
    pub k: usize,
    /// `[grid point][rank]`: (2.5%, 25%, 50%, 75%, 97.5%) quantiles.
    pub quantiles: Vec<Vec<[f64; 5]>>,
    /// `[grid point][rank]` posterior means.
    pub mean: Vec<Vec<f64>>,
}

pub fn weight_profile(draws: &PosteriorDraws, grid: &[Vec<f64>], k: usize) -> Result<WeightProfile> {
    if draws.is_empty() {
        return Err(Error::invalid("no retained draws"));
    }
    if k > draws.meta.truncation {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the truncation level {}",
            draws.meta.truncation
        )));
    }
    let t = draws.len();
    let mut quantiles = Vec::with_capacity(grid.len());
    let mut means = Vec::with_capacity(grid.len());
    let mut per_rank = vec![vec![0.0; t]; k];
    for x in grid {
        if x.len() != draws.meta.p {
            return Err(Error::dim("grid point dimension mismatch".to_string()));
        }
        for (ti, d) in draws.draws.iter().enumerate() {
            let mut w = d.weights_at(x);
            w.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (r, slot) in per_rank.iter_mut().enumerate() {
                slot[ti] = w[r];
            }
        }
        let mut point_q = Vec::with_capacity(k);
        let mut point_m = Vec::with_capacity(k);
        for slot in per_rank.iter_mut() {
            let m = slot.iter().sum::<f64>() / t as f64;
            slot.sort_by(|a, b| a.partial_cmp(b).unwrap());
            point_q.push([
                quantile_sorted(slot, 0.025),
                quantile_sorted(slot, 0.25),
                quantile_sorted(slot, 0.50),
                quantile_sorted(slot, 0.75),
                quantile_sorted(slot, 0.975),
            ]);
            point_m.push(m);
        }
        quantiles.push(point_q);
        means.push(point_m);
    }
    Ok(WeightProfile { grid: grid.to_vec(), k, quantiles, mean: means })
}

/// Label-invariant convergence diagnostics extracted from retained draws.
#[derive(Debug, Clone)]
pub struct ChainDiagnostics {
    /// Number of occupied components per draw.
    pub n_distinct: Vec<u32>,
    /// Occupancy-weighted atom average per draw and stage,
    /// `Σ_l (M_l/n) β_{jl}` — invariant under component relabeling. Scalar
    /// atoms yield one coefficient per stage. Empty when the run had no data.
    pub atom_average: Vec<Vec<Vec<f64>>>,
    /// Largest `k` mixture weights per draw, evaluated at `reference_x`.
    pub top_weights: Vec<Vec<f64>>,
    pub reference_x: Vec<f64>,
}

pub fn diagnostics(draws: &PosteriorDraws, reference_x: &[f64], top_k: usize) -> Result<ChainDiagnostics> {
    if draws.is_empty() {
        return Err(Error::invalid("no retained draws"));
    }
    if reference_x.len() != draws.meta.p {
        return Err(Error::dim("reference covariate dimension mismatch".to_string()));
    }
    let k = top_k.min(draws.meta.truncation);
    let n = draws.meta.n_obs;
    let mut n_distinct = Vec::with_capacity(draws.len());
    let mut atom_average = Vec::with_capacity(draws.len());
    let mut top_weights = Vec::with_capacity(draws.len());
    for d in &draws.draws {
        n_distinct.push(d.n_distinct());
        if n > 0 {
            let nf = n as f64;
            let avg: Vec<Vec<f64>> = match &d.atoms {
                AtomsDraw::Regression(beta) => beta
                    .iter()
                    .map(|stage| {
                        let p = stage[0].len();
                        let mut acc = vec![0.0; p];
                        for (l, b) in stage.iter().enumerate() {
                            let w = d.label_counts[l] as f64 / nf;
                            for (a, v) in acc.iter_mut().zip(b) {
                                *a += w * v;
                            }
                        }
                        acc
                    })
                    .collect(),
                AtomsDraw::Scalar(theta) => theta
                    .iter()
                    .map(|stage| {
                        let s: f64 = stage
                            .iter()
                            .enumerate()
                            .map(|(l, t)| d.label_counts[l] as f64 / nf * t)
                            .sum();
                        vec![s]
                    })
                    .collect(),
            };
            atom_average.push(avg);
        } else {
            atom_average.push(Vec::new());
        }
        let mut w = d.weights_at(reference_x);
        w.sort_by(|a, b| b.partial_cmp(a).unwrap());
        w.truncate(k);
        top_weights.push(w);
    }
    Ok(ChainDiagnostics { n_distinct, atom_average, top_weights, reference_x: reference_x.to_vec() })
}

/// First-order effect grid: sweeps covariate `col` (1-based among the
/// non-intercept columns) over `[lo, hi]` in `points` steps, holding every
/// other covariate at the supplied fixed values (typically observed means).
pub fn first_order_grid(fixed: &[f64], col: usize, lo: f64, hi: f64, points: usize) -> Result<Vec<Vec<f64>>> {
    if col == 0 || col >= fixed.len() {
        return Err(Error::invalid(format!("covariate index {col} out of range")));
    }
    if points < 2 || !(hi > lo) {
        return Err(Error::invalid("need points >= 2 and hi > lo"));
    }
    let mut grid = Vec::with_capacity(points);
    for g in 0..points {
        let mut x = fixed.to_vec();
        x[0] = 1.0;
        x[col] = lo + (hi - lo) * g as f64 / (points - 1) as f64;
        grid.push(x);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::draws::{CenteringDraw, RunMeta, WeightsDraw};
    use crate::prior::Variant;

    fn single_component_draws() -> PosteriorDraws {
        let meta = RunMeta {
            variant: Variant::General,
            c: 3,
            p: 2,
            truncation: 1,
            n_obs: 4,
            seed: 0,
            stream: 0,
            n_iter: 2,
            burn_in: 1,
            thin: 1,
            parallel_categories: false,
            spec_hash: 0,
            seconds_per_1000: vec![],
        };
        let draw = DrawRecord {
            sweep: 2,
            atoms: AtomsDraw::Regression(vec![vec![vec![0.0, 1.0]], vec![vec![0.5, -0.5]]]),
            weights: WeightsDraw::Lsbp { gamma: vec![] },
            centering: CenteringDraw::Niw { mu: vec![], sigma: vec![] },
            label_counts: vec![4],
        };
        PosteriorDraws { meta, draws: vec![draw] }
    }

    #[test]
    fn degenerate_mixture_equals_kernel_probs() {
        let draws = single_component_draws();
        let grid = vec![vec![1.0, 0.3]];
        let est = marginal_curves(&draws, &grid, DEFAULT_LEVELS).unwrap();
        let theta = crate::kernel::CrLogits::new(vec![0.3, 0.5 - 0.15]).unwrap();
        let pi = theta.category_probs();
        for (a, b) in est.mean[0].iter().zip(pi.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
        // single draw: bands collapse onto the mean
        assert_eq!(est.lower[0], est.mean[0]);
    }

    #[test]
    fn conditional_first_category_equals_marginal_and_last_is_one() {
        let draws = single_component_draws();
        let grid = vec![vec![1.0, -0.7], vec![1.0, 2.0]];
        let marg = marginal_curves(&draws, &grid, DEFAULT_LEVELS).unwrap();
        let cond = conditional_curves(&draws, &grid, DEFAULT_LEVELS).unwrap();
        for g in 0..grid.len() {
            assert!((cond.mean[g][0] - marg.mean[g][0]).abs() < 1e-14);
            assert_eq!(cond.mean[g][2], 1.0);
        }
    }

    #[test]
    fn single_component_profile_and_diagnostics() {
        let draws = single_component_draws();
        let prof = weight_profile(&draws, &[vec![1.0, 0.0]], 1).unwrap();
        assert_eq!(prof.mean[0][0], 1.0);
        let diag = diagnostics(&draws, &[1.0, 0.0], 4).unwrap();
        assert_eq!(diag.n_distinct, vec![1]);
        // all labels on the only component: the average equals its coefficients
        assert_eq!(diag.atom_average[0][0], vec![0.0, 1.0]);
        assert!(weight_profile(&draws, &[vec![1.0, 0.0]], 2).is_err());
    }

    #[test]
    fn grid_builder_holds_other_covariates_fixed() {
        let grid = first_order_grid(&[1.0, 9.0, -3.0], 2, 0.0, 1.0, 3).unwrap();
        assert_eq!(grid.len(), 3);
        assert_eq!(grid[1], vec![1.0, 9.0, 0.5]);
        assert!(first_order_grid(&[1.0, 0.0], 0, 0.0, 1.0, 3).is_err());
    }
}
