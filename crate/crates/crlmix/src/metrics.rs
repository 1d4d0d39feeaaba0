//! Model comparison and estimation-quality metrics.

use crate::data::OrdinalDataset;
use crate::draws::PosteriorDraws;
use crate::error::{Error, Result};
use crate::inference::{sample_predictive, CurveEstimate};
use crate::rng::RngStream;

/// Posterior predictive replicates: one sampled category per observation and
/// retained draw, stored as `[observation][draw]`.
#[derive(Debug, Clone)]
pub struct ReplicateMatrix {
    categories: Vec<u16>,
    n: usize,
    t: usize,
    c: usize,
}

impl ReplicateMatrix {
    pub fn from_categories(categories: Vec<u16>, n: usize, t: usize, c: usize) -> Result<Self> {
        if categories.len() != n * t {
            return Err(Error::dim(format!(
                "expected {n}x{t} replicate entries, got {}",
                categories.len()
            )));
        }
        Ok(ReplicateMatrix { categories, n, t, c })
    }

    #[inline]
    pub fn category(&self, i: usize, t: usize) -> usize {
        self.categories[i * self.t + t] as usize
    }

    pub fn n_observations(&self) -> usize {
        self.n
    }

    pub fn n_draws(&self) -> usize {
        self.t
    }

    pub fn n_categories(&self) -> usize {
        self.c
    }
}

/// Draws one predictive replicate of the whole dataset per retained draw.
pub fn predictive_replicates(
    draws: &PosteriorDraws,
    data: &OrdinalDataset,
    rng: &mut RngStream,
) -> Result<ReplicateMatrix> {
    if data.p() != draws.meta.p || data.n_categories() != draws.meta.c {
        return Err(Error::dim("draws and dataset disagree on dimensions".to_string()));
    }
    let n = data.n();
    let t = draws.len();
    let mut cats = vec![0u16; n * t];
    for i in 0..n {
        let x = data.row(i);
        for (ti, d) in draws.draws.iter().enumerate() {
            cats[i * t + ti] = sample_predictive(d, x, rng)? as u16;
        }
    }
    ReplicateMatrix::from_categories(cats, n, t, draws.meta.c)
}

/// Posterior predictive loss split per category: goodness-of-fit `G_j` and
/// penalty `P_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GgResult {
    pub goodness: Vec<f64>,
    pub penalty: Vec<f64>,
}

impl GgResult {
    pub fn n_categories(&self) -> usize {
        self.goodness.len()
    }

    pub fn penalty_total(&self) -> f64 {
        self.penalty.iter().sum()
    }

    pub fn goodness_total(&self) -> f64 {
        self.goodness.iter().sum()
    }

    /// `Σ_j (G_j + P_j)`, the overall criterion.
    pub fn total(&self) -> f64 {
        self.goodness_total() + self.penalty_total()
    }
}

/// Gelfand–Ghosh decomposition over the one-hot response components:
/// `G_j = Σ_i (Y_ij - E(Y*_ij | data))²` and `P_j = Σ_i Var(Y*_ij | data)`,
/// with moments estimated over the replicate draws. The variance uses the
/// population (divide-by-T) convention.
pub fn gelfand_ghosh(replicates: &ReplicateMatrix, observed: &OrdinalDataset) -> Result<GgResult> {
    let n = observed.n();
    let c = observed.n_categories();
    if replicates.n_observations() != n || replicates.n_categories() != c {
        return Err(Error::dim("replicates and observations have mismatched shapes".to_string()));
    }
    let t = replicates.n_draws();
    if t < 2 {
        return Err(Error::invalid("need at least 2 replicate draws for a variance"));
    }
    let tf = t as f64;
    let mut goodness = vec![0.0; c];
    let mut penalty = vec![0.0; c];
    for i in 0..n {
        let mut freq = vec![0.0; c];
        for ti in 0..t {
            freq[replicates.category(i, ti) - 1] += 1.0;
        }
        for j in 0..c {
            let mean = freq[j] / tf;
            let y = if observed.indicator(i, j + 1) { 1.0 } else { 0.0 };
            goodness[j] += (y - mean).powi(2);
            // Bernoulli indicator: population variance is mean(1 - mean)
            penalty[j] += mean * (1.0 - mean);
        }
    }
    Ok(GgResult { goodness, penalty })
}

/// Estimation-quality metrics of a curve estimate against a known truth,
/// per category: `rmse` is `N^{-1} sqrt(Σ_i (π*_j(x_i) - π̂_j(x_i))²)` over
/// the `N` grid points, `avg_length` the mean credible-interval width, and
/// `coverage` the fraction of grid points whose interval contains the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveMetrics {
    pub rmse: Vec<f64>,
    pub avg_length: Vec<f64>,
    pub coverage: Vec<f64>,
}

pub fn curve_metrics<F>(truth: F, estimate: &CurveEstimate) -> Result<CurveMetrics>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n_grid = estimate.grid.len();
    if n_grid == 0 {
        return Err(Error::invalid("empty grid"));
    }
    let c = estimate.n_categories;
    let mut sq = vec![0.0; c];
    let mut len = vec![0.0; c];
    let mut cover = vec![0.0; c];
    for (g, x) in estimate.grid.iter().enumerate() {
        let t = truth(x);
        if t.len() != c {
            return Err(Error::dim(format!(
                "truth returned {} categories at grid point {g}, expected {c}",
                t.len()
            )));
        }
        for j in 0..c {
            sq[j] += (estimate.mean[g][j] - t[j]).powi(2);
            len[j] += estimate.upper[g][j] - estimate.lower[g][j];
            if estimate.lower[g][j] <= t[j] && t[j] <= estimate.upper[g][j] {
                cover[j] += 1.0;
            }
        }
    }
    let nf = n_grid as f64;
    Ok(CurveMetrics {
        rmse: sq.iter().map(|s| s.sqrt() / nf).collect(),
        avg_length: len.iter().map(|s| s / nf).collect(),
        coverage: cover.iter().map(|s| s / nf).collect(),
    })
}
