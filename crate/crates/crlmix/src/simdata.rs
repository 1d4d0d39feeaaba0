//! Synthetic-data generators with exact ground-truth curve evaluators.
//!
//! Three designs at desk scale: a three-component mixture of linear
//! continuation-ratio kernels with probit-stick weights (one covariate), a
//! latent-probit model (one covariate), and a two-covariate design with
//! non-linear, non-additive logits. The numeric constants below are artifact
//! defaults chosen to produce non-standard response-curve shapes; every one
//! of them can be overridden through the parameter structs.

use crate::data::OrdinalDataset;
use crate::error::{Error, Result};
use crate::kernel::category_probs_raw;
use crate::num::normal_cdf;
use crate::rng::RngStream;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Three-component mixture of linear continuation-ratio kernels.
///
/// Weights: `p_j(x) = Φ(a_{j0} + a_{j1} x)` for `j = 1, 2` and
/// `w = (p_1, (1-p_1) p_2, (1-p_1)(1-p_2))`. Component `k` has stage logits
/// `θ_{jk}(x) = b_{jk0} + b_{jk1} x`. Responses have `C = 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureDesign {
    /// `[(a_{10}, a_{11}), (a_{20}, a_{21})]`.
    pub weight_coefs: [[f64; 2]; 2],
    /// `kernel_coefs[j][k] = (b_{jk0}, b_{jk1})`, stage `j`, component `k`.
    pub kernel_coefs: [[[f64; 2]; 3]; 2],
    /// Covariate support of `x ~ U(lo, hi)`.
    pub x_range: (f64, f64),
}

impl Default for MixtureDesign {
    fn default() -> Self {
        // component 1 dominates the left of the range, component 3 the
        // middle, component 2 the right; sign-alternating kernel slopes give
        // non-monotone response curves with most variation in (-10, 0)
        MixtureDesign {
            weight_coefs: [[-1.0, -0.6], [1.0, 0.5]],
            kernel_coefs: [
                [[2.0, 0.15], [-2.0, 0.1], [-3.0, -0.1]],
                [[-2.0, 0.1], [2.0, -0.1], [-3.0, 0.1]],
            ],
            x_range: (-10.0, 10.0),
        }
    }
}

impl MixtureDesign {
    /// Mixture weights `(w_1, w_2, w_3)` at covariate value `x`.
    pub fn weights(&self, x: f64) -> [f64; 3] {
        let p1 = normal_cdf(self.weight_coefs[0][0] + self.weight_coefs[0][1] * x);
        let p2 = normal_cdf(self.weight_coefs[1][0] + self.weight_coefs[1][1] * x);
        [p1, (1.0 - p1) * p2, (1.0 - p1) * (1.0 - p2)]
    }

    fn component_probs(&self, k: usize, x: f64) -> Vec<f64> {
        let theta = [
            self.kernel_coefs[0][k][0] + self.kernel_coefs[0][k][1] * x,
            self.kernel_coefs[1][k][0] + self.kernel_coefs[1][k][1] * x,
        ];
        category_probs_raw(&theta)
    }
}

/// Latent-probit design: `ỹ ~ N(β_0 + β_1 x, 1)` discretized by ordered
/// cut-offs; `y = j` iff `ỹ ∈ (κ_{j-1}, κ_j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbitDesign {
    pub intercept: f64,
    pub slope: f64,
    /// Interior cut-offs `κ_1 < … < κ_{C-1}`.
    pub cutoffs: Vec<f64>,
    pub x_range: (f64, f64),
}

impl Default for ProbitDesign {
    fn default() -> Self {
        ProbitDesign { intercept: 0.0, slope: 0.15, cutoffs: vec![-1.0, 1.0], x_range: (-10.0, 10.0) }
    }
}

impl ProbitDesign {
    fn validate(&self) -> Result<()> {
        if self.cutoffs.is_empty() {
            return Err(Error::invalid("need at least one cut-off (C >= 2)"));
        }
        if self.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!("cut-offs must be strictly increasing: {:?}", self.cutoffs)));
        }
        Ok(())
    }

    pub fn n_categories(&self) -> usize {
        self.cutoffs.len() + 1
    }
}

/// Two-covariate design with non-linear, non-additive stage logits:
/// `θ_1(x) = c_{11} + c_{12} sin(a_{11} x_1 + a_{12} x_2)` and
/// `θ_2(x) = c_{21} + c_{22} exp(a_{21} x_1 + a_{22} x_2)`, covariates
/// uniform on the unit square, `C = 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDesign {
    /// `[(c_{11}, c_{12}), (c_{21}, c_{22})]`.
    pub scale: [[f64; 2]; 2],
    /// `[(a_{11}, a_{12}), (a_{21}, a_{22})]`.
    pub index: [[f64; 2]; 2],
}

impl Default for SurfaceDesign {
    fn default() -> Self {
        SurfaceDesign { scale: [[-1.0, 2.0], [0.5, -0.5]], index: [[4.0, 2.0], [1.0, 0.5]] }
    }
}

impl SurfaceDesign {
    fn logits(&self, x1: f64, x2: f64) -> [f64; 2] {
        [
            self.scale[0][0] + self.scale[0][1] * (self.index[0][0] * x1 + self.index[0][1] * x2).sin(),
            self.scale[1][0] + self.scale[1][1] * (self.index[1][0] * x1 + self.index[1][1] * x2).exp(),
        ]
    }
}

/// The exact response distribution of a generator, evaluable at any
/// covariate vector (intercept included, matching the dataset rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TruthFn {
    Mixture(MixtureDesign),
    Probit(ProbitDesign),
    Surface(SurfaceDesign),
}

impl TruthFn {
    /// True category probabilities at design row `x`.
    pub fn probs(&self, x: &[f64]) -> Vec<f64> {
        match self {
            TruthFn::Mixture(d) => {
                let xv = x[1];
                let w = d.weights(xv);
                let mut probs = vec![0.0; 3];
                for (k, &wk) in w.iter().enumerate() {
                    for (j, pk) in d.component_probs(k, xv).iter().enumerate() {
                        probs[j] += wk * pk;
                    }
                }
                probs
            }
            TruthFn::Probit(d) => {
                let mu = d.intercept + d.slope * x[1];
                let c = d.n_categories();
                let mut probs = Vec::with_capacity(c);
                let mut prev = 0.0;
                for &k in &d.cutoffs {
                    let cdf = normal_cdf(k - mu);
                    probs.push(cdf - prev);
                    prev = cdf;
                }
                probs.push(1.0 - prev);
                probs
            }
            TruthFn::Surface(d) => category_probs_raw(&d.logits(x[1], x[2])),
        }
    }

    /// Samples one response at design row `x`.
    pub fn sample_at(&self, x: &[f64], rng: &mut RngStream) -> usize {
        match self {
            TruthFn::Probit(d) => {
                let mu = d.intercept + d.slope * x[1];
                let latent = crate::randvar::sample_normal(mu, 1.0, rng);
                let mut y = 1;
                for &k in &d.cutoffs {
                    if latent > k {
                        y += 1;
                    } else {
                        break;
                    }
                }
                y
            }
            TruthFn::Mixture(d) => {
                let w = d.weights(x[1]);
                let u: f64 = rng.random();
                let k = if u < w[0] {
                    0
                } else if u < w[0] + w[1] {
                    1
                } else {
                    2
                };
                sample_categorical(&d.component_probs(k, x[1]), rng)
            }
            TruthFn::Surface(d) => sample_categorical(&category_probs_raw(&d.logits(x[1], x[2])), rng),
        }
    }
}

fn sample_categorical(probs: &[f64], rng: &mut RngStream) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (j, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return j + 1;
        }
    }
    probs.len()
}

/// A generated dataset together with its exact truth function.
#[derive(Debug, Clone)]
pub struct SimTruth {
    pub design: String,
    pub truth: TruthFn,
    pub dataset: OrdinalDataset,
}

impl SimTruth {
    pub fn probs(&self, x: &[f64]) -> Vec<f64> {
        self.truth.probs(x)
    }
}

/// Generates from the three-component mixture design.
pub fn gen_example1(n: usize, params: &MixtureDesign, rng: &mut RngStream) -> Result<SimTruth> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    let truth = TruthFn::Mixture(*params);
    let (lo, hi) = params.x_range;
    let mut ys = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let x = lo + (hi - lo) * rng.random::<f64>();
        let row = vec![1.0, x];
        ys.push(truth.sample_at(&row, rng));
        rows.push(row);
    }
    Ok(SimTruth { design: "example1".into(), dataset: OrdinalDataset::new(ys, rows, 3)?, truth })
}

/// Generates from the latent-probit design.
pub fn gen_example2(n: usize, params: &ProbitDesign, rng: &mut RngStream) -> Result<SimTruth> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    params.validate()?;
    let c = params.n_categories();
    let truth = TruthFn::Probit(params.clone());
    let (lo, hi) = params.x_range;
    let mut ys = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let x = lo + (hi - lo) * rng.random::<f64>();
        let row = vec![1.0, x];
        ys.push(truth.sample_at(&row, rng));
        rows.push(row);
    }
    Ok(SimTruth { design: "example2".into(), dataset: OrdinalDataset::new(ys, rows, c)?, truth })
}

/// Generates from the two-covariate non-linear design.
pub fn gen_example3(n: usize, params: &SurfaceDesign, rng: &mut RngStream) -> Result<SimTruth> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    let truth = TruthFn::Surface(*params);
    let mut ys = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let row = vec![1.0, rng.random::<f64>(), rng.random::<f64>()];
        ys.push(truth.sample_at(&row, rng));
        rows.push(row);
    }
    Ok(SimTruth { design: "example3".into(), dataset: OrdinalDataset::new(ys, rows, 3)?, truth })
}
