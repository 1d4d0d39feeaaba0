//! Python bindings: the kernel math, prior elicitation helpers, the three
//! synthetic designs, chain fitting and posterior functionals.
//!
//! Convention: covariate rows passed from Python never include the
//! intercept; it is prepended on the Rust side.

use crlmix::inference::{
    conditional_curves, marginal_curves, posterior_predictive, DEFAULT_LEVELS,
};
use crlmix::kernel::{CategoryProbs, CrLogits};
use crlmix::metrics::{gelfand_ghosh, predictive_replicates};
use crlmix::prior::{baseline_prior, Direction, Variant};
use crlmix::randvar::{logit_normal_mean_bounds, logit_normal_mean_mc, LogitNormalParams};
use crlmix::sampler::{run_chain, RunConfig};
use crlmix::simdata::{gen_example1, gen_example2, gen_example3, TruthFn};
use crlmix::{OrdinalDataset, PosteriorDraws, RngStream};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn with_intercept(row: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(row.len() + 1);
    x.push(1.0);
    x.extend_from_slice(row);
    x
}

fn parse_variant(s: &str) -> PyResult<Variant> {
    match s {
        "general" => Ok(Variant::General),
        "common-weights" => Ok(Variant::CommonWeights),
        "common-atoms" => Ok(Variant::CommonAtoms),
        _ => Err(err(format!("unknown variant '{s}'"))),
    }
}

/// Category probabilities from continuation-ratio logits.
#[pyfunction]
fn category_probs(theta: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(CrLogits::new(theta).map_err(err)?.category_probs().as_slice().to_vec())
}

/// Continuation-ratio logits from a strict probability vector.
#[pyfunction]
fn logits_from_probs(pi: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(CategoryProbs::new(pi).map_err(err)?.to_logits().map_err(err)?.as_slice().to_vec())
}

/// Log pmf of category `y` (1-based) under the continuation-ratio kernel.
#[pyfunction]
fn kernel_log_pmf(y: usize, theta: Vec<f64>) -> PyResult<f64> {
    CrLogits::new(theta).map_err(err)?.log_pmf(y).map_err(err)
}

/// Equivalent cumulative-logit parameters `(location, cutoffs)`.
#[pyfunction]
fn cumulative_logit(theta: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
    let cum = CrLogits::new(theta).map_err(err)?.to_cumulative();
    Ok((cum.location, cum.cutoffs))
}

/// `n` draws from the Pólya-Gamma law PG(b, c).
#[pyfunction]
#[pyo3(signature = (b, c, n, seed = 0))]
fn pg_sample(b: u32, c: f64, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    let mut rng = RngStream::new(seed, 0);
    (0..n).map(|_| crlmix::randvar::sample_pg(b, c, &mut rng).map_err(err)).collect()
}

/// Monte-Carlo `(mean, se)` of `E φ(Z)`, `Z ~ N(mu, sigma2)`.
#[pyfunction]
#[pyo3(signature = (mu, sigma2, n_mc = 100_000, seed = 0))]
fn logit_normal_mean(mu: f64, sigma2: f64, n_mc: usize, seed: u64) -> PyResult<(f64, f64)> {
    let mut rng = RngStream::new(seed, 0);
    let est = logit_normal_mean_mc(LogitNormalParams::new(mu, sigma2).map_err(err)?, n_mc, &mut rng)
        .map_err(err)?;
    Ok((est.mean, est.se))
}

/// Sharp bracket `(φ(μ-σ²/2), φ(μ+σ²/2))` for the logit-normal mean.
#[pyfunction]
fn logit_normal_bounds(mu: f64, sigma2: f64) -> PyResult<(f64, f64)> {
    Ok(logit_normal_mean_bounds(LogitNormalParams::new(mu, sigma2).map_err(err)?))
}

/// Monotone prior solver for an intercept-plus-one-covariate block; returns
/// `(mu0, lambda0_diagonal)`.
#[pyfunction]
#[pyo3(signature = (a1, a2, a3, a4, direction, kappa0 = 4.0, nu0 = 4.0))]
fn monotone_prior_solve(
    a1: f64,
    a2: f64,
    a3: f64,
    a4: f64,
    direction: &str,
    kappa0: f64,
    nu0: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let dir = match direction {
        "increasing" => Direction::Increasing,
        "decreasing" => Direction::Decreasing,
        _ => return Err(err("direction must be 'increasing' or 'decreasing'")),
    };
    let (mu0, lambda0) =
        crlmix::prior::monotone_prior_solve(a1, a2, a3, a4, dir, kappa0, nu0, 2).map_err(err)?;
    Ok((mu0.as_slice().to_vec(), vec![lambda0[(0, 0)], lambda0[(1, 1)]]))
}

/// An ordinal dataset; `x_rows` exclude the intercept.
#[pyclass(name = "Dataset", skip_from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: OrdinalDataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(y: Vec<usize>, x_rows: Vec<Vec<f64>>, c: usize) -> PyResult<Self> {
        let rows = x_rows.iter().map(|r| with_intercept(r)).collect();
        Ok(PyDataset { inner: OrdinalDataset::new(y, rows, c).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn n_categories(&self) -> usize {
        self.inner.n_categories()
    }

    fn responses(&self) -> Vec<usize> {
        self.inner.responses().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n={}, p={}, C={})",
            self.inner.n(),
            self.inner.p(),
            self.inner.n_categories()
        )
    }
}

/// A model specification (baseline prior plus a truncation level).
#[pyclass(name = "Model", skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: crlmix::ModelSpec,
}

#[pymethods]
impl PyModel {
    /// The baseline (non-informative) prior.
    #[staticmethod]
    #[pyo3(signature = (c, p, variant = "general", truncation = 50))]
    fn baseline(c: usize, p: usize, variant: &str, truncation: usize) -> PyResult<Self> {
        let mut spec = baseline_prior(c, p, parse_variant(variant)?).map_err(err)?;
        spec.truncation = truncation;
        spec.validate().map_err(err)?;
        Ok(PyModel { inner: spec })
    }

    #[getter]
    fn variant(&self) -> String {
        self.inner.variant.to_string()
    }

    #[getter]
    fn truncation(&self) -> usize {
        self.inner.truncation
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(variant={}, C={}, p={}, L={})",
            self.inner.variant, self.inner.c, self.inner.p, self.inner.truncation
        )
    }
}

/// Retained posterior draws.
#[pyclass(name = "Draws")]
struct PyDraws {
    inner: PosteriorDraws,
}

#[pymethods]
impl PyDraws {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn variant(&self) -> String {
        self.inner.meta.variant.to_string()
    }

    /// Marginal response curves: `(mean, lower, upper)` as
    /// `[grid point][category]` lists. Grid rows exclude the intercept.
    fn marginal_curves(&self, grid: Vec<Vec<f64>>) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let g: Vec<Vec<f64>> = grid.iter().map(|r| with_intercept(r)).collect();
        let est = marginal_curves(&self.inner, &g, DEFAULT_LEVELS).map_err(err)?;
        Ok((est.mean, est.lower, est.upper))
    }

    /// Conditional response curves `Pr(Y = j | Y >= j, G_x)`.
    fn conditional_curves(&self, grid: Vec<Vec<f64>>) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let g: Vec<Vec<f64>> = grid.iter().map(|r| with_intercept(r)).collect();
        let est = conditional_curves(&self.inner, &g, DEFAULT_LEVELS).map_err(err)?;
        Ok((est.mean, est.lower, est.upper))
    }

    /// One posterior predictive category per retained draw at `x`.
    #[pyo3(signature = (x, seed = 0))]
    fn predictive(&self, x: Vec<f64>, seed: u64) -> PyResult<Vec<usize>> {
        let mut rng = RngStream::new(seed, 0);
        posterior_predictive(&self.inner, &with_intercept(&x), &mut rng).map_err(err)
    }

    /// Number of occupied mixture components per draw.
    fn n_distinct(&self) -> Vec<u32> {
        self.inner.draws.iter().map(|d| d.n_distinct()).collect()
    }

    /// Gelfand–Ghosh goodness-of-fit and penalty per category.
    #[pyo3(signature = (dataset, seed = 0))]
    fn gelfand_ghosh(&self, dataset: &PyDataset, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let mut rng = RngStream::new(seed, 0);
        let reps = predictive_replicates(&self.inner, &dataset.inner, &mut rng).map_err(err)?;
        let gg = gelfand_ghosh(&reps, &dataset.inner).map_err(err)?;
        Ok((gg.goodness, gg.penalty))
    }

    /// Writes the line-delimited draws file.
    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.write_file(std::path::Path::new(path)).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyDraws { inner: PosteriorDraws::read_file(std::path::Path::new(path)).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("Draws(variant={}, retained={})", self.inner.meta.variant, self.inner.len())
    }
}

/// Exact response distribution of a synthetic design.
#[pyclass(name = "Truth")]
struct PyTruth {
    inner: TruthFn,
}

#[pymethods]
impl PyTruth {
    /// True category probabilities at a covariate row (no intercept).
    fn probs(&self, x: Vec<f64>) -> Vec<f64> {
        self.inner.probs(&with_intercept(&x))
    }
}

/// Runs the blocked Gibbs sampler.
#[pyfunction]
#[pyo3(signature = (dataset, model, n_iter = 30_000, burn_in = 10_000, thin = 5, seed = 17, parallel_categories = false))]
fn fit(
    py: Python<'_>,
    dataset: &PyDataset,
    model: &PyModel,
    n_iter: u64,
    burn_in: u64,
    thin: u64,
    seed: u64,
    parallel_categories: bool,
) -> PyResult<PyDraws> {
    let cfg = RunConfig::new(n_iter, burn_in, thin, seed).with_parallel_categories(parallel_categories);
    let draws = py
        .detach(|| run_chain(&dataset.inner, &model.inner, &cfg))
        .map_err(err)?;
    Ok(PyDraws { inner: draws })
}

/// Generates one of the synthetic designs with default parameters; returns
/// `(Dataset, Truth)`.
#[pyfunction]
#[pyo3(signature = (design, n, seed = 0))]
fn simulate(design: &str, n: usize, seed: u64) -> PyResult<(PyDataset, PyTruth)> {
    let mut rng = RngStream::new(seed, 0);
    let sim = match design {
        "example1" => gen_example1(n, &Default::default(), &mut rng),
        "example2" => gen_example2(n, &Default::default(), &mut rng),
        "example3" => gen_example3(n, &Default::default(), &mut rng),
        _ => return Err(err(format!("unknown design '{design}'"))),
    }
    .map_err(err)?;
    Ok((PyDataset { inner: sim.dataset }, PyTruth { inner: sim.truth }))
}

#[pymodule]
fn crlmix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(category_probs, m)?)?;
    m.add_function(wrap_pyfunction!(logits_from_probs, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_log_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(cumulative_logit, m)?)?;
    m.add_function(wrap_pyfunction!(pg_sample, m)?)?;
    m.add_function(wrap_pyfunction!(logit_normal_mean, m)?)?;
    m.add_function(wrap_pyfunction!(logit_normal_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(monotone_prior_solve, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyDraws>()?;
    m.add_class::<PyTruth>()?;
    Ok(())
}
