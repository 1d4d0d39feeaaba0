//! Bayesian nonparametric ordinal regression built from mixtures of
//! continuation-ratio logits models.
//!
//! The response distribution of an ordinal outcome with `C` categories is
//! modeled as a discrete mixture of multinomial kernels parameterized by
//! continuation-ratio logits, with covariates entering linearly through the
//! kernel parameters, the mixture weights, or both:
//!
//! * **General** — covariate-dependent atoms *and* logit stick-breaking
//!   weights with covariate-dependent breaking proportions.
//! * **Common-weights** — covariate-dependent atoms, Dirichlet-process
//!   (covariate-free) weights.
//! * **Common-atoms** — covariate-free scalar atoms, covariate-dependent
//!   logit stick-breaking weights.
//!
//! Posterior simulation uses blocked Gibbs sampling under a finite truncation
//! of the stick-breaking prior, with Pólya-Gamma data augmentation turning
//! every logistic term into a conditionally Gaussian one. The crate covers
//! the full workflow: kernel math ([`kernel`]), seeded random variates
//! ([`randvar`]), prior elicitation ([`prior`]), the samplers ([`sampler`]),
//! posterior regression functionals ([`inference`]), model-comparison metrics
//! ([`metrics`]) and synthetic-data generators ([`simdata`]).

// validation comparisons are written as !(x > bound) so NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod draws;
pub mod error;
pub mod inference;
pub mod kernel;
pub mod metrics;
pub mod num;
pub mod prior;
pub mod randvar;
pub mod rng;
pub mod sampler;
pub mod simdata;

pub use data::OrdinalDataset;
pub use draws::{DrawRecord, PosteriorDraws, RunMeta};
pub use error::{Error, Result};
pub use kernel::{CategoryProbs, CrLogits, CumulativeLogit};
pub use prior::{baseline_prior, ModelSpec, Variant};
pub use rng::RngStream;
pub use sampler::{run_chain, ChainState, RunConfig};
