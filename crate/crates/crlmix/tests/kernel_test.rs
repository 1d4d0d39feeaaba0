//! Kernel math: frozen worked values, proptest invariants, and the
//! latent-logistic representation oracle.

mod util;

use crlmix::kernel::{CategoryProbs, CrLogits};
use crlmix::num::sigmoid;
use crlmix::rng::RngStream;
use proptest::prelude::*;
use util::{latent_logistic_pmf, tv_distance};

/// Independent evaluation of the probability map, written out longhand.
fn probs_direct(theta: &[f64]) -> Vec<f64> {
    let c = theta.len() + 1;
    let mut pi = vec![0.0; c];
    for j in 0..c - 1 {
        let mut v = 1.0 / (1.0 + (-theta[j]).exp());
        for &t in &theta[..j] {
            v *= 1.0 - 1.0 / (1.0 + (-t).exp());
        }
        pi[j] = v;
    }
    pi[c - 1] = theta.iter().map(|&t| 1.0 - 1.0 / (1.0 + (-t).exp())).product();
    pi
}

#[test]
fn probability_map_matches_direct_evaluation() {
    let theta = CrLogits::new(vec![1.0, -1.0]).unwrap();
    let pi = theta.category_probs();
    let direct = probs_direct(&[1.0, -1.0]);
    for (a, b) in pi.as_slice().iter().zip(&direct) {
        assert!((a - b).abs() < 1e-15);
    }
    // frozen values of the direct evaluation
    assert!((pi.as_slice()[0] - 0.7310585786300049).abs() < 1e-12);
    assert!((pi.as_slice()[1] - 0.07232948812851325).abs() < 1e-12);
    assert!((pi.as_slice()[2] - 0.19661193324148185).abs() < 1e-12);
}

#[test]
fn probability_inverse_recovers_logits() {
    let pi = CategoryProbs::new(vec![0.5, 0.25, 0.25]).unwrap();
    let theta = pi.to_logits().unwrap();
    assert!(theta.as_slice().iter().all(|t| t.abs() < 1e-14));

    let pi = CategoryProbs::new(probs_direct(&[1.0, -1.0])).unwrap();
    let theta = pi.to_logits().unwrap();
    assert!((theta.as_slice()[0] - 1.0).abs() < 1e-12);
    assert!((theta.as_slice()[1] + 1.0).abs() < 1e-12);
}

#[test]
fn log_pmf_frozen_value() {
    let theta = CrLogits::new(vec![1.0, -1.0]).unwrap();
    let expect = probs_direct(&[1.0, -1.0])[1].ln();
    assert!((theta.log_pmf(2).unwrap() - expect).abs() < 1e-13);
}

#[test]
fn cumulative_reparameterization_frozen_values() {
    let theta = CrLogits::new(vec![1.0, -1.0]).unwrap();
    let cum = theta.to_cumulative();
    assert_eq!(cum.location, -1.0);
    let expect = (1.0 + (-1.0f64).exp() + (-2.0f64).exp()).ln();
    assert!((cum.cutoffs[0] - expect).abs() < 1e-14);
    // both parameterizations must imply the same distribution
    let pi = theta.category_probs();
    for (a, b) in cum.category_probs().iter().zip(pi.as_slice()) {
        assert!((a - b).abs() < 1e-12);
    }
    // Pr(Y <= 2) under the cumulative form vs the direct sum
    let cum2 = sigmoid(cum.cutoffs[0] - cum.location);
    assert!((cum2 - (pi.as_slice()[0] + pi.as_slice()[1])).abs() < 1e-14);
}

#[test]
fn latent_logistic_route_matches_kernel_probs() {
    // the sequential sign-of-logistic mechanism must reproduce the pmf
    let mut rng = RngStream::new(20240, 0);
    for (case, theta) in [vec![0.4, -0.8], vec![-1.5, 0.6, 1.1], vec![2.0]].iter().enumerate() {
        let pmf = latent_logistic_pmf(theta, 200_000, &mut rng);
        let exact = CrLogits::new(theta.clone()).unwrap().category_probs();
        let tv = tv_distance(&pmf, exact.as_slice());
        assert!(tv < 0.005, "case {case}: tv = {tv}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_invariant(theta in prop::collection::vec(-8.0..8.0f64, 1..9)) {
        let pi = CrLogits::new(theta).unwrap().category_probs();
        let sum: f64 = pi.as_slice().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(pi.as_slice().iter().all(|&p| p > 0.0 && p < 1.0));
    }

    #[test]
    fn round_trip_identity(theta in prop::collection::vec(-8.0..8.0f64, 1..9)) {
        let logits = CrLogits::new(theta.clone()).unwrap();
        let back = logits.category_probs().to_logits().unwrap();
        for (a, b) in back.as_slice().iter().zip(&theta) {
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn pmf_normalizes(theta in prop::collection::vec(-8.0..8.0f64, 1..9)) {
        let logits = CrLogits::new(theta).unwrap();
        let c = logits.n_categories();
        let total: f64 = (1..=c).map(|y| logits.log_pmf(y).unwrap().exp()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for y in 1..=c {
            let direct = logits.category_probs().as_slice()[y - 1].ln();
            prop_assert!((logits.log_pmf(y).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulative_cutoffs_monotone_and_equivalent(theta in prop::collection::vec(-8.0..8.0f64, 1..9)) {
        let logits = CrLogits::new(theta).unwrap();
        let cum = logits.to_cumulative();
        // κ_1 = 0 < κ_2 < …
        let mut prev = 0.0;
        for (idx, &k) in cum.cutoffs.iter().enumerate() {
            prop_assert!(k > prev, "cutoff {idx} not increasing: {k} <= {prev}");
            prev = k;
        }
        for (a, b) in cum.category_probs().iter().zip(logits.category_probs().as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
