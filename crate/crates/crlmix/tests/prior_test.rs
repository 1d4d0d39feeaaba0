//! Prior-layer semantics: the baseline prior's dyadic expected curves, the
//! expected component weights, and the monotone solver's band geometry.

mod util;

use crlmix::num::sigmoid;
use crlmix::prior::*;
use crlmix::randvar::sample_mvn;
use crlmix::rng::RngStream;
use nalgebra::{DMatrix, DVector};

#[test]
fn baseline_prior_curves_are_dyadic_at_any_x() {
    // E(Pr(Y=j | G_x)) = 2^{-j}, j < C, and 2^{-(C-1)} for the last category
    let spec = baseline_prior(3, 2, Variant::General).unwrap();
    let mut rng = RngStream::new(71, 0);
    for x in [vec![1.0, -7.5], vec![1.0, 0.0], vec![1.0, 3.2]] {
        let (means, ses) = prior_curve_expectation_mc(&spec, &x, 40_000, &mut rng).unwrap();
        for (j, expect) in [(0usize, 0.5), (1, 0.25), (2, 0.25)] {
            assert!(
                (means[j] - expect).abs() < 3.0 * ses[j].max(1e-4),
                "x={x:?}, cat {}: {} vs {expect} (se {})",
                j + 1,
                means[j],
                ses[j]
            );
        }
    }
}

#[test]
fn baseline_prior_scalar_atoms_also_dyadic() {
    let spec = baseline_prior(4, 2, Variant::CommonAtoms).unwrap();
    let mut rng = RngStream::new(72, 0);
    let (means, ses) = prior_curve_expectation_mc(&spec, &[1.0, 5.0], 40_000, &mut rng).unwrap();
    for (j, expect) in [(0usize, 0.5), (1, 0.25), (2, 0.125), (3, 0.125)] {
        assert!(
            (means[j] - expect).abs() < 3.0 * ses[j].max(1e-4),
            "cat {}: {} (se {})",
            j + 1,
            means[j],
            ses[j]
        );
    }
}

#[test]
fn baseline_expected_component_weights_are_dyadic() {
    // E(ω_l(x)) = 2^{-l} under the stick-breaking prior with γ0 = 0
    let p = 2;
    let gamma0 = DVector::zeros(p);
    let cov = DMatrix::identity(p, p) * 100.0;
    let mut rng = RngStream::new(73, 0);
    let x = DVector::from_vec(vec![1.0, -4.0]);
    let n_mc = 60_000;
    let l_check = 4;
    let mut sums = vec![0.0; l_check];
    for _ in 0..n_mc {
        let mut survivor = 1.0;
        for slot in sums.iter_mut() {
            let g = sample_mvn(&gamma0, &cov, &mut rng).unwrap();
            let eta = sigmoid(g.dot(&x));
            *slot += eta * survivor;
            survivor *= 1.0 - eta;
        }
    }
    for (l, s) in sums.iter().enumerate() {
        let mean = s / n_mc as f64;
        let expect = baseline_expected_weight(l + 1);
        // weights live in [0,1]; a generous moment bound on the SE
        let se = (expect / n_mc as f64).sqrt();
        assert!((mean - expect).abs() < 4.0 * se, "component {}: {mean} vs {expect}", l + 1);
    }
}

#[test]
fn monotone_solver_band_geometry() {
    let (a1, a2, a3, a4) = (10.0, 10.0, 6.0, 2.0);
    let (kappa0, nu0, p) = (4.0, 4.0, 2usize);
    let (mu0, lambda0) =
        monotone_prior_solve(a1, a2, a3, a4, Direction::Decreasing, kappa0, nu0, p).unwrap();
    // bracket parabolas in the half-variance scale
    let factor = (kappa0 + 1.0) / (2.0 * kappa0 * (nu0 - p as f64 - 1.0));
    let lam0 = factor * lambda0[(0, 0)];
    let lam1 = factor * lambda0[(1, 1)];
    let upper = |x: f64| lam1 * x * x + mu0[1] * x + mu0[0] + lam0;
    let lower = |x: f64| -lam1 * x * x + mu0[1] * x + mu0[0] - lam0;
    for g in 0..=100 {
        let x = -15.0 + 0.3 * g as f64;
        assert!(upper(x) >= lower(x), "x={x}");
    }
    // the gap at the symmetry axes (±a1) equals a2 exactly
    for x in [a1, -a1] {
        let gap = upper(x) - lower(x);
        assert!((gap - a2).abs() < 1e-12, "gap at {x}: {gap}");
    }
    // vertex ordinates: the upper parabola bottoms out at -a3 (right axis),
    // the lower one peaks at a4 (left axis)
    let x_up = -mu0[1] / (2.0 * lam1); // = +a1 in the decreasing case
    assert!((x_up - a1).abs() < 1e-12);
    assert!((upper(x_up) - (-a3)).abs() < 1e-12);
    assert!((lower(-x_up) - a4).abs() < 1e-12);
}

#[test]
fn monotone_solver_yields_monotone_expected_curve() {
    // push the solved hyperparameters through the prior expectation by Monte
    // Carlo: the expected first-category curve must decrease over (-a1, a1)
    // up to MC noise
    let (mu0, lambda0) =
        monotone_prior_solve(10.0, 10.0, 6.0, 2.0, Direction::Decreasing, 4.0, 4.0, 2).unwrap();
    let mut spec = baseline_prior(3, 2, Variant::General).unwrap();
    if let AtomsPrior::Regression(per_j) = &mut spec.atoms {
        per_j[0].mu0 = mu0.clone();
        per_j[0].lambda0 = lambda0.clone();
    }
    let mut rng = RngStream::new(74, 0);
    let n_mc = 20_000;
    let points = 26;
    let mut curve = Vec::with_capacity(points);
    let mut ses = Vec::with_capacity(points);
    for g in 0..points {
        let x = -10.0 + 20.0 * g as f64 / (points - 1) as f64;
        let (m, s) = prior_curve_expectation_mc(&spec, &[1.0, x], n_mc, &mut rng).unwrap();
        curve.push(m[0]);
        ses.push(s[0]);
    }
    for g in 1..points {
        let noise = 3.0 * (ses[g - 1].powi(2) + ses[g].powi(2)).sqrt();
        assert!(
            curve[g] < curve[g - 1] + noise,
            "not decreasing at step {g}: {} -> {}",
            curve[g - 1],
            curve[g]
        );
    }
    // ends of the band: high on the left, low on the right
    assert!(curve[0] > 0.75, "left end {}", curve[0]);
    assert!(*curve.last().unwrap() < 0.25, "right end {}", curve.last().unwrap());

    // increasing direction mirrors the shape
    let (mu0_inc, lambda0_inc) =
        monotone_prior_solve(10.0, 10.0, 6.0, 2.0, Direction::Increasing, 4.0, 4.0, 2).unwrap();
    if let AtomsPrior::Regression(per_j) = &mut spec.atoms {
        per_j[0].mu0 = mu0_inc;
        per_j[0].lambda0 = lambda0_inc;
    }
    let (left, _) = prior_curve_expectation_mc(&spec, &[1.0, -9.0], n_mc, &mut rng).unwrap();
    let (right, _) = prior_curve_expectation_mc(&spec, &[1.0, 9.0], n_mc, &mut rng).unwrap();
    assert!(left[0] < 0.25 && right[0] > 0.75, "increasing case: {} .. {}", left[0], right[0]);
}
