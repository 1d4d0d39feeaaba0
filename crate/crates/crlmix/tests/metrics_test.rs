//! Gelfand–Ghosh and curve-metric oracles: brute-force recomputation on
//! toys, closed-form limits, trivial identities.

mod util;

use crlmix::inference::CurveEstimate;
use crlmix::metrics::*;
use crlmix::rng::RngStream;
use crlmix::OrdinalDataset;
use rand::Rng;

#[test]
fn gelfand_ghosh_brute_force_on_five_observation_toy() {
    let data = OrdinalDataset::new(
        vec![1, 3, 2, 2, 3],
        (0..5).map(|i| vec![1.0, i as f64 - 2.0]).collect(),
        3,
    )
    .unwrap();
    // deterministic pseudo-random replicate table, 7 draws
    let t = 7;
    let mut cats = Vec::with_capacity(5 * t);
    for i in 0..5 {
        for tt in 0..t {
            cats.push(((i * 3 + 2 * tt + 1) % 3 + 1) as u16);
        }
    }
    let reps = ReplicateMatrix::from_categories(cats.clone(), 5, t, 3).unwrap();
    let gg = gelfand_ghosh(&reps, &data).unwrap();

    // independent recomputation straight from the definition
    for j in 1..=3usize {
        let mut g = 0.0;
        let mut p = 0.0;
        for i in 0..5 {
            let y = if data.response(i) == j { 1.0 } else { 0.0 };
            let indicators: Vec<f64> = (0..t)
                .map(|tt| if cats[i * t + tt] as usize == j { 1.0 } else { 0.0 })
                .collect();
            let mean = indicators.iter().sum::<f64>() / t as f64;
            let var = indicators.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t as f64;
            g += (y - mean).powi(2);
            p += var;
        }
        assert!((gg.goodness[j - 1] - g).abs() < 1e-12, "G_{j}");
        assert!((gg.penalty[j - 1] - p).abs() < 1e-12, "P_{j}");
    }
}

#[test]
fn gelfand_ghosh_bernoulli_limit() {
    // all observations in category 1; replicates i.i.d. fair on {1, 2}:
    // G_1 -> n/4 and P_1 -> n/4 as draws grow
    let n = 10;
    let t = 400_000;
    let data = OrdinalDataset::new(vec![1; n], (0..n).map(|_| vec![1.0]).collect(), 2).unwrap();
    let mut rng = RngStream::new(2024, 0);
    let cats: Vec<u16> = (0..n * t).map(|_| if rng.random::<f64>() < 0.5 { 1 } else { 2 }).collect();
    let reps = ReplicateMatrix::from_categories(cats, n, t, 2).unwrap();
    let gg = gelfand_ghosh(&reps, &data).unwrap();
    let expect = n as f64 * 0.25;
    assert!((gg.goodness[0] - expect).abs() < 0.02 * expect, "G_1 = {}", gg.goodness[0]);
    assert!((gg.penalty[0] - expect).abs() < 0.02 * expect, "P_1 = {}", gg.penalty[0]);
}

fn flat_estimate(grid: Vec<Vec<f64>>, mean: Vec<Vec<f64>>, lower: Vec<Vec<f64>>, upper: Vec<Vec<f64>>) -> CurveEstimate {
    let c = mean[0].len();
    CurveEstimate {
        grid,
        n_categories: c,
        mean,
        lower,
        upper,
        levels: (0.025, 0.975),
        traces: vec![],
    }
}

#[test]
fn curve_metrics_trivial_identities() {
    let grid: Vec<Vec<f64>> = (0..9).map(|g| vec![1.0, g as f64]).collect();
    let truth = |x: &[f64]| {
        let p1 = 0.2 + 0.05 * (x[1] / 10.0);
        vec![p1, 0.3, 0.5 - 0.05 * (x[1] / 10.0)]
    };
    let mean: Vec<Vec<f64>> = grid.iter().map(|x| truth(x)).collect();

    // estimate == truth with degenerate intervals
    let est = flat_estimate(grid.clone(), mean.clone(), mean.clone(), mean.clone());
    let m = curve_metrics(truth, &est).unwrap();
    assert_eq!(m.rmse, vec![0.0; 3]);
    assert_eq!(m.avg_length, vec![0.0; 3]);
    assert_eq!(m.coverage, vec![1.0; 3]);

    // intervals spanning (0,1) everywhere: length 1, coverage 1
    let zeros: Vec<Vec<f64>> = grid.iter().map(|_| vec![0.0; 3]).collect();
    let ones: Vec<Vec<f64>> = grid.iter().map(|_| vec![1.0; 3]).collect();
    let est = flat_estimate(grid.clone(), mean.clone(), zeros, ones);
    let m = curve_metrics(truth, &est).unwrap();
    assert_eq!(m.avg_length, vec![1.0; 3]);
    assert_eq!(m.coverage, vec![1.0; 3]);
}

#[test]
fn curve_metrics_constant_bias_arithmetic() {
    // bias b at every grid point: rmse = sqrt(N b²)/N = |b|/sqrt(N)
    let n_grid = 16usize;
    let b = 0.03;
    let grid: Vec<Vec<f64>> = (0..n_grid).map(|g| vec![1.0, g as f64]).collect();
    let truth = |_: &[f64]| vec![0.4, 0.35, 0.25];
    let mean: Vec<Vec<f64>> = grid.iter().map(|_| vec![0.4 + b, 0.35 - b, 0.25]).collect();
    let est = flat_estimate(grid, mean.clone(), mean.clone(), mean);
    let m = curve_metrics(truth, &est).unwrap();
    let expect = b / (n_grid as f64).sqrt();
    assert!((m.rmse[0] - expect).abs() < 1e-14);
    assert!((m.rmse[1] - expect).abs() < 1e-14);
    assert!((m.rmse[2] - 0.0).abs() < 1e-14);
    // biased point estimates with degenerate intervals never cover
    assert_eq!(m.coverage[0], 0.0);
    assert_eq!(m.coverage[2], 1.0);
}

#[test]
fn coverage_always_within_unit_interval() {
    let grid: Vec<Vec<f64>> = (0..5).map(|g| vec![1.0, g as f64]).collect();
    let truth = |_: &[f64]| vec![0.5, 0.5];
    let mean: Vec<Vec<f64>> = grid.iter().map(|_| vec![0.45, 0.55]).collect();
    let lower: Vec<Vec<f64>> = grid.iter().map(|_| vec![0.40, 0.52]).collect();
    let upper: Vec<Vec<f64>> = grid.iter().map(|_| vec![0.52, 0.58]).collect();
    let est = flat_estimate(grid, mean, lower, upper);
    let m = curve_metrics(truth, &est).unwrap();
    assert!(m.coverage.iter().all(|&r| (0.0..=1.0).contains(&r)));
    assert_eq!(m.coverage[0], 1.0); // 0.5 in [0.40, 0.52]
    assert_eq!(m.coverage[1], 0.0); // 0.5 below 0.52
}
