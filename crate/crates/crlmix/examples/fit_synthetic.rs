//! Fits the three model variants to one synthetic dataset and prints the
//! estimated response curves against the truth.
//!
//! Run: `cargo run --release -p crlmix --example fit_synthetic`

use crlmix::inference::{marginal_curves, DEFAULT_LEVELS};
use crlmix::metrics::{gelfand_ghosh, predictive_replicates};
use crlmix::prior::{baseline_prior, Variant};
use crlmix::sampler::{run_chain, RunConfig};
use crlmix::simdata::{gen_example1, MixtureDesign};
use crlmix::RngStream;

fn main() {
    let mut rng = RngStream::new(7, 0);
    let sim = gen_example1(400, &MixtureDesign::default(), &mut rng).unwrap();
    println!("data: n = {}, C = {}", sim.dataset.n(), sim.dataset.n_categories());

    let grid: Vec<Vec<f64>> = (0..9).map(|g| vec![1.0, -10.0 + 2.5 * g as f64]).collect();
    for variant in [Variant::General, Variant::CommonWeights, Variant::CommonAtoms] {
        let mut spec = baseline_prior(3, 2, variant).unwrap();
        spec.truncation = 30;
        let cfg = RunConfig::new(4000, 1500, 5, 11).with_stream(variant as u64);
        let draws = run_chain(&sim.dataset, &spec, &cfg).unwrap();
        let est = marginal_curves(&draws, &grid, DEFAULT_LEVELS).unwrap();

        let mut gg_rng = RngStream::new(99, variant as u64);
        let reps = predictive_replicates(&draws, &sim.dataset, &mut gg_rng).unwrap();
        let gg = gelfand_ghosh(&reps, &sim.dataset).unwrap();
        println!("\n{variant} ({} draws, G+P = {:.1})", draws.len(), gg.total());
        println!("    x | true pi_1  est [band]      | true pi_3  est [band]");
        for (g, x) in grid.iter().enumerate() {
            let truth = sim.probs(x);
            println!(
                "{:5.1} | {:.3}  {:.3} [{:.3},{:.3}] | {:.3}  {:.3} [{:.3},{:.3}]",
                x[1],
                truth[0],
                est.mean[g][0],
                est.lower[g][0],
                est.upper[g][0],
                truth[2],
                est.mean[g][2],
                est.lower[g][2],
                est.upper[g][2],
            );
        }
    }
}
