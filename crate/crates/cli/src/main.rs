use clap::{Parser, Subcommand};
use crlmix_cli::config::{JobConfig, CONFIG_TEMPLATE};
use crlmix_cli::jobs::{self, JobContext};
use crlmix_cli::CliError;
use std::path::PathBuf;

/// Bayesian nonparametric ordinal regression: mixture-of-continuation-ratio
/// logits models with Pólya-Gamma blocked Gibbs sampling.
#[derive(Parser)]
#[command(name = "crlmix", version, about, max_term_width = 100)]
struct Cli {
    /// Job configuration file (TOML); `print-config` dumps the template.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed (overrides [job] seed; default 17).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (overrides [job] threads; default 1). Retained draws
    /// are bitwise identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory (overrides [job] output).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model to a dataset CSV; writes draws.jsonl + diagnostics.csv.
    Fit,
    /// Evaluate marginal/conditional response curves from a draws file.
    Curves,
    /// Posterior predictive pmf at the covariate rows in [predict].
    Predict,
    /// Fit all three variants and emit the predictive-loss comparison table.
    Compare,
    /// Generate a synthetic dataset with its exact truth curves.
    Simulate,
    /// Construct a prior (baseline or monotone) and print it.
    Elicit,
    /// Print the fully documented default configuration.
    PrintConfig,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    });
}

fn run(cli: Cli) -> Result<(), CliError> {
    if matches!(cli.command, Command::PrintConfig) {
        print!("{CONFIG_TEMPLATE}");
        return Ok(());
    }
    let config = match &cli.config {
        Some(path) => JobConfig::from_file(path)?,
        None => JobConfig::default(),
    };
    let ctx = JobContext::new(config, cli.seed, cli.threads, cli.output);
    if ctx.threads > 1 {
        // a shared pool for the data-parallel category updates
        let _ = rayon::ThreadPoolBuilder::new().num_threads(ctx.threads).build_global();
    }
    match cli.command {
        Command::Fit => jobs::run_fit(&ctx),
        Command::Curves => jobs::run_curves(&ctx),
        Command::Predict => jobs::run_predict(&ctx),
        Command::Compare => jobs::run_compare(&ctx),
        Command::Simulate => jobs::run_simulate(&ctx),
        Command::Elicit => jobs::run_elicit(&ctx, &mut std::io::stdout()),
        Command::PrintConfig => unreachable!(),
    }
}
