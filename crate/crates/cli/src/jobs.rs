//! Job orchestration: each subcommand reads its inputs, runs the pipeline
//! and writes a self-contained output directory (manifest + artifacts).
//!
//! Reruns with identical config and seed produce byte-identical draws files
//! and CSV tables; wall-clock timings go only into the manifest.

use crate::config::JobConfig;
use crate::ingest::{ingest_csv, write_dataset_csv, IngestReport};
use crate::{CliError, CliResult};
use crlmix::inference::{
    conditional_curves, diagnostics, marginal_curves, posterior_predictive,
    CurveEstimate, DEFAULT_LEVELS,
};
use crlmix::metrics::{gelfand_ghosh, predictive_replicates, GgResult};
use crlmix::prior::{monotone_prior_solve, ModelSpec, Variant};
use crlmix::sampler::run_chain;
use crlmix::simdata::{gen_example1, gen_example2, gen_example3, SimTruth};
use crlmix::{OrdinalDataset, PosteriorDraws, RngStream};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Resolved invocation: config plus command-line overrides.
pub struct JobContext {
    pub config: JobConfig,
    pub seed: u64,
    pub threads: usize,
    pub out_dir: PathBuf,
}

impl JobContext {
    pub fn new(config: JobConfig, seed: Option<u64>, threads: Option<usize>, output: Option<PathBuf>) -> Self {
        let seed = seed.or(config.job.seed).unwrap_or(17);
        let threads = threads.or(config.job.threads).unwrap_or(1);
        let out_dir = output
            .or_else(|| config.job.output.clone())
            .unwrap_or_else(|| PathBuf::from("crlmix-out"));
        JobContext { config, seed, threads, out_dir }
    }

    fn input(&self) -> CliResult<&Path> {
        self.config
            .job
            .input
            .as_deref()
            .ok_or_else(|| CliError::Config("no input path set ([job] input or --config)".to_string()))
    }

    fn prepare_out_dir(&self) -> CliResult<()> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", self.out_dir.display())))
    }

    fn write_manifest(&self, command: &str, extra: toml::Table) -> CliResult<()> {
        let mut doc = toml::Table::new();
        doc.insert("command".into(), command.into());
        doc.insert("seed".into(), toml::Value::Integer(self.seed as i64));
        doc.insert("threads".into(), toml::Value::Integer(self.threads as i64));
        doc.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        let echo = toml::Value::try_from(&self.config)
            .map_err(|e| CliError::Config(format!("cannot echo config: {e}")))?;
        doc.insert("config".into(), echo);
        for (k, v) in extra {
            doc.insert(k, v);
        }
        let text = toml::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
        std::fs::write(self.out_dir.join("manifest.toml"), text)
            .map_err(|e| CliError::Config(format!("cannot write manifest: {e}")))
    }
}

/// Sidecar next to a draws file describing how its dataset was ingested.
fn write_ingest_sidecar(dir: &Path, report: &IngestReport) -> CliResult<()> {
    let json = serde_json::to_string_pretty(report).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(dir.join("ingest.json"), json)
        .map_err(|e| CliError::Config(format!("cannot write ingest.json: {e}")))
}

fn read_ingest_sidecar(draws_path: &Path) -> Option<IngestReport> {
    let dir = draws_path.parent()?;
    let text = std::fs::read_to_string(dir.join("ingest.json")).ok()?;
    serde_json::from_str(&text).ok()
}

/// Synthetic identity report for generated datasets (no relabeling, no
/// standardization).
fn synthetic_report(dataset: &OrdinalDataset) -> IngestReport {
    let k = dataset.p() - 1;
    let ranges = dataset.column_ranges();
    let means = dataset.column_means();
    IngestReport {
        covariate_names: (1..=k).map(|j| format!("x{j}")).collect(),
        relabel_map: (1..=dataset.n_categories() as i64).collect(),
        standardization: None,
        ranges: ranges[1..].to_vec(),
        means: means[1..].to_vec(),
    }
}

/// Builds the first-order grid requested by `[grid]`, in design units, and
/// returns it along with the original-unit values of the swept covariate.
fn build_grid(cfg: &JobConfig, report: &IngestReport, p: usize) -> CliResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let g = &cfg.grid;
    let k = p - 1;
    if g.covariate == 0 || g.covariate > k {
        return Err(CliError::Config(format!(
            "grid covariate {} out of range 1..={k}",
            g.covariate
        )));
    }
    let col = g.covariate - 1; // index among covariates
    let (obs_lo, obs_hi) = report.ranges.get(col).copied().unwrap_or((0.0, 1.0));
    let lo = g.lo.unwrap_or(obs_lo);
    let hi = g.hi.unwrap_or(obs_hi);
    if !(hi > lo) || g.points < 2 {
        return Err(CliError::Config(format!("bad grid: lo={lo}, hi={hi}, points={}", g.points)));
    }
    // fixed values: observed means of the other covariates (original units)
    let mut originals = Vec::with_capacity(g.points);
    let mut grid = Vec::with_capacity(g.points);
    for i in 0..g.points {
        let x_orig = lo + (hi - lo) * i as f64 / (g.points - 1) as f64;
        originals.push(x_orig);
        let mut raw = report.means.clone();
        raw[col] = x_orig;
        grid.push(report.design_row(&raw)?);
    }
    Ok((grid, originals))
}

fn write_curve_csv(
    path: &Path,
    est: &CurveEstimate,
    report: &IngestReport,
) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    let mut header: Vec<String> = report.covariate_names.clone();
    header.extend(["category".into(), "mean".into(), "lower".into(), "upper".into()]);
    w.write_record(&header).map_err(|e| CliError::Config(e.to_string()))?;
    for (g, x) in est.grid.iter().enumerate() {
        for j in 0..est.n_categories {
            let mut rec: Vec<String> = x
                .iter()
                .skip(1)
                .enumerate()
                .map(|(col, v)| format!("{}", report.original_value(col, *v)))
                .collect();
            rec.push((j + 1).to_string());
            rec.push(format!("{}", est.mean[g][j]));
            rec.push(format!("{}", est.lower[g][j]));
            rec.push(format!("{}", est.upper[g][j]));
            w.write_record(&rec).map_err(|e| CliError::Config(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(())
}

fn load_draws(path: &Path) -> CliResult<PosteriorDraws> {
    PosteriorDraws::read_file(path).map_err(|e| CliError::Data(e.to_string()))
}

fn variant_slug(v: Variant) -> &'static str {
    match v {
        Variant::General => "general",
        Variant::CommonWeights => "common-weights",
        Variant::CommonAtoms => "common-atoms",
    }
}

/// `fit`: ingest → model → chain → draws file + diagnostics.
pub fn run_fit(ctx: &JobContext) -> CliResult<()> {
    // config-level validation precedes any data access
    ctx.config.variant()?;
    let run_cfg = ctx.config.run_config(ctx.seed)?;
    let (dataset, report) = ingest_csv(ctx.input()?, &ctx.config.data.y_column, ctx.config.data.standardize)?;
    let spec = ctx.config.build_model(dataset.n_categories(), dataset.p())?;
    ctx.prepare_out_dir()?;

    let draws = run_chain(&dataset, &spec, &run_cfg).map_err(CliError::from_compute)?;
    draws
        .write_file(&ctx.out_dir.join("draws.jsonl"))
        .map_err(CliError::from_compute)?;
    write_ingest_sidecar(&ctx.out_dir, &report)?;
    write_diagnostics_csv(&ctx.out_dir.join("diagnostics.csv"), &draws, &dataset)?;

    let mut extra = toml::Table::new();
    extra.insert(
        "seconds_per_1000_iterations".into(),
        toml::Value::try_from(&draws.meta.seconds_per_1000).unwrap_or(toml::Value::Array(vec![])),
    );
    extra.insert("ingest".into(), toml::Value::try_from(&report).map_err(|e| CliError::Config(e.to_string()))?);
    extra.insert("spec_hash".into(), toml::Value::String(format!("{:016x}", spec.hash())));
    ctx.write_manifest("fit", extra)?;
    eprintln!(
        "fit: {} retained draws ({} sweeps) -> {}",
        draws.len(),
        run_cfg.n_iter,
        ctx.out_dir.display()
    );
    Ok(())
}

fn write_diagnostics_csv(path: &Path, draws: &PosteriorDraws, dataset: &OrdinalDataset) -> CliResult<()> {
    let x_ref = dataset.column_means();
    let diag = diagnostics(draws, &x_ref, 4).map_err(CliError::from_compute)?;
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    let c = draws.meta.c;
    let p = draws.meta.p;
    let mut header = vec!["sweep".to_string(), "n_distinct".to_string()];
    for r in 1..=diag.top_weights.first().map(|t| t.len()).unwrap_or(0) {
        header.push(format!("top_weight_{r}"));
    }
    for j in 1..c {
        let coefs = if matches!(draws.meta.variant, Variant::CommonAtoms) { 1 } else { p };
        for a in 0..coefs {
            header.push(format!("atom_avg_stage{j}_coef{a}"));
        }
    }
    w.write_record(&header).map_err(|e| CliError::Config(e.to_string()))?;
    for (t, d) in draws.draws.iter().enumerate() {
        let mut rec = vec![d.sweep.to_string(), diag.n_distinct[t].to_string()];
        for v in &diag.top_weights[t] {
            rec.push(format!("{v}"));
        }
        for stage in &diag.atom_average[t] {
            for v in stage {
                rec.push(format!("{v}"));
            }
        }
        w.write_record(&rec).map_err(|e| CliError::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(())
}

/// `curves`: read a draws file (read-only) and emit marginal and conditional
/// curve tables over the configured grid.
pub fn run_curves(ctx: &JobContext) -> CliResult<()> {
    let input = ctx.input()?;
    let draws = load_draws(input)?;
    let report = read_ingest_sidecar(input).unwrap_or_else(|| IngestReport {
        covariate_names: (1..draws.meta.p).map(|j| format!("x{j}")).collect(),
        relabel_map: (1..=draws.meta.c as i64).collect(),
        standardization: None,
        ranges: vec![(0.0, 1.0); draws.meta.p - 1],
        means: vec![0.0; draws.meta.p - 1],
    });
    let (grid, _) = build_grid(&ctx.config, &report, draws.meta.p)?;
    ctx.prepare_out_dir()?;
    let marg = marginal_curves(&draws, &grid, DEFAULT_LEVELS).map_err(CliError::from_compute)?;
    write_curve_csv(&ctx.out_dir.join("curves_marginal.csv"), &marg, &report)?;
    let cond = conditional_curves(&draws, &grid, DEFAULT_LEVELS).map_err(CliError::from_compute)?;
    write_curve_csv(&ctx.out_dir.join("curves_conditional.csv"), &cond, &report)?;
    ctx.write_manifest("curves", toml::Table::new())?;
    eprintln!("curves: {} grid points -> {}", grid.len(), ctx.out_dir.display());
    Ok(())
}

/// `predict`: empirical posterior predictive pmf at the supplied rows.
pub fn run_predict(ctx: &JobContext) -> CliResult<()> {
    let input = ctx.input()?;
    let draws = load_draws(input)?;
    let report = read_ingest_sidecar(input);
    if ctx.config.predict.rows.is_empty() {
        return Err(CliError::Config("[predict] rows is empty".to_string()));
    }
    ctx.prepare_out_dir()?;
    let mut rng = RngStream::new(ctx.seed, 7_000_000);
    let path = ctx.out_dir.join("predictive.csv");
    let mut w = csv::Writer::from_path(&path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    let k = draws.meta.p - 1;
    let mut header: Vec<String> = match &report {
        Some(r) => r.covariate_names.clone(),
        None => (1..=k).map(|j| format!("x{j}")).collect(),
    };
    header.extend((1..=draws.meta.c).map(|j| format!("p{j}")));
    w.write_record(&header).map_err(|e| CliError::Config(e.to_string()))?;
    for raw in &ctx.config.predict.rows {
        let row = match &report {
            Some(r) => r.design_row(raw)?,
            None => {
                let mut v = vec![1.0];
                v.extend_from_slice(raw);
                v
            }
        };
        if row.len() != draws.meta.p {
            return Err(CliError::Config(format!(
                "predict row has {} covariates, expected {}",
                raw.len(),
                k
            )));
        }
        let cats = posterior_predictive(&draws, &row, &mut rng).map_err(CliError::from_compute)?;
        let mut counts = vec![0.0; draws.meta.c];
        for y in &cats {
            counts[y - 1] += 1.0;
        }
        let mut rec: Vec<String> = raw.iter().map(|v| format!("{v}")).collect();
        for c in counts {
            rec.push(format!("{}", c / cats.len() as f64));
        }
        w.write_record(&rec).map_err(|e| CliError::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Config(e.to_string()))?;
    ctx.write_manifest("predict", toml::Table::new())?;
    Ok(())
}

/// `compare`: fit all three variants on one dataset (concurrently, on
/// independent streams) and emit the posterior-predictive-loss table.
pub fn run_compare(ctx: &JobContext) -> CliResult<()> {
    let run_cfg = ctx.config.run_config(ctx.seed)?;
    let (dataset, report) = ingest_csv(ctx.input()?, &ctx.config.data.y_column, ctx.config.data.standardize)?;
    ctx.prepare_out_dir()?;
    let variants = [Variant::General, Variant::CommonWeights, Variant::CommonAtoms];
    let mut specs = Vec::new();
    for v in variants {
        specs.push(ctx.config.build_model_for_variant(v, dataset.n_categories(), dataset.p())?);
    }

    let results: Vec<CliResult<(PosteriorDraws, GgResult)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .enumerate()
            .map(|(idx, spec)| {
                let dataset = &dataset;
                let cfg = run_cfg.with_stream(idx as u64);
                scope.spawn(move || -> CliResult<(PosteriorDraws, GgResult)> {
                    let draws = run_chain(dataset, spec, &cfg).map_err(CliError::from_compute)?;
                    let mut rng = RngStream::new(cfg.seed, 9_000_000 + idx as u64);
                    let reps = predictive_replicates(&draws, dataset, &mut rng)
                        .map_err(CliError::from_compute)?;
                    let gg = gelfand_ghosh(&reps, dataset).map_err(CliError::from_compute)?;
                    Ok((draws, gg))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    });

    let path = ctx.out_dir.join("gg_table.csv");
    let mut w = csv::Writer::from_path(&path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    let c = dataset.n_categories();
    let mut header = vec!["model".to_string()];
    for j in 1..=c {
        header.push(format!("G_{j}"));
        header.push(format!("P_{j}"));
    }
    header.push("total".to_string());
    w.write_record(&header).map_err(|e| CliError::Config(e.to_string()))?;
    for (v, result) in variants.iter().zip(results) {
        let (draws, gg) = result?;
        draws
            .write_file(&ctx.out_dir.join(format!("draws_{}.jsonl", variant_slug(*v))))
            .map_err(CliError::from_compute)?;
        let mut rec = vec![variant_slug(*v).to_string()];
        for j in 0..c {
            rec.push(format!("{}", gg.goodness[j]));
            rec.push(format!("{}", gg.penalty[j]));
        }
        rec.push(format!("{}", gg.total()));
        w.write_record(&rec).map_err(|e| CliError::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Config(e.to_string()))?;
    write_ingest_sidecar(&ctx.out_dir, &report)?;
    let mut extra = toml::Table::new();
    extra.insert("ingest".into(), toml::Value::try_from(&report).map_err(|e| CliError::Config(e.to_string()))?);
    ctx.write_manifest("compare", extra)?;
    eprintln!("compare: table -> {}", path.display());
    Ok(())
}

/// `simulate`: generate a synthetic dataset with its exact truth curves.
pub fn run_simulate(ctx: &JobContext) -> CliResult<()> {
    let sim = simulate_from_config(&ctx.config, ctx.seed)?;
    ctx.prepare_out_dir()?;
    let report = synthetic_report(&sim.dataset);
    write_dataset_csv(&ctx.out_dir.join("dataset.csv"), &sim.dataset, &report)?;

    // truth curves on the standard first-order grid, exported in the curve
    // schema (degenerate bands) for overlay
    let (grid, _) = build_grid(&ctx.config, &report, sim.dataset.p())?;
    let mean: Vec<Vec<f64>> = grid.iter().map(|x| sim.probs(x)).collect();
    let est = CurveEstimate {
        grid: grid.clone(),
        n_categories: sim.dataset.n_categories(),
        mean: mean.clone(),
        lower: mean.clone(),
        upper: mean,
        levels: DEFAULT_LEVELS,
        traces: vec![],
    };
    write_curve_csv(&ctx.out_dir.join("truth_curves.csv"), &est, &report)?;

    let mut extra = toml::Table::new();
    extra.insert(
        "truth".into(),
        toml::Value::try_from(&sim.truth).map_err(|e| CliError::Config(e.to_string()))?,
    );
    ctx.write_manifest("simulate", extra)?;
    eprintln!(
        "simulate: {} observations ({}) -> {}",
        sim.dataset.n(),
        sim.design,
        ctx.out_dir.display()
    );
    Ok(())
}

pub fn simulate_from_config(config: &JobConfig, seed: u64) -> CliResult<SimTruth> {
    let s = &config.simulate;
    let mut rng = RngStream::new(seed, 5_000_000);
    let sim = match s.design.as_str() {
        "example1" => gen_example1(s.n, &s.example1.unwrap_or_default(), &mut rng),
        "example2" => gen_example2(s.n, &s.example2.clone().unwrap_or_default(), &mut rng),
        "example3" => gen_example3(s.n, &s.example3.unwrap_or_default(), &mut rng),
        other => {
            return Err(CliError::Config(format!(
                "unknown design '{other}' (expected example1 | example2 | example3)"
            )))
        }
    };
    sim.map_err(CliError::from_setup)
}

/// `elicit`: print a prior constructed by the baseline rule or the monotone
/// solver, and write it to the output directory.
pub fn run_elicit(ctx: &JobContext, out: &mut dyn Write) -> CliResult<()> {
    let e = &ctx.config.elicit;
    match e.kind.as_str() {
        "baseline" => {
            let spec = ctx
                .config
                .build_model_for_variant(ctx.config.variant()?, e.c, e.p)?;
            writeln!(out, "baseline prior for C = {}, p = {} ({}):", e.c, e.p, spec.variant)
                .map_err(|err| CliError::Config(err.to_string()))?;
            write_spec_summary(out, &spec)?;
            persist_spec(ctx, &spec)
        }
        "monotone" => {
            if e.a.len() != 4 {
                return Err(CliError::Config("elicit.a must have four entries (a1..a4)".to_string()));
            }
            let kappa0 = e.kappa0.unwrap_or((e.p + 2) as f64);
            let nu0 = e.nu0.unwrap_or((e.p + 2) as f64);
            let (mu0, lambda0) = monotone_prior_solve(
                e.a[0],
                e.a[1],
                e.a[2],
                e.a[3],
                ctx.config.elicit_direction()?,
                kappa0,
                nu0,
                e.p,
            )
            .map_err(CliError::from_setup)?;
            writeln!(
                out,
                "monotone ({}) atoms block from a = {:?}, kappa0 = {kappa0}, nu0 = {nu0}:",
                e.direction, e.a
            )
            .map_err(|err| CliError::Config(err.to_string()))?;
            writeln!(out, "  mu0     = ({}, {})", mu0[0], mu0[1])
                .map_err(|err| CliError::Config(err.to_string()))?;
            writeln!(out, "  Lambda0 = diag({}, {})", lambda0[(0, 0)], lambda0[(1, 1)])
                .map_err(|err| CliError::Config(err.to_string()))?;
            // assemble a complete spec with this block on every stage
            let mut spec = ctx.config.build_model_for_variant(ctx.config.variant()?, e.c, e.p)?;
            if let crlmix::prior::AtomsPrior::Regression(per_j) = &mut spec.atoms {
                for slot in per_j.iter_mut() {
                    slot.mu0 = mu0.clone();
                    slot.lambda0 = lambda0.clone();
                    slot.kappa0 = kappa0;
                    slot.nu0 = nu0;
                }
            } else {
                return Err(CliError::Config(
                    "the monotone solver elicits regression atoms; pick a regression variant".to_string(),
                ));
            }
            spec.validate().map_err(CliError::from_setup)?;
            persist_spec(ctx, &spec)
        }
        other => Err(CliError::Config(format!("unknown elicit kind '{other}'"))),
    }
}

fn write_spec_summary(out: &mut dyn Write, spec: &ModelSpec) -> CliResult<()> {
    match &spec.atoms {
        crlmix::prior::AtomsPrior::Regression(per_j) => {
            let b = &per_j[0];
            writeln!(out, "  per stage: kappa0 = {}, nu0 = {}, mu0 = 0, Lambda0 = {} I", b.kappa0, b.nu0, b.lambda0[(0, 0)])
        }
        crlmix::prior::AtomsPrior::Scalar(per_j) => {
            let b = &per_j[0];
            writeln!(out, "  per stage: mu0 = {}, nu0 = {}, a0 = {}, b0 = {}", b.mu0, b.nu0, b.a0, b.b0)
        }
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    writeln!(out, "  truncation L = {}", spec.truncation).map_err(|e| CliError::Config(e.to_string()))
}

fn persist_spec(ctx: &JobContext, spec: &ModelSpec) -> CliResult<()> {
    ctx.prepare_out_dir()?;
    let json = serde_json::to_string_pretty(spec).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(ctx.out_dir.join("elicited_model.json"), json)
        .map_err(|e| CliError::Config(format!("cannot write elicited_model.json: {e}")))?;
    ctx.write_manifest("elicit", toml::Table::new())
}
