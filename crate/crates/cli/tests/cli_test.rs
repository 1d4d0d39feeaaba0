//! End-to-end pipeline tests driving the `crlmix` binary: simulate → fit →
//! curves → predict, compare, elicit, exit codes and rerun determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_crlmix")
}

fn work_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("crlmix-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn print_config_emits_parseable_template() {
    let out = run(&["print-config"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[model]"));
    assert!(text.contains("truncation = 50"));
}

#[test]
fn simulate_fit_curves_predict_pipeline() {
    let dir = work_dir("pipeline");
    let sim_out = dir.join("sim");
    let cfg_path = dir.join("sim.toml");
    write(
        &cfg_path,
        &format!(
            r#"
[job]
output = "{}"
seed = 5
[simulate]
design = "example2"
n = 60
[grid]
points = 12
lo = -10.0
hi = 10.0
"#,
            sim_out.display()
        ),
    );
    let out = run(&["--config", cfg_path.to_str().unwrap(), "simulate"]);
    assert!(out.status.success(), "simulate failed: {}", String::from_utf8_lossy(&out.stderr));
    assert!(sim_out.join("dataset.csv").exists());
    assert!(sim_out.join("truth_curves.csv").exists());
    assert!(sim_out.join("manifest.toml").exists());

    // fit a small chain on the simulated data
    let fit_out = dir.join("fit");
    let fit_cfg = dir.join("fit.toml");
    write(
        &fit_cfg,
        &format!(
            r#"
[job]
input = "{}"
output = "{}"
seed = 5
[model]
variant = "common-weights"
truncation = 6
[run]
iterations = 300
burn_in = 100
thin = 2
[grid]
points = 8
[predict]
rows = [[-5.0], [0.0], [5.0]]
"#,
            sim_out.join("dataset.csv").display(),
            fit_out.display()
        ),
    );
    let out = run(&["--config", fit_cfg.to_str().unwrap(), "fit"]);
    assert!(out.status.success(), "fit failed: {}", String::from_utf8_lossy(&out.stderr));
    let draws_path = fit_out.join("draws.jsonl");
    assert!(draws_path.exists());
    assert!(fit_out.join("diagnostics.csv").exists());

    // curves from the draws file (read-only on the draws)
    let before = std::fs::read(&draws_path).unwrap();
    let curve_out = dir.join("curves");
    let curve_cfg = dir.join("curves.toml");
    write(
        &curve_cfg,
        &format!(
            r#"
[job]
input = "{}"
output = "{}"
[grid]
points = 8
"#,
            draws_path.display(),
            curve_out.display()
        ),
    );
    let out = run(&["--config", curve_cfg.to_str().unwrap(), "curves"]);
    assert!(out.status.success(), "curves failed: {}", String::from_utf8_lossy(&out.stderr));
    let marg = std::fs::read_to_string(curve_out.join("curves_marginal.csv")).unwrap();
    assert!(marg.lines().count() > 8 * 3, "curve rows missing");
    assert!(marg.starts_with("x1,category,mean,lower,upper"));
    assert!(curve_out.join("curves_conditional.csv").exists());
    assert_eq!(before, std::fs::read(&draws_path).unwrap(), "draws file mutated");

    // predictive pmf rows sum to one
    let pred_out = dir.join("pred");
    let out = run(&[
        "--config",
        fit_cfg.to_str().unwrap(),
        "--output",
        pred_out.to_str().unwrap(),
        "predict",
    ]);
    // predict reads the draws file: point input at it
    assert_eq!(out.status.code(), Some(3), "predict on a CSV input should be a data error");
    let pred_cfg = dir.join("pred.toml");
    write(
        &pred_cfg,
        &format!(
            r#"
[job]
input = "{}"
output = "{}"
[predict]
rows = [[-5.0], [0.0], [5.0]]
"#,
            draws_path.display(),
            pred_out.display()
        ),
    );
    let out = run(&["--config", pred_cfg.to_str().unwrap(), "predict"]);
    assert!(out.status.success(), "predict failed: {}", String::from_utf8_lossy(&out.stderr));
    let pred = std::fs::read_to_string(pred_out.join("predictive.csv")).unwrap();
    for line in pred.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let total: f64 = cols[1..].iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "pmf row sums to {total}");
    }
}

#[test]
fn fit_reruns_are_byte_identical_across_thread_counts() {
    let dir = work_dir("determinism");
    write(
        &dir.join("data.csv"),
        "y,x\n1,-3.0\n2,-1.0\n1,-2.5\n3,2.0\n2,0.5\n3,3.0\n1,-1.5\n2,1.0\n3,2.5\n2,0.0\n",
    );
    let mut outputs = Vec::new();
    for (tag, threads) in [("a", "1"), ("b", "4")] {
        let out_dir = dir.join(tag);
        let cfg = dir.join(format!("{tag}.toml"));
        write(
            &cfg,
            &format!(
                r#"
[job]
input = "{}"
output = "{}"
seed = 21
[model]
variant = "general"
truncation = 5
[run]
iterations = 200
burn_in = 50
thin = 3
parallel_categories = true
"#,
                dir.join("data.csv").display(),
                out_dir.display()
            ),
        );
        let out = run(&["--config", cfg.to_str().unwrap(), "--threads", threads, "fit"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(out_dir.join("draws.jsonl")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "draws differ across thread counts");
}

#[test]
fn compare_emits_three_model_table() {
    let dir = work_dir("compare");
    // quick dataset via simulate
    let sim_cfg = dir.join("sim.toml");
    write(
        &sim_cfg,
        &format!(
            "[job]\noutput = \"{}\"\nseed = 3\n[simulate]\ndesign = \"example1\"\nn = 50\n",
            dir.join("sim").display()
        ),
    );
    assert!(run(&["--config", sim_cfg.to_str().unwrap(), "simulate"]).status.success());
    let cmp_cfg = dir.join("cmp.toml");
    write(
        &cmp_cfg,
        &format!(
            r#"
[job]
input = "{}"
output = "{}"
seed = 3
[model]
truncation = 5
[run]
iterations = 240
burn_in = 80
thin = 4
"#,
            dir.join("sim/dataset.csv").display(),
            dir.join("cmp").display()
        ),
    );
    let out = run(&["--config", cmp_cfg.to_str().unwrap(), "compare"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.join("cmp/gg_table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4, "header + three models: {table}");
    assert!(lines[0].starts_with("model,G_1,P_1,G_2,P_2,G_3,P_3,total"));
    for slug in ["general", "common-weights", "common-atoms"] {
        assert!(table.contains(slug), "missing {slug}");
        assert!(dir.join(format!("cmp/draws_{slug}.jsonl")).exists());
    }
}

#[test]
fn elicit_prints_worked_example_values() {
    let dir = work_dir("elicit");
    let cfg = dir.join("elicit.toml");
    write(
        &cfg,
        &format!(
            r#"
[job]
output = "{}"
[elicit]
kind = "monotone"
c = 3
p = 2
a = [10.0, 10.0, 6.0, 2.0]
direction = "decreasing"
kappa0 = 4.0
nu0 = 4.0
"#,
            dir.join("out").display()
        ),
    );
    let out = run(&["--config", cfg.to_str().unwrap(), "elicit"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mu0     = (-2, -0.9)"), "stdout: {text}");
    assert!(text.contains("Lambda0 = diag(0.8, 0.072)"), "stdout: {text}");
    assert!(dir.join("out/elicited_model.json").exists());
}

#[test]
fn exit_codes_distinguish_config_and_data_errors() {
    let dir = work_dir("codes");
    // config error: malformed TOML
    write(&dir.join("bad.toml"), "[model\n");
    let out = run(&["--config", dir.join("bad.toml").to_str().unwrap(), "fit"]);
    assert_eq!(out.status.code(), Some(2));

    // config error: missing input
    let out = run(&["fit"]);
    assert_eq!(out.status.code(), Some(2));

    // data error: missing y column
    write(&dir.join("noy.csv"), "a,b\n1,2\n");
    let cfg = dir.join("noy.toml");
    write(
        &cfg,
        &format!("[job]\ninput = \"{}\"\noutput = \"{}\"\n", dir.join("noy.csv").display(), dir.join("o").display()),
    );
    let out = run(&["--config", cfg.to_str().unwrap(), "fit"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    // invalid variant is a config error
    let cfg2 = dir.join("var.toml");
    write(
        &cfg2,
        &format!(
            "[job]\ninput = \"{}\"\n[model]\nvariant = \"nope\"\n",
            dir.join("noy.csv").display()
        ),
    );
    let out = run(&["--config", cfg2.to_str().unwrap(), "fit"]);
    assert_eq!(out.status.code(), Some(2));
}
