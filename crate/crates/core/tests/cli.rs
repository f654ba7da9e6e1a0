//! File formats, determinism and the command-line surface.

use std::process::Command;

use externet::cli::{cmd_batch, cmd_generate, cmd_solve, ExperimentConfig};
use externet::format::{read_instance, write_reports_csv, CSV_HEADER};
use externet::generate::{generate_instance, GeneratorConfig};
use externet::{Algorithm, SignRegime};

const GOLDEN_HEADER: &str = "instance_id,algorithm,regime,n,m,relaxation_value,rounded_welfare_mean,\
rounded_welfare_stderr,trials,best_welfare,best_allocation,oracle_opt,empirical_ratio,guarantee_bound,\
guarantee_basis,bound_ok,eta,beta,beta_unbounded,gamma_quarter,duality_gap,dual_is_estimate,\
primal_infeasibility,fractional_objective,stage_one_mean,partial_welfare_mean,fallback_runs,\
forced_assignments,not_converged,relaxation_iterations";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_externet"))
}

fn batch_csv(config: &ExperimentConfig) -> String {
    let outcome = cmd_batch(config).unwrap();
    let mut buf = Vec::new();
    write_reports_csv(&mut buf, &outcome.reports).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn golden_header() {
    assert_eq!(CSV_HEADER.join(","), GOLDEN_HEADER);
    let csv = batch_csv(&ExperimentConfig {
        instance_count: 1,
        n: 3,
        ..ExperimentConfig::default()
    });
    assert_eq!(csv.split("\r\n").next().unwrap(), GOLDEN_HEADER);
}

#[test]
fn generate_is_deterministic_and_respects_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig {
        n: 6,
        m: 2,
        seed: 42,
        instance_count: 2,
        out_dir: Some(dir.path().join("a")),
        ..ExperimentConfig::default()
    };
    let a = cmd_generate(&config).unwrap();
    config.out_dir = Some(dir.path().join("b"));
    let b = cmd_generate(&config).unwrap();
    for (pa, pb) in a.iter().zip(&b) {
        assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
    }

    for regime in [SignRegime::PositiveConcave, SignRegime::NegativeLinear] {
        config.regime = regime;
        config.out_dir = Some(dir.path().join(regime.name()));
        for path in cmd_generate(&config).unwrap() {
            let inst = read_instance(&path).unwrap();
            for w in inst.all_weights() {
                for ((j, k), v) in w.indexed_iter() {
                    match regime {
                        SignRegime::NegativeLinear if j == k => assert!(*v > 0.0),
                        SignRegime::NegativeLinear => assert!(*v <= 0.0),
                        _ => assert!(*v >= 0.0),
                    }
                }
                if regime == SignRegime::PositiveConcave {
                    assert!(w.rows().into_iter().all(|r| (r.sum() - 1.0).abs() < 1e-9));
                }
            }
        }
    }
}

#[test]
fn batch_is_byte_identical() {
    let config = ExperimentConfig {
        regime: SignRegime::NegativeLinear,
        instance_count: 6,
        seed: 3,
        ..ExperimentConfig::default()
    };
    assert_eq!(batch_csv(&config), batch_csv(&config));
}

#[test]
fn hundred_instance_linear_batch_meets_bound() {
    let outcome = cmd_batch(&ExperimentConfig {
        instance_count: 100,
        seed: 17,
        ..ExperimentConfig::default()
    })
    .unwrap();
    assert!(outcome.violations.is_empty());
    assert!(outcome
        .reports
        .iter()
        .all(|r| r.empirical_ratio.unwrap() >= 0.5 - 0.02));
}

#[test]
fn negative_solve_meets_bound() {
    let inst = generate_instance(
        &GeneratorConfig::new(SignRegime::NegativeLinear, 6, 3),
        8,
        0,
    )
    .unwrap();
    let report = cmd_solve(
        &inst,
        Algorithm::NegativeCg,
        &ExperimentConfig::default(),
        true,
    )
    .unwrap();
    assert!(report.empirical_ratio.unwrap() >= 1.0 / std::f64::consts::E - 0.02);
    assert!((report.guarantee_bound - 1.0 / std::f64::consts::E).abs() < 1e-15);
}

#[test]
fn binary_solve_and_oracle_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.json");
    std::fs::write(
        &path,
        r#"{"n":2,"m":2,"regime":"positive-linear",
            "weights":[[[1,2],[0,1]],[[2,0],[1,3]]],
            "externality":{"all":{"family":"linear"}}}"#,
    )
    .unwrap();

    let out = bin()
        .args(["solve", path.to_str().unwrap(), "--algorithm", "oracle"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["oracle_opt"], 6.0);

    let out = bin()
        .args([
            "solve",
            path.to_str().unwrap(),
            "--algorithm",
            "lovasz-kt",
            "--oracle",
        ])
        .output()
        .unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["empirical_ratio"].as_f64().unwrap() >= 0.5);

    let out = bin()
        .args([
            "solve",
            path.to_str().unwrap(),
            "--algorithm",
            "negative-cg",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative-linear"));

    let out = bin()
        .args(["oracle-check", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let check: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(check["optimum"]["opt_value"], 6.0);
    assert_eq!(check["structure"][0]["supermodular"]["holds"], true);
}

#[test]
fn binary_batch_with_config_file_and_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.json");
    std::fs::write(
        &config,
        r#"{"regime":"positive-convex","n":4,"m":2,"instance_count":3,"seed":5}"#,
    )
    .unwrap();
    let run = |threads: &str, file: &str| {
        let csv = dir.path().join(file);
        let status = bin()
            .env("EXTERNET_THREADS", threads)
            .args([
                "batch",
                "--config",
                config.to_str().unwrap(),
                "--trials",
                "50",
                "-o",
                csv.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(csv).unwrap()
    };
    let one = run("1", "one.csv");
    assert_eq!(one, run("3", "three.csv"));
    let text = String::from_utf8(one).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("poly-lovasz-kt"));

    let gen_dir = dir.path().join("gen");
    let out = bin()
        .args([
            "generate",
            "--regime",
            "positive-linear",
            "--graph",
            "0.5",
            "--instances",
            "2",
            "--out-dir",
        ])
        .arg(&gen_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let inst = read_instance(gen_dir.join("instance_0001.json")).unwrap();
    assert!(inst.weights(0).iter().all(|v| *v == 0.0 || *v == 1.0));
}
