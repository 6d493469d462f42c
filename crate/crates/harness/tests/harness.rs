use std::path::Path;
use std::process::Command as Process;

use batchbandit::environment::EnvironmentConfig;
use batchbandit::sparse::LassoConfig;
use batchbandit::{PolicyConfig, PolicyKind};
use batchbandit_harness::commands::{execute, replay};
use batchbandit_harness::output::{Command, Manifest, MANIFEST_JSON, SUMMARY_CSV};
use batchbandit_harness::tuning::grid_search;
use batchbandit_harness::{AlgorithmSpec, ExperimentSpec, GridSpec, HarnessError};

fn small_spec() -> ExperimentSpec {
    ExperimentSpec {
        environment: EnvironmentConfig { d: 6, n_signal: 3, n_noise: 3, num_arms: 3, horizon: 600, num_batches: 6, ..EnvironmentConfig::default() },
        replications: 4,
        mc_samples: 50,
        ..ExperimentSpec::default()
    }
}

/// File contents with `summary.csv`'s trailing compute_s column blanked.
fn comparable(dir: &Path, name: &str) -> String {
    let text = std::fs::read_to_string(dir.join(name)).unwrap();
    if name != SUMMARY_CSV {
        return text;
    }
    text.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string()).collect::<Vec<_>>().join("\n")
}

#[test]
fn worker_count_and_replay_leave_outputs_unchanged() {
    let spec = small_spec();
    let one = tempfile::tempdir().unwrap();
    let many = tempfile::tempdir().unwrap();
    let files = execute(&Command::Run, &spec, one.path(), 1).unwrap();
    assert_eq!(files, execute(&Command::Run, &spec, many.path(), 8).unwrap());
    let manifest = Manifest::load(&one.path().join(MANIFEST_JSON)).unwrap();
    let again = tempfile::tempdir().unwrap();
    replay(&manifest, again.path(), 3).unwrap();
    for f in &files {
        assert_eq!(comparable(one.path(), f), comparable(many.path(), f), "{f}");
        assert_eq!(comparable(one.path(), f), comparable(again.path(), f), "{f}");
    }
    assert_eq!(manifest.spec, spec);
    assert_eq!(manifest.master_seed, spec.master_seed);
    assert!(!manifest.code_version.is_empty());
}

#[test]
fn summary_has_one_row_per_algorithm_in_order() {
    let dir = tempfile::tempdir().unwrap();
    execute(&Command::Run, &small_spec(), dir.path(), 1).unwrap();
    let text = std::fs::read_to_string(dir.path().join(SUMMARY_CSV)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "algorithm,regret_mean,regret_se,fairness_mean,fairness_se,compute_s");
    let names: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["oracle", "blts", "lbgl", "mcpb", "obsi"]);
    let oracle: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(oracle[3], "0");
    let curve = std::fs::read_to_string(dir.path().join("regret_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 1 + 6 * 5);
}

#[test]
fn single_replication_leaves_se_empty() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec { replications: 1, ..small_spec() };
    execute(&Command::Run, &spec, dir.path(), 1).unwrap();
    let text = std::fs::read_to_string(dir.path().join(SUMMARY_CSV)).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "");
    assert_eq!(row[4], "");
}

#[test]
fn unwritable_output_fails_before_compute() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let spec = ExperimentSpec { replications: 1_000_000, ..small_spec() };
    let started = std::time::Instant::now();
    let err = execute(&Command::Run, &spec, &file.path().join("out"), 1).unwrap_err();
    assert!(matches!(err, HarnessError::Output { .. }), "{err}");
    assert!(started.elapsed().as_secs() < 5);
}

#[test]
fn odd_dimension_in_a_sweep_is_rejected_up_front() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec { replications: 1_000_000, ..small_spec() };
    let err = execute(&Command::SweepDim { dims: vec![10, 21] }, &spec, dir.path(), 1).unwrap_err();
    assert!(matches!(err, HarnessError::Config(_)), "{err}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    assert!(serde_json::from_str::<ExperimentSpec>(r#"{"replications": 3, "seed": 1}"#).is_err());
    assert!(serde_json::from_str::<ExperimentSpec>(r#"{"environment": {"d": 4, "dims": 2}}"#).is_err());
    let ok: ExperimentSpec = serde_json::from_str(r#"{"replications": 3, "algorithms": [{"policy": {"kind": "lgbl"}}]}"#).unwrap();
    assert_eq!(ok.algorithms[0].policy.kind(), PolicyKind::Lbgl);
}

#[test]
fn singleton_grid_returns_its_only_entry() {
    let spec = small_spec();
    let grid = GridSpec { lambda_0: vec![0.7], ..GridSpec::default() };
    let report = grid_search(&spec, PolicyKind::Lbgl, &grid, 2, 1).unwrap();
    assert_eq!(report.entries.len(), 1);
    assert_eq!(report.best, 0);
    match report.best_policy() {
        PolicyConfig::Lbgl { lasso } => assert_eq!(lasso.lambda_0, 0.7),
        other => panic!("{other:?}"),
    }
}

#[test]
fn absurd_penalties_never_win() {
    let spec = ExperimentSpec { environment: EnvironmentConfig { horizon: 2000, num_batches: 10, ..small_spec().environment }, ..small_spec() };
    let lasso = grid_search(&spec, PolicyKind::Lbgl, &GridSpec { lambda_0: vec![1.0, 1e6], ..GridSpec::default() }, 6, 1).unwrap();
    assert_eq!(lasso.best, 0);
    assert_eq!(lasso.entries.len(), 2);
    let mcp = grid_search(&spec, PolicyKind::Mcpb, &GridSpec { lambda: vec![1e6, 0.05], ..GridSpec::default() }, 6, 1).unwrap();
    match mcp.best_policy() {
        PolicyConfig::Mcpb { mcp } => assert_eq!(mcp.lambda, 0.05),
        other => panic!("{other:?}"),
    }
}

#[test]
fn grid_search_rejects_thompson_policies() {
    assert!(grid_search(&small_spec(), PolicyKind::Obsi, &GridSpec::default(), 1, 1).is_err());
}

#[test]
fn tuning_seeds_are_disjoint_from_evaluation() {
    // A one-point grid still runs on the tuning block, so its score differs
    // from the evaluation regret of the same configuration.
    let spec = ExperimentSpec {
        algorithms: vec![AlgorithmSpec::new(PolicyConfig::Lbgl { lasso: LassoConfig::default() })],
        ..small_spec()
    };
    let report = grid_search(&spec, PolicyKind::Lbgl, &GridSpec { lambda_0: vec![1.0], ..GridSpec::default() }, 4, 1).unwrap();
    let eval = batchbandit_harness::run_replicated(&ExperimentSpec { probe_fairness: false, ..spec }, 1).unwrap();
    assert_ne!(report.entries[0].regret.mean, eval.summaries[0].regret.mean);
}

fn cli() -> Process {
    Process::new(env!("CARGO_BIN_EXE_batchbandit"))
}

#[test]
fn cli_run_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    std::fs::write(&cfg, serde_json::to_string(&small_spec()).unwrap()).unwrap();
    let out = dir.path().join("out");
    let status = cli()
        .args(["run", "--config", cfg.to_str().unwrap(), "--reps", "2", "--seed", "9", "--out", out.to_str().unwrap(), "--workers", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = Manifest::load(&out.join(MANIFEST_JSON)).unwrap();
    assert_eq!(manifest.spec.replications, 2);
    assert_eq!(manifest.master_seed, 9);
    let status = cli().args(["replay", "--manifest", out.join(MANIFEST_JSON).to_str().unwrap()]).status().unwrap();
    assert!(status.success());
    for f in &manifest.outputs {
        assert_eq!(comparable(&out, f), comparable(&out.join("replay"), f), "{f}");
    }
}

#[test]
fn cli_reports_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"replicas": 3}"#).unwrap();
    let out = cli().args(["run", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let out = cli().args(["grid-search", "--algo", "blts"]).output().unwrap();
    assert!(!out.status.success());
    let out = cli().args(["default-config"]).output().unwrap();
    let spec: ExperimentSpec = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(spec, ExperimentSpec::default());
}

#[test]
fn profile_sets_replications() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    let spec = ExperimentSpec { environment: EnvironmentConfig { horizon: 60, num_batches: 2, ..small_spec().environment }, ..small_spec() };
    std::fs::write(&cfg, serde_json::to_string(&spec).unwrap()).unwrap();
    let out = dir.path().join("o");
    let status = cli()
        .args(["sweep-alpha", "--alphas", "0.9,0.99", "--config", cfg.to_str().unwrap(), "--profile", "desk", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = Manifest::load(&out.join(MANIFEST_JSON)).unwrap();
    assert_eq!(manifest.spec.replications, 100);
    assert_eq!(manifest.command, Command::SweepAlpha { alphas: vec![0.9, 0.99] });
    let text = std::fs::read_to_string(out.join("alpha_sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
}
