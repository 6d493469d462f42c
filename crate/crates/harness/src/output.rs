//! CSV and JSON artifacts.
//!
//! All CSVs are UTF-8 with a header row and `.` decimals. Columns:
//!
//! | file | columns |
//! |---|---|
//! | `summary.csv` | algorithm, regret_mean, regret_se, fairness_mean, fairness_se, compute_s |
//! | `regret_curve.csv` | batch, algorithm, cum_regret_mean, se |
//! | `regret_normalized.csv` | algorithm, regret_total, regret_per_round, regret_per_batch |
//! | `alpha_sweep.csv` | alpha, mean_regret, regret_se, mean_fairness, fairness_se |
//! | `dim_sweep.csv` | dim, algorithm, mean_regret, se |
//! | `grid_search.csv` | algorithm, lambda, a, mean_regret, se, best |
//!
//! An empty `se` cell means a single replication.

use std::fs::File;
use std::path::Path;

use batchbandit::metrics::MeanSe;
use batchbandit::PolicyConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::runner::Experiment;
use crate::spec::ExperimentSpec;
use crate::sweep::{AlphaPoint, DimensionPoint};
use crate::tuning::GridSearchReport;

pub const SCHEMA_VERSION: u32 = 1;

pub const SUMMARY_CSV: &str = "summary.csv";
pub const REGRET_CURVE_CSV: &str = "regret_curve.csv";
pub const REGRET_NORMALIZED_CSV: &str = "regret_normalized.csv";
pub const ALPHA_SWEEP_CSV: &str = "alpha_sweep.csv";
pub const DIM_SWEEP_CSV: &str = "dim_sweep.csv";
pub const GRID_SEARCH_CSV: &str = "grid_search.csv";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const AUDIT_JSON: &str = "audit.json";

const TIMING_NOTE: &str = "compute_s is the mean wall clock per replication spent choosing actions and ingesting batches; \
environment simulation, fairness probing and bookkeeping are excluded. It is the only non-reproducible column.";

/// Creates `dir` and checks it is writable.
pub fn prepare_dir(dir: &Path) -> Result<()> {
    let wrap = |source| HarnessError::Output { path: dir.to_path_buf(), source };
    std::fs::create_dir_all(dir).map_err(wrap)?;
    let probe = dir.join(".write-probe");
    std::fs::write(&probe, b"").map_err(wrap)?;
    std::fs::remove_file(&probe).map_err(wrap)?;
    Ok(())
}

fn se_cell(m: &MeanSe) -> String {
    m.se.map(|s| s.to_string()).unwrap_or_default()
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<File>> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|source| HarnessError::Output { path, source })?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_summary(dir: &Path, exp: &Experiment) -> Result<()> {
    let mut w = writer(dir, SUMMARY_CSV)?;
    w.write_record(["algorithm", "regret_mean", "regret_se", "fairness_mean", "fairness_se", "compute_s"])?;
    for s in &exp.summaries {
        let fairness = if exp.spec.probe_fairness { (s.fairness.mean.to_string(), se_cell(&s.fairness)) } else { Default::default() };
        w.write_record([
            s.algorithm.clone(),
            s.regret.mean.to_string(),
            se_cell(&s.regret),
            fairness.0,
            fairness.1,
            s.compute_s.mean.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_regret_curve(dir: &Path, exp: &Experiment) -> Result<()> {
    let mut w = writer(dir, REGRET_CURVE_CSV)?;
    w.write_record(["batch", "algorithm", "cum_regret_mean", "se"])?;
    let batches = exp.summaries.iter().map(|s| s.regret_curve.len()).max().unwrap_or(0);
    for b in 0..batches {
        for s in &exp.summaries {
            if let Some(point) = s.regret_curve.get(b) {
                w.write_record([(b + 1).to_string(), s.algorithm.clone(), point.mean.to_string(), se_cell(point)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_regret_normalized(dir: &Path, exp: &Experiment) -> Result<()> {
    let mut w = writer(dir, REGRET_NORMALIZED_CSV)?;
    w.write_record(["algorithm", "regret_total", "regret_per_round", "regret_per_batch"])?;
    for s in &exp.summaries {
        w.write_record([
            s.algorithm.clone(),
            s.regret.mean.to_string(),
            s.regret_per_round.mean.to_string(),
            s.regret_per_batch.mean.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_alpha_sweep(dir: &Path, points: &[AlphaPoint]) -> Result<()> {
    let mut w = writer(dir, ALPHA_SWEEP_CSV)?;
    w.write_record(["alpha", "mean_regret", "regret_se", "mean_fairness", "fairness_se"])?;
    for p in points {
        w.write_record([p.alpha.to_string(), p.regret.mean.to_string(), se_cell(&p.regret), p.fairness.mean.to_string(), se_cell(&p.fairness)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dim_sweep(dir: &Path, points: &[DimensionPoint]) -> Result<()> {
    let mut w = writer(dir, DIM_SWEEP_CSV)?;
    w.write_record(["dim", "algorithm", "mean_regret", "se"])?;
    for p in points {
        w.write_record([p.dim.to_string(), p.algorithm.clone(), p.regret.mean.to_string(), se_cell(&p.regret)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_grid_search(dir: &Path, reports: &[GridSearchReport]) -> Result<()> {
    let mut w = writer(dir, GRID_SEARCH_CSV)?;
    w.write_record(["algorithm", "lambda", "a", "mean_regret", "se", "best"])?;
    for r in reports {
        for (i, e) in r.entries.iter().enumerate() {
            let (lambda, a) = match &e.policy {
                PolicyConfig::Lbgl { lasso } => (lasso.lambda_0.to_string(), String::new()),
                PolicyConfig::Mcpb { mcp } => (mcp.lambda.to_string(), mcp.a.to_string()),
                _ => (String::new(), String::new()),
            };
            w.write_record([r.kind.as_str().to_string(), lambda, a, e.regret.mean.to_string(), se_cell(&e.regret), (i == r.best).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(&path, text + "\n").map_err(|source| HarnessError::Output { path, source })
}

/// What produced an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Run,
    SweepAlpha { alphas: Vec<f64> },
    SweepDim { dims: Vec<usize> },
    GridSearch { algorithm: batchbandit::PolicyKind, grid: crate::spec::GridSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub code_version: String,
    pub command: Command,
    pub master_seed: u64,
    pub spec: ExperimentSpec,
    pub timing_note: String,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: Command, spec: &ExperimentSpec, outputs: Vec<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            master_seed: spec.master_seed,
            spec: spec.clone(),
            timing_note: TIMING_NOTE.to_string(),
            outputs,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
