//! Hyperparameter grid search for the greedy baselines.

use batchbandit::metrics::{aggregate_runs, MeanSe};
use batchbandit::{PolicyConfig, PolicyKind};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::runner::run_reps;
use crate::spec::{AlgorithmSpec, ExperimentSpec, GridSpec};

/// Tuning replications start here; evaluation replications are `0..reps`.
pub const TUNING_REP_OFFSET: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub policy: PolicyConfig,
    pub regret: MeanSe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchReport {
    pub kind: PolicyKind,
    pub tuning_replications: usize,
    /// Every candidate, ascending penalty.
    pub entries: Vec<GridEntry>,
    pub best: usize,
}

impl GridSearchReport {
    pub fn best_policy(&self) -> &PolicyConfig {
        &self.entries[self.best].policy
    }
}

/// Evaluates every candidate on the tuning seed block and picks the lowest
/// mean regret; exact ties go to the smaller penalty.
pub fn grid_search(spec: &ExperimentSpec, kind: PolicyKind, grid: &GridSpec, tuning_reps: usize, workers: usize) -> Result<GridSearchReport> {
    let base = spec.algorithm(kind).map(|a| a.policy.clone()).unwrap_or_else(|| PolicyConfig::default_for(kind));
    let candidates = grid.candidates(&base)?;
    let tuning = ExperimentSpec {
        algorithms: candidates
            .iter()
            .enumerate()
            .map(|(i, p)| AlgorithmSpec { name: Some(format!("candidate_{i:03}")), policy: p.clone() })
            .collect(),
        probe_fairness: false,
        ..spec.clone()
    };
    let reps: Vec<u64> = (0..tuning_reps.max(1) as u64).map(|k| TUNING_REP_OFFSET + k).collect();
    let runs: Vec<_> = run_reps(&tuning, &reps, workers)?.into_iter().map(|o| o.metrics).collect();
    let summaries = aggregate_runs(&runs);
    let entries: Vec<GridEntry> = candidates
        .into_iter()
        .enumerate()
        .map(|(i, policy)| {
            let name = format!("candidate_{i:03}");
            let regret = summaries.iter().find(|s| s.algorithm == name).expect("every candidate ran").regret;
            GridEntry { policy, regret }
        })
        .collect();
    let mut best = 0;
    for (i, e) in entries.iter().enumerate() {
        if e.regret.mean < entries[best].regret.mean {
            best = i;
        }
    }
    Ok(GridSearchReport { kind, tuning_replications: reps.len(), entries, best })
}

/// Replaces the LBGL and MCPB configs of `spec` with their grid-search winners.
pub fn tune_spec(spec: &ExperimentSpec, workers: usize) -> Result<(ExperimentSpec, Vec<GridSearchReport>)> {
    let mut tuned = spec.clone();
    let mut reports = Vec::new();
    for kind in [PolicyKind::Lbgl, PolicyKind::Mcpb] {
        if spec.algorithm(kind).is_none() {
            continue;
        }
        let report = grid_search(spec, kind, &spec.tuning.grid, spec.tuning.replications, workers)?;
        for alg in tuned.algorithms.iter_mut().filter(|a| a.policy.kind() == kind) {
            alg.policy = report.best_policy().clone();
        }
        reports.push(report);
    }
    Ok((tuned, reports))
}
