//! Regret, Monte-Carlo fairness regret, timings and cross-replication
//! aggregation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::environment::InteractionRecord;
use crate::error::ConfigError;
use crate::linalg::Vector;
use crate::policies::{Policy, PolicyKind};
use crate::rng::RngStream;
use crate::scalar::Real;

/// μ(A*, X) − μ(A, X), clamped at zero against rounding.
pub fn instantaneous_regret<F: Real>(record: &InteractionRecord<F>) -> f64 {
    (record.optimal_mean - record.chosen_mean).f64().max(0.0)
}

/// Cumulative regret at the end of every batch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub cumulative: Vec<f64>,
}

impl RegretTrace {
    pub fn push_batch<F: Real>(&mut self, records: &[InteractionRecord<F>]) {
        let last = self.total();
        let inc: f64 = records.iter().map(instantaneous_regret).sum();
        self.cumulative.push(last + inc);
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Per-batch regret (first differences of the cumulative trace).
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let inc = c - prev;
                prev = c;
                inc
            })
            .collect()
    }
}

/// Disagreement probability estimates, one per batch boundary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FairnessTrace {
    pub estimates: Vec<f64>,
    pub mc_samples: usize,
}

impl FairnessTrace {
    pub fn total(&self) -> f64 {
        fairness_total(self)
    }
}

pub fn fairness_total(trace: &FairnessTrace) -> f64 {
    trace.estimates.iter().sum()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    /// Choosing actions from the frozen state.
    pub decision_s: f64,
    /// Ingesting batches and refreezing.
    pub update_s: f64,
    /// Fairness probing and regret bookkeeping.
    pub metric_s: f64,
    /// Whole run wall clock, including environment simulation.
    pub total_s: f64,
}

impl TimingRecord {
    /// Algorithm cost: decisions plus updates.
    pub fn compute_s(&self) -> f64 {
        self.decision_s + self.update_s
    }
}

/// How the policy's own randomness is shared between the two contexts of a
/// fairness pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// One draw, evaluated on both contexts.
    #[default]
    Coupled,
    /// Independent draws per context.
    Uncoupled,
}

/// Which coordinates are signal. Known to the probe, never to the policy.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureLayout {
    pub d: usize,
    pub relevant: Vec<usize>,
}

impl FeatureLayout {
    pub fn new(d: usize, relevant: Vec<usize>) -> Self {
        Self { d, relevant }
    }

    fn irrelevant(&self) -> Vec<usize> {
        (0..self.d).filter(|i| !self.relevant.contains(i)).collect()
    }
}

/// Estimates P(A⁽¹⁾ ≠ A⁽²⁾) where the two contexts share `X_S ~ N(0, I)` and
/// carry independent `X_N⁽¹⁾, X_N⁽²⁾ ~ N(0, I)`.
pub fn fairness_probe<F: Real>(
    policy: &dyn Policy<F>,
    layout: &FeatureLayout,
    mc_samples: usize,
    coupling: Coupling,
    rng: &mut RngStream,
) -> Result<f64, ConfigError> {
    probe(policy, layout, mc_samples, coupling, rng, false)
}

/// Degenerate probe with `X_N⁽¹⁾ = X_N⁽²⁾`; must return zero under coupling.
pub fn fairness_probe_identical_pairs<F: Real>(
    policy: &dyn Policy<F>,
    layout: &FeatureLayout,
    mc_samples: usize,
    rng: &mut RngStream,
) -> Result<f64, ConfigError> {
    probe(policy, layout, mc_samples, Coupling::Coupled, rng, true)
}

fn probe<F: Real>(
    policy: &dyn Policy<F>,
    layout: &FeatureLayout,
    mc_samples: usize,
    coupling: Coupling,
    rng: &mut RngStream,
    identical: bool,
) -> Result<f64, ConfigError> {
    if mc_samples < 1 {
        return Err(ConfigError::new("fairness probe needs at least one MC sample"));
    }
    let noise = layout.irrelevant();
    let mut x1 = Vector::<F>::zeros(layout.d);
    let mut x2 = Vector::<F>::zeros(layout.d);
    let mut draw1 = policy.new_draw();
    let mut draw2 = policy.new_draw();
    let mut disagreements = 0usize;
    for _ in 0..mc_samples {
        for &i in &layout.relevant {
            let s = F::of(rng.standard_normal());
            x1[i] = s;
            x2[i] = s;
        }
        for &i in &noise {
            x1[i] = F::of(rng.standard_normal());
            x2[i] = if identical { x1[i] } else { F::of(rng.standard_normal()) };
        }
        policy.draw(rng, &mut draw1);
        let a1 = policy.decide(&draw1, &x1);
        let a2 = match coupling {
            Coupling::Coupled => policy.decide(&draw1, &x2),
            Coupling::Uncoupled => {
                policy.draw(rng, &mut draw2);
                policy.decide(&draw2, &x2)
            }
        };
        disagreements += usize::from(a1 != a2);
    }
    Ok(disagreements as f64 / mc_samples as f64)
}

/// Everything measured in one replication of one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub algorithm: String,
    pub kind: PolicyKind,
    pub replication: u64,
    pub regret: RegretTrace,
    pub fairness: FairnessTrace,
    pub timing: TimingRecord,
    pub instance_fingerprint: u64,
    pub rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    /// Sample standard deviation over √reps; absent for a single run.
    pub se: Option<f64>,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        assert!(n > 0, "MeanSe of an empty sample");
        let mean = values.iter().sum::<f64>() / n as f64;
        let se = (n > 1).then(|| {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        Self { mean, se }
    }

    pub fn se_or_zero(&self) -> f64 {
        self.se.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub kind: PolicyKind,
    pub replications: usize,
    pub regret: MeanSe,
    pub regret_per_round: MeanSe,
    pub regret_per_batch: MeanSe,
    pub fairness: MeanSe,
    pub compute_s: MeanSe,
    /// Mean cumulative regret after each batch.
    pub regret_curve: Vec<MeanSe>,
}

/// Summaries per algorithm name, in name order. Runs may arrive in any order.
pub fn aggregate_runs(runs: &[RunMetrics]) -> Vec<AlgorithmSummary> {
    let mut groups: BTreeMap<&str, Vec<&RunMetrics>> = BTreeMap::new();
    for r in runs {
        groups.entry(&r.algorithm).or_default().push(r);
    }
    groups
        .into_values()
        .map(|mut group| {
            group.sort_by_key(|r| r.replication);
            let pick = |f: &dyn Fn(&RunMetrics) -> f64| MeanSe::of(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            let batches = group.iter().map(|r| r.regret.cumulative.len()).min().unwrap_or(0);
            let regret_curve =
                (0..batches).map(|b| MeanSe::of(&group.iter().map(|r| r.regret.cumulative[b]).collect::<Vec<_>>())).collect();
            AlgorithmSummary {
                algorithm: group[0].algorithm.clone(),
                kind: group[0].kind,
                replications: group.len(),
                regret: pick(&|r| r.regret.total()),
                regret_per_round: pick(&|r| r.regret.total() / r.rounds.max(1) as f64),
                regret_per_batch: pick(&|r| r.regret.total() / r.regret.cumulative.len().max(1) as f64),
                fairness: pick(&|r| r.fairness.total()),
                compute_s: pick(&|r| r.timing.compute_s()),
                regret_curve,
            }
        })
        .collect()
}

/// Mean and standard error of `metric(a) − metric(b)` over replications both
/// algorithms share (paired comparison under common random numbers).
pub fn paired_difference(runs: &[RunMetrics], a: &str, b: &str, metric: impl Fn(&RunMetrics) -> f64) -> Option<MeanSe> {
    let by_rep = |name: &str| -> BTreeMap<u64, f64> {
        runs.iter().filter(|r| r.algorithm == name).map(|r| (r.replication, metric(r))).collect()
    };
    let (ma, mb) = (by_rep(a), by_rep(b));
    let diffs: Vec<f64> = ma.iter().filter_map(|(rep, va)| mb.get(rep).map(|vb| va - vb)).collect();
    (!diffs.is_empty()).then(|| MeanSe::of(&diffs))
}
