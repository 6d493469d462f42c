//! Single and replicated simulation runs.
//!
//! Every replication derives its streams from `(master_seed, rep, role)`, so
//! all algorithms of one replication face the same instance, the same context
//! sequence and the same per-round reward noise.

use std::collections::BTreeMap;
use std::time::Instant;

use batchbandit::environment::{generate_instance, sample_context};
use batchbandit::Instance;
use batchbandit::metrics::{aggregate_runs, fairness_probe, AlgorithmSummary, FairnessTrace, FeatureLayout, RegretTrace, RunMetrics, TimingRecord};
use batchbandit::policies::choose_batch;
use batchbandit::{RngStream, StreamRole, Vector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::spec::{AlgorithmSpec, ExperimentSpec};

/// One finished replication of one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    /// Policy state after the last batch.
    pub final_state: serde_json::Value,
    /// OBSI only: inclusion mask after every batch.
    pub mask_history: Vec<Vec<bool>>,
}

pub fn run_single(spec: &ExperimentSpec, algorithm: &AlgorithmSpec, rep: u64) -> Result<RunOutcome> {
    let env = &spec.environment;
    let grid = env.grid()?;
    let seed = spec.master_seed;
    let fail = |source: batchbandit::Error| HarnessError::Run { algorithm: algorithm.id(), replication: rep, seed, source };

    let started = Instant::now();
    let instance: Instance = generate_instance(env, &mut RngStream::new(seed, rep, StreamRole::Instance));
    let mut context_rng = RngStream::new(seed, rep, StreamRole::Contexts);
    let mut reward_rng = RngStream::new(seed, rep, StreamRole::Rewards);
    let mut policy_rng = RngStream::new(seed, rep, StreamRole::Policy);
    let mut fairness_rng = RngStream::new(seed, rep, StreamRole::Fairness);
    let mut policy = algorithm.policy.build::<f64>(env.d, env.num_arms, &instance.relevant_set).map_err(fail)?;
    let layout = FeatureLayout::new(env.d, instance.relevant_set.clone());

    let mut regret = RegretTrace::default();
    let mut fairness = FairnessTrace { estimates: Vec::new(), mc_samples: if spec.probe_fairness { spec.mc_samples } else { 0 } };
    let mut timing = TimingRecord::default();
    let mut mask_history = Vec::new();

    for batch in grid.batches() {
        let first = batch.start;
        let contexts: Vec<Vector> = batch.map(|_| sample_context(env, &mut context_rng)).collect();

        let t = Instant::now();
        let actions = choose_batch(policy.as_ref(), &contexts, &mut policy_rng);
        timing.decision_s += t.elapsed().as_secs_f64();

        let records: Vec<_> = contexts
            .into_iter()
            .zip(actions)
            .enumerate()
            .map(|(k, (x, a))| instance.interact(first + k, x, a, &mut reward_rng))
            .collect();

        let t = Instant::now();
        policy.end_batch(&records).map_err(fail)?;
        timing.update_s += t.elapsed().as_secs_f64();

        let t = Instant::now();
        regret.push_batch(&records);
        if spec.probe_fairness {
            let p = fairness_probe(policy.as_ref(), &layout, spec.mc_samples, spec.coupling, &mut fairness_rng)
                .map_err(|e| fail(e.into()))?;
            fairness.estimates.push(p);
        }
        timing.metric_s += t.elapsed().as_secs_f64();

        if let Some(mask) = policy.inclusion_mask() {
            mask_history.push(mask.to_vec());
        }
    }
    timing.total_s = started.elapsed().as_secs_f64();

    Ok(RunOutcome {
        metrics: RunMetrics {
            algorithm: algorithm.id(),
            kind: algorithm.policy.kind(),
            replication: rep,
            regret,
            fairness,
            timing,
            instance_fingerprint: instance.fingerprint(),
            rounds: grid.horizon(),
        },
        final_state: policy.export_state(),
        mask_history,
    })
}

/// Replicated results for every algorithm of a spec.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub runs: Vec<RunMetrics>,
    /// Spec order.
    pub summaries: Vec<AlgorithmSummary>,
    /// Final policy state of the first replication, per algorithm.
    pub audit: serde_json::Value,
}

impl Experiment {
    pub fn summary(&self, algorithm: &str) -> Option<&AlgorithmSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm)
    }
}

/// Runs replications `reps` for each algorithm across `workers` threads.
/// Results do not depend on the worker count.
pub fn run_reps(spec: &ExperimentSpec, reps: &[u64], workers: usize) -> Result<Vec<RunOutcome>> {
    spec.validate()?;
    let tasks: Vec<(usize, u64)> = reps.iter().flat_map(|&r| (0..spec.algorithms.len()).map(move |a| (a, r))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let outcomes: Vec<RunOutcome> =
        pool.install(|| tasks.par_iter().map(|&(a, r)| run_single(spec, &spec.algorithms[a], r)).collect::<Result<_>>())?;

    let mut fingerprints: BTreeMap<u64, u64> = BTreeMap::new();
    for o in &outcomes {
        let fp = *fingerprints.entry(o.metrics.replication).or_insert(o.metrics.instance_fingerprint);
        if fp != o.metrics.instance_fingerprint {
            return Err(HarnessError::Unpaired { replication: o.metrics.replication });
        }
    }
    Ok(outcomes)
}

pub fn run_replicated(spec: &ExperimentSpec, workers: usize) -> Result<Experiment> {
    let reps: Vec<u64> = (0..spec.replications as u64).collect();
    let outcomes = run_reps(spec, &reps, workers)?;
    let mut audit = serde_json::Map::new();
    for o in outcomes.iter().filter(|o| o.metrics.replication == 0) {
        audit.insert(o.metrics.algorithm.clone(), o.final_state.clone());
    }
    let runs: Vec<RunMetrics> = outcomes.into_iter().map(|o| o.metrics).collect();
    let mut summaries = aggregate_runs(&runs);
    let order: Vec<String> = spec.algorithms.iter().map(AlgorithmSpec::id).collect();
    summaries.sort_by_key(|s| order.iter().position(|id| *id == s.algorithm));
    Ok(Experiment { spec: spec.clone(), runs, summaries, audit: serde_json::Value::Object(audit) })
}
