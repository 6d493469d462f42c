//! Inclusion-level and dimension sweeps. Every point reuses the same seeds.

use batchbandit::metrics::MeanSe;
use batchbandit::policies::{TieRule, DEFAULT_V};
use batchbandit::{ConfigError, PolicyConfig, PolicyKind};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::runner::{run_replicated, Experiment};
use crate::spec::{AlgorithmSpec, ExperimentSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub regret: MeanSe,
    pub fairness: MeanSe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionPoint {
    pub dim: usize,
    pub algorithm: String,
    pub regret: MeanSe,
}

/// The spec restricted to a single OBSI at `alpha` (keeping its `v`).
pub fn alpha_spec(spec: &ExperimentSpec, alpha: f64) -> ExperimentSpec {
    let (v, tie_rule) = match spec.algorithm(PolicyKind::Obsi).map(|a| &a.policy) {
        Some(PolicyConfig::Obsi { v, tie_rule, .. }) => (*v, *tie_rule),
        _ => (DEFAULT_V, TieRule::default()),
    };
    ExperimentSpec { algorithms: vec![AlgorithmSpec::new(PolicyConfig::Obsi { v, alpha, tie_rule })], ..spec.clone() }
}

pub fn sweep_alpha(spec: &ExperimentSpec, alphas: &[f64], workers: usize) -> Result<Vec<AlphaPoint>> {
    if alphas.is_empty() {
        return Err(ConfigError::new("alpha sweep needs at least one alpha").into());
    }
    for &a in alphas {
        alpha_spec(spec, a).validate()?;
    }
    alphas
        .iter()
        .map(|&alpha| {
            let exp = run_replicated(&alpha_spec(spec, alpha), workers)?;
            let s = &exp.summaries[0];
            Ok(AlphaPoint { alpha, regret: s.regret, fairness: s.fairness })
        })
        .collect()
}

pub fn dimension_spec(spec: &ExperimentSpec, dim: usize) -> Result<ExperimentSpec, ConfigError> {
    let out = ExperimentSpec { environment: spec.environment.with_dimension(dim)?, ..spec.clone() };
    out.validate()?;
    Ok(out)
}

pub fn sweep_dimensions(spec: &ExperimentSpec, dims: &[usize], workers: usize) -> Result<(Vec<DimensionPoint>, Vec<Experiment>)> {
    if dims.is_empty() {
        return Err(ConfigError::new("dimension sweep needs at least one dimension").into());
    }
    let specs = dims.iter().map(|&d| dimension_spec(spec, d)).collect::<Result<Vec<_>, _>>()?;
    let mut points = Vec::new();
    let mut experiments = Vec::new();
    for (s, &dim) in specs.iter().zip(dims) {
        let exp = run_replicated(s, workers)?;
        points.extend(exp.summaries.iter().map(|sum| DimensionPoint { dim, algorithm: sum.algorithm.clone(), regret: sum.regret }));
        experiments.push(exp);
    }
    Ok((points, experiments))
}
