//! Experiment description, loaded from JSON. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use batchbandit::environment::EnvironmentConfig;
use batchbandit::metrics::Coupling;
use batchbandit::sparse::{LassoConfig, McpConfig};
use batchbandit::{ConfigError, PolicyConfig, PolicyKind};
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const DESK_REPLICATIONS: usize = 100;
pub const FULL_REPLICATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Desk,
    Full,
}

impl Profile {
    pub fn replications(self) -> usize {
        match self {
            Profile::Desk => DESK_REPLICATIONS,
            Profile::Full => FULL_REPLICATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    /// Label used in every output file; defaults to the policy kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub policy: PolicyConfig,
}

impl AlgorithmSpec {
    pub fn new(policy: PolicyConfig) -> Self {
        Self { name: None, policy }
    }

    pub fn id(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.policy.kind().as_str().to_string())
    }
}

/// Candidate hyperparameters for the greedy baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// LBGL base penalties.
    pub lambda_0: Vec<f64>,
    /// MCPB penalties.
    pub lambda: Vec<f64>,
    /// MCPB concavities.
    pub a: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lambda_0: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
            lambda: vec![0.0125, 0.025, 0.05, 0.1, 0.2, 0.4],
            a: vec![3.0],
        }
    }
}

impl GridSpec {
    /// Candidate configs in ascending penalty order, starting from `base`.
    pub fn candidates(&self, base: &PolicyConfig) -> Result<Vec<PolicyConfig>, ConfigError> {
        let sorted = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v
        };
        let out: Vec<PolicyConfig> = match base {
            PolicyConfig::Lbgl { lasso } => sorted(&self.lambda_0)
                .into_iter()
                .map(|l| PolicyConfig::Lbgl { lasso: LassoConfig { lambda_0: l, ..lasso.clone() } })
                .collect(),
            PolicyConfig::Mcpb { mcp } => sorted(&self.lambda)
                .into_iter()
                .flat_map(|l| sorted(&self.a).into_iter().map(move |a| (l, a)))
                .map(|(lambda, a)| PolicyConfig::Mcpb { mcp: McpConfig { lambda, a, ..mcp.clone() } })
                .collect(),
            other => return Err(ConfigError::new(format!("grid search is defined for lbgl and mcpb, not {}", other.kind()))),
        };
        if out.is_empty() {
            return Err(ConfigError::new("grid search needs a non-empty grid"));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuningSpec {
    /// Grid-search LBGL and MCPB before evaluating.
    pub enabled: bool,
    pub grid: GridSpec,
    /// Replications of the tuning block; its seeds never overlap evaluation seeds.
    pub replications: usize,
}

impl Default for TuningSpec {
    fn default() -> Self {
        Self { enabled: false, grid: GridSpec::default(), replications: 20 }
    }
}

fn default_algorithms() -> Vec<AlgorithmSpec> {
    PolicyKind::ALL.iter().map(|&k| AlgorithmSpec::new(PolicyConfig::default_for(k))).collect()
}

fn default_alphas() -> Vec<f64> {
    vec![0.5, 0.8, 0.9, 0.95, 0.975, 0.99, 0.999]
}

fn default_dims() -> Vec<usize> {
    vec![10, 20, 40, 60, 80]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub environment: EnvironmentConfig,
    pub algorithms: Vec<AlgorithmSpec>,
    pub replications: usize,
    pub master_seed: u64,
    /// MC pairs per fairness probe.
    pub mc_samples: usize,
    pub coupling: Coupling,
    /// Skip fairness probes entirely (regret-only experiments).
    pub probe_fairness: bool,
    pub output_dir: PathBuf,
    pub alpha_sweep: Vec<f64>,
    pub dimension_sweep: Vec<usize>,
    pub tuning: TuningSpec,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            environment: EnvironmentConfig::default(),
            algorithms: default_algorithms(),
            replications: DESK_REPLICATIONS,
            master_seed: 2024,
            mc_samples: 1000,
            coupling: Coupling::Coupled,
            probe_fairness: true,
            output_dir: PathBuf::from("results"),
            alpha_sweep: default_alphas(),
            dimension_sweep: default_dims(),
            tuning: TuningSpec::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let spec: Self = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.environment.validate()?;
        if self.replications < 1 {
            return Err(ConfigError::new("replications must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(ConfigError::new("at least one algorithm is required"));
        }
        if self.probe_fairness && self.mc_samples < 1 {
            return Err(ConfigError::new("mc_samples must be at least 1 when probing fairness"));
        }
        let mut ids: Vec<String> = self.algorithms.iter().map(AlgorithmSpec::id).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::new("algorithm names must be unique"));
        }
        for alg in &self.algorithms {
            alg.policy.validate(self.environment.d)?;
        }
        if self.tuning.enabled && self.tuning.replications < 1 {
            return Err(ConfigError::new("tuning.replications must be at least 1"));
        }
        Ok(())
    }

    pub fn algorithm(&self, kind: PolicyKind) -> Option<&AlgorithmSpec> {
        self.algorithms.iter().find(|a| a.policy.kind() == kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_and_validates() {
        let spec = ExperimentSpec::default();
        spec.validate().unwrap();
        let text = serde_json::to_string_pretty(&spec).unwrap();
        let back: ExperimentSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(spec.algorithms.iter().map(AlgorithmSpec::id).collect::<Vec<_>>(), ["oracle", "blts", "lbgl", "mcpb", "obsi"]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<ExperimentSpec>(r#"{"replications": 3, "bogus": 1}"#).is_err());
        assert!(serde_json::from_str::<ExperimentSpec>(r#"{"environment": {"d": 4, "extra": 0}}"#).is_err());
        assert!(serde_json::from_str::<ExperimentSpec>(r#"{"algorithms": [{"policy": {"kind": "obsi", "beta": 1}}]}"#).is_err());
        let ok: ExperimentSpec = serde_json::from_str(r#"{"algorithms": [{"policy": {"kind": "lgbl"}}]}"#).unwrap();
        assert_eq!(ok.algorithms[0].policy.kind(), PolicyKind::Lbgl);
    }

    #[test]
    fn validation_errors() {
        let mut spec = ExperimentSpec { replications: 0, ..Default::default() };
        assert!(spec.validate().is_err());
        spec.replications = 1;
        spec.algorithms.push(AlgorithmSpec::new(PolicyConfig::default_for(PolicyKind::Obsi)));
        assert!(spec.validate().is_err());
        let spec = ExperimentSpec {
            algorithms: vec![AlgorithmSpec::new(PolicyConfig::Obsi { v: 1.0, alpha: 1.5, tie_rule: Default::default() })],
            ..Default::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn grid_candidates() {
        let grid = GridSpec { lambda_0: vec![5.0, 1.0], lambda: vec![2.0, 1.0], a: vec![3.0, 2.0] };
        let lasso = grid.candidates(&PolicyConfig::default_for(PolicyKind::Lbgl)).unwrap();
        assert!(matches!(&lasso[0], PolicyConfig::Lbgl { lasso } if lasso.lambda_0 == 1.0));
        let mcp = grid.candidates(&PolicyConfig::default_for(PolicyKind::Mcpb)).unwrap();
        assert_eq!(mcp.len(), 4);
        assert!(grid.candidates(&PolicyConfig::default_for(PolicyKind::Blts)).is_err());
        let empty = GridSpec { lambda_0: vec![], ..grid };
        assert!(empty.candidates(&PolicyConfig::default_for(PolicyKind::Lbgl)).is_err());
    }
}
