//! Sparse linear-reward environment with batched feedback.
//!
//! Contexts are `N(0, I)`, each arm's reward is `Xᵀθ_A + s·ε`, and only the
//! first `n_signal` coordinates carry non-zero coefficients.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::linalg::{dot, Vector};
use crate::rng::RngStream;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub d: usize,
    pub n_signal: usize,
    pub n_noise: usize,
    pub num_arms: usize,
    pub noise_scale: f64,
    pub horizon: usize,
    pub num_batches: usize,
}

impl Default for EnvironmentConfig {
    /// 40 batches of 500 rounds, 5 arms, 10 signal + 10 noise features, s = 10.
    fn default() -> Self {
        Self { d: 20, n_signal: 10, n_noise: 10, num_arms: 5, noise_scale: 10.0, horizon: 20_000, num_batches: 40 }
    }
}

impl EnvironmentConfig {
    /// Equal signal/noise split at dimension `d`; `d` must be even.
    pub fn with_dimension(&self, d: usize) -> Result<Self, ConfigError> {
        if d == 0 || d % 2 != 0 {
            return Err(ConfigError::new(format!("dimension {d} must be positive and even")));
        }
        Ok(Self { d, n_signal: d / 2, n_noise: d / 2, ..self.clone() })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.d == 0 {
            return Err(ConfigError::new("d must be positive"));
        }
        if self.n_signal + self.n_noise != self.d {
            return Err(ConfigError::new(format!(
                "n_signal ({}) + n_noise ({}) must equal d ({})",
                self.n_signal, self.n_noise, self.d
            )));
        }
        if self.num_arms < 2 {
            return Err(ConfigError::new("num_arms must be at least 2"));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(ConfigError::new("noise_scale must be finite and non-negative"));
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<BatchGrid, ConfigError> {
        uniform_grid(self.horizon, self.num_batches)
    }

    pub fn relevant_set(&self) -> Vec<usize> {
        (0..self.n_signal).collect()
    }
}

/// Hidden environment: per-arm coefficients and the relevant feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct Instance<F> {
    /// One row per arm.
    pub theta: Vec<Vector<F>>,
    pub relevant_set: Vec<usize>,
    #[serde(rename = "s")]
    pub noise_scale: F,
}

pub fn generate_instance<F: Real>(config: &EnvironmentConfig, rng: &mut RngStream) -> Instance<F> {
    let theta = (0..config.num_arms)
        .map(|_| {
            let mut row = Vector::zeros(config.d);
            for x in row.iter_mut().take(config.n_signal) {
                *x = F::of(rng.standard_normal());
            }
            row
        })
        .collect();
    Instance { theta, relevant_set: config.relevant_set(), noise_scale: F::of(config.noise_scale) }
}

pub fn sample_context<F: Real>(config: &EnvironmentConfig, rng: &mut RngStream) -> Vector<F> {
    Vector::from((0..config.d).map(|_| F::of(rng.standard_normal())).collect::<Vec<_>>())
}

impl<F: Real> Instance<F> {
    pub fn num_arms(&self) -> usize {
        self.theta.len()
    }

    pub fn dim(&self) -> usize {
        self.theta.first().map_or(0, |t| t.dim())
    }

    /// μ(A, X) = Xᵀθ_A.
    pub fn mean_reward(&self, arm: usize, context: &[F]) -> F {
        dot(&self.theta[arm], context)
    }

    pub fn sample_reward(&self, arm: usize, context: &[F], rng: &mut RngStream) -> F {
        let mu = self.mean_reward(arm, context);
        if self.noise_scale == F::zero() {
            return mu;
        }
        mu + self.noise_scale * F::of(rng.standard_normal())
    }

    /// Arg-max of the mean reward; ties go to the lowest index.
    pub fn optimal_action(&self, context: &[F]) -> usize {
        argmax_lowest((0..self.num_arms()).map(|a| self.mean_reward(a, context)))
    }

    /// Plays `arm` at `round`, drawing the reward from `rng`.
    pub fn interact(&self, round: usize, context: Vector<F>, arm: usize, rng: &mut RngStream) -> InteractionRecord<F> {
        let reward = self.sample_reward(arm, &context, rng);
        let optimal = self.optimal_action(&context);
        InteractionRecord {
            round,
            optimal_mean: self.mean_reward(optimal, &context),
            chosen_mean: self.mean_reward(arm, &context),
            context,
            action: arm,
            reward,
        }
    }

    /// FNV-1a over the bit patterns of θ; equal across algorithms sharing a replication.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for x in self.theta.iter().flat_map(|t| t.iter()) {
            for b in x.f64().to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

/// Index of the largest value, lowest index among ties.
pub fn argmax_lowest<F: Real>(values: impl IntoIterator<Item = F>) -> usize {
    let mut best = 0;
    let mut best_val = F::neg_infinity();
    for (i, v) in values.into_iter().enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Batch boundaries `0 = t_0 < t_1 < … < t_M = n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchGrid {
    boundaries: Vec<usize>,
}

impl BatchGrid {
    pub fn new(boundaries: Vec<usize>) -> Result<Self, ConfigError> {
        if boundaries.len() < 2 || boundaries[0] != 0 {
            return Err(ConfigError::new("grid must start at 0 and contain at least one batch"));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::new("grid boundaries must be strictly increasing"));
        }
        Ok(Self { boundaries })
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn num_batches(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn horizon(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    /// Zero-based round indices of each batch.
    pub fn batches(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.boundaries.windows(2).map(|w| w[0]..w[1])
    }
}

pub fn uniform_grid(n: usize, m: usize) -> Result<BatchGrid, ConfigError> {
    if m == 0 || n == 0 || n % m != 0 {
        return Err(ConfigError::new(format!("horizon {n} is not divisible into {m} equal batches")));
    }
    BatchGrid::new((0..=m).map(|i| i * n / m).collect())
}

/// One round of interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct InteractionRecord<F> {
    pub round: usize,
    pub context: Vector<F>,
    pub action: usize,
    pub reward: F,
    pub optimal_mean: F,
    pub chosen_mean: F,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRole;

    fn rng(role: StreamRole) -> RngStream {
        RngStream::new(11, 0, role)
    }

    #[test]
    fn instance_sparsity() {
        let cfg = EnvironmentConfig::default();
        let inst: Instance<f64> = generate_instance(&cfg, &mut rng(StreamRole::Instance));
        assert_eq!(inst.num_arms(), 5);
        for row in &inst.theta {
            assert!(row[10..].iter().all(|&x| x == 0.0));
            assert!(row[..10].iter().all(|&x| x != 0.0));
        }
        assert_eq!(inst.relevant_set, (0..10).collect::<Vec<_>>());

        let none = EnvironmentConfig { n_signal: 0, n_noise: 20, ..cfg.clone() };
        let inst: Instance<f64> = generate_instance(&none, &mut rng(StreamRole::Instance));
        assert!(inst.theta.iter().all(|t| t.iter().all(|&x| x == 0.0)));

        let dense = EnvironmentConfig { n_signal: 20, n_noise: 0, ..cfg };
        let inst: Instance<f64> = generate_instance(&dense, &mut rng(StreamRole::Instance));
        assert!(inst.theta.iter().all(|t| t.iter().all(|&x| x != 0.0)));
    }

    #[test]
    fn mean_reward_cases() {
        let cfg = EnvironmentConfig { d: 5, n_signal: 5, n_noise: 0, ..Default::default() };
        let inst: Instance<f64> = generate_instance(&cfg, &mut rng(StreamRole::Instance));
        let x: Vector<f64> = sample_context(&cfg, &mut rng(StreamRole::Contexts));
        let mut oracle = 0.0;
        for i in 0..5 {
            oracle += inst.theta[2][i] * x[i];
        }
        assert!((inst.mean_reward(2, &x) - oracle).abs() < 1e-14);
        assert_eq!(inst.mean_reward(1, &Vector::basis(5, 3)), inst.theta[1][3]);
        let zero = Instance { theta: vec![Vector::zeros(5); 2], relevant_set: vec![], noise_scale: 0.0 };
        assert_eq!(zero.mean_reward(0, &x), 0.0);
        assert_eq!(zero.optimal_action(&x), 0);
    }

    #[test]
    fn optimal_action_matches_scan() {
        let cfg = EnvironmentConfig::default();
        let inst: Instance<f64> = generate_instance(&cfg, &mut rng(StreamRole::Instance));
        let mut r = rng(StreamRole::Contexts);
        for _ in 0..200 {
            let x: Vector<f64> = sample_context(&cfg, &mut r);
            let means: Vec<f64> = (0..5).map(|a| inst.mean_reward(a, &x)).collect();
            let best = inst.optimal_action(&x);
            assert!(means.iter().all(|&m| m <= means[best]));
        }
        let single = Instance { theta: vec![Vector::from(vec![1.0, 2.0])], relevant_set: vec![0, 1], noise_scale: 1.0 };
        assert_eq!(single.optimal_action(&[3.0, -4.0]), 0);
    }

    #[test]
    fn noiseless_and_determinism() {
        let cfg = EnvironmentConfig { noise_scale: 0.0, ..Default::default() };
        let inst: Instance<f64> = generate_instance(&cfg, &mut rng(StreamRole::Instance));
        let x: Vector<f64> = sample_context(&cfg, &mut rng(StreamRole::Contexts));
        assert_eq!(inst.sample_reward(1, &x, &mut rng(StreamRole::Rewards)), inst.mean_reward(1, &x));

        let noisy: Instance<f64> = generate_instance(&EnvironmentConfig::default(), &mut rng(StreamRole::Instance));
        let a = noisy.sample_reward(1, &x, &mut rng(StreamRole::Rewards));
        let b = noisy.sample_reward(1, &x, &mut rng(StreamRole::Rewards));
        assert_eq!(a, b);
        let y: Vector<f64> = sample_context(&cfg, &mut rng(StreamRole::Contexts));
        assert_eq!(x, y);
    }

    #[test]
    fn irrelevant_coordinates_do_not_matter() {
        let cfg = EnvironmentConfig::default();
        let inst: Instance<f64> = generate_instance(&cfg, &mut rng(StreamRole::Instance));
        let mut r = rng(StreamRole::Contexts);
        for _ in 0..100 {
            let x: Vector<f64> = sample_context(&cfg, &mut r);
            let mut y = x.clone();
            for v in y[10..].iter_mut() {
                *v += 100.0 * r.standard_normal();
            }
            for a in 0..5 {
                assert_eq!(inst.mean_reward(a, &x).to_bits(), inst.mean_reward(a, &y).to_bits());
            }
            assert_eq!(inst.optimal_action(&x), inst.optimal_action(&y));
        }
    }

    #[test]
    fn grids() {
        let g = uniform_grid(20_000, 40).unwrap();
        assert_eq!(g.num_batches(), 40);
        assert!(g.batches().all(|b| b.len() == 500));
        assert_eq!(uniform_grid(10, 1).unwrap().boundaries(), &[0, 10]);
        assert!(uniform_grid(10, 3).is_err());
        assert!(BatchGrid::new(vec![0, 5, 5]).is_err());
        assert!(BatchGrid::new(vec![1, 5]).is_err());
        assert_eq!(BatchGrid::new(vec![0, 3, 10]).unwrap().batches().collect::<Vec<_>>(), vec![0..3, 3..10]);
    }

    #[test]
    fn config_validation() {
        assert!(EnvironmentConfig::default().validate().is_ok());
        let bad = EnvironmentConfig { n_noise: 9, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = EnvironmentConfig { num_arms: 1, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(EnvironmentConfig::default().with_dimension(7).is_err());
        let d40 = EnvironmentConfig::default().with_dimension(40).unwrap();
        assert_eq!((d40.n_signal, d40.n_noise), (20, 20));
    }

    #[test]
    fn instance_json_shape() {
        let inst = Instance { theta: vec![Vector::from(vec![1.5, 0.0]), Vector::from(vec![-2.0, 0.0])], relevant_set: vec![0], noise_scale: 10.0 };
        let json = serde_json::to_value(&inst).unwrap();
        assert_eq!(json, serde_json::json!({"theta": [[1.5, 0.0], [-2.0, 0.0]], "relevant_set": [0], "s": 10.0}));
        let back: Instance<f64> = serde_json::from_value(json).unwrap();
        assert_eq!(back, inst);
    }
}
