//! Batched decision policies behind one interface.
//!
//! Every policy acts from state frozen at the last batch boundary: `draw` and
//! `decide` take `&self`, and only `end_batch` mutates. Randomness is split
//! out of the decision (`draw` then `decide`) so one draw can be replayed
//! against several contexts, which is what the paired fairness probe needs.

mod posterior;
mod thompson;

use serde::{Deserialize, Serialize};

use crate::environment::{Instance, InteractionRecord};
use crate::error::{ConfigError, Result};
use crate::linalg::Vector;
use crate::rng::RngStream;
use crate::scalar::Real;
use crate::sparse::{GreedyPolicy, LassoConfig, McpConfig};

pub use posterior::{ArmPosterior, PosteriorState};
pub use thompson::{inclusion_statistic, obsi_inclusion_mask, PolicySnapshot, ThompsonPolicy};

pub const DEFAULT_V: f64 = 10.0;
pub const DEFAULT_ALPHA: f64 = 0.975;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Oracle,
    Blts,
    #[serde(alias = "lgbl")]
    Lbgl,
    Mcpb,
    Obsi,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [PolicyKind::Oracle, PolicyKind::Blts, PolicyKind::Lbgl, PolicyKind::Mcpb, PolicyKind::Obsi];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Oracle => "oracle",
            PolicyKind::Blts => "blts",
            PolicyKind::Lbgl => "lbgl",
            PolicyKind::Mcpb => "mcpb",
            PolicyKind::Obsi => "obsi",
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> std::result::Result<Self, ConfigError> {
        match s {
            "oracle" => Ok(PolicyKind::Oracle),
            "blts" => Ok(PolicyKind::Blts),
            "lbgl" | "lgbl" => Ok(PolicyKind::Lbgl),
            "mcpb" => Ok(PolicyKind::Mcpb),
            "obsi" => Ok(PolicyKind::Obsi),
            other => Err(ConfigError::new(format!("unknown algorithm {other:?}"))),
        }
    }
}

fn default_v() -> f64 {
    DEFAULT_V
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

/// Resolution of exact ties among the best-scoring arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    Lowest,
    /// Uniform among the tied arms, driven by [`PolicyDraw::tie_break`].
    #[default]
    Uniform,
}

/// Index of the maximal score. `u ∈ [0, 1)` selects among exact ties under
/// [`TieRule::Uniform`].
pub fn argmax_tied<F: Real>(scores: impl IntoIterator<Item = F>, rule: TieRule, u: f64) -> usize {
    let scores: Vec<F> = scores.into_iter().collect();
    let best = scores.iter().copied().fold(F::neg_infinity(), F::max);
    let mut tied = scores.iter().enumerate().filter(|(_, &s)| s == best).map(|(i, _)| i);
    match rule {
        TieRule::Lowest => tied.next().unwrap_or(0),
        TieRule::Uniform => {
            let tied: Vec<usize> = tied.collect();
            if tied.is_empty() {
                return 0;
            }
            tied[((u * tied.len() as f64) as usize).min(tied.len() - 1)]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyConfig {
    /// Thompson sampling restricted to the relevant features. When
    /// `relevant_set` is absent the environment's set is used.
    Oracle {
        #[serde(default = "default_v")]
        v: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        relevant_set: Option<Vec<usize>>,
    },
    Blts {
        #[serde(default = "default_v")]
        v: f64,
    },
    Obsi {
        #[serde(default = "default_v")]
        v: f64,
        #[serde(default = "default_alpha")]
        alpha: f64,
        /// Applies while every feature is masked and all scores are zero.
        #[serde(default)]
        tie_rule: TieRule,
    },
    #[serde(alias = "lgbl")]
    Lbgl {
        #[serde(default)]
        lasso: LassoConfig,
    },
    Mcpb {
        #[serde(default)]
        mcp: McpConfig,
    },
}

impl PolicyConfig {
    pub fn default_for(kind: PolicyKind) -> Self {
        match kind {
            PolicyKind::Oracle => PolicyConfig::Oracle { v: DEFAULT_V, relevant_set: None },
            PolicyKind::Blts => PolicyConfig::Blts { v: DEFAULT_V },
            PolicyKind::Obsi => PolicyConfig::Obsi { v: DEFAULT_V, alpha: DEFAULT_ALPHA, tie_rule: TieRule::Uniform },
            PolicyKind::Lbgl => PolicyConfig::Lbgl { lasso: LassoConfig::default() },
            PolicyKind::Mcpb => PolicyConfig::Mcpb { mcp: McpConfig::default() },
        }
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicyConfig::Oracle { .. } => PolicyKind::Oracle,
            PolicyConfig::Blts { .. } => PolicyKind::Blts,
            PolicyConfig::Obsi { .. } => PolicyKind::Obsi,
            PolicyConfig::Lbgl { .. } => PolicyKind::Lbgl,
            PolicyConfig::Mcpb { .. } => PolicyKind::Mcpb,
        }
    }

    pub fn validate(&self, d: usize) -> std::result::Result<(), ConfigError> {
        let check_v = |v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::new(format!("posterior scale v must be positive, got {v}")))
            }
        };
        match self {
            PolicyConfig::Oracle { v, relevant_set } => {
                check_v(*v)?;
                if let Some(set) = relevant_set {
                    if set.iter().any(|&i| i >= d) {
                        return Err(ConfigError::new("oracle relevant_set index out of range"));
                    }
                }
                Ok(())
            }
            PolicyConfig::Blts { v } => check_v(*v),
            PolicyConfig::Obsi { v, alpha, .. } => {
                check_v(*v)?;
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(ConfigError::new(format!("alpha must lie in (0, 1), got {alpha}")));
                }
                Ok(())
            }
            PolicyConfig::Lbgl { lasso } => lasso.validate(),
            PolicyConfig::Mcpb { mcp } => mcp.validate(),
        }
    }

    pub fn build<F: Real>(&self, d: usize, num_arms: usize, relevant_set: &[usize]) -> Result<Box<dyn Policy<F>>> {
        self.validate(d)?;
        Ok(match self {
            PolicyConfig::Oracle { v, relevant_set: own } => {
                let set = own.clone().unwrap_or_else(|| relevant_set.to_vec());
                Box::new(ThompsonPolicy::oracle(d, num_arms, F::of(*v), set)?)
            }
            PolicyConfig::Blts { v } => Box::new(ThompsonPolicy::blts(d, num_arms, F::of(*v))?),
            PolicyConfig::Obsi { v, alpha, tie_rule } => {
                Box::new(ThompsonPolicy::obsi(d, num_arms, F::of(*v), *alpha)?.with_tie_rule(*tie_rule))
            }
            PolicyConfig::Lbgl { lasso } => Box::new(GreedyPolicy::lasso(d, num_arms, lasso.clone())),
            PolicyConfig::Mcpb { mcp } => Box::new(GreedyPolicy::mcp(d, num_arms, mcp.clone())),
        })
    }
}

/// The random part of one decision, reusable across contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDraw<F> {
    /// Sampled coefficients, `num_arms × dim` row-major (empty for greedy policies).
    pub coefficients: Vec<F>,
    /// Uniform on `[0, 1)`, used to break exact score ties.
    pub tie_break: f64,
}

pub trait Policy<F: Real>: Send {
    fn kind(&self) -> PolicyKind;

    fn num_arms(&self) -> usize;

    /// Allocates a draw buffer sized for this policy.
    fn new_draw(&self) -> PolicyDraw<F>;

    fn draw(&self, rng: &mut RngStream, out: &mut PolicyDraw<F>);

    /// Arm chosen for `context` under a fixed draw.
    fn decide(&self, draw: &PolicyDraw<F>, context: &[F]) -> usize;

    fn choose(&self, context: &[F], rng: &mut RngStream) -> usize {
        let mut draw = self.new_draw();
        self.draw(rng, &mut draw);
        self.decide(&draw, context)
    }

    /// Ingests the finished batch and refreezes the decision state.
    fn end_batch(&mut self, records: &[InteractionRecord<F>]) -> Result<()>;

    /// Features currently allowed into decisions, for policies that select them.
    fn inclusion_mask(&self) -> Option<&[bool]> {
        None
    }

    /// Audit view of the frozen state.
    fn export_state(&self) -> serde_json::Value;

    /// Hash of the frozen state.
    fn state_digest(&self) -> u64 {
        let text = self.export_state().to_string();
        text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
    }
}

/// Decides every context of a batch from the frozen state, reusing one draw buffer.
pub fn choose_batch<F: Real>(policy: &dyn Policy<F>, contexts: &[Vector<F>], rng: &mut RngStream) -> Vec<usize> {
    let mut draw = policy.new_draw();
    contexts
        .iter()
        .map(|x| {
            policy.draw(rng, &mut draw);
            policy.decide(&draw, x)
        })
        .collect()
}

/// Plays one batch: actions come from the frozen state, rewards are drawn but
/// not ingested. `first_round` numbers the records.
pub fn policy_run_batch<F: Real>(
    policy: &dyn Policy<F>,
    contexts: Vec<Vector<F>>,
    first_round: usize,
    instance: &Instance<F>,
    policy_rng: &mut RngStream,
    reward_rng: &mut RngStream,
) -> Vec<InteractionRecord<F>> {
    let actions = choose_batch(policy, &contexts, policy_rng);
    contexts
        .into_iter()
        .zip(actions)
        .enumerate()
        .map(|(k, (x, a))| instance.interact(first_round + k, x, a, reward_rng))
        .collect()
}
