//! Greedy batched policies refit on the cumulative history at each boundary
//! (LBGL with the lasso, MCPB with MCP).

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{coordinate_descent, ArmData, LassoConfig, McpConfig, Mcp, L1};
use crate::environment::InteractionRecord;
use crate::error::Result;
use crate::linalg::{dot, Vector};
use crate::policies::{argmax_tied, Policy, PolicyDraw, PolicyKind, TieRule};
use crate::rng::RngStream;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Lasso(LassoConfig),
    Mcp(McpConfig),
}

/// Per-arm design and response history plus the total round count `t_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct RegressionData<F> {
    pub arms: Vec<ArmData<F>>,
    pub total_rounds: usize,
}

impl<F: Real> RegressionData<F> {
    pub fn new(d: usize, num_arms: usize) -> Self {
        Self { arms: (0..num_arms).map(|_| ArmData::new(d)).collect(), total_rounds: 0 }
    }

    pub fn extend(&mut self, records: &[InteractionRecord<F>]) {
        for r in records {
            self.arms[r.action].push(&r.context, r.reward);
        }
        self.total_rounds += records.len();
    }

    pub fn dim(&self) -> usize {
        self.arms.first().map_or(0, |a| a.dim())
    }
}

/// Refits every arm on its own rows. Arms without data get `θ̂ = 0`.
///
/// The squared loss is scaled by `1/t_m` (all rounds so far), not by the arm's
/// own row count `n`. Since `(1/t_m)·RSS + P = (n/t_m)·((1/n)·RSS + (t_m/n)·P)`,
/// each arm is fitted as a per-row problem with the penalty inflated by
/// `t_m/n`; for MCP that is `λ·t_m/n` with concavity `a·n/t_m`.
pub fn greedy_update<F: Real>(data: &RegressionData<F>, estimator: &Estimator, warm: Option<&[Vector<F>]>) -> Vec<Vector<F>> {
    let d = data.dim();
    data.arms
        .iter()
        .enumerate()
        .map(|(a, arm)| {
            if arm.rows() == 0 {
                return Vector::zeros(d);
            }
            let start = warm.map(|w| &w[a][..]);
            let inflate = data.total_rounds.max(arm.rows()) as f64 / arm.rows() as f64;
            match estimator {
                Estimator::Lasso(cfg) => {
                    let lambda = F::of(cfg.lambda_at(d, data.total_rounds) * inflate);
                    coordinate_descent(arm, &L1 { lambda }, cfg.settings(), start).coefficients
                }
                Estimator::Mcp(cfg) => {
                    let pen = Mcp { lambda: F::of(cfg.lambda * inflate), a: F::of(cfg.a / inflate) };
                    coordinate_descent(arm, &pen, cfg.settings(), start).coefficients
                }
            }
        })
        .collect()
}

/// Arg-max of `xᵀθ̂_A`, with exact ties broken uniformly at random by `tie_break ∈ [0, 1)`.
pub fn greedy_decide<F: Real>(coefficients: &[Vector<F>], context: &[F], tie_break: f64) -> usize {
    argmax_tied(coefficients.iter().map(|t| dot(t, context)), TieRule::Uniform, tie_break)
}

pub fn greedy_choose<F: Real>(coefficients: &[Vector<F>], context: &[F], rng: &mut RngStream) -> usize {
    greedy_decide(coefficients, context, rng.uniform())
}

#[derive(Debug, Clone)]
pub struct GreedyPolicy<F> {
    estimator: Estimator,
    data: RegressionData<F>,
    coefficients: Vec<Vector<F>>,
    batches: usize,
}

impl<F: Real> GreedyPolicy<F> {
    pub fn new(d: usize, num_arms: usize, estimator: Estimator) -> Self {
        Self { estimator, data: RegressionData::new(d, num_arms), coefficients: vec![Vector::zeros(d); num_arms], batches: 0 }
    }

    pub fn lasso(d: usize, num_arms: usize, cfg: LassoConfig) -> Self {
        Self::new(d, num_arms, Estimator::Lasso(cfg))
    }

    pub fn mcp(d: usize, num_arms: usize, cfg: McpConfig) -> Self {
        Self::new(d, num_arms, Estimator::Mcp(cfg))
    }

    pub fn coefficients(&self) -> &[Vector<F>] {
        &self.coefficients
    }

    pub fn data(&self) -> &RegressionData<F> {
        &self.data
    }
}

impl<F: Real> Policy<F> for GreedyPolicy<F> {
    fn kind(&self) -> PolicyKind {
        match self.estimator {
            Estimator::Lasso(_) => PolicyKind::Lbgl,
            Estimator::Mcp(_) => PolicyKind::Mcpb,
        }
    }

    fn num_arms(&self) -> usize {
        self.coefficients.len()
    }

    fn new_draw(&self) -> PolicyDraw<F> {
        PolicyDraw { coefficients: Vec::new(), tie_break: 0.0 }
    }

    fn draw(&self, rng: &mut RngStream, out: &mut PolicyDraw<F>) {
        out.tie_break = rng.uniform();
    }

    fn decide(&self, draw: &PolicyDraw<F>, context: &[F]) -> usize {
        greedy_decide(&self.coefficients, context, draw.tie_break)
    }

    fn end_batch(&mut self, records: &[InteractionRecord<F>]) -> Result<()> {
        self.data.extend(records);
        self.batches += 1;
        self.coefficients = greedy_update(&self.data, &self.estimator, Some(&self.coefficients));
        Ok(())
    }

    fn export_state(&self) -> serde_json::Value {
        json!({
            "kind": self.kind(),
            "estimator": self.estimator,
            "batches": self.batches,
            "total_rounds": self.data.total_rounds,
            "counts": self.data.arms.iter().map(|a| a.rows()).collect::<Vec<_>>(),
            "coefficients": self.coefficients.iter().map(|t| t.iter().map(|x| x.f64()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}
