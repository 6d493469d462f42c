//! Batched linear Thompson sampling and its two variants: sequential
//! feature inclusion (OBSI) and the relevant-features-only oracle.

use serde_json::json;

use super::{argmax_tied, Policy, PolicyDraw, PolicyKind, PosteriorState, TieRule};
use crate::environment::InteractionRecord;
use crate::error::{ConfigError, Result};
use crate::linalg::{LinalgError, MvnSampler};
use crate::normal::std_normal_quantile_f64;
use crate::rng::RngStream;
use crate::scalar::Real;

/// Pooled evidence that feature `i` matters:
/// `Σ_A |θ̂_A^i| / sqrt(Σ_A v² (B_A⁻¹)_ii)`.
pub fn inclusion_statistic<F: Real>(state: &PosteriorState<F>, v: F, feature: usize) -> F {
    let (abs_sum, var_sum) = state.arms.iter().fold((F::zero(), F::zero()), |(s, w), arm| {
        (s + arm.mean[feature].abs(), w + v * v * arm.gram_inverse.get(feature, feature))
    });
    abs_sum / var_sum.sqrt()
}

/// `mask[i]` is true iff the inclusion statistic strictly exceeds Φ⁻¹(alpha).
pub fn obsi_inclusion_mask<F: Real>(state: &PosteriorState<F>, v: F, alpha: f64) -> Result<Vec<bool>> {
    let threshold = F::of(std_normal_quantile_f64(alpha)?);
    Ok((0..state.dim()).map(|i| inclusion_statistic(state, v, i) > threshold).collect())
}

/// Decision state frozen at a batch boundary.
#[derive(Debug, Clone)]
pub struct PolicySnapshot<F> {
    samplers: Vec<MvnSampler<F>>,
    mask: Option<Vec<bool>>,
}

impl<F: Real> PolicySnapshot<F> {
    fn freeze(state: &PosteriorState<F>, v: F, mask: Option<Vec<bool>>) -> std::result::Result<Self, LinalgError> {
        let samplers =
            state.arms.iter().map(|arm| MvnSampler::from_precision(&arm.mean, &arm.gram, v)).collect::<std::result::Result<_, _>>()?;
        Ok(Self { samplers, mask })
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }
}

#[derive(Debug, Clone)]
pub struct ThompsonPolicy<F> {
    kind: PolicyKind,
    v: F,
    alpha: Option<f64>,
    tie_rule: TieRule,
    /// Oracle only: the context coordinates the model sees.
    projection: Option<Vec<usize>>,
    posterior: PosteriorState<F>,
    snapshot: PolicySnapshot<F>,
}

impl<F: Real> ThompsonPolicy<F> {
    fn with(kind: PolicyKind, model_dim: usize, num_arms: usize, v: F, alpha: Option<f64>, projection: Option<Vec<usize>>) -> Result<Self> {
        if !(v > F::zero()) {
            return Err(ConfigError::new("posterior scale v must be positive").into());
        }
        let posterior = PosteriorState::new(model_dim, num_arms);
        let mask = match alpha {
            Some(a) => Some(obsi_inclusion_mask(&posterior, v, a)?),
            None => None,
        };
        let snapshot = PolicySnapshot::freeze(&posterior, v, mask)?;
        Ok(Self { kind, v, alpha, tie_rule: TieRule::Lowest, projection, posterior, snapshot })
    }

    pub fn blts(d: usize, num_arms: usize, v: F) -> Result<Self> {
        Self::with(PolicyKind::Blts, d, num_arms, v, None, None)
    }

    pub fn obsi(d: usize, num_arms: usize, v: F, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ConfigError::new(format!("alpha must lie in (0, 1), got {alpha}")).into());
        }
        Ok(Self::with(PolicyKind::Obsi, d, num_arms, v, Some(alpha), None)?.with_tie_rule(TieRule::Uniform))
    }

    /// Thompson sampling on `relevant_set` only. With an empty set every
    /// score ties and arm 0 is always chosen.
    pub fn oracle(d: usize, num_arms: usize, v: F, relevant_set: Vec<usize>) -> Result<Self> {
        if relevant_set.iter().any(|&i| i >= d) {
            return Err(ConfigError::new("relevant feature index out of range").into());
        }
        Self::with(PolicyKind::Oracle, relevant_set.len(), num_arms, v, None, Some(relevant_set))
    }

    pub fn with_tie_rule(mut self, rule: TieRule) -> Self {
        self.tie_rule = rule;
        self
    }

    pub fn tie_rule(&self) -> TieRule {
        self.tie_rule
    }

    pub fn posterior(&self) -> &PosteriorState<F> {
        &self.posterior
    }

    pub fn snapshot(&self) -> &PolicySnapshot<F> {
        &self.snapshot
    }

    fn model_dim(&self) -> usize {
        self.posterior.dim()
    }

    fn score(&self, theta: &[F], context: &[F]) -> F {
        match (&self.projection, &self.snapshot.mask) {
            (Some(proj), _) => proj.iter().zip(theta).fold(F::zero(), |s, (&i, &t)| s + context[i] * t),
            (None, Some(mask)) => {
                theta.iter().zip(context).zip(mask).fold(F::zero(), |s, ((&t, &x), &keep)| if keep { s + x * t } else { s })
            }
            (None, None) => theta.iter().zip(context).fold(F::zero(), |s, (&t, &x)| s + x * t),
        }
    }
}

impl<F: Real> Policy<F> for ThompsonPolicy<F> {
    fn kind(&self) -> PolicyKind {
        self.kind
    }

    fn num_arms(&self) -> usize {
        self.posterior.num_arms()
    }

    fn new_draw(&self) -> PolicyDraw<F> {
        PolicyDraw { coefficients: vec![F::zero(); self.num_arms() * self.model_dim()], tie_break: 0.0 }
    }

    fn draw(&self, rng: &mut RngStream, out: &mut PolicyDraw<F>) {
        let d = self.model_dim();
        if d > 0 {
            for (sampler, chunk) in self.snapshot.samplers.iter().zip(out.coefficients.chunks_exact_mut(d)) {
                sampler.sample_into(rng, chunk);
            }
        }
        out.tie_break = rng.uniform();
    }

    fn decide(&self, draw: &PolicyDraw<F>, context: &[F]) -> usize {
        let d = self.model_dim();
        if d == 0 {
            return argmax_tied(std::iter::repeat_n(F::zero(), self.num_arms()), self.tie_rule, draw.tie_break);
        }
        argmax_tied(draw.coefficients.chunks_exact(d).map(|theta| self.score(theta, context)), self.tie_rule, draw.tie_break)
    }

    fn end_batch(&mut self, records: &[InteractionRecord<F>]) -> Result<()> {
        match &self.projection {
            Some(proj) => {
                let mut x = vec![F::zero(); proj.len()];
                for r in records {
                    for (xi, &i) in x.iter_mut().zip(proj) {
                        *xi = r.context[i];
                    }
                    self.posterior.observe(r.action, &x, r.reward)?;
                }
                self.posterior.refresh()?;
            }
            None => self.posterior.ingest_batch(records)?,
        }
        let mask = match self.alpha {
            Some(a) => Some(obsi_inclusion_mask(&self.posterior, self.v, a)?),
            None => None,
        };
        self.snapshot = PolicySnapshot::freeze(&self.posterior, self.v, mask)?;
        Ok(())
    }

    fn inclusion_mask(&self) -> Option<&[bool]> {
        self.snapshot.mask()
    }

    fn export_state(&self) -> serde_json::Value {
        let arms: Vec<_> = self
            .posterior
            .arms
            .iter()
            .map(|a| {
                let gram: Vec<Vec<f64>> = (0..a.dim()).map(|i| a.gram.row(i).iter().map(|x| x.f64()).collect()).collect();
                json!({
                    "count": a.count,
                    "gram": gram,
                    "mean": a.mean.iter().map(|x| x.f64()).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "kind": self.kind,
            "v": self.v.f64(),
            "alpha": self.alpha,
            "tie_rule": self.tie_rule,
            "projection": self.projection,
            "mask": self.snapshot.mask,
            "arms": arms,
        })
    }
}
