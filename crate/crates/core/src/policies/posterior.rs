//! Per-arm Gaussian posterior `N(θ̂_A, v² B_A⁻¹)` with
//! `B_A = I + Σ X Xᵀ` and `θ̂_A = B_A⁻¹ Σ X R` over that arm's rounds.

use serde::{Deserialize, Serialize};

use crate::environment::InteractionRecord;
use crate::linalg::{cholesky, LinalgError, SpdMatrix, Vector};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct ArmPosterior<F> {
    pub gram: SpdMatrix<F>,
    /// Tracked by Sherman–Morrison between boundaries, refactored from `gram`
    /// at every boundary.
    pub gram_inverse: SpdMatrix<F>,
    pub weighted_sum: Vector<F>,
    pub mean: Vector<F>,
    pub count: usize,
    #[serde(skip)]
    dirty: bool,
}

impl<F: Real> ArmPosterior<F> {
    pub fn new(d: usize) -> Self {
        Self {
            gram: SpdMatrix::identity(d),
            gram_inverse: SpdMatrix::identity(d),
            weighted_sum: Vector::zeros(d),
            mean: Vector::zeros(d),
            count: 0,
            dirty: false,
        }
    }

    /// Posterior from an explicit Gram matrix and `Σ X R`.
    pub fn from_parts(gram: SpdMatrix<F>, weighted_sum: Vector<F>, count: usize) -> Result<Self, LinalgError> {
        let d = gram.dim();
        let mut arm = Self { gram, gram_inverse: SpdMatrix::identity(d), weighted_sum, mean: Vector::zeros(d), count, dirty: true };
        arm.refresh()?;
        Ok(arm)
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    fn observe(&mut self, x: &[F], reward: F) {
        self.gram.add_outer(x);
        self.gram_inverse.sherman_morrison(x);
        for (b, &xi) in self.weighted_sum.iter_mut().zip(x) {
            *b += xi * reward;
        }
        self.count += 1;
        self.dirty = true;
    }

    fn refresh(&mut self) -> Result<(), LinalgError> {
        if !self.dirty {
            return Ok(());
        }
        let factor = cholesky(&self.gram)?;
        self.gram_inverse = factor.inverse();
        self.mean = factor.solve(&self.weighted_sum)?;
        self.dirty = false;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct PosteriorState<F> {
    pub arms: Vec<ArmPosterior<F>>,
}

impl<F: Real> PosteriorState<F> {
    /// Prior state: `B_A = I`, `θ̂_A = 0`.
    pub fn new(d: usize, num_arms: usize) -> Self {
        Self { arms: (0..num_arms).map(|_| ArmPosterior::new(d)).collect() }
    }

    pub fn from_arms(arms: Vec<ArmPosterior<F>>) -> Self {
        Self { arms }
    }

    pub fn dim(&self) -> usize {
        self.arms.first().map_or(0, |a| a.dim())
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    /// Adds one observation. The mean is stale until [`Self::refresh`].
    pub fn observe(&mut self, arm: usize, x: &[F], reward: F) -> Result<(), LinalgError> {
        if x.len() != self.dim() {
            return Err(LinalgError::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        self.arms[arm].observe(x, reward);
        Ok(())
    }

    /// Recomputes `B⁻¹` and `θ̂` from `B` for every arm touched since the last refresh.
    pub fn refresh(&mut self) -> Result<(), LinalgError> {
        self.arms.iter_mut().try_for_each(|a| a.refresh())
    }

    /// Ingests a whole batch and refreshes.
    pub fn ingest_batch(&mut self, records: &[InteractionRecord<F>]) -> Result<(), LinalgError> {
        for r in records {
            self.observe(r.action, &r.context, r.reward)?;
        }
        self.refresh()
    }
}
