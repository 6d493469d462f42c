//! Penalized least squares by cyclic coordinate descent.
//!
//! Objective for one arm with `n` rows:
//! `(1/n) Σ (y − xᵀθ)² + Σ_j P(θ_j)` with `P` either `λ|θ|` or the minimax
//! concave penalty. No 1/2 factor, so each coordinate problem is
//! `a θ² − 2 c θ + P(θ)` with `a = (1/n) Σ x_j²` and
//! `c = (1/n) Σ x_j r^{(j)}`.

mod greedy;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::linalg::Vector;
use crate::scalar::Real;

pub use greedy::{greedy_choose, greedy_decide, greedy_update, Estimator, GreedyPolicy, RegressionData};

/// `sign(z) · max(|z| − γ, 0)`.
pub fn soft_threshold<F: Real>(z: F, gamma: F) -> F {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        F::zero()
    }
}

/// `∫₀^{|θ|} max(0, λ − t/a) dt`.
pub fn mcp_penalty<F: Real>(theta: F, lambda: F, a: F) -> F {
    let t = theta.abs();
    if t <= a * lambda {
        lambda * t - t * t / (F::of(2.0) * a)
    } else {
        a * lambda * lambda / F::of(2.0)
    }
}

/// A separable penalty with an exact one-dimensional minimizer.
pub trait CoordinatePenalty<F: Real> {
    fn value(&self, theta: F) -> F;

    /// Minimizer of `a θ² − 2cθ + P(θ)` for `a > 0`.
    fn minimize(&self, a: F, c: F) -> F;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1<F> {
    pub lambda: F,
}

impl<F: Real> CoordinatePenalty<F> for L1<F> {
    fn value(&self, theta: F) -> F {
        self.lambda * theta.abs()
    }

    fn minimize(&self, a: F, c: F) -> F {
        // S(2c, λ) / 2a
        soft_threshold(c, self.lambda / F::of(2.0)) / a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mcp<F> {
    pub lambda: F,
    pub a: F,
}

impl<F: Real> Mcp<F> {
    fn univariate(&self, a: F, c: F, theta: F) -> F {
        a * theta * theta - F::of(2.0) * c * theta + self.value(theta)
    }
}

impl<F: Real> CoordinatePenalty<F> for Mcp<F> {
    fn value(&self, theta: F) -> F {
        mcp_penalty(theta, self.lambda, self.a)
    }

    fn minimize(&self, a: F, c: F) -> F {
        let knot = self.a * self.lambda;
        let two = F::of(2.0);
        // Inside the knot the problem is (a − 1/2γ)θ² − 2cθ + λ|θ|; outside it is
        // the plain quadratic. Candidates: each piece's constrained minimizer,
        // the knots and zero. The objective is continuous, so the best
        // candidate is the global minimizer.
        let mut candidates = [F::zero(), knot, -knot, F::zero(), F::zero()];
        let inner_curv = a - F::one() / (two * self.a);
        if inner_curv > F::zero() {
            let t = soft_threshold(c, self.lambda / two) / inner_curv;
            candidates[3] = t.max(-knot).min(knot);
        }
        let outer = c / a;
        candidates[4] = if outer.abs() >= knot { outer } else { knot.copysign(c) };
        let mut best = F::zero();
        let mut best_val = self.univariate(a, c, best);
        for &t in &candidates[1..] {
            let val = self.univariate(a, c, t);
            if val < best_val || (val == best_val && t.abs() < best.abs()) {
                best = t;
                best_val = val;
            }
        }
        best
    }
}

/// Rows observed for one arm, stored by column.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct ArmData<F> {
    columns: Vec<Vec<F>>,
    responses: Vec<F>,
    sq_norms: Vec<F>,
}

impl<F: Real> ArmData<F> {
    pub fn new(d: usize) -> Self {
        Self { columns: vec![Vec::new(); d], responses: Vec::new(), sq_norms: vec![F::zero(); d] }
    }

    pub fn from_rows(rows: &[Vec<F>], responses: &[F]) -> Self {
        let d = rows.first().map_or(0, |r| r.len());
        let mut data = Self::new(d);
        for (x, &y) in rows.iter().zip(responses) {
            data.push(x, y);
        }
        data
    }

    pub fn push(&mut self, x: &[F], y: F) {
        debug_assert_eq!(x.len(), self.columns.len());
        for ((col, sq), &xi) in self.columns.iter_mut().zip(&mut self.sq_norms).zip(x) {
            col.push(xi);
            *sq += xi * xi;
        }
        self.responses.push(y);
    }

    pub fn rows(&self) -> usize {
        self.responses.len()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[F] {
        &self.columns[j]
    }

    pub fn responses(&self) -> &[F] {
        &self.responses
    }

    pub fn residuals(&self, theta: &[F]) -> Vec<F> {
        let mut r = self.responses.clone();
        for (col, &t) in self.columns.iter().zip(theta) {
            if t != F::zero() {
                for (ri, &x) in r.iter_mut().zip(col) {
                    *ri -= x * t;
                }
            }
        }
        r
    }

    /// `(1/n) ‖y − Xθ‖² + Σ P(θ_j)`.
    pub fn objective<P: CoordinatePenalty<F>>(&self, theta: &[F], penalty: &P) -> F {
        let n = F::from_usize(self.rows().max(1)).unwrap();
        let rss: F = self.residuals(theta).iter().map(|&r| r * r).sum();
        rss / n + theta.iter().map(|&t| penalty.value(t)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdSettings {
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for CdSettings {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_sweeps: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdFit<F> {
    pub coefficients: Vector<F>,
    pub sweeps: usize,
    pub converged: bool,
}

/// Cyclic coordinate descent in index order, starting from `warm` (or zero).
/// Stops when a full sweep moves no coefficient by more than the tolerance.
/// Coordinates with an all-zero column are pinned at zero.
pub fn coordinate_descent<F: Real, P: CoordinatePenalty<F>>(
    data: &ArmData<F>,
    penalty: &P,
    settings: CdSettings,
    warm: Option<&[F]>,
) -> CdFit<F> {
    coordinate_descent_inner(data, penalty, settings, warm, None)
}

/// As [`coordinate_descent`], additionally returning the objective after
/// each sweep (first entry: the starting point).
pub fn coordinate_descent_traced<F: Real, P: CoordinatePenalty<F>>(
    data: &ArmData<F>,
    penalty: &P,
    settings: CdSettings,
    warm: Option<&[F]>,
) -> (CdFit<F>, Vec<F>) {
    let mut trace = Vec::new();
    let fit = coordinate_descent_inner(data, penalty, settings, warm, Some(&mut trace));
    (fit, trace)
}

fn coordinate_descent_inner<F: Real, P: CoordinatePenalty<F>>(
    data: &ArmData<F>,
    penalty: &P,
    settings: CdSettings,
    warm: Option<&[F]>,
    mut trace: Option<&mut Vec<F>>,
) -> CdFit<F> {
    let d = data.dim();
    let mut theta = match warm {
        Some(w) => w.to_vec(),
        None => vec![F::zero(); d],
    };
    let n = data.rows();
    if n == 0 {
        return CdFit { coefficients: Vector::zeros(d), sweeps: 0, converged: true };
    }
    let inv_n = F::one() / F::from_usize(n).unwrap();
    for (t, &sq) in theta.iter_mut().zip(&data.sq_norms) {
        if sq == F::zero() {
            *t = F::zero();
        }
    }
    let mut resid = data.residuals(&theta);
    let tol = F::of(settings.tolerance);
    let slack = F::of(1e-10).max(F::epsilon() * F::of(1000.0));
    let mut prev_obj = data.objective(&theta, penalty);
    if let Some(t) = trace.as_deref_mut() {
        t.push(prev_obj);
    }
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < settings.max_sweeps.max(1) {
        sweeps += 1;
        let mut max_change = F::zero();
        for j in 0..d {
            let sq = data.sq_norms[j];
            if sq == F::zero() {
                continue;
            }
            let col = &data.columns[j];
            let a = sq * inv_n;
            let xr = col.iter().zip(&resid).fold(F::zero(), |s, (&x, &r)| s + x * r);
            let c = xr * inv_n + a * theta[j];
            let new = penalty.minimize(a, c);
            let delta = new - theta[j];
            if delta != F::zero() {
                for (r, &x) in resid.iter_mut().zip(col) {
                    *r -= x * delta;
                }
                theta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if cfg!(debug_assertions) || trace.is_some() {
            let obj = data.objective(&theta, penalty);
            debug_assert!(obj <= prev_obj + slack * (F::one() + prev_obj.abs()), "objective increased: {prev_obj} -> {obj}");
            if let Some(t) = trace.as_deref_mut() {
                t.push(obj);
            }
            prev_obj = obj;
        }
        if max_change <= tol {
            converged = true;
            break;
        }
    }
    CdFit { coefficients: Vector::from(theta), sweeps, converged }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSchedule {
    /// `λ_m = λ₀`.
    Constant,
    /// `λ_m = λ₀ · sqrt(ln(d · t_m) / t_m)`.
    RateShaped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LassoConfig {
    pub lambda_0: f64,
    pub schedule: LambdaSchedule,
    pub cd_tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self { lambda_0: 1.0, schedule: LambdaSchedule::RateShaped, cd_tolerance: 1e-8, max_sweeps: 1000 }
    }
}

impl LassoConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.lambda_0 > 0.0 && self.lambda_0.is_finite()) {
            return Err(ConfigError::new("lasso lambda_0 must be positive"));
        }
        check_cd(self.cd_tolerance, self.max_sweeps)
    }

    /// Penalty after `t_m` total rounds in dimension `d`.
    pub fn lambda_at(&self, d: usize, t_m: usize) -> f64 {
        match self.schedule {
            LambdaSchedule::Constant => self.lambda_0,
            LambdaSchedule::RateShaped => {
                let t = t_m.max(1) as f64;
                let log = ((d.max(1) as f64) * t).ln().max(f64::MIN_POSITIVE);
                self.lambda_0 * (log / t).sqrt()
            }
        }
    }

    pub fn settings(&self) -> CdSettings {
        CdSettings { tolerance: self.cd_tolerance, max_sweeps: self.max_sweeps }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McpConfig {
    pub lambda: f64,
    pub a: f64,
    pub cd_tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for McpConfig {
    fn default() -> Self {
        Self { lambda: 0.05, a: 3.0, cd_tolerance: 1e-8, max_sweeps: 1000 }
    }
}

impl McpConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(ConfigError::new("mcp lambda must be positive"));
        }
        if !(self.a > 1.0 && self.a.is_finite()) {
            return Err(ConfigError::new(format!("mcp concavity a must exceed 1, got {}", self.a)));
        }
        check_cd(self.cd_tolerance, self.max_sweeps)
    }

    pub fn settings(&self) -> CdSettings {
        CdSettings { tolerance: self.cd_tolerance, max_sweeps: self.max_sweeps }
    }
}

fn check_cd(tol: f64, max_sweeps: usize) -> Result<(), ConfigError> {
    if !(tol > 0.0) || max_sweeps < 1 {
        return Err(ConfigError::new("cd_tolerance must be positive and max_sweeps at least 1"));
    }
    Ok(())
}

pub fn lasso_cd<F: Real>(data: &ArmData<F>, lambda: F, config: &LassoConfig) -> Vector<F> {
    coordinate_descent(data, &L1 { lambda }, config.settings(), None).coefficients
}

pub fn mcp_cd<F: Real>(data: &ArmData<F>, config: &McpConfig) -> Vector<F> {
    coordinate_descent(data, &Mcp { lambda: F::of(config.lambda), a: F::of(config.a) }, config.settings(), None).coefficients
}
