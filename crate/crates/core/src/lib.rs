//! Simulation library for batched sparse contextual linear bandits.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix it to `f64`, which is what the experiment harness uses.

pub mod environment;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod normal;
pub mod policies;
pub mod rng;
pub mod scalar;
pub mod sparse;

pub use error::{ConfigError, Error, Result};
pub use policies::{Policy, PolicyConfig, PolicyKind};
pub use rng::{RngStream, StreamRole};
pub use scalar::Real;

pub type Vector = linalg::Vector<f64>;
pub type SpdMatrix = linalg::SpdMatrix<f64>;
pub type Instance = environment::Instance<f64>;
pub type InteractionRecord = environment::InteractionRecord<f64>;
pub type PosteriorState = policies::PosteriorState<f64>;
pub type ThompsonPolicy = policies::ThompsonPolicy<f64>;
pub type GreedyPolicy = sparse::GreedyPolicy<f64>;
pub type DynPolicy = Box<dyn Policy<f64>>;
