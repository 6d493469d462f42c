//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
///
/// Everything random is drawn in `f64` and narrowed with [`Real::of`], so a
/// given RNG stream produces the same decisions (up to rounding) at either
/// precision.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant or sample into this precision.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real")
    }

    /// Widens to `f64` for reporting.
    fn f64(self) -> f64 {
        self.to_f64().expect("Real always widens to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
