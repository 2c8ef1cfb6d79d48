//! Scalar abstraction for the linear-algebra kernel.

use std::fmt::{Debug, Display};

use num_traits::Float;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the dense kernel is generic over.
///
/// Implemented for `f32` and `f64`; the pipeline modules use the `f64`
/// aliases exported from the crate root.
pub trait Scalar:
    Float + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}
