use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the texture statistics are computed in: f32 or f64.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumCast
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    fn from_usize_lossy(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("usize is representable as a float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 is representable as a float")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
