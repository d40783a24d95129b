//! Scalar abstraction for the numeric core.
//!
//! Everything downstream of feature extraction (datasets, trees, metrics)
//! is written against this trait so the same code runs at `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Display
    + Debug
    + Copy
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar")
    }

    fn from_f64_(v: f64) -> Self {
        Self::from_f64(v).expect("f64 representable in scalar")
    }

    fn to_f64_(self) -> f64 {
        self.to_f64().expect("scalar representable in f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Display
        + Debug
        + Copy
        + Send
        + Sync
        + Serialize
        + DeserializeOwned
        + 'static
{
}
