//! Scalar abstraction for the numeric layer.
//!
//! The polynomial, power-series and map-evaluation code is written against
//! [`Real`] so it can be instantiated at `f32` or `f64`. The analysis modules
//! (certificates, metrics, one-dimensional pipeline) work in `f64` because
//! their tolerances are only meaningful at double precision.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};

pub trait Real:
    'static
    + Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Cx<T> = Complex<T>;
pub type C64 = Complex<f64>;

#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// `re + i*im` for f64 without the generic noise.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// `e^{i theta}`.
#[inline]
pub fn unit<T: Real>(theta: T) -> Cx<T> {
    Complex::new(theta.cos(), theta.sin())
}
