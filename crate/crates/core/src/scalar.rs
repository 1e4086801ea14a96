//! Scalar abstraction shared by every numeric routine.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;
use std::fmt::{Debug, Display};
use std::iter::Sum;

pub use num_complex::Complex;

/// Floating point type the toolkit can run on (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant.
    fn lit(x: f64) -> Self;

    /// Converts a count or index.
    fn idx(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
}

/// Modified Bessel function of the first kind, order zero.
///
/// Power series; converges for every argument the kernels use (|x| < 50).
pub fn bessel_i0<T: Real>(x: T) -> T {
    let q = (x * x) / T::lit(4.0);
    let mut term = T::one();
    let mut sum = T::one();
    let mut k = 1usize;
    loop {
        term = term * q / T::idx(k * k);
        sum += term;
        if term <= sum * T::epsilon() || k > 500 {
            break;
        }
        k += 1;
    }
    sum
}

/// Wraps an angle into [-π, π).
#[inline]
pub fn wrap_pi<T: Real>(w: T) -> T {
    let two_pi = T::TAU();
    let mut v = w - two_pi * ((w + T::PI()) / two_pi).floor();
    if v >= T::PI() {
        v -= two_pi;
    }
    if v < -T::PI() {
        v = -T::PI();
    }
    v
}

/// Wraps an angle into [0, 2π).
#[inline]
pub fn wrap_two_pi<T: Real>(w: T) -> T {
    let two_pi = T::TAU();
    let mut v = w - two_pi * (w / two_pi).floor();
    if v >= two_pi {
        v -= two_pi;
    }
    if v < T::zero() {
        v = T::zero();
    }
    v
}
